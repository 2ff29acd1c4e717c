//! Votes, elections, and the two per-election primitives everything else is
//! built on: the vote-level swap distance and the position frequency matrix.
//!
//! A vote is a strict order over a *prefix* of the candidate set; every
//! candidate not in the prefix sits in the truncated part, mutually
//! indifferent and strictly below every ranked candidate. Complete votes are
//! the special case of an empty truncated part.

use crate::error::Error;
use crate::Result;

/// A possibly top-truncated vote over candidates `0..m`.
///
/// `top` holds the ranked prefix, best first. Candidates absent from `top`
/// are tied with each other below all ranked candidates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vote {
    top: Vec<usize>,
    m: usize,
}

impl Vote {
    /// Builds a vote, checking that every index is in range and distinct.
    pub fn new(top: Vec<usize>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for &c in &top {
            if c >= m {
                return Err(Error::invalid(format!(
                    "vote ranks candidate {c} but only {m} candidates exist"
                )));
            }
            if seen[c] {
                return Err(Error::invalid(format!(
                    "vote ranks candidate {c} more than once"
                )));
            }
            seen[c] = true;
        }
        Ok(Vote { top, m })
    }

    /// Builds a vote without validation. Callers must guarantee the
    /// invariants; intended for generators and for constructing deliberately
    /// broken votes in validation tests.
    pub fn new_unchecked(top: Vec<usize>, m: usize) -> Self {
        Vote { top, m }
    }

    /// A complete vote ranking all of `0..m` in the given order.
    pub fn complete(order: Vec<usize>, m: usize) -> Result<Self> {
        if order.len() != m {
            return Err(Error::invalid(format!(
                "complete vote must rank all {m} candidates, got {}",
                order.len()
            )));
        }
        Vote::new(order, m)
    }

    pub fn top(&self) -> &[usize] {
        &self.top
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of ranked candidates.
    pub fn ranked_len(&self) -> usize {
        self.top.len()
    }

    /// True when no candidate is truncated.
    pub fn is_complete(&self) -> bool {
        self.top.len() == self.m
    }

    /// Writes the position of each candidate into `out` (`out.len() == m`),
    /// using `u32::MAX` for truncated candidates.
    pub(crate) fn fill_positions(&self, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.m);
        out.fill(u32::MAX);
        for (i, &c) in self.top.iter().enumerate() {
            out[c] = i as u32;
        }
    }
}

/// An election: `n` votes over a shared candidate set `0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    m: usize,
    votes: Vec<Vote>,
    label: Option<String>,
    candidate_names: Option<Vec<String>>,
}

impl Election {
    pub fn new(m: usize, votes: Vec<Vote>) -> Result<Self> {
        for (i, v) in votes.iter().enumerate() {
            if v.m() != m {
                return Err(Error::Dimension {
                    context: "election vote candidate count",
                    left: m,
                    right: v.m(),
                })
                .map_err(|e| attach_vote_context(e, i));
            }
        }
        Ok(Election {
            m,
            votes,
            label: None,
            candidate_names: None,
        })
    }

    pub fn new_unchecked(m: usize, votes: Vec<Vote>) -> Self {
        Election {
            m,
            votes,
            label: None,
            candidate_names: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    pub fn with_candidate_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.m {
            return Err(Error::Dimension {
                context: "candidate names",
                left: self.m,
                right: names.len(),
            });
        }
        self.candidate_names = Some(names);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or("election")
    }

    pub fn candidate_names(&self) -> Option<&[String]> {
        self.candidate_names.as_deref()
    }

    /// True when every vote ranks every candidate.
    pub fn is_complete(&self) -> bool {
        self.votes.iter().all(Vote::is_complete)
    }

    /// Distinct votes with multiplicities, sorted lexicographically by ranked
    /// prefix. The canonical form used by the writer and by medoid searches.
    pub fn distinct_votes(&self) -> Vec<(Vote, usize)> {
        let mut sorted: Vec<&Vote> = self.votes.iter().collect();
        sorted.sort();
        let mut out: Vec<(Vote, usize)> = Vec::new();
        for v in sorted {
            match out.last_mut() {
                Some((prev, count)) if prev == v => *count += 1,
                _ => out.push((v.clone(), 1)),
            }
        }
        out
    }

    /// Same election over `new_m >= m` candidates; the added candidates are
    /// ranked by nobody, so they join every truncated part.
    pub fn pad_candidates(&self, new_m: usize) -> Result<Election> {
        if new_m < self.m {
            return Err(Error::invalid(format!(
                "cannot pad from {} candidates down to {new_m}",
                self.m
            )));
        }
        let votes = self
            .votes
            .iter()
            .map(|v| Vote::new_unchecked(v.top.clone(), new_m))
            .collect();
        Ok(Election {
            m: new_m,
            votes,
            label: self.label.clone(),
            candidate_names: None,
        })
    }

    /// Removes the given candidates from every vote and relabels the
    /// survivors to `0..m - deleted`, preserving their relative order.
    pub fn delete_candidates(&self, delete: &[usize]) -> Result<Election> {
        let mut drop = vec![false; self.m];
        for &c in delete {
            if c >= self.m {
                return Err(Error::invalid(format!(
                    "cannot delete candidate {c}: only {} candidates",
                    self.m
                )));
            }
            if drop[c] {
                return Err(Error::invalid(format!("candidate {c} deleted twice")));
            }
            drop[c] = true;
        }
        // relabel[c] = new index of surviving candidate c
        let mut relabel = vec![usize::MAX; self.m];
        let mut next = 0;
        for c in 0..self.m {
            if !drop[c] {
                relabel[c] = next;
                next += 1;
            }
        }
        let votes = self
            .votes
            .iter()
            .map(|v| {
                let top = v
                    .top
                    .iter()
                    .filter(|&&c| !drop[c])
                    .map(|&c| relabel[c])
                    .collect();
                Vote::new_unchecked(top, next)
            })
            .collect();
        Ok(Election {
            m: next,
            votes,
            label: self.label.clone(),
            candidate_names: None,
        })
    }
}

fn attach_vote_context(e: Error, vote: usize) -> Error {
    match e {
        Error::Dimension { context, left, right } => Error::invalid(format!(
            "vote {vote}: {context}: {left} vs {right}"
        )),
        other => other,
    }
}

/// One broken invariant found by [`validate_election`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending vote, when the rule is per-vote.
    pub vote: Option<usize>,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.vote {
            Some(i) => write!(f, "vote {i}: {}", self.rule),
            None => write!(f, "{}", self.rule),
        }
    }
}

/// Re-checks every structural invariant and reports all violations, rather
/// than stopping at the first. Useful on elections built through the
/// unchecked constructors (ingest paths, tests).
pub fn validate_election(e: &Election) -> Vec<Violation> {
    let mut out = Vec::new();
    if e.m == 0 {
        out.push(Violation {
            vote: None,
            rule: "election has zero candidates".into(),
        });
    }
    if let Some(names) = &e.candidate_names {
        if names.len() != e.m {
            out.push(Violation {
                vote: None,
                rule: format!("{} candidate names for {} candidates", names.len(), e.m),
            });
        }
    }
    for (i, v) in e.votes.iter().enumerate() {
        if v.m() != e.m {
            out.push(Violation {
                vote: Some(i),
                rule: format!("vote declares {} candidates, election has {}", v.m(), e.m),
            });
        }
        let mut seen = vec![false; v.m().max(e.m)];
        for &c in v.top() {
            if c >= e.m {
                out.push(Violation {
                    vote: Some(i),
                    rule: format!("ranks candidate {c}, out of range for m={}", e.m),
                });
            } else if seen[c] {
                out.push(Violation {
                    vote: Some(i),
                    rule: format!("ranks candidate {c} more than once"),
                });
            } else {
                seen[c] = true;
            }
        }
    }
    out
}

/// Vote-level swap distance in half-swap units (1 unit = half a swap).
///
/// Each candidate pair contributes 2 units when the votes order it strictly
/// and oppositely, 1 unit when one vote is strict and the other indifferent,
/// and 0 when they agree or are both indifferent. Returning integer units
/// keeps election-level aggregates exact.
///
/// Runs in `O(|U|^2)` where `U` is the set of candidates ranked in at least
/// one of the two votes; pairs entirely outside `U` are tied in both votes
/// and contribute nothing.
pub fn swap_distance(u: &Vote, v: &Vote) -> Result<u64> {
    if u.m() != v.m() {
        return Err(Error::Dimension {
            context: "swap distance",
            left: u.m(),
            right: v.m(),
        });
    }
    let m = u.m();
    let mut pos_u = vec![u32::MAX; m];
    let mut pos_v = vec![u32::MAX; m];
    u.fill_positions(&mut pos_u);
    v.fill_positions(&mut pos_v);

    // Union of ranked candidates, u's prefix first.
    let mut in_union = vec![false; m];
    let mut union: Vec<usize> = Vec::with_capacity(u.ranked_len() + v.ranked_len());
    for &c in u.top().iter().chain(v.top()) {
        if !in_union[c] {
            in_union[c] = true;
            union.push(c);
        }
    }

    let mut half: u64 = 0;
    for i in 0..union.len() {
        for j in (i + 1)..union.len() {
            let (a, b) = (union[i], union[j]);
            half += pair_units(pos_u[a], pos_u[b], pos_v[a], pos_v[b]);
        }
    }

    // A pair (x, y) with x ranked somewhere and y ranked nowhere costs one
    // unit iff exactly one vote ranks x: that vote is strict on the pair, the
    // other indifferent.
    let outside = (m - union.len()) as u64;
    if outside > 0 {
        let one_sided = union
            .iter()
            .filter(|&&c| (pos_u[c] == u32::MAX) != (pos_v[c] == u32::MAX))
            .count() as u64;
        half += one_sided * outside;
    }
    Ok(half)
}

#[inline]
fn pair_units(ua: u32, ub: u32, va: u32, vb: u32) -> u64 {
    // Encode the relation on (a, b) as: -1 = b over a, 0 = tie, 1 = a over b.
    let rel = |pa: u32, pb: u32| -> i8 {
        match (pa == u32::MAX, pb == u32::MAX) {
            (true, true) => 0,
            (true, false) => -1,
            (false, true) => 1,
            (false, false) => {
                if pa < pb {
                    1
                } else {
                    -1
                }
            }
        }
    };
    let ru = rel(ua, ub);
    let rv = rel(va, vb);
    match (ru, rv) {
        _ if ru != 0 && rv != 0 => {
            if ru != rv {
                2
            } else {
                0
            }
        }
        (0, 0) => 0,
        _ => 1,
    }
}

/// Upper bound on [`swap_distance`] for `m` candidates, in half-swap units:
/// every pair strictly reversed.
pub fn max_swap_units(m: usize) -> u64 {
    (m as u64) * (m as u64 - 1)
}

/// Column-stochastic position frequencies of an election.
///
/// Entry `(i, j)` is the probability that candidate `j` sits at position `i`
/// in a vote drawn uniformly from the election, with a truncated candidate
/// spread uniformly over the positions below the ranked prefix of its vote.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    m: usize,
    /// Row-major, `entries[i * m + j]` = mass of candidate `j` at position `i`.
    entries: Vec<f64>,
}

impl FrequencyMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, position: usize, candidate: usize) -> f64 {
        self.entries[position * self.m + candidate]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Column of one candidate: its distribution over positions.
    pub fn column(&self, candidate: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.entry(i, candidate)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|j| self.column(j)).collect()
    }

    /// Checks that all rows and columns sum to 1 within `tol`.
    pub fn is_bistochastic(&self, tol: f64) -> bool {
        for i in 0..self.m {
            let row: f64 = (0..self.m).map(|j| self.entry(i, j)).sum();
            let col: f64 = (0..self.m).map(|j| self.entry(j, i)).sum();
            if (row - 1.0).abs() > tol || (col - 1.0).abs() > tol {
                return false;
            }
        }
        true
    }
}

/// Averages per-vote position indicators into the election's frequency
/// matrix. A vote ranking `k` of `m` candidates contributes a unit mass at
/// each ranked position and `1/(m-k)` at each position `k..m` for every
/// truncated candidate.
pub fn frequency_matrix(e: &Election) -> Result<FrequencyMatrix> {
    if e.n() == 0 {
        return Err(Error::Empty("frequency matrix of an election with no votes"));
    }
    if e.m() == 0 {
        return Err(Error::Empty("frequency matrix of an election with no candidates"));
    }
    let m = e.m();
    let mut entries = vec![0.0f64; m * m];
    let weight = 1.0 / e.n() as f64;
    for v in e.votes() {
        let k = v.ranked_len();
        for (i, &c) in v.top().iter().enumerate() {
            entries[i * m + c] += weight;
        }
        if k < m {
            let spread = weight / (m - k) as f64;
            let mut truncated = vec![true; m];
            for &c in v.top() {
                truncated[c] = false;
            }
            for c in 0..m {
                if truncated[c] {
                    for i in k..m {
                        entries[i * m + c] += spread;
                    }
                }
            }
        }
    }
    Ok(FrequencyMatrix { m, entries })
}
