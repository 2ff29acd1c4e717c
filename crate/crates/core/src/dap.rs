//! Diversity, agreement, and polarization indices of a single election, and
//! the vector distance built from them.
//!
//! The workhorse is `emk`: the cost of the best k-medoid summary of the
//! votes under the vote-level swap distance. Diversity averages `emk_1..=5`,
//! polarization compares `emk_1` against `emk_2`, and agreement is a
//! pairwise majority-margin average that needs no search at all. All three
//! are normalized to `[0, 1]`.

use crate::election::{swap_distance, Election};
use crate::error::Error;
use crate::seeding;
use crate::Result;
use rand::Rng;

/// Enumerating center sets is allowed up to this many combinations; beyond
/// it, exact mode refuses rather than silently degrading.
pub const EMK_EXACT_CAP: u64 = 1_000_000;

/// How to compute emk scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmkStrategy {
    /// Exhaustive enumeration of center sets (capped at [`EMK_EXACT_CAP`]).
    Exact,
    /// Greedy-initialised first-improvement medoid swaps, best of
    /// `restarts` runs (run 0 deterministic greedy, the rest seeded random).
    LocalSearch { restarts: usize, seed: u64 },
}

impl Default for EmkStrategy {
    fn default() -> Self {
        EmkStrategy::LocalSearch { restarts: 4, seed: 0 }
    }
}

/// Result of one emk evaluation. `score_units` is in half-swap units summed
/// over votes; `centers` are indices into the election's vote list.
#[derive(Debug, Clone)]
pub struct EmkResult {
    pub score_units: u64,
    pub centers: Vec<usize>,
    pub exact: bool,
}

/// Distinct-vote view used by the medoid search: pairwise distances on
/// distinct votes plus multiplicities, so elections with heavy vote
/// repetition (urn-like, real-world) cost `O(u^2)` rather than `O(n^2)`.
struct DistinctView {
    dist: Vec<u32>,
    counts: Vec<u64>,
    /// First original vote index for each distinct vote.
    original: Vec<usize>,
    u: usize,
}

impl DistinctView {
    fn build(e: &Election) -> Result<Self> {
        let mut sorted: Vec<(usize, &crate::election::Vote)> =
            e.votes().iter().enumerate().collect();
        sorted.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)));
        let mut reps: Vec<(usize, &crate::election::Vote)> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for (idx, v) in sorted {
            match reps.last() {
                Some((_, prev)) if *prev == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    reps.push((idx, v));
                    counts.push(1);
                }
            }
        }
        let u = reps.len();
        let mut dist = vec![0u32; u * u];
        for a in 0..u {
            for b in (a + 1)..u {
                let d = swap_distance(reps[a].1, reps[b].1)? as u32;
                dist[a * u + b] = d;
                dist[b * u + a] = d;
            }
        }
        Ok(DistinctView {
            dist,
            counts,
            original: reps.iter().map(|(i, _)| *i).collect(),
            u,
        })
    }

    #[inline]
    fn d(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.u + b]
    }

    /// Total weighted distance from every distinct vote to its nearest center.
    fn total(&self, centers: &[usize]) -> u64 {
        let mut acc = 0u64;
        for v in 0..self.u {
            let mut best = u32::MAX;
            for &c in centers {
                best = best.min(self.d(v, c));
                if best == 0 {
                    break;
                }
            }
            acc += self.counts[v] * best as u64;
        }
        acc
    }
}

pub(crate) fn combinations_count(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `emk_i`: minimum over center multisets of size `i` of the summed distance
/// from each vote to its nearest center, in half-swap units.
pub fn emk_score(e: &Election, i: usize, strategy: EmkStrategy) -> Result<EmkResult> {
    if i == 0 {
        return Err(Error::invalid("emk needs at least one center"));
    }
    if e.n() == 0 {
        return Err(Error::Empty("emk of an election with no votes"));
    }
    if i > e.n() {
        return Err(Error::invalid(format!(
            "emk with {i} centers but only {} votes",
            e.n()
        )));
    }
    let view = DistinctView::build(e)?;
    Ok(emk_on_view(&view, i, strategy, &[])?)
}

/// `emk_1..=max_i` sharing one distance table. Consecutive results are
/// chained: the best centers for `i` seed one start for `i + 1`, which keeps
/// the reported sequence non-increasing even in local-search mode.
pub fn emk_profile(e: &Election, max_i: usize, strategy: EmkStrategy) -> Result<Vec<EmkResult>> {
    if e.n() == 0 {
        return Err(Error::Empty("emk of an election with no votes"));
    }
    let view = DistinctView::build(e)?;
    let mut out: Vec<EmkResult> = Vec::new();
    let mut prev_centers: Vec<usize> = Vec::new();
    for i in 1..=max_i.min(e.n()) {
        let r = emk_on_view(&view, i, strategy, &prev_centers)?;
        prev_centers = r
            .centers
            .iter()
            .map(|&orig| view.original.iter().position(|&o| o == orig).unwrap())
            .collect();
        out.push(r);
    }
    Ok(out)
}

fn emk_on_view(
    view: &DistinctView,
    i: usize,
    strategy: EmkStrategy,
    warm_start: &[usize],
) -> Result<EmkResult> {
    let u = view.u;
    if i >= u {
        // Every distinct vote its own center: cost 0.
        return Ok(EmkResult {
            score_units: 0,
            centers: view.original.clone(),
            exact: true,
        });
    }
    match strategy {
        EmkStrategy::Exact => {
            let combos = combinations_count(u as u64, i as u64);
            match combos {
                Some(c) if c <= EMK_EXACT_CAP => {}
                _ => {
                    return Err(Error::capability(format!(
                        "exact emk needs C({u},{i}) <= {EMK_EXACT_CAP} center sets"
                    )))
                }
            }
            let mut best = u64::MAX;
            let mut best_set: Vec<usize> = (0..i).collect();
            let mut set: Vec<usize> = (0..i).collect();
            loop {
                let t = view.total(&set);
                if t < best {
                    best = t;
                    best_set = set.clone();
                }
                // next lexicographic combination
                let mut pos = i;
                while pos > 0 {
                    pos -= 1;
                    if set[pos] != pos + u - i {
                        set[pos] += 1;
                        for q in (pos + 1)..i {
                            set[q] = set[q - 1] + 1;
                        }
                        break;
                    }
                    if pos == 0 {
                        return Ok(EmkResult {
                            score_units: best,
                            centers: best_set.iter().map(|&d| view.original[d]).collect(),
                            exact: true,
                        });
                    }
                }
            }
        }
        EmkStrategy::LocalSearch { restarts, seed } => {
            let mut best: Option<(u64, Vec<usize>)> = None;
            let mut consider = |score: u64, set: Vec<usize>| match &best {
                Some((b, _)) if *b <= score => {}
                _ => best = Some((score, set)),
            };

            // Deterministic greedy start.
            let start = greedy_start(view, i);
            let (s, set) = improve(view, start);
            consider(s, set);

            // Warm start chained from the previous profile step.
            if !warm_start.is_empty() && warm_start.len() < i {
                let mut set = warm_start.to_vec();
                extend_farthest(view, &mut set, i);
                let (s, set) = improve(view, set);
                consider(s, set);
            }

            for r in 1..restarts {
                let mut rng = seeding::election_rng(seeding::derive(seed, r as u64));
                let mut pool: Vec<usize> = (0..u).collect();
                for pick in 0..i {
                    let j = rng.gen_range(pick..u);
                    pool.swap(pick, j);
                }
                let mut set = pool[..i].to_vec();
                set.sort_unstable();
                let (s, set) = improve(view, set);
                consider(s, set);
            }

            let (score, set) = best.unwrap();
            Ok(EmkResult {
                score_units: score,
                centers: set.iter().map(|&d| view.original[d]).collect(),
                exact: false,
            })
        }
    }
}

/// First center: the 1-medoid minimiser. Later centers: farthest-first.
fn greedy_start(view: &DistinctView, i: usize) -> Vec<usize> {
    let mut best_c = 0;
    let mut best_t = u64::MAX;
    for c in 0..view.u {
        let t = view.total(&[c]);
        if t < best_t {
            best_t = t;
            best_c = c;
        }
    }
    let mut set = vec![best_c];
    extend_farthest(view, &mut set, i);
    set
}

fn extend_farthest(view: &DistinctView, set: &mut Vec<usize>, i: usize) {
    while set.len() < i {
        let mut far = usize::MAX;
        let mut far_d = 0u32;
        for v in 0..view.u {
            if set.contains(&v) {
                continue;
            }
            let near = set.iter().map(|&c| view.d(v, c)).min().unwrap();
            if far == usize::MAX || near > far_d {
                far = v;
                far_d = near;
            }
        }
        set.push(far);
    }
}

/// First-improvement single-swap descent, scanning center slots and
/// candidate votes in index order; restarts the scan after every accepted
/// swap, stops at a local optimum.
fn improve(view: &DistinctView, mut set: Vec<usize>) -> (u64, Vec<usize>) {
    let mut current = view.total(&set);
    'outer: loop {
        for slot in 0..set.len() {
            for v in 0..view.u {
                if set.contains(&v) {
                    continue;
                }
                let old = set[slot];
                set[slot] = v;
                let t = view.total(&set);
                if t < current {
                    current = t;
                    continue 'outer;
                }
                set[slot] = old;
            }
        }
        break;
    }
    set.sort_unstable();
    (current, set)
}

/// Average over candidate pairs of the dominance margin: for each pair the
/// larger of |votes preferring a - votes preferring b| and the count of
/// votes indifferent between them, over n. 1 on unanimous strict profiles,
/// 0 on perfectly balanced ones.
pub fn agreement_index(e: &Election) -> Result<f64> {
    if e.m() < 2 {
        return Err(Error::degenerate(
            "agreement needs at least two candidates".to_string(),
        ));
    }
    if e.n() == 0 {
        return Err(Error::Empty("agreement of an election with no votes"));
    }
    let m = e.m();
    let n = e.n() as u64;
    // strict_rr[a][b]: votes ranking both a and b, a first.
    let mut strict_rr = vec![0u64; m * m];
    let mut ranked = vec![0u64; m];
    for v in e.votes() {
        let top = v.top();
        for x in 0..top.len() {
            ranked[top[x]] += 1;
            for y in (x + 1)..top.len() {
                strict_rr[top[x] * m + top[y]] += 1;
            }
        }
    }
    let mut num = 0u64;
    for a in 0..m {
        for b in (a + 1)..m {
            let both = strict_rr[a * m + b] + strict_rr[b * m + a];
            let a_over_b = strict_rr[a * m + b] + (ranked[a] - both);
            let b_over_a = strict_rr[b * m + a] + (ranked[b] - both);
            let tied = (n + both) - ranked[a] - ranked[b];
            let margin = a_over_b.abs_diff(b_over_a).max(tied);
            num += margin;
        }
    }
    let pairs = (m * (m - 1) / 2) as u64;
    Ok(num as f64 / (n * pairs) as f64)
}

/// The (diversity, agreement, polarization) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DapVector {
    pub diversity: f64,
    pub agreement: f64,
    pub polarization: f64,
    /// True when every emk term was computed exactly.
    pub exact: bool,
}

impl DapVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.diversity, self.agreement, self.polarization]
    }
}

/// Settings for [`dap_vector`].
#[derive(Debug, Clone, Copy)]
pub struct DapConfig {
    pub strategy: EmkStrategy,
}

impl Default for DapConfig {
    fn default() -> Self {
        DapConfig {
            strategy: EmkStrategy::default(),
        }
    }
}

/// Computes the full triple. Diversity averages the five leading emk scores
/// (missing terms count as zero when the election has fewer than five
/// votes); polarization reuses the same evaluations.
pub fn dap_vector(e: &Election, cfg: &DapConfig) -> Result<DapVector> {
    if e.m() < 2 {
        return Err(Error::degenerate(
            "dap indices need at least two candidates".to_string(),
        ));
    }
    if e.n() == 0 {
        return Err(Error::Empty("dap of an election with no votes"));
    }
    let profile = emk_profile(e, 5, cfg.strategy)?;
    let exact = profile.iter().all(|r| r.exact);
    // Normaliser: n * m * (m-1) half-swap units equals n * C(m,2) swaps * 2.
    let den = (e.n() as u128) * (e.m() as u128) * (e.m() as u128 - 1);
    let h = |i: usize| -> u128 {
        profile
            .get(i - 1)
            .map(|r| r.score_units as u128)
            .unwrap_or(0)
    };
    let sum: u128 = (1..=5).map(h).sum();
    let diversity = 2.0 * (sum as f64) / (5.0 * den as f64);
    let polarization = 2.0 * ((h(1) - h(2)) as f64) / den as f64;
    let agreement = agreement_index(e)?;
    Ok(DapVector {
        diversity,
        agreement,
        polarization,
        exact,
    })
}

/// Mean triple over `parts` random sub-elections of `part_size` votes each
/// (without replacement within a part). For elections no larger than
/// `part_size` this is just [`dap_vector`].
pub fn dap_vector_sampled(
    e: &Election,
    cfg: &DapConfig,
    parts: usize,
    part_size: usize,
    seed: u64,
) -> Result<DapVector> {
    if e.n() <= part_size || parts == 0 {
        return dap_vector(e, cfg);
    }
    let mut acc = [0.0f64; 3];
    for p in 0..parts {
        let mut rng = seeding::election_rng(seeding::derive(seed, p as u64));
        let mut idx: Vec<usize> = (0..e.n()).collect();
        for pick in 0..part_size {
            let j = rng.gen_range(pick..idx.len());
            idx.swap(pick, j);
        }
        let votes = idx[..part_size]
            .iter()
            .map(|&i| e.votes()[i].clone())
            .collect();
        let sub = Election::new_unchecked(e.m(), votes);
        let v = dap_vector(&sub, cfg)?;
        acc[0] += v.diversity;
        acc[1] += v.agreement;
        acc[2] += v.polarization;
    }
    let k = parts as f64;
    Ok(DapVector {
        diversity: acc[0] / k,
        agreement: acc[1] / k,
        polarization: acc[2] / k,
        exact: false,
    })
}

/// Euclidean distance between the triples of two elections.
pub fn dap_distance(e: &Election, f: &Election, cfg: &DapConfig) -> Result<f64> {
    let a = dap_vector(e, cfg)?;
    let b = dap_vector(f, cfg)?;
    let d: f64 = a
        .as_array()
        .iter()
        .zip(b.as_array().iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(d.sqrt())
}

/// Binary compass features: 0 in a slot means the election *is* the
/// corresponding reference profile (identity / antagonism / uniformity).
/// Requires complete votes; truncated profiles have no compass reading.
pub fn indicator_features(e: &Election) -> Result<[f64; 3]> {
    if !e.is_complete() {
        return Err(Error::capability(
            "indicator features are defined for complete votes only",
        ));
    }
    if e.n() == 0 {
        return Err(Error::Empty("indicator features of an election with no votes"));
    }
    let distinct = e.distinct_votes();

    let id = if distinct.len() == 1 { 0.0 } else { 1.0 };

    let an = if distinct.len() == 2 && e.m() >= 2 {
        let (v0, c0) = &distinct[0];
        let (v1, c1) = &distinct[1];
        let rev: Vec<usize> = v0.top().iter().rev().copied().collect();
        if c0 == c1 && v1.top() == rev.as_slice() {
            0.0
        } else {
            1.0
        }
    } else {
        1.0
    };

    let un = {
        let fact: Option<u64> = (1..=e.m() as u64).try_fold(1u64, |a, x| a.checked_mul(x));
        match fact {
            Some(f) if e.n() as u64 % f == 0 && distinct.len() as u64 == f => {
                let share = e.n() as u64 / f;
                if distinct.iter().all(|(_, c)| *c as u64 == share) {
                    0.0
                } else {
                    1.0
                }
            }
            _ => 1.0,
        }
    };

    Ok([id, an, un])
}
