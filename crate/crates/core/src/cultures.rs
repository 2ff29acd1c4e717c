//! Statistical cultures, reference elections, truncation operators, and the
//! dataset recipes built from them.
//!
//! Every generator is deterministic in a 64-bit seed. Votes draw from
//! per-voter substreams, so the first `k` votes of an election do not change
//! when more voters are added (the urn model reads earlier votes, but its
//! randomness is still per-voter).

use crate::election::{Election, Vote};
use crate::error::Error;
use crate::seeding;
use crate::Result;
use rand::distributions::Distribution;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

/// Point distribution for Euclidean cultures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EuclideanShape {
    /// Uniform in the unit hypercube `[0,1]^dim`.
    Cube,
    /// Uniform on the surface of the unit hypersphere in `R^dim`.
    Sphere,
}

/// Candidate decomposition tree for group-separable cultures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsTree {
    /// Recursive halving; the left child takes the larger half.
    Balanced,
    /// One leaf split off at every level.
    Caterpillar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CultureKind {
    Impartial,
    Mallows { norm_phi: f64 },
    Urn { alpha: f64 },
    Euclidean { dim: usize, shape: EuclideanShape },
    SpConitzer,
    SpWalsh,
    Spoc,
    GroupSeparable { tree: GsTree },
    Identity,
    Antagonism,
    /// Every possible order exactly `n / m!` times; requires `m! | n`.
    UniformityExact,
    /// Sampling stand-in for uniformity: independent uniform votes.
    UniformityApprox,
    /// A fixed top half of the candidates ranked above the rest, uniformly
    /// at random within each half.
    Stratification,
}

impl CultureKind {
    /// Short stable name used in labels and manifests.
    pub fn code(&self) -> &'static str {
        match self {
            CultureKind::Impartial => "ic",
            CultureKind::Mallows { .. } => "mallows",
            CultureKind::Urn { .. } => "urn",
            CultureKind::Euclidean { dim, shape } => match (dim, shape) {
                (1, EuclideanShape::Cube) => "interval",
                (2, EuclideanShape::Cube) => "square",
                (3, EuclideanShape::Cube) => "cube",
                (5, EuclideanShape::Cube) => "cube5d",
                (10, EuclideanShape::Cube) => "cube10d",
                (2, EuclideanShape::Sphere) => "circle",
                (3, EuclideanShape::Sphere) => "sphere",
                (_, EuclideanShape::Cube) => "euclidean_cube",
                (_, EuclideanShape::Sphere) => "euclidean_sphere",
            },
            CultureKind::SpConitzer => "sp_conitzer",
            CultureKind::SpWalsh => "sp_walsh",
            CultureKind::Spoc => "spoc",
            CultureKind::GroupSeparable { tree: GsTree::Balanced } => "gs_balanced",
            CultureKind::GroupSeparable { tree: GsTree::Caterpillar } => "gs_caterpillar",
            CultureKind::Identity => "id",
            CultureKind::Antagonism => "an",
            CultureKind::UniformityExact => "un_exact",
            CultureKind::UniformityApprox => "un",
            CultureKind::Stratification => "st",
        }
    }

    /// Human-readable parameter summary for manifests; empty when the
    /// culture has no parameters.
    pub fn params_string(&self) -> String {
        match self {
            CultureKind::Mallows { norm_phi } => format!("norm_phi={norm_phi:.6}"),
            CultureKind::Urn { alpha } => format!("alpha={alpha:.6}"),
            CultureKind::Euclidean { dim, shape } => format!(
                "dim={dim},shape={}",
                match shape {
                    EuclideanShape::Cube => "cube",
                    EuclideanShape::Sphere => "sphere",
                }
            ),
            _ => String::new(),
        }
    }
}

/// Everything needed to generate one election.
#[derive(Debug, Clone, PartialEq)]
pub struct CultureSpec {
    pub kind: CultureKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

fn validate_spec(spec: &CultureSpec) -> Result<()> {
    if spec.m == 0 {
        return Err(Error::invalid("election needs at least one candidate"));
    }
    if spec.n == 0 {
        return Err(Error::invalid("election needs at least one vote"));
    }
    match spec.kind {
        CultureKind::Mallows { norm_phi } => {
            if !(0.0..=1.0).contains(&norm_phi) {
                return Err(Error::invalid(format!(
                    "mallows norm_phi must lie in [0,1], got {norm_phi}"
                )));
            }
        }
        CultureKind::Urn { alpha } => {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(Error::invalid(format!(
                    "urn alpha must be a finite non-negative number, got {alpha}"
                )));
            }
        }
        CultureKind::Euclidean { dim, .. } => {
            if dim == 0 {
                return Err(Error::invalid("euclidean dimension must be positive"));
            }
        }
        CultureKind::Antagonism => {
            if spec.n % 2 != 0 {
                return Err(Error::invalid(format!(
                    "antagonism needs an even number of voters, got {}",
                    spec.n
                )));
            }
        }
        CultureKind::UniformityExact => {
            let fact = factorial_checked(spec.m).ok_or_else(|| {
                Error::invalid(format!(
                    "exact uniformity is infeasible: {}! overflows",
                    spec.m
                ))
            })?;
            if spec.n as u64 % fact != 0 {
                return Err(Error::invalid(format!(
                    "exact uniformity needs n divisible by m! = {fact}, got n = {}",
                    spec.n
                )));
            }
        }
        _ => {}
    }
    Ok(())
}

fn factorial_checked(m: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for i in 2..=m as u64 {
        acc = acc.checked_mul(i)?;
    }
    Some(acc)
}

/// Expected swap distance between a Mallows(φ) vote and its center.
///
/// `m φ/(1-φ) - Σ_{i=1..m} i φ^i/(1-φ^i)`, continuously extended to
/// `m(m-1)/4` at φ = 1.
pub fn mallows_expected_swaps(phi: f64, m: usize) -> f64 {
    let mf = m as f64;
    if phi <= 0.0 {
        return 0.0;
    }
    if (1.0 - phi).abs() < 1e-12 {
        return mf * (mf - 1.0) / 4.0;
    }
    let mut sum = 0.0;
    for i in 1..=m {
        let pi = phi.powi(i as i32);
        sum += i as f64 * pi / (1.0 - pi);
    }
    mf * phi / (1.0 - phi) - sum
}

/// Dispersion φ whose expected swap distance to the center equals
/// `norm_phi * m(m-1)/4`. Monotone bisection to 1e-10.
pub fn norm_phi_to_phi(norm_phi: f64, m: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&norm_phi) {
        return Err(Error::invalid(format!(
            "norm_phi must lie in [0,1], got {norm_phi}"
        )));
    }
    if m < 2 {
        return Err(Error::invalid("norm_phi calibration needs m >= 2"));
    }
    if norm_phi == 0.0 {
        return Ok(0.0);
    }
    if norm_phi == 1.0 {
        return Ok(1.0);
    }
    let target = norm_phi * (m as f64) * (m as f64 - 1.0) / 4.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = (lo + hi) / 2.0;
        if mallows_expected_swaps(mid, m) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / 2.0)
}

fn uniform_permutation(rng: &mut ChaCha12Rng, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

fn mallows_vote(rng: &mut ChaCha12Rng, m: usize, phi: f64) -> Vec<usize> {
    // Repeated insertion against the center 0 > 1 > ... > m-1: candidate j
    // goes to slot i of the current j-slot prefix with weight phi^(j-i).
    let mut v: Vec<usize> = Vec::with_capacity(m);
    for j in 0..m {
        let mut total = 0.0;
        let mut w = 1.0; // phi^0 for the bottom slot i = j
        let mut weights = vec![0.0; j + 1];
        for i in (0..=j).rev() {
            weights[i] = w;
            total += w;
            w *= phi;
        }
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut slot = j;
        for (i, wi) in weights.iter().enumerate() {
            acc += wi;
            if u < acc {
                slot = i;
                break;
            }
        }
        v.insert(slot, j);
    }
    v
}

fn euclidean_points(rng: &mut ChaCha12Rng, count: usize, dim: usize, shape: EuclideanShape) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| match shape {
            EuclideanShape::Cube => (0..dim).map(|_| rng.gen::<f64>()).collect(),
            EuclideanShape::Sphere => loop {
                let p: Vec<f64> = (0..dim)
                    .map(|_| rand_distr::StandardNormal.sample(rng))
                    .collect();
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    break p.into_iter().map(|x| x / norm).collect();
                }
            },
        })
        .collect()
}

fn rank_by_distance(voter: &[f64], candidates: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    let d2 = |c: &[f64]| -> f64 {
        voter
            .iter()
            .zip(c)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    order.sort_by(|&a, &b| {
        d2(&candidates[a])
            .partial_cmp(&d2(&candidates[b]))
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

fn sp_conitzer_vote(rng: &mut ChaCha12Rng, m: usize) -> Vec<usize> {
    let peak = rng.gen_range(0..m);
    let (mut lo, mut hi) = (peak, peak);
    let mut v = vec![peak];
    while v.len() < m {
        let take_left = if lo == 0 {
            false
        } else if hi == m - 1 {
            true
        } else {
            rng.gen_bool(0.5)
        };
        if take_left {
            lo -= 1;
            v.push(lo);
        } else {
            hi += 1;
            v.push(hi);
        }
    }
    v
}

fn sp_walsh_vote(rng: &mut ChaCha12Rng, m: usize) -> Vec<usize> {
    // Fill from the bottom: repeatedly demote one end of the remaining
    // interval. All 2^(m-1) single-peaked votes are equally likely.
    let (mut lo, mut hi) = (0usize, m - 1);
    let mut bottom_up = Vec::with_capacity(m);
    while lo < hi {
        if rng.gen_bool(0.5) {
            bottom_up.push(lo);
            lo += 1;
        } else {
            bottom_up.push(hi);
            hi -= 1;
        }
    }
    bottom_up.push(lo);
    bottom_up.reverse();
    bottom_up
}

fn spoc_vote(rng: &mut ChaCha12Rng, m: usize) -> Vec<usize> {
    let top = rng.gen_range(0..m);
    let (mut left, mut right) = (top, top);
    let mut v = vec![top];
    while v.len() < m {
        if rng.gen_bool(0.5) {
            left = (left + m - 1) % m;
            v.push(left);
        } else {
            right = (right + 1) % m;
            v.push(right);
        }
    }
    v
}

fn gs_vote(rng: &mut ChaCha12Rng, m: usize, tree: GsTree) -> Vec<usize> {
    fn emit(lo: usize, hi: usize, tree: GsTree, rng: &mut ChaCha12Rng, out: &mut Vec<usize>) {
        if lo == hi {
            out.push(lo);
            return;
        }
        let len = hi - lo + 1;
        let left_len = match tree {
            GsTree::Balanced => (len + 1) / 2,
            GsTree::Caterpillar => 1,
        };
        let mid = lo + left_len - 1;
        if rng.gen_bool(0.5) {
            emit(mid + 1, hi, tree, rng, out);
            emit(lo, mid, tree, rng, out);
        } else {
            emit(lo, mid, tree, rng, out);
            emit(mid + 1, hi, tree, rng, out);
        }
    }
    let mut out = Vec::with_capacity(m);
    emit(0, m - 1, tree, rng, &mut out);
    out
}

/// Leaf sets of the fixed group-separable tree, as (lo, hi) candidate
/// ranges of every internal node. Used by structure checks.
pub fn gs_internal_ranges(m: usize, tree: GsTree) -> Vec<(usize, usize, usize)> {
    // (lo, mid, hi): children are [lo, mid] and [mid+1, hi].
    let mut out = Vec::new();
    let mut stack = vec![(0usize, m - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if lo == hi {
            continue;
        }
        let len = hi - lo + 1;
        let left_len = match tree {
            GsTree::Balanced => (len + 1) / 2,
            GsTree::Caterpillar => 1,
        };
        let mid = lo + left_len - 1;
        out.push((lo, mid, hi));
        stack.push((lo, mid));
        stack.push((mid + 1, hi));
    }
    out
}

/// Candidates `0..ceil(m/2)`; the fixed upper block of stratification.
pub fn stratification_top_half(m: usize) -> usize {
    (m + 1) / 2
}

fn lex_permutations(m: usize) -> Vec<Vec<usize>> {
    fn next_perm(p: &mut [usize]) -> bool {
        let n = p.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }
    let mut p: Vec<usize> = (0..m).collect();
    let mut out = vec![p.clone()];
    while next_perm(&mut p) {
        out.push(p.clone());
    }
    out
}

/// Generates one election from a culture spec. Deterministic in
/// `spec.seed`; voters use independent substreams.
pub fn sample_election(spec: &CultureSpec) -> Result<Election> {
    validate_spec(spec)?;
    let (m, n) = (spec.m, spec.n);
    let mut votes: Vec<Vote> = Vec::with_capacity(n);
    match spec.kind {
        CultureKind::Impartial | CultureKind::UniformityApprox => {
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                votes.push(Vote::complete(uniform_permutation(&mut rng, m), m)?);
            }
        }
        CultureKind::Mallows { norm_phi } => {
            let phi = norm_phi_to_phi(norm_phi, m.max(2))?;
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                votes.push(Vote::complete(mallows_vote(&mut rng, m, phi), m)?);
            }
        }
        CultureKind::Urn { alpha } => {
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                let fresh_probability = 1.0 / (1.0 + voter as f64 * alpha);
                let vote = if voter == 0 || rng.gen::<f64>() < fresh_probability {
                    Vote::complete(uniform_permutation(&mut rng, m), m)?
                } else {
                    votes[rng.gen_range(0..voter)].clone()
                };
                votes.push(vote);
            }
        }
        CultureKind::Euclidean { dim, shape } => {
            let mut crng = seeding::election_rng(spec.seed);
            let candidates = euclidean_points(&mut crng, m, dim, shape);
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                let point = euclidean_points(&mut rng, 1, dim, shape).pop().unwrap();
                votes.push(Vote::complete(rank_by_distance(&point, &candidates), m)?);
            }
        }
        CultureKind::SpConitzer => {
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                votes.push(Vote::complete(sp_conitzer_vote(&mut rng, m), m)?);
            }
        }
        CultureKind::SpWalsh => {
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                votes.push(Vote::complete(sp_walsh_vote(&mut rng, m), m)?);
            }
        }
        CultureKind::Spoc => {
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                votes.push(Vote::complete(spoc_vote(&mut rng, m), m)?);
            }
        }
        CultureKind::GroupSeparable { tree } => {
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                votes.push(Vote::complete(gs_vote(&mut rng, m, tree), m)?);
            }
        }
        CultureKind::Identity => {
            let order: Vec<usize> = (0..m).collect();
            votes = vec![Vote::complete(order, m)?; n];
        }
        CultureKind::Antagonism => {
            let fwd: Vec<usize> = (0..m).collect();
            let rev: Vec<usize> = (0..m).rev().collect();
            votes = vec![Vote::complete(fwd, m)?; n / 2];
            votes.extend(vec![Vote::complete(rev, m)?; n / 2]);
        }
        CultureKind::UniformityExact => {
            let perms = lex_permutations(m);
            let copies = n / perms.len();
            for p in &perms {
                for _ in 0..copies {
                    votes.push(Vote::complete(p.clone(), m)?);
                }
            }
        }
        CultureKind::Stratification => {
            let h = stratification_top_half(m);
            for voter in 0..n {
                let mut rng = seeding::voter_rng(spec.seed, voter);
                let mut upper = uniform_permutation(&mut rng, h);
                let lower: Vec<usize> = uniform_permutation(&mut rng, m - h)
                    .into_iter()
                    .map(|c| c + h)
                    .collect();
                upper.extend(lower);
                votes.push(Vote::complete(upper, m)?);
            }
        }
    }
    Ok(Election::new(m, votes)?.with_label(spec.kind.code()))
}

/// How a complete election loses its tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMethod {
    /// Keep the best `k` candidates of every vote.
    TopK { k: usize },
    /// Walk each vote top-down; after every candidate stop with
    /// probability `1 - p`.
    RandomCut { p: f64 },
    /// Drop each candidate independently with probability `p`.
    RandomDrop { p: f64 },
}

impl TruncationMethod {
    /// Short stable name for labels and manifests.
    pub fn code(&self) -> &'static str {
        match self {
            TruncationMethod::TopK { .. } => "topk",
            TruncationMethod::RandomCut { .. } => "cut",
            TruncationMethod::RandomDrop { .. } => "drop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    pub method: TruncationMethod,
    pub seed: u64,
}

/// Expected kept-prefix length of a random cut with continuation
/// probability `p`: `(1 - p^m) / (1 - p)`.
pub fn random_cut_expected_len(p: f64, m: usize) -> f64 {
    if (1.0 - p).abs() < 1e-12 {
        return m as f64;
    }
    (1.0 - p.powi(m as i32)) / (1.0 - p)
}

/// Continuation probability whose expected kept prefix is `target`
/// candidates out of `m`. Monotone bisection.
pub fn random_cut_p_for_expected_len(m: usize, target: f64) -> Result<f64> {
    if !(1.0..=m as f64).contains(&target) {
        return Err(Error::invalid(format!(
            "expected prefix length must lie in [1, {m}], got {target}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if random_cut_expected_len(mid, m) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / 2.0)
}

/// Applies one truncation method to a complete election.
pub fn truncate(e: &Election, spec: &TruncationSpec) -> Result<Election> {
    if !e.is_complete() {
        return Err(Error::capability(
            "truncating an already-truncated election".to_string(),
        ));
    }
    let m = e.m();
    let votes: Result<Vec<Vote>> = match spec.method {
        TruncationMethod::TopK { k } => {
            if k == 0 || k > m {
                return Err(Error::invalid(format!(
                    "top-k level must lie in 1..={m}, got {k}"
                )));
            }
            e.votes()
                .iter()
                .map(|v| Vote::new(v.top()[..k].to_vec(), m))
                .collect()
        }
        TruncationMethod::RandomCut { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "random-cut probability must lie in [0,1], got {p}"
                )));
            }
            e.votes()
                .iter()
                .enumerate()
                .map(|(voter, v)| {
                    let mut rng = seeding::voter_rng(spec.seed, voter);
                    let mut len = 1;
                    while len < m && rng.gen::<f64>() < p {
                        len += 1;
                    }
                    Vote::new(v.top()[..len].to_vec(), m)
                })
                .collect()
        }
        TruncationMethod::RandomDrop { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "random-drop probability must lie in [0,1], got {p}"
                )));
            }
            e.votes()
                .iter()
                .enumerate()
                .map(|(voter, v)| {
                    let mut rng = seeding::voter_rng(spec.seed, voter);
                    let kept: Vec<usize> = v
                        .top()
                        .iter()
                        .filter(|_| rng.gen::<f64>() >= p)
                        .cloned()
                        .collect();
                    Vote::new(kept, m)
                })
                .collect()
        }
    };
    Ok(Election::new_unchecked(m, votes?).with_label(e.label()))
}

/// Named dataset recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetRecipe {
    /// Complete elections, m=8, n=96: the culture table plus the four
    /// reference elections.
    Basic,
    /// Same composition split across (m, n) in {8,16} x {96,192}.
    SizeOriented,
    /// Basic, with each culture group half intact, a quarter top-k
    /// truncated, and a quarter random-cut truncated (both targeting
    /// half-ranked votes).
    TruncationOriented,
    /// Size-oriented with the same half/quarter/quarter treatment.
    Comprehensive,
    /// Basic, with half of each culture group random-drop truncated at
    /// p = 1/2.
    RandomDrop,
}

impl DatasetRecipe {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "basic" => Some(DatasetRecipe::Basic),
            "size_oriented" => Some(DatasetRecipe::SizeOriented),
            "truncation_oriented" => Some(DatasetRecipe::TruncationOriented),
            "comprehensive" => Some(DatasetRecipe::Comprehensive),
            "random_drop" => Some(DatasetRecipe::RandomDrop),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetRecipe::Basic => "basic",
            DatasetRecipe::SizeOriented => "size_oriented",
            DatasetRecipe::TruncationOriented => "truncation_oriented",
            DatasetRecipe::Comprehensive => "comprehensive",
            DatasetRecipe::RandomDrop => "random_drop",
        }
    }
}

/// One generated election plus its manifest row.
#[derive(Debug, Clone)]
pub struct DatasetElection {
    pub election: Election,
    pub culture: String,
    pub params: String,
    /// `none`, or the truncation code with its parameter.
    pub truncation: String,
}

/// Culture groups of the complete-election table: code and count. Counts
/// are divisible by 4 (actually by 8), so all recipes split evenly except
/// the two 8-element groups, which get the documented special treatment.
const GROUP_TABLE: &[(&str, usize)] = &[
    ("ic", 16),
    ("mallows", 48),
    ("urn", 48),
    ("interval", 16),
    ("square", 16),
    ("cube", 16),
    ("cube5d", 8),
    ("cube10d", 8),
    ("circle", 16),
    ("sphere", 16),
    ("sp_conitzer", 16),
    ("sp_walsh", 16),
    ("spoc", 16),
    ("gs_balanced", 16),
    ("gs_caterpillar", 16),
];

const REFERENCE_CODES: &[&str] = &["id", "an", "un", "st"];

/// Salt offsets for the per-element seed chain.
const SALT_PARAMS: u64 = 0x70;
const SALT_TRUNC: u64 = 0x71;

fn group_kind(code: &str, element_seed: u64) -> CultureKind {
    let mut prng = seeding::election_rng(seeding::derive(element_seed, SALT_PARAMS));
    match code {
        "ic" => CultureKind::Impartial,
        "mallows" => CultureKind::Mallows {
            norm_phi: prng.gen::<f64>(),
        },
        "urn" => {
            let gamma = rand_distr::Gamma::new(0.8, 1.0).unwrap();
            CultureKind::Urn {
                alpha: gamma.sample(&mut prng),
            }
        }
        "interval" => CultureKind::Euclidean { dim: 1, shape: EuclideanShape::Cube },
        "square" => CultureKind::Euclidean { dim: 2, shape: EuclideanShape::Cube },
        "cube" => CultureKind::Euclidean { dim: 3, shape: EuclideanShape::Cube },
        "cube5d" => CultureKind::Euclidean { dim: 5, shape: EuclideanShape::Cube },
        "cube10d" => CultureKind::Euclidean { dim: 10, shape: EuclideanShape::Cube },
        "circle" => CultureKind::Euclidean { dim: 2, shape: EuclideanShape::Sphere },
        "sphere" => CultureKind::Euclidean { dim: 3, shape: EuclideanShape::Sphere },
        "sp_conitzer" => CultureKind::SpConitzer,
        "sp_walsh" => CultureKind::SpWalsh,
        "spoc" => CultureKind::Spoc,
        "gs_balanced" => CultureKind::GroupSeparable { tree: GsTree::Balanced },
        "gs_caterpillar" => CultureKind::GroupSeparable { tree: GsTree::Caterpillar },
        "id" => CultureKind::Identity,
        "an" => CultureKind::Antagonism,
        "un" => CultureKind::UniformityApprox,
        "st" => CultureKind::Stratification,
        other => unreachable!("unknown culture code {other}"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Treatment {
    Intact,
    TopK,
    Cut,
    Drop,
}

fn element_seed(dataset_seed: u64, group_index: usize, element_index: usize) -> u64 {
    seeding::derive(
        dataset_seed,
        ((group_index as u64) << 32) | element_index as u64,
    )
}

fn make_element(
    code: &str,
    label: String,
    m: usize,
    n: usize,
    seed: u64,
    treatment: Treatment,
) -> Result<DatasetElection> {
    let kind = group_kind(code, seed);
    let spec = CultureSpec { kind, m, n, seed };
    let election = sample_election(&spec)?;
    let (election, truncation, label) = match treatment {
        Treatment::Intact => (election, "none".to_string(), label),
        Treatment::TopK => {
            let k = m / 2;
            let t = truncate(
                &election,
                &TruncationSpec {
                    method: TruncationMethod::TopK { k },
                    seed: seeding::derive(seed, SALT_TRUNC),
                },
            )?;
            (t, format!("topk(k={k})"), format!("{label}_topk"))
        }
        Treatment::Cut => {
            let p = random_cut_p_for_expected_len(m, m as f64 / 2.0)?;
            let t = truncate(
                &election,
                &TruncationSpec {
                    method: TruncationMethod::RandomCut { p },
                    seed: seeding::derive(seed, SALT_TRUNC),
                },
            )?;
            (t, format!("cut(p={p:.6})"), format!("{label}_cut"))
        }
        Treatment::Drop => {
            let t = truncate(
                &election,
                &TruncationSpec {
                    method: TruncationMethod::RandomDrop { p: 0.5 },
                    seed: seeding::derive(seed, SALT_TRUNC),
                },
            )?;
            (t, "drop(p=0.5)".to_string(), format!("{label}_drop"))
        }
    };
    Ok(DatasetElection {
        election: election.with_label(&label),
        culture: code.to_string(),
        params: kind.params_string(),
        truncation,
    })
}

/// The four (m, n) size groups of the size-oriented recipes, in order.
const SIZES: &[(usize, usize)] = &[(8, 96), (8, 192), (16, 96), (16, 192)];

/// Builds a named dataset. Element seeds derive from `(seed, group,
/// index)`, so any one election can be regenerated in isolation.
pub fn build_dataset(recipe: DatasetRecipe, seed: u64) -> Result<Vec<DatasetElection>> {
    let mut out = Vec::new();
    match recipe {
        DatasetRecipe::Basic | DatasetRecipe::TruncationOriented | DatasetRecipe::RandomDrop => {
            for (g, &(code, count)) in GROUP_TABLE.iter().enumerate() {
                for idx in 0..count {
                    let treatment = match recipe {
                        DatasetRecipe::Basic => Treatment::Intact,
                        DatasetRecipe::TruncationOriented => {
                            // First half intact, third quarter top-k, last
                            // quarter random cut.
                            if idx < count / 2 {
                                Treatment::Intact
                            } else if idx < count * 3 / 4 {
                                Treatment::TopK
                            } else {
                                Treatment::Cut
                            }
                        }
                        DatasetRecipe::RandomDrop => {
                            if idx < count / 2 {
                                Treatment::Intact
                            } else {
                                Treatment::Drop
                            }
                        }
                        _ => unreachable!(),
                    };
                    let es = element_seed(seed, g, idx);
                    let label = format!("{code}_{idx:02}");
                    out.push(make_element(code, label, 8, 96, es, treatment)?);
                }
            }
            for (r, &code) in REFERENCE_CODES.iter().enumerate() {
                let es = element_seed(seed, GROUP_TABLE.len() + r, 0);
                out.push(make_element(code, code.to_string(), 8, 96, es, Treatment::Intact)?);
            }
        }
        DatasetRecipe::SizeOriented | DatasetRecipe::Comprehensive => {
            for (g, &(code, count)) in GROUP_TABLE.iter().enumerate() {
                let per_size = count / SIZES.len();
                for idx in 0..count {
                    let size_index = idx / per_size;
                    let within = idx % per_size;
                    let (m, n) = SIZES[size_index];
                    let treatment = if recipe == DatasetRecipe::SizeOriented {
                        Treatment::Intact
                    } else if per_size == 2 {
                        // Groups of 8: one intact and one truncated per
                        // size, alternating truncation methods across
                        // sizes, so the whole group splits 4/2/2.
                        if within == 0 {
                            Treatment::Intact
                        } else if size_index % 2 == 0 {
                            Treatment::TopK
                        } else {
                            Treatment::Cut
                        }
                    } else if within < per_size / 2 {
                        Treatment::Intact
                    } else if within < per_size * 3 / 4 {
                        Treatment::TopK
                    } else {
                        Treatment::Cut
                    };
                    let es = element_seed(seed, g, idx);
                    let label = format!("{code}_{idx:02}_{m}x{n}");
                    out.push(make_element(code, label, m, n, es, treatment)?);
                }
            }
            for (r, &code) in REFERENCE_CODES.iter().enumerate() {
                for (s, &(m, n)) in SIZES.iter().enumerate() {
                    let es = element_seed(seed, GROUP_TABLE.len() + r, s);
                    let label = format!("{code}_{m}x{n}");
                    out.push(make_element(code, label, m, n, es, Treatment::Intact)?);
                }
            }
        }
    }
    Ok(out)
}
