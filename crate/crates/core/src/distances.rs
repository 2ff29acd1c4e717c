//! Election-level distances and distance matrices.
//!
//! Equal-sized elections are compared by the isomorphic swap distance (exact
//! branch-and-bound over candidate bijections with an assignment bound) or
//! the positionwise distance (minimum-cost bijection between frequency
//! matrix columns). Different-sized elections are compared by the stretched
//! positionwise extension, the candidate-padding swap diagnostic, the
//! candidate-deletion swap diagnostic, or the DAP feature distance.

use crate::dap::{dap_vector, DapConfig};
use crate::election::{frequency_matrix, Election};
use crate::error::{CellFailure, Error};
use crate::seeding;
use crate::transport::{matrix_wasserstein, matrix_wasserstein_transport};
use crate::Result;
use rand::Rng;

/// Which distance produced a value or matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricId {
    Swap,
    SwapTr,
    SwapDel,
    Pos,
    PosHat,
    Dap,
    Feature,
    /// Loaded from a file; provenance unknown.
    External,
}

impl MetricId {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricId::Swap => "swap",
            MetricId::SwapTr => "swap_tr",
            MetricId::SwapDel => "swap_del",
            MetricId::Pos => "pos",
            MetricId::PosHat => "pos_hat",
            MetricId::Dap => "dap",
            MetricId::Feature => "feature",
            MetricId::External => "external",
        }
    }
}

impl std::fmt::Display for MetricId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single distance evaluation. `exact` carries the value as a reduced
/// fraction when the metric is exactly rational (the swap family).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceValue {
    pub value: f64,
    pub metric: MetricId,
    pub exact: Option<(u64, u64)>,
}

impl DistanceValue {
    fn from_ratio(num: u128, den: u128, metric: MetricId) -> Self {
        let value = num as f64 / den as f64;
        DistanceValue {
            value,
            metric,
            exact: reduce_ratio(num, den),
        }
    }
}

fn reduce_ratio(num: u128, den: u128) -> Option<(u64, u64)> {
    if den == 0 {
        return None;
    }
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    if n <= u64::MAX as u128 && d <= u64::MAX as u128 {
        Some((n as u64, d as u64))
    } else {
        None
    }
}

/// Search limits for the exact isomorphic swap distance.
#[derive(Debug, Clone, Copy)]
pub struct SwapBudget {
    /// Largest candidate count the branch-and-bound will attempt.
    pub max_exact_m: usize,
}

impl Default for SwapBudget {
    fn default() -> Self {
        SwapBudget { max_exact_m: 8 }
    }
}

/// Subset handling for the candidate-deletion diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct SwapDelConfig {
    /// Enumerate every deletion subset up to this many; beyond it, sample.
    pub max_subsets: usize,
    /// Monte Carlo sample count used past the enumeration budget.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SwapDelConfig {
    fn default() -> Self {
        SwapDelConfig {
            max_subsets: 2000,
            mc_samples: 500,
            seed: 0,
        }
    }
}

/// Column cap for positionwise comparisons; frequency matrices are dense
/// `m x m`, so this bounds memory and the transportation instance size.
#[derive(Debug, Clone, Copy)]
pub struct PosHatConfig {
    pub max_m: usize,
}

impl Default for PosHatConfig {
    fn default() -> Self {
        PosHatConfig { max_m: 200 }
    }
}

#[inline]
fn unit_cost(r1: i8, r2: i8) -> i64 {
    if r1 != 0 && r2 != 0 {
        if r1 != r2 {
            2
        } else {
            0
        }
    } else if r1 == 0 && r2 == 0 {
        0
    } else {
        1
    }
}

/// Per-vote relation tables: entry `a * m + b` is +1 / -1 / 0 as the vote
/// strictly prefers a, strictly prefers b, or is indifferent.
fn relation_tables(e: &Election) -> Vec<Vec<i8>> {
    let m = e.m();
    let mut pos = vec![u32::MAX; m];
    e.votes()
        .iter()
        .map(|v| {
            v_fill(v, &mut pos);
            let mut rel = vec![0i8; m * m];
            for a in 0..m {
                for b in 0..m {
                    if a == b {
                        continue;
                    }
                    rel[a * m + b] = match (pos[a] == u32::MAX, pos[b] == u32::MAX) {
                        (true, true) => 0,
                        (true, false) => -1,
                        (false, true) => 1,
                        (false, false) => {
                            if pos[a] < pos[b] {
                                1
                            } else {
                                -1
                            }
                        }
                    };
                }
            }
            rel
        })
        .collect()
}

fn v_fill(v: &crate::election::Vote, pos: &mut [u32]) {
    pos.fill(u32::MAX);
    for (i, &c) in v.top().iter().enumerate() {
        pos[c] = i as u32;
    }
}

/// Candidates of `e` ordered by a Borda-style prominence score, most
/// prominent first. Fixes the branching order of the search.
fn prominence_order(e: &Election) -> Vec<usize> {
    let m = e.m();
    let mut score = vec![0.0f64; m];
    for v in e.votes() {
        let k = v.ranked_len();
        let trunc_value = (m as f64 - 1.0) - (k as f64 + m as f64 - 1.0) / 2.0;
        let mut ranked = vec![false; m];
        for (i, &c) in v.top().iter().enumerate() {
            score[c] += (m - 1 - i) as f64;
            ranked[c] = true;
        }
        for c in 0..m {
            if !ranked[c] {
                score[c] += trunc_value;
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| score[b].partial_cmp(&score[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Exact minimum over candidate bijections and voter matchings of the summed
/// vote-level swap distance, in half-swap units.
///
/// Depth-first over candidate images in prominence order; at every node the
/// optimal voter assignment on the pairs fixed so far is a valid lower bound
/// because pair contributions are non-negative and accumulate monotonically.
fn iso_swap_units(e: &Election, f: &Election) -> u64 {
    let m = e.m();
    let n = e.n();
    let rel_e = relation_tables(e);
    let rel_f = relation_tables(f);
    let order = prominence_order(e);

    struct Ctx<'a> {
        m: usize,
        n: usize,
        rel_e: &'a [Vec<i8>],
        rel_f: &'a [Vec<i8>],
        order: &'a [usize],
    }

    fn dfs(
        ctx: &Ctx,
        depth: usize,
        cost: &[i64],
        sigma: &mut [usize],
        used: &mut [bool],
        best: &mut u64,
    ) {
        let (m, n) = (ctx.m, ctx.n);
        let c = ctx.order[depth];
        let mut kids: Vec<(i64, usize, Vec<i64>)> = Vec::new();
        for y in 0..m {
            if used[y] {
                continue;
            }
            let mut child = cost.to_vec();
            for vi in 0..n {
                let re = &ctx.rel_e[vi];
                for vj in 0..n {
                    let rf = &ctx.rel_f[vj];
                    let mut add = 0i64;
                    for t in 0..depth {
                        let a = ctx.order[t];
                        add += unit_cost(re[c * m + a], rf[y * m + sigma[a]]);
                    }
                    child[vi * n + vj] += add;
                }
            }
            let (_, lb) = crate::transport::assignment_cost_i64(&child, n);
            let lb_u = lb as u64;
            if depth + 1 == m {
                // All candidate pairs are now priced: lb is the exact cost
                // of this completed bijection.
                if lb_u < *best {
                    *best = lb_u;
                }
            } else if lb_u < *best {
                kids.push((lb, y, child));
            }
        }
        if depth + 1 == m {
            return;
        }
        kids.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        for (lb, y, child) in kids {
            if lb as u64 >= *best {
                continue;
            }
            sigma[ctx.order[depth]] = y;
            used[y] = true;
            dfs(ctx, depth + 1, &child, sigma, used, best);
            used[y] = false;
        }
    }

    let ctx = Ctx {
        m,
        n,
        rel_e: &rel_e,
        rel_f: &rel_f,
        order: &order,
    };
    let mut best = u64::MAX;
    let mut sigma = vec![usize::MAX; m];
    let mut used = vec![false; m];
    if m == 1 {
        return 0;
    }
    dfs(&ctx, 0, &vec![0i64; n * n], &mut sigma, &mut used, &mut best);
    best
}

fn check_comparable(e: &Election, f: &Election, need_equal_m: bool) -> Result<()> {
    if need_equal_m && e.m() != f.m() {
        return Err(Error::Size {
            context: "candidate counts",
            left: e.m(),
            right: f.m(),
        });
    }
    if e.n() != f.n() {
        return Err(Error::Size {
            context: "voter counts",
            left: e.n(),
            right: f.n(),
        });
    }
    if e.n() == 0 {
        return Err(Error::Empty("distance between elections with no votes"));
    }
    Ok(())
}

/// Isomorphic swap distance, normalized by its maximum `n * m * (m-1) / 4`
/// swaps. Exact; refuses candidate counts above the budget.
pub fn iso_swap_distance(e: &Election, f: &Election, budget: &SwapBudget) -> Result<DistanceValue> {
    check_comparable(e, f, true)?;
    let m = e.m();
    if m < 2 {
        return Err(Error::degenerate(
            "swap distance is undefined for fewer than two candidates".to_string(),
        ));
    }
    if m > budget.max_exact_m {
        return Err(Error::capability(format!(
            "exact isomorphic swap is limited to m <= {} (got {m})",
            budget.max_exact_m
        )));
    }
    let units = iso_swap_units(e, f);
    let den = (e.n() as u128) * (m as u128) * (m as u128 - 1);
    Ok(DistanceValue::from_ratio(2 * units as u128, den, MetricId::Swap))
}

/// Swap extension for different candidate counts: pads the smaller election
/// with never-ranked candidates, then runs the exact swap distance at the
/// larger size.
pub fn swap_tr_hat(e: &Election, f: &Election, budget: &SwapBudget) -> Result<DistanceValue> {
    check_comparable(e, f, false)?;
    let m = e.m().max(f.m());
    let ep;
    let fp;
    let (a, b) = if e.m() < m {
        ep = e.pad_candidates(m)?;
        (&ep, f)
    } else if f.m() < m {
        fp = f.pad_candidates(m)?;
        (e, &fp)
    } else {
        (e, f)
    };
    let mut v = iso_swap_distance(a, b, budget)?;
    v.metric = MetricId::SwapTr;
    Ok(v)
}

/// Swap extension for different candidate counts: averages the exact swap
/// distance over deletions of `|m2 - m1|`-subsets from the larger election.
/// Enumerates when the subset count fits the budget, otherwise samples.
pub fn swap_del_hat(
    e: &Election,
    f: &Election,
    cfg: &SwapDelConfig,
    budget: &SwapBudget,
) -> Result<DistanceValue> {
    check_comparable(e, f, false)?;
    let (small, large) = if e.m() <= f.m() { (e, f) } else { (f, e) };
    let m1 = small.m();
    let m2 = large.m();
    if m1 < 2 {
        return Err(Error::degenerate(
            "deletion swap needs at least two shared candidates".to_string(),
        ));
    }
    let delta = m2 - m1;
    if delta == 0 {
        let mut v = iso_swap_distance(small, large, budget)?;
        v.metric = MetricId::SwapDel;
        return Ok(v);
    }
    if m1 > budget.max_exact_m {
        return Err(Error::capability(format!(
            "exact isomorphic swap is limited to m <= {} (got {m1})",
            budget.max_exact_m
        )));
    }

    let total = crate::dap::combinations_count(m2 as u64, delta as u64);
    let exact_mode = matches!(total, Some(t) if t as usize <= cfg.max_subsets || t as usize <= cfg.mc_samples);

    if exact_mode {
        let mut num: u128 = 0;
        let mut count: u128 = 0;
        let mut subset: Vec<usize> = (0..delta).collect();
        loop {
            let reduced = large.delete_candidates(&subset)?;
            num += 2 * iso_swap_units(small, &reduced) as u128;
            count += 1;
            if !next_combination(&mut subset, m2) {
                break;
            }
        }
        let den = count * (small.n() as u128) * (m1 as u128) * (m1 as u128 - 1);
        let mut v = DistanceValue::from_ratio(num, den, MetricId::SwapDel);
        v.metric = MetricId::SwapDel;
        Ok(v)
    } else {
        let mut rng = seeding::election_rng(cfg.seed);
        let mut acc = 0.0f64;
        for _ in 0..cfg.mc_samples {
            let mut pool: Vec<usize> = (0..m2).collect();
            for pick in 0..delta {
                let j = rng.gen_range(pick..m2);
                pool.swap(pick, j);
            }
            let mut subset = pool[..delta].to_vec();
            subset.sort_unstable();
            let reduced = large.delete_candidates(&subset)?;
            let units = iso_swap_units(small, &reduced);
            acc += 2.0 * units as f64
                / ((small.n() as f64) * (m1 as f64) * (m1 as f64 - 1.0));
        }
        Ok(DistanceValue {
            value: acc / cfg.mc_samples as f64,
            metric: MetricId::SwapDel,
            exact: None,
        })
    }
}

fn next_combination(set: &mut [usize], n: usize) -> bool {
    let k = set.len();
    let mut pos = k;
    while pos > 0 {
        pos -= 1;
        if set[pos] != pos + n - k {
            set[pos] += 1;
            for q in (pos + 1)..k {
                set[q] = set[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Positionwise distance between equal-sized candidate sets: minimum-cost
/// bijection between frequency-matrix columns under the 1D Wasserstein cost.
/// Voter counts may differ.
pub fn positionwise_distance(e: &Election, f: &Election) -> Result<DistanceValue> {
    if e.m() != f.m() {
        return Err(Error::Size {
            context: "candidate counts",
            left: e.m(),
            right: f.m(),
        });
    }
    let fe = frequency_matrix(e)?;
    let ff = frequency_matrix(f)?;
    let (value, _) = matrix_wasserstein(&fe.columns(), &ff.columns())?;
    Ok(DistanceValue {
        value,
        metric: MetricId::Pos,
        exact: None,
    })
}

/// Positionwise distance between arbitrary candidate counts: both frequency
/// matrices are notionally stretched to `lcm(m1, m2)` columns and matched;
/// solved exactly as an `m1 x m2` transportation problem.
pub fn positionwise_hat(e: &Election, f: &Election, cfg: &PosHatConfig) -> Result<DistanceValue> {
    let m = e.m().max(f.m());
    if m > cfg.max_m {
        return Err(Error::capability(format!(
            "positionwise comparison is limited to m <= {} (got {m})",
            cfg.max_m
        )));
    }
    let fe = frequency_matrix(e)?;
    let ff = frequency_matrix(f)?;
    let (value, _) = matrix_wasserstein_transport(&fe.columns(), &ff.columns())?;
    Ok(DistanceValue {
        value,
        metric: MetricId::PosHat,
        exact: None,
    })
}

/// Norm used by [`feature_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureNorm {
    L1,
    L2,
}

/// Distance between per-election feature vectors.
pub fn feature_distance(a: &[f64], b: &[f64], norm: FeatureNorm) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            context: "feature vectors",
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("feature distance on empty vectors"));
    }
    Ok(match norm {
        FeatureNorm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        FeatureNorm::L2 => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
    })
}

/// Metric selector for [`pairwise_matrix`].
#[derive(Debug, Clone)]
pub enum MetricSpec {
    Swap(SwapBudget),
    SwapTr(SwapBudget),
    SwapDel(SwapDelConfig, SwapBudget),
    Pos,
    PosHat(PosHatConfig),
    /// DAP feature distance; the embedded seed is re-derived per election so
    /// results do not depend on evaluation order.
    Dap(DapConfig),
}

impl MetricSpec {
    pub fn metric_id(&self) -> MetricId {
        match self {
            MetricSpec::Swap(_) => MetricId::Swap,
            MetricSpec::SwapTr(_) => MetricId::SwapTr,
            MetricSpec::SwapDel(..) => MetricId::SwapDel,
            MetricSpec::Pos => MetricId::Pos,
            MetricSpec::PosHat(_) => MetricId::PosHat,
            MetricSpec::Dap(_) => MetricId::Dap,
        }
    }
}

/// Symmetric distance matrix with row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    metric: MetricId,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, values: Vec<f64>, metric: MetricId) -> Result<Self> {
        if labels.len() * labels.len() != values.len() {
            return Err(Error::Dimension {
                context: "distance matrix",
                left: labels.len() * labels.len(),
                right: values.len(),
            });
        }
        Ok(DistanceMatrix {
            labels,
            values,
            metric,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> MetricId {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest violation of symmetry or a non-zero diagonal entry.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(self.get(i, i).abs());
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest triangle defect `d(i,k) - d(i,j) - d(j,k)` over all triples;
    /// non-positive for a pseudometric.
    pub fn max_triangle_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max(self.get(i, k) - self.get(i, j) - self.get(j, k));
                }
            }
        }
        worst
    }

    /// CSV with a label header row and one labelled row per election.
    /// Values use 12 significant digits in scientific notation, so repeated
    /// runs serialise byte-identically.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for i in 0..self.n() {
            out.push_str(&self.labels[i]);
            for j in 0..self.n() {
                out.push(',');
                out.push_str(&crate::sig12(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty distance matrix file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.is_empty() || cols[0] != "label" {
            return Err(Error::parse(1, "header must start with 'label'"));
        }
        let labels: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
        let n = labels.len();
        if n == 0 {
            return Err(Error::parse(1, "no labels in header"));
        }
        let mut values = vec![0.0f64; n * n];
        let mut row = 0usize;
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if row >= n {
                return Err(Error::parse(idx + 1, format!("expected {n} rows")));
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != n + 1 {
                return Err(Error::parse(
                    idx + 1,
                    format!("expected {} fields, got {}", n + 1, parts.len()),
                ));
            }
            if parts[0] != labels[row] {
                return Err(Error::parse(
                    idx + 1,
                    format!("row label {} does not match header {}", parts[0], labels[row]),
                ));
            }
            for j in 0..n {
                values[row * n + j] = parts[j + 1].trim().parse::<f64>().map_err(|e| {
                    Error::parse(idx + 1, format!("bad number {:?}: {e}", parts[j + 1]))
                })?;
            }
            row += 1;
        }
        if row != n {
            return Err(Error::parse(0, format!("expected {n} rows, got {row}")));
        }
        DistanceMatrix::new(labels, values, MetricId::External)
    }
}

fn unique_labels(elections: &[Election]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(elections.len());
    for e in elections {
        // Commas would corrupt the CSV container.
        let base = e.label().replace(',', "_");
        let mut candidate = base.clone();
        let mut k = 2;
        while out.contains(&candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        out.push(candidate);
    }
    out
}

fn compute_cell(e: &Election, f: &Election, spec: &MetricSpec) -> Result<f64> {
    Ok(match spec {
        MetricSpec::Swap(b) => iso_swap_distance(e, f, b)?.value,
        MetricSpec::SwapTr(b) => swap_tr_hat(e, f, b)?.value,
        MetricSpec::SwapDel(cfg, b) => swap_del_hat(e, f, cfg, b)?.value,
        MetricSpec::Pos => positionwise_distance(e, f)?.value,
        MetricSpec::PosHat(cfg) => positionwise_hat(e, f, cfg)?.value,
        MetricSpec::Dap(_) => unreachable!("dap cells are precomputed per election"),
    })
}

/// All pairwise distances under one metric. Cells are farmed out to
/// `workers` threads in a fixed round-robin order; any cell error aborts the
/// run with the full list of failing pairs.
pub fn pairwise_matrix(
    elections: &[Election],
    spec: &MetricSpec,
    workers: usize,
) -> Result<DistanceMatrix> {
    if elections.is_empty() {
        return Err(Error::Empty("pairwise matrix of zero elections"));
    }
    let n = elections.len();
    let labels = unique_labels(elections);
    let workers = workers.max(1).min(n * n);
    let mut values = vec![0.0f64; n * n];
    let mut failures: Vec<CellFailure> = Vec::new();

    if let MetricSpec::Dap(cfg) = spec {
        // One triple per election, then cheap pairwise norms.
        let results: Vec<Vec<(usize, std::result::Result<[f64; 3], String>)>> =
            std::thread::scope(|s| {
                let mut handles = Vec::new();
                for w in 0..workers {
                    handles.push(s.spawn(move || {
                        let mut out = Vec::new();
                        let mut k = w;
                        while k < elections.len() {
                            let cfg_k = DapConfig {
                                strategy: reseed_strategy(cfg.strategy, k),
                            };
                            let r = dap_vector(&elections[k], &cfg_k)
                                .map(|v| v.as_array())
                                .map_err(|e| e.to_string());
                            out.push((k, r));
                            k += workers;
                        }
                        out
                    }));
                }
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
        let mut vectors: Vec<Option<[f64; 3]>> = vec![None; n];
        let mut flat: Vec<(usize, std::result::Result<[f64; 3], String>)> =
            results.into_iter().flatten().collect();
        flat.sort_by_key(|(k, _)| *k);
        for (k, r) in flat {
            match r {
                Ok(v) => vectors[k] = Some(v),
                Err(msg) => failures.push(CellFailure {
                    left: labels[k].clone(),
                    right: labels[k].clone(),
                    message: msg,
                }),
            }
        }
        if !failures.is_empty() {
            return Err(Error::Pairwise { failures });
        }
        for i in 0..n {
            for j in 0..n {
                let a = vectors[i].unwrap();
                let b = vectors[j].unwrap();
                let d: f64 = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                values[i * n + j] = d.sqrt();
            }
        }
        return DistanceMatrix::new(labels, values, MetricId::Dap);
    }

    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let results: Vec<Vec<(usize, std::result::Result<f64, String>)>> = std::thread::scope(|s| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let cells = &cells;
            handles.push(s.spawn(move || {
                let mut out = Vec::new();
                let mut k = w;
                while k < cells.len() {
                    let (i, j) = cells[k];
                    let r = compute_cell(&elections[i], &elections[j], spec)
                        .map_err(|e| e.to_string());
                    out.push((k, r));
                    k += workers;
                }
                out
            }));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut flat: Vec<(usize, std::result::Result<f64, String>)> =
        results.into_iter().flatten().collect();
    flat.sort_by_key(|(k, _)| *k);
    for (k, r) in flat {
        let (i, j) = cells[k];
        match r {
            Ok(v) => {
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
            Err(msg) => failures.push(CellFailure {
                left: labels[i].clone(),
                right: labels[j].clone(),
                message: msg,
            }),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Pairwise { failures });
    }
    DistanceMatrix::new(labels, values, spec.metric_id())
}

fn reseed_strategy(s: crate::dap::EmkStrategy, index: usize) -> crate::dap::EmkStrategy {
    match s {
        crate::dap::EmkStrategy::Exact => s,
        crate::dap::EmkStrategy::LocalSearch { restarts, seed } => {
            crate::dap::EmkStrategy::LocalSearch {
                restarts,
                seed: seeding::derive(seed, index as u64),
            }
        }
    }
}
