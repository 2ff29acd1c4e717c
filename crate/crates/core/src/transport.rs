//! One-dimensional Wasserstein machinery and the two discrete solvers built
//! on it: minimum-cost bijections between equal column sets (assignment) and
//! the transportation formulation that compares column sets of different
//! sizes without materialising stretched copies.
//!
//! A vector `x` of length `m` is read as a density on `(0, 1]` that is
//! constant on each interval `((i-1)/m, i/m]` with value `m * x_i / sum(x)`.
//! Distances between vectors of different lengths are therefore meaningful:
//! both densities live on the same unit interval.

use crate::error::Error;
use crate::Result;

/// Exact "earth mover" distance between two step densities on `(0, 1]`:
/// the integral of `|A - B|` where `A`, `B` are the CDFs.
///
/// Inputs are normalised internally; lengths may differ. The integral is
/// evaluated segment by segment on the union of the two breakpoint grids,
/// splitting any segment where `A - B` changes sign, so the result is exact
/// up to floating-point rounding.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    let wa = normalized(a, "wasserstein_1d left")?;
    let wb = normalized(b, "wasserstein_1d right")?;
    let ma = wa.len();
    let mb = wb.len();

    // Prefix sums give exact CDF values at each measure's own breakpoints.
    let prefix = |w: &[f64]| -> Vec<f64> {
        let mut p = Vec::with_capacity(w.len() + 1);
        let mut acc = 0.0;
        p.push(0.0);
        for &x in w {
            acc += x;
            p.push(acc);
        }
        p
    };
    let pa = prefix(&wa);
    let pb = prefix(&wb);

    let eval = |p: &[f64], w: &[f64], idx: usize, x: f64| -> f64 {
        // CDF inside interval idx (0-based) of a measure with w.len() bins.
        let m = w.len() as f64;
        let left = idx as f64 / m;
        p[idx] + w[idx] * m * (x - left)
    };

    let mut total = 0.0;
    let mut ia = 0usize; // current bin of a
    let mut ib = 0usize;
    let mut x = 0.0f64;
    while ia < ma && ib < mb {
        // Next breakpoint: compare (ia+1)/ma with (ib+1)/mb exactly.
        let na = (ia + 1) * mb;
        let nb = (ib + 1) * ma;
        let (x1, adv_a, adv_b) = if na < nb {
            ((ia + 1) as f64 / ma as f64, true, false)
        } else if nb < na {
            ((ib + 1) as f64 / mb as f64, false, true)
        } else {
            ((ia + 1) as f64 / ma as f64, true, true)
        };
        let d0 = eval(&pa, &wa, ia, x) - eval(&pb, &wb, ib, x);
        let d1_a = if adv_a { pa[ia + 1] } else { eval(&pa, &wa, ia, x1) };
        let d1_b = if adv_b { pb[ib + 1] } else { eval(&pb, &wb, ib, x1) };
        total += segment_area(d0, d1_a - d1_b, x1 - x);
        x = x1;
        if adv_a {
            ia += 1;
        }
        if adv_b {
            ib += 1;
        }
    }
    Ok(total)
}

/// Area under `|d|` where `d` interpolates linearly from `d0` to `d1` over a
/// segment of width `dx`. Splits at the root on sign change.
fn segment_area(d0: f64, d1: f64, dx: f64) -> f64 {
    if dx <= 0.0 {
        return 0.0;
    }
    if d0 == 0.0 && d1 == 0.0 {
        return 0.0;
    }
    if d0 >= 0.0 && d1 >= 0.0 || d0 <= 0.0 && d1 <= 0.0 {
        (d0.abs() + d1.abs()) * 0.5 * dx
    } else {
        let t = dx * d0.abs() / (d0.abs() + d1.abs());
        0.5 * (d0.abs() * t + d1.abs() * (dx - t))
    }
}

/// `sum_i |prefix_a(i) - prefix_b(i)|` for two probability vectors of equal
/// length. A combinatorial proxy for `m * wasserstein_1d`: it brackets that
/// quantity within a factor-two band but is not a scaled copy of it.
pub fn emd_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            context: "emd_1d",
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("emd_1d on zero-length vectors"));
    }
    for (name, v) in [("left", a), ("right", b)] {
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::degenerate(format!(
                "emd_1d {name} vector sums to {sum}, expected 1"
            )));
        }
        if v.iter().any(|&x| x < -1e-12) {
            return Err(Error::degenerate(format!("emd_1d {name} vector has negative entries")));
        }
    }
    let mut acc = 0.0;
    let mut diff = 0.0;
    for i in 0..a.len() {
        diff += a[i] - b[i];
        acc += diff.abs();
    }
    Ok(acc)
}

/// Repeats each column `s / cols.len()` times: column `i` (1-based) of the
/// result is column `ceil(i / k)` of the input. The entries themselves are
/// untouched; only the multiset of columns grows.
pub fn stretch_columns(cols: &[Vec<f64>], s: usize) -> Result<Vec<Vec<f64>>> {
    if cols.is_empty() {
        return Err(Error::Empty("stretch of a matrix with no columns"));
    }
    if s == 0 || s % cols.len() != 0 {
        return Err(Error::invalid(format!(
            "stretch target {s} is not a positive multiple of {}",
            cols.len()
        )));
    }
    let k = s / cols.len();
    let mut out = Vec::with_capacity(s);
    for col in cols {
        for _ in 0..k {
            out.push(col.clone());
        }
    }
    Ok(out)
}

/// How mass moves between column sets in [`matrix_wasserstein`] and
/// [`matrix_wasserstein_transport`].
#[derive(Debug, Clone, PartialEq)]
pub enum TransportPlan {
    /// `plan[i] = j`: left column `i` is matched to right column `j`.
    Assignment(Vec<usize>),
    /// Fractional matching; masses over all edges sum to 1.
    Flow(Vec<FlowEdge>),
}

/// One edge of a fractional transport plan.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    /// Fraction of total mass carried, in `(0, 1]`.
    pub mass: f64,
}

impl TransportPlan {
    /// Checks supply/demand conservation: each of the `m1` left columns emits
    /// `1/m1`, each of the `m2` right columns absorbs `1/m2`, within `tol`.
    pub fn conserves_mass(&self, m1: usize, m2: usize, tol: f64) -> bool {
        match self {
            TransportPlan::Assignment(p) => {
                if m1 != m2 || p.len() != m1 {
                    return false;
                }
                let mut seen = vec![false; m2];
                for &j in p {
                    if j >= m2 || seen[j] {
                        return false;
                    }
                    seen[j] = true;
                }
                true
            }
            TransportPlan::Flow(edges) => {
                let mut out = vec![0.0; m1];
                let mut inn = vec![0.0; m2];
                for e in edges {
                    if e.from >= m1 || e.to >= m2 || e.mass <= 0.0 {
                        return false;
                    }
                    out[e.from] += e.mass;
                    inn[e.to] += e.mass;
                }
                out.iter().all(|&x| (x - 1.0 / m1 as f64).abs() <= tol)
                    && inn.iter().all(|&x| (x - 1.0 / m2 as f64).abs() <= tol)
            }
        }
    }
}

/// Minimum over bijections `sigma` of `(1/s) * sum_i W1(x_i, y_sigma(i))`
/// where `s` is the common column count. Cost ties are resolved by the
/// deterministic scan order of the solver, so repeated runs give identical
/// plans.
pub fn matrix_wasserstein(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<(f64, TransportPlan)> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            context: "matrix_wasserstein column counts",
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Empty("matrix_wasserstein on zero columns"));
    }
    let s = x.len();
    let mut cost = vec![0.0f64; s * s];
    for i in 0..s {
        for j in 0..s {
            cost[i * s + j] = wasserstein_1d(&x[i], &y[j])?;
        }
    }
    let assign = assignment_f64(&cost, s);
    let total: f64 = (0..s).map(|i| cost[i * s + assign[i]]).sum();
    Ok((total / s as f64, TransportPlan::Assignment(assign)))
}

/// Equal to [`matrix_wasserstein`] applied to both column sets stretched to
/// `lcm(m1, m2)` columns, but solved as an `m1 x m2` transportation problem:
/// supplies `1/m1`, demands `1/m2`, edge costs `W1(x_i, y_j)`.
///
/// The equivalence is exact because every basic solution of this
/// transportation polytope has flows in multiples of `1/lcm(m1, m2)`, i.e.
/// corresponds to an assignment of stretched copies.
pub fn matrix_wasserstein_transport(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
) -> Result<(f64, TransportPlan)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("matrix_wasserstein_transport on zero columns"));
    }
    let m1 = x.len();
    let m2 = y.len();
    let s = lcm(m1 as u64, m2 as u64);
    let k1 = (s / m1 as u64) as i64;
    let k2 = (s / m2 as u64) as i64;
    let mut cost = vec![0.0f64; m1 * m2];
    for i in 0..m1 {
        for j in 0..m2 {
            cost[i * m2 + j] = wasserstein_1d(&x[i], &y[j])?;
        }
    }
    let (unit_cost, flows) = transportation(&cost, m1, m2, k1, k2);
    let edges = flows
        .into_iter()
        .map(|(i, j, units)| FlowEdge {
            from: i,
            to: j,
            mass: units as f64 / s as f64,
        })
        .collect();
    Ok((unit_cost / s as f64, TransportPlan::Flow(edges)))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn normalized(v: &[f64], what: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Empty("wasserstein on a zero-length vector"));
    }
    if v.iter().any(|&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::degenerate(format!("{what}: negative or non-finite entry")));
    }
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 {
        return Err(Error::degenerate(format!("{what}: entries sum to zero")));
    }
    Ok(v.iter().map(|&x| x.max(0.0) / sum).collect())
}

macro_rules! jv_solver {
    ($name:ident, $t:ty, $inf:expr) => {
        /// Dense shortest-augmenting-path assignment (Jonker-Volgenant
        /// flavour): minimises `sum_i cost[i][p(i)]` over permutations `p`.
        /// Returns `p` as a row-to-column map. `O(n^3)`.
        pub(crate) fn $name(cost: &[$t], n: usize) -> Vec<usize> {
            assert_eq!(cost.len(), n * n);
            let inf: $t = $inf;
            // 1-based arrays; p[j] = row matched to column j, 0 = free.
            let mut u_: Vec<$t> = vec![Default::default(); n + 1];
            let mut v: Vec<$t> = vec![Default::default(); n + 1];
            let mut p = vec![0usize; n + 1];
            let mut way = vec![0usize; n + 1];
            for i in 1..=n {
                p[0] = i;
                let mut j0 = 0usize;
                let mut minv: Vec<$t> = vec![inf; n + 1];
                let mut used = vec![false; n + 1];
                loop {
                    used[j0] = true;
                    let i0 = p[j0];
                    let mut delta: $t = inf;
                    let mut j1 = 0usize;
                    for j in 1..=n {
                        if !used[j] {
                            let cur = cost[(i0 - 1) * n + (j - 1)] - u_[i0] - v[j];
                            if cur < minv[j] {
                                minv[j] = cur;
                                way[j] = j0;
                            }
                            if minv[j] < delta {
                                delta = minv[j];
                                j1 = j;
                            }
                        }
                    }
                    for j in 0..=n {
                        if used[j] {
                            u_[p[j]] = u_[p[j]] + delta;
                            v[j] = v[j] - delta;
                        } else {
                            minv[j] = minv[j] - delta;
                        }
                    }
                    j0 = j1;
                    if p[j0] == 0 {
                        break;
                    }
                }
                loop {
                    let j1 = way[j0];
                    p[j0] = p[j1];
                    j0 = j1;
                    if j0 == 0 {
                        break;
                    }
                }
            }
            let mut row_to_col = vec![0usize; n];
            for j in 1..=n {
                if p[j] > 0 {
                    row_to_col[p[j] - 1] = j - 1;
                }
            }
            row_to_col
        }
    };
}

jv_solver!(assignment_f64, f64, f64::INFINITY);
jv_solver!(assignment_i64, i64, i64::MAX / 4);

/// Exact minimum of `sum cost[i][p(i)]` over permutations, for integer costs.
pub(crate) fn assignment_cost_i64(cost: &[i64], n: usize) -> (Vec<usize>, i64) {
    let p = assignment_i64(cost, n);
    let total = (0..n).map(|i| cost[i * n + p[i]]).sum();
    (p, total)
}

/// Successive-shortest-paths transportation solver on a dense bipartite
/// graph. Supplies are `supply_units` per source, demands `demand_units` per
/// sink (`m1 * supply_units == m2 * demand_units` is the caller's job).
/// Returns total cost in cost-per-unit terms plus the support of the flow.
///
/// Interior edges are uncapacitated, so every augmentation saturates a
/// source or a sink; the number of Dijkstra rounds is at most `m1 + m2`.
pub(crate) fn transportation(
    cost: &[f64],
    m1: usize,
    m2: usize,
    supply_units: i64,
    demand_units: i64,
) -> (f64, Vec<(usize, usize, i64)>) {
    debug_assert_eq!(cost.len(), m1 * m2);
    debug_assert_eq!(m1 as i64 * supply_units, m2 as i64 * demand_units);
    let n = m1 + m2;
    let mut flow = vec![0i64; m1 * m2];
    let mut supply = vec![supply_units; m1];
    let mut demand = vec![demand_units; m2];
    let mut pot = vec![0.0f64; n];
    let mut remaining: i64 = m1 as i64 * supply_units;

    while remaining > 0 {
        // Multi-source Dijkstra over sources 0..m1 and sinks m1..m1+m2 with
        // reduced costs; dense implementation.
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut done = vec![false; n];
        for i in 0..m1 {
            if supply[i] > 0 {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < m1 {
                let i = u;
                for j in 0..m2 {
                    let v = m1 + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost[i * m2 + j] + pot[u] - pot[v]).max(0.0);
                    if dist[u] + rc < dist[v] {
                        dist[v] = dist[u] + rc;
                        prev[v] = u;
                    }
                }
            } else {
                let j = u - m1;
                for i in 0..m1 {
                    if done[i] || flow[i * m2 + j] == 0 {
                        continue;
                    }
                    let rc = (-cost[i * m2 + j] + pot[u] - pot[i]).max(0.0);
                    if dist[u] + rc < dist[i] {
                        dist[i] = dist[u] + rc;
                        prev[i] = u;
                    }
                }
            }
        }

        // Cheapest reachable sink with demand left; lowest index on ties.
        let mut sink = usize::MAX;
        let mut best = f64::INFINITY;
        for j in 0..m2 {
            if demand[j] > 0 && dist[m1 + j] < best {
                best = dist[m1 + j];
                sink = m1 + j;
            }
        }
        assert!(sink != usize::MAX, "transportation ran out of reachable sinks");

        // Bottleneck along the path: source supply, sink demand, reverse arcs.
        let mut amt = demand[sink - m1];
        let mut v = sink;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= m1 {
                // reverse arc sink u -> source v carries flow[v][u - m1]
                amt = amt.min(flow[v * m2 + (u - m1)]);
            }
            v = u;
        }
        amt = amt.min(supply[v]);
        debug_assert!(amt > 0);

        // Apply.
        supply[v] -= amt;
        demand[sink - m1] -= amt;
        remaining -= amt;
        let mut v2 = sink;
        while prev[v2] != usize::MAX {
            let u = prev[v2];
            if u < m1 {
                flow[u * m2 + (v2 - m1)] += amt;
            } else {
                flow[v2 * m2 + (u - m1)] -= amt;
            }
            v2 = u;
        }

        for v in 0..n {
            if dist[v].is_finite() {
                pot[v] += dist[v];
            }
        }
    }

    let mut total = 0.0;
    let mut edges = Vec::new();
    for i in 0..m1 {
        for j in 0..m2 {
            let f = flow[i * m2 + j];
            if f > 0 {
                total += f as f64 * cost[i * m2 + j];
                edges.push((i, j, f));
            }
        }
    }
    (total, edges)
}
