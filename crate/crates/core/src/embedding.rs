//! 2D embeddings of distance matrices.
//!
//! Two embedders with the same interface: SMACOF-style majorized MDS on the
//! raw stress `Σ (|p_i - p_j| - d_ij)²`, and a Kamada–Kawai style relaxation
//! of the weighted stress `Σ (|p_i - p_j| - d_ij)² / d_ij²`. Both start from
//! seeded random layouts, run a fixed number of deterministic restarts, and
//! keep the lowest-stress result. Coordinates are only meaningful up to
//! rigid motion; compare pairwise distances, not raw points.

use crate::distances::DistanceMatrix;
use crate::error::Error;
use crate::seeding;
use crate::Result;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedAlgorithm {
    Mds,
    Kk,
}

impl EmbedAlgorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmbedAlgorithm::Mds => "mds",
            EmbedAlgorithm::Kk => "kk",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmbedConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl EmbedConfig {
    pub fn mds_defaults() -> Self {
        EmbedConfig {
            max_iter: 500,
            tol: 1e-7,
            seed: 0,
            restarts: 3,
        }
    }

    pub fn kk_defaults() -> Self {
        EmbedConfig {
            max_iter: 1000,
            tol: 1e-7,
            seed: 0,
            restarts: 3,
        }
    }
}

/// A finished 2D layout. `final_stress` is the embedder's own objective on
/// `points` (raw stress for MDS, weighted stress for KK); `stress_history`
/// is the objective after every accepted iteration of the winning restart.
#[derive(Debug, Clone)]
pub struct Embedding2D {
    pub labels: Vec<String>,
    pub points: Vec<(f64, f64)>,
    pub final_stress: f64,
    pub algorithm: EmbedAlgorithm,
    pub iterations_used: usize,
    pub stress_history: Vec<f64>,
}

impl Embedding2D {
    /// `label,x,y` rows, 12 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label,x,y\n");
        for (label, (x, y)) in self.labels.iter().zip(&self.points) {
            out.push_str(label);
            out.push(',');
            out.push_str(&crate::sig12(*x));
            out.push(',');
            out.push_str(&crate::sig12(*y));
            out.push('\n');
        }
        out
    }

    /// Reads coordinates written by [`Embedding2D::to_csv_string`]. The
    /// stress fields are not serialised; they come back as zero.
    pub fn from_csv_str(text: &str) -> Result<(Vec<String>, Vec<(f64, f64)>)> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "label,x,y" => {}
            _ => return Err(Error::parse(1, "expected header 'label,x,y'")),
        }
        let mut labels = Vec::new();
        let mut points = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::parse(idx + 1, format!("expected 3 fields, got {}", parts.len())));
            }
            let x: f64 = parts[1].trim().parse().map_err(|e| {
                Error::parse(idx + 1, format!("bad x {:?}: {e}", parts[1]))
            })?;
            let y: f64 = parts[2].trim().parse().map_err(|e| {
                Error::parse(idx + 1, format!("bad y {:?}: {e}", parts[2]))
            })?;
            labels.push(parts[0].to_string());
            points.push((x, y));
        }
        Ok((labels, points))
    }
}

/// Scales all entries so the maximum becomes 1.
pub fn normalize_matrix(d: &DistanceMatrix) -> Result<DistanceMatrix> {
    let max = d.max_value();
    if max <= 0.0 {
        return Err(Error::degenerate(
            "cannot normalize an all-zero distance matrix".to_string(),
        ));
    }
    let values: Vec<f64> = d.values().iter().map(|v| v / max).collect();
    DistanceMatrix::new(d.labels().to_vec(), values, d.metric())
}

fn check_embeddable(d: &DistanceMatrix) -> Result<()> {
    let n = d.n();
    if n == 0 {
        return Err(Error::Empty("embedding of an empty matrix"));
    }
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            if !v.is_finite() {
                return Err(Error::invalid(format!(
                    "distance matrix entry ({i},{j}) is not finite"
                )));
            }
        }
    }
    for i in 0..n {
        if d.get(i, i).abs() > 1e-12 {
            return Err(Error::invalid(format!("non-zero diagonal at {i}")));
        }
        for j in (i + 1)..n {
            if (d.get(i, j) - d.get(j, i)).abs() > 1e-9 {
                return Err(Error::invalid(format!("asymmetric entries at ({i},{j})")));
            }
        }
    }
    Ok(())
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt()
}

/// `Σ_{i<j} (|p_i - p_j| - d_ij)²`.
pub fn raw_stress(d: &DistanceMatrix, points: &[(f64, f64)]) -> f64 {
    let n = d.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = dist(points[i], points[j]) - d.get(i, j);
            s += e * e;
        }
    }
    s
}

/// `Σ_{i<j} (|p_i - p_j| - d_ij)² / max(d_ij, 1e-9)²`.
pub fn weighted_stress(d: &DistanceMatrix, points: &[(f64, f64)]) -> f64 {
    let n = d.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = 1.0 / d.get(i, j).max(1e-9).powi(2);
            let e = dist(points[i], points[j]) - d.get(i, j);
            s += w * e * e;
        }
    }
    s
}

/// Kruskal stress-1: `sqrt(Σ (|p_i - p_j| - d_ij)² / Σ d_ij²)`, the residual
/// as a fraction of the target distances.
pub fn kruskal_stress1(d: &DistanceMatrix, points: &[(f64, f64)]) -> f64 {
    let n = d.n();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = dist(points[i], points[j]) - d.get(i, j);
            num += e * e;
            den += d.get(i, j) * d.get(i, j);
        }
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

fn random_layout(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = seeding::election_rng(seed);
    (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect()
}

struct RunResult {
    points: Vec<(f64, f64)>,
    history: Vec<f64>,
    iterations: usize,
}

fn smacof_run(d: &DistanceMatrix, cfg: &EmbedConfig, seed: u64) -> RunResult {
    let n = d.n();
    let mut x = random_layout(n, seed);
    let mut history = vec![raw_stress(d, &x)];
    let mut iterations = 0;
    for _ in 0..cfg.max_iter {
        // Guttman transform: x' = B(x) x / n with b_ij = -d_ij / |x_i - x_j|.
        let mut next = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            let mut diag = 0.0;
            let mut acc = (0.0f64, 0.0f64);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = dist(x[i], x[j]);
                let b = if dij > 1e-12 { -d.get(i, j) / dij } else { 0.0 };
                diag -= b;
                acc.0 += b * x[j].0;
                acc.1 += b * x[j].1;
            }
            next[i] = ((diag * x[i].0 + acc.0) / n as f64, (diag * x[i].1 + acc.1) / n as f64);
        }
        x = next;
        let s = raw_stress(d, &x);
        let prev = *history.last().unwrap();
        history.push(s);
        iterations += 1;
        if prev <= 0.0 || (prev - s) < cfg.tol * prev {
            break;
        }
    }
    RunResult { points: x, history, iterations }
}

fn kk_run(d: &DistanceMatrix, cfg: &EmbedConfig, seed: u64) -> RunResult {
    let n = d.n();
    let mut x = random_layout(n, seed);
    let w = |i: usize, j: usize| 1.0 / d.get(i, j).max(1e-9).powi(2);
    let node_energy = |x: &[(f64, f64)], i: usize, p: (f64, f64)| -> f64 {
        let mut e = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let r = dist(p, x[j]) - d.get(i, j);
            e += w(i, j) * r * r;
        }
        e
    };
    let mut total = weighted_stress(d, &x);
    let mut history = vec![total];
    let mut iterations = 0;
    for _ in 0..cfg.max_iter {
        // Gradient of the weighted stress at every node; move the worst one.
        let mut best: Option<(f64, usize, (f64, f64))> = None;
        for i in 0..n {
            let mut g = (0.0f64, 0.0f64);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dij = dist(x[i], x[j]);
                if dij < 1e-12 {
                    continue;
                }
                let k = 2.0 * w(i, j) * (dij - d.get(i, j)) / dij;
                g.0 += k * (x[i].0 - x[j].0);
                g.1 += k * (x[i].1 - x[j].1);
            }
            let norm = (g.0 * g.0 + g.1 * g.1).sqrt();
            if best.map_or(true, |(bn, _, _)| norm > bn) {
                best = Some((norm, i, g));
            }
        }
        let (norm, i, g) = best.unwrap();
        if norm < cfg.tol {
            break;
        }
        let before = node_energy(&x, i, x[i]);
        let mut step = 1.0 / norm.max(1.0);
        let mut moved = false;
        for _ in 0..40 {
            let cand = (x[i].0 - step * g.0, x[i].1 - step * g.1);
            let after = node_energy(&x, i, cand);
            if after < before {
                x[i] = cand;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
        // Recompute rather than accumulate node-energy deltas: with
        // near-zero target distances the per-pair weights reach 1e18 and
        // incremental updates cancel catastrophically.
        total = weighted_stress(d, &x);
        history.push(total);
        iterations += 1;
    }
    RunResult { points: x, history, iterations }
}

fn embed(
    d: &DistanceMatrix,
    cfg: &EmbedConfig,
    algorithm: EmbedAlgorithm,
) -> Result<Embedding2D> {
    check_embeddable(d)?;
    let restarts = cfg.restarts.max(1);
    let runs: Vec<RunResult> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..restarts)
            .map(|r| {
                let seed = seeding::derive(cfg.seed, r as u64);
                s.spawn(move || match algorithm {
                    EmbedAlgorithm::Mds => smacof_run(d, cfg, seed),
                    EmbedAlgorithm::Kk => kk_run(d, cfg, seed),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    // Lowest final stress wins; ties go to the earliest restart.
    let mut pick = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.history.last().unwrap() < runs[pick].history.last().unwrap() && r != pick {
            pick = r;
        }
    }
    let win = &runs[pick];
    Ok(Embedding2D {
        labels: d.labels().to_vec(),
        points: win.points.clone(),
        final_stress: *win.history.last().unwrap(),
        algorithm,
        iterations_used: win.iterations,
        stress_history: win.history.clone(),
    })
}

/// SMACOF MDS on the raw stress.
pub fn mds_embed(d: &DistanceMatrix, cfg: &EmbedConfig) -> Result<Embedding2D> {
    embed(d, cfg, EmbedAlgorithm::Mds)
}

/// Kamada–Kawai style relaxation on the weighted stress.
pub fn kk_embed(d: &DistanceMatrix, cfg: &EmbedConfig) -> Result<Embedding2D> {
    embed(d, cfg, EmbedAlgorithm::Kk)
}
