//! Command-line driver: generate election datasets, compute pairwise
//! distance matrices, report DAP features, embed matrices into the plane,
//! render SVG maps, and run robustness sweeps.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 capability
//! error (a request the implementation deliberately refuses, such as exact
//! swap distances past the branch-and-bound cap).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use elmap_core::cultures::{
    build_dataset, sample_election, truncate, CultureKind, CultureSpec, DatasetRecipe,
    EuclideanShape, GsTree, TruncationMethod, TruncationSpec,
};
use elmap_core::dap::{dap_vector, DapConfig, EmkStrategy};
use elmap_core::distances::{
    pairwise_matrix, positionwise_hat, DistanceMatrix, MetricSpec, PosHatConfig, SwapBudget,
    SwapDelConfig,
};
use elmap_core::embedding::{
    kk_embed, kruskal_stress1, mds_embed, normalize_matrix, EmbedAlgorithm, EmbedConfig,
    Embedding2D,
};
use elmap_core::preflib::{parse_preflib, write_preflib, PreflibHeader};
use elmap_core::{seeding, sig12, Election, Error};

#[derive(Parser)]
#[command(
    name = "elmap",
    version,
    about = "Maps of elections: dataset generation, distances, embeddings, SVG maps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset recipe or a single culture sample as preflib files.
    Generate(GenerateArgs),
    /// Compute a pairwise distance matrix over a directory of elections.
    Matrix(MatrixArgs),
    /// Per-election diversity/agreement/polarization feature report.
    DapReport(DapReportArgs),
    /// Embed a distance matrix into 2D coordinates.
    Embed(EmbedArgs),
    /// Render a coordinates file as an SVG scatter map.
    Render(RenderArgs),
    /// Distance-vs-size or distance-vs-truncation robustness curves.
    Robustness(RobustnessArgs),
    /// Check a directory of preflib files or echo a parsed config file.
    Validate(ValidateArgs),
}

/// Failure classes carrying the process exit code.
enum Failure {
    Usage(String),
    Input(String),
    Capability(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Capability(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Capability(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::Capability(_) => Failure::Capability(e.to_string()),
            Error::Pairwise { failures } => {
                let mut msg = format!("{} cell(s) failed:", failures.len());
                for f in failures.iter().take(10) {
                    let _ = write!(msg, "\n  {} vs {}: {}", f.left, f.right, f.message);
                }
                if failures.len() > 10 {
                    let _ = write!(msg, "\n  ... and {} more", failures.len() - 10);
                }
                Failure::Input(msg)
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            }
        }
    };
    let result = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Matrix(a) => cmd_matrix(a),
        Cmd::DapReport(a) => cmd_dap_report(a),
        Cmd::Embed(a) => cmd_embed(a),
        Cmd::Render(a) => cmd_render(a),
        Cmd::Robustness(a) => cmd_robustness(a),
        Cmd::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

// ---------------------------------------------------------------------------
// Config files: flat ordered `key = value` lines, merged under CLI flags.

struct ConfigFile {
    entries: Vec<(String, String)>,
}

impl ConfigFile {
    fn empty() -> Self {
        ConfigFile { entries: Vec::new() }
    }

    fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|m| Failure::Usage(format!("{}: {m}", path.display())))
    }

    fn parse(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", i + 1));
            };
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(ConfigFile { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// CLI flag wins; otherwise the config value, parsed.
    fn resolve<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Failure::Usage(format!("config key {key}: bad value {raw:?}: {e}"))),
        }
    }
}

fn load_optional_config(path: &Option<PathBuf>) -> Result<ConfigFile, Failure> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::empty()),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("missing required {what}")))
}

// ---------------------------------------------------------------------------
// Shared input plumbing.

/// Reads every `.soc`/`.soi` file in a directory, sorted by file name.
fn read_election_dir(dir: &Path) -> Result<Vec<Election>, Failure> {
    let mut files: Vec<PathBuf> = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("cannot read directory {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| Failure::Input(format!("directory walk: {e}")))?;
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("soc") | Some("soi")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::Input(format!(
            "no .soc/.soi files in {}",
            dir.display()
        )));
    }
    let mut elections = Vec::with_capacity(files.len());
    for path in &files {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let parsed = parse_preflib(&text)
            .map_err(|e| prefix_failure(path, e))?;
        let mut election = parsed.election;
        if election.label().is_empty() {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            election = election.with_label(stem);
        }
        elections.push(election);
    }
    Ok(elections)
}

fn prefix_failure(path: &Path, e: Error) -> Failure {
    let f = Failure::from(e);
    let msg = format!("{}: {}", path.display(), f.message());
    match f {
        Failure::Capability(_) => Failure::Capability(msg),
        Failure::Usage(_) => Failure::Usage(msg),
        Failure::Input(_) => Failure::Input(msg),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Failure::Input(format!("mkdir {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| Failure::Input(format!("write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// generate

#[derive(Args)]
struct GenerateArgs {
    /// Flat key=value config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset recipe: basic, size_oriented, truncation_oriented,
    /// comprehensive, random_drop.
    #[arg(long)]
    recipe: Option<String>,
    /// Single culture to sample instead of a recipe (e.g. mallows, urn, ic).
    #[arg(long)]
    culture: Option<String>,
    /// Candidate count for --culture.
    #[arg(long)]
    m: Option<usize>,
    /// Voter count for --culture.
    #[arg(long)]
    n: Option<usize>,
    /// Mallows dispersion in [0,1] (only with --culture mallows).
    #[arg(long = "norm-phi")]
    norm_phi: Option<f64>,
    /// Urn contagion parameter (only with --culture urn).
    #[arg(long)]
    alpha: Option<f64>,
    /// Master seed; reruns with the same seed are byte-identical.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    let cfg = load_optional_config(&a.config)?;
    let recipe = cfg.resolve(a.recipe, "recipe")?;
    let culture = cfg.resolve(a.culture, "culture")?;
    let seed = require(cfg.resolve(a.seed, "seed")?, "--seed")?;
    let out = require(cfg.resolve(a.out, "out")?, "--out")?;
    let m = cfg.resolve(a.m, "m")?;
    let n = cfg.resolve(a.n, "n")?;
    let norm_phi = cfg.resolve(a.norm_phi, "norm-phi")?;
    let alpha = cfg.resolve(a.alpha, "alpha")?;

    let elements = match (&recipe, &culture) {
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "--recipe and --culture are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(Failure::Usage("one of --recipe/--culture is required".into()))
        }
        (Some(name), None) => {
            let recipe = DatasetRecipe::from_name(name)
                .ok_or_else(|| Failure::Usage(format!("unknown recipe {name:?}")))?;
            build_dataset(recipe, seed).map_err(Failure::from)?
        }
        (None, Some(name)) => {
            let kind = parse_culture_kind(name, norm_phi, alpha)?;
            let m = require(m, "--m (required with --culture)")?;
            let n = require(n, "--n (required with --culture)")?;
            let spec = CultureSpec { kind, m, n, seed };
            let election = sample_election(&spec)
                .map_err(Failure::from)?
                .with_label(format!("{}_{m:02}x{n:03}_s{seed}", kind.code()));
            vec![elmap_core::cultures::DatasetElection {
                election,
                culture: kind.code().to_string(),
                params: kind.params_string(),
                truncation: "none".to_string(),
            }]
        }
    };

    fs::create_dir_all(&out)
        .map_err(|e| Failure::Input(format!("mkdir {}: {e}", out.display())))?;
    let mut manifest_rows = Vec::with_capacity(elements.len());
    let mut style_rows = Vec::with_capacity(elements.len());
    for el in &elements {
        let e = &el.election;
        let ext = if e.is_complete() { "soc" } else { "soi" };
        let file_name = format!("{}.{ext}", e.label());
        let header = PreflibHeader {
            file_name: file_name.clone(),
            title: e.label().to_string(),
            ..PreflibHeader::default()
        };
        write_file(&out.join(&file_name), &write_preflib(e, &header))?;
        manifest_rows.push((
            e.label().to_string(),
            format!(
                "{},{},{},{},{}",
                e.label(),
                el.culture,
                el.params.replace(',', ";"),
                e.m(),
                e.n()
            ),
        ));
        style_rows.push((
            e.label().to_string(),
            format!(
                "{},{},{},{},3",
                e.label(),
                el.culture,
                culture_color(&el.culture),
                truncation_marker(&el.truncation),
            ),
        ));
    }
    merge_csv_rows(&out.join("manifest.csv"), "label,culture,params,m,n", manifest_rows)?;
    merge_csv_rows(&out.join("style.csv"), "label,group,color,marker,size", style_rows)?;
    println!("generated {} elections into {}", elements.len(), out.display());
    Ok(())
}

/// Upserts label-keyed CSV rows so the manifest always describes the whole
/// directory: existing rows survive, matching labels are replaced, and the
/// result is sorted by label.
fn merge_csv_rows(
    path: &Path,
    header: &str,
    new_rows: Vec<(String, String)>,
) -> Result<(), Failure> {
    let mut by_label: std::collections::BTreeMap<String, String> = std::collections::BTreeMap::new();
    if path.exists() {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() || line == header {
                continue;
            }
            let label = line.split(',').next().unwrap_or("").to_string();
            by_label.insert(label, line.to_string());
        }
    }
    for (label, row) in new_rows {
        by_label.insert(label, row);
    }
    let mut out = String::with_capacity(by_label.len() * 32 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in by_label.values() {
        out.push_str(row);
        out.push('\n');
    }
    write_file(path, &out)
}

fn parse_culture_kind(
    name: &str,
    norm_phi: Option<f64>,
    alpha: Option<f64>,
) -> Result<CultureKind, Failure> {
    // Robustness lists allow an inline parameter: "mallows:0.5".
    let (name, inline) = match name.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p
                .parse()
                .map_err(|e| Failure::Usage(format!("bad culture parameter {p:?}: {e}")))?;
            (n, Some(v))
        }
        None => (name, None),
    };
    let kind = match name {
        "ic" => CultureKind::Impartial,
        "mallows" => CultureKind::Mallows {
            norm_phi: inline
                .or(norm_phi)
                .ok_or_else(|| Failure::Usage("mallows needs --norm-phi".into()))?,
        },
        "urn" => CultureKind::Urn {
            alpha: inline
                .or(alpha)
                .ok_or_else(|| Failure::Usage("urn needs --alpha".into()))?,
        },
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
        "un_exact" => CultureKind::UniformityExact,
        "st" => CultureKind::Stratification,
        other => return Err(Failure::Usage(format!("unknown culture {other:?}"))),
    };
    Ok(kind)
}

/// Stable per-culture colors; unknown cultures hash onto the palette.
fn culture_color(culture: &str) -> &'static str {
    const PALETTE: &[(&str, &str)] = &[
        ("ic", "#404040"),
        ("mallows", "#1f77b4"),
        ("urn", "#d62728"),
        ("interval", "#2ca02c"),
        ("square", "#98df8a"),
        ("cube", "#17becf"),
        ("cube5d", "#9edae5"),
        ("cube10d", "#7f7f7f"),
        ("circle", "#ff7f0e"),
        ("sphere", "#ffbb78"),
        ("sp_conitzer", "#9467bd"),
        ("sp_walsh", "#c5b0d5"),
        ("spoc", "#8c564b"),
        ("gs_balanced", "#e377c2"),
        ("gs_caterpillar", "#f7b6d2"),
        ("id", "#000000"),
        ("an", "#bcbd22"),
        ("un", "#aec7e8"),
        ("st", "#ff9896"),
    ];
    for (name, color) in PALETTE {
        if *name == culture {
            return color;
        }
    }
    "#606060"
}

/// Marker conventions: triangles for top-k, crosses for random cuts, stars
/// for random drops, circles otherwise.
fn truncation_marker(truncation: &str) -> &'static str {
    if truncation.starts_with("topk") {
        "triangle"
    } else if truncation.starts_with("cut") {
        "cross"
    } else if truncation.starts_with("drop") {
        "star"
    } else {
        "circle"
    }
}

// ---------------------------------------------------------------------------
// matrix

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of .soc/.soi files.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// swap, swap-tr, swap-del, pos, pos-hat, or dap.
    #[arg(long)]
    metric: Option<String>,
    /// Seed for randomized metrics (dap, swap-del).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; the output is independent of this.
    #[arg(long)]
    workers: Option<usize>,
    /// Exact-swap candidate cap override.
    #[arg(long = "max-m")]
    max_m: Option<usize>,
    /// Deletion-subset enumeration budget for swap-del.
    #[arg(long = "del-subsets")]
    del_subsets: Option<usize>,
    /// Monte Carlo samples for swap-del past the enumeration budget.
    #[arg(long = "del-samples")]
    del_samples: Option<usize>,
    /// Local-search restarts for dap.
    #[arg(long = "dap-restarts")]
    dap_restarts: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn cmd_matrix(a: MatrixArgs) -> Result<(), Failure> {
    let cfg = load_optional_config(&a.config)?;
    let input = require(cfg.resolve(a.input, "in")?, "--in")?;
    let metric = require(cfg.resolve(a.metric, "metric")?, "--metric")?;
    let out = require(cfg.resolve(a.out, "out")?, "--out")?;
    let workers = cfg.resolve(a.workers, "workers")?.unwrap_or(1).max(1);
    let seed = cfg.resolve(a.seed, "seed")?;
    let max_m = cfg.resolve(a.max_m, "max-m")?;
    let del_subsets = cfg.resolve(a.del_subsets, "del-subsets")?;
    let del_samples = cfg.resolve(a.del_samples, "del-samples")?;
    let dap_restarts = cfg.resolve(a.dap_restarts, "dap-restarts")?;

    let elections = read_election_dir(&input)?;
    let spec = build_metric_spec(
        &metric,
        seed,
        max_m,
        del_subsets,
        del_samples,
        dap_restarts,
        &elections,
    )?;
    let start = Instant::now();
    let matrix = pairwise_matrix(&elections, &spec, workers).map_err(Failure::from)?;
    let elapsed = start.elapsed();
    write_file(&out, &matrix.to_csv_string())?;
    println!(
        "metric={metric} elections={} workers={workers} elapsed_ms={} out={}",
        elections.len(),
        elapsed.as_millis(),
        out.display()
    );
    Ok(())
}

fn build_metric_spec(
    metric: &str,
    seed: Option<u64>,
    max_m: Option<usize>,
    del_subsets: Option<usize>,
    del_samples: Option<usize>,
    dap_restarts: Option<usize>,
    elections: &[Election],
) -> Result<MetricSpec, Failure> {
    let mut budget = SwapBudget::default();
    if let Some(cap) = max_m {
        budget.max_exact_m = cap;
    }
    let spec = match metric {
        "swap" | "swap-tr" => {
            // Refuse oversized inputs up front instead of reporting a
            // capability failure per cell.
            if let Some(e) = elections.iter().find(|e| e.m() > budget.max_exact_m) {
                return Err(Failure::Capability(format!(
                    "election {} has {} candidates; exact swap is capped at {} (raise --max-m at your own peril)",
                    e.label(),
                    e.m(),
                    budget.max_exact_m
                )));
            }
            if metric == "swap" {
                MetricSpec::Swap(budget)
            } else {
                MetricSpec::SwapTr(budget)
            }
        }
        "swap-del" => {
            let seed = require(seed, "--seed (swap-del samples deletion subsets)")?;
            let mut del = SwapDelConfig::default();
            del.seed = seed;
            if let Some(v) = del_subsets {
                del.max_subsets = v;
            }
            if let Some(v) = del_samples {
                del.mc_samples = v;
            }
            if let Some(e) = elections.iter().find(|e| e.m() > budget.max_exact_m) {
                return Err(Failure::Capability(format!(
                    "election {} has {} candidates; exact swap is capped at {}",
                    e.label(),
                    e.m(),
                    budget.max_exact_m
                )));
            }
            MetricSpec::SwapDel(del, budget)
        }
        "pos" => MetricSpec::Pos,
        "pos-hat" => MetricSpec::PosHat(PosHatConfig::default()),
        "dap" => {
            let seed = require(seed, "--seed (dap local search is randomized)")?;
            MetricSpec::Dap(DapConfig {
                strategy: EmkStrategy::LocalSearch {
                    restarts: dap_restarts.unwrap_or(4),
                    seed,
                },
            })
        }
        other => return Err(Failure::Usage(format!("unknown metric {other:?}"))),
    };
    Ok(spec)
}

// ---------------------------------------------------------------------------
// dap-report

#[derive(Args)]
struct DapReportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Local-search restarts per election.
    #[arg(long)]
    restarts: Option<usize>,
    /// Force exhaustive center enumeration instead of local search.
    #[arg(long, action = clap::ArgAction::SetTrue)]
    exact: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn cmd_dap_report(a: DapReportArgs) -> Result<(), Failure> {
    let cfg = load_optional_config(&a.config)?;
    let input = require(cfg.resolve(a.input, "in")?, "--in")?;
    let out = require(cfg.resolve(a.out, "out")?, "--out")?;
    let restarts = cfg.resolve(a.restarts, "restarts")?.unwrap_or(4);
    let exact = a.exact || cfg.get("exact") == Some("true");
    let seed = if exact {
        cfg.resolve(a.seed, "seed")?.unwrap_or(0)
    } else {
        require(cfg.resolve(a.seed, "seed")?, "--seed")?
    };

    let elections = read_election_dir(&input)?;
    let mut csv = String::from("label,diversity,agreement,polarization,exact\n");
    for (k, e) in elections.iter().enumerate() {
        let strategy = if exact {
            EmkStrategy::Exact
        } else {
            EmkStrategy::LocalSearch {
                restarts,
                seed: seeding::derive(seed, k as u64),
            }
        };
        let v = dap_vector(e, &DapConfig { strategy })
            .map_err(|err| Failure::from(err))
            .map_err(|f| Failure::Input(format!("{}: {}", e.label(), f.message())))?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            e.label(),
            sig12(v.diversity),
            sig12(v.agreement),
            sig12(v.polarization),
            v.exact
        );
    }
    write_file(&out, &csv)?;
    println!("dap-report elections={} out={}", elections.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// embed

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Distance matrix CSV produced by `matrix`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// mds or kk.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale the matrix to unit maximum before embedding (default true).
    #[arg(long)]
    normalize: Option<bool>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn cmd_embed(a: EmbedArgs) -> Result<(), Failure> {
    let cfg = load_optional_config(&a.config)?;
    let input = require(cfg.resolve(a.input, "in")?, "--in")?;
    let out = require(cfg.resolve(a.out, "out")?, "--out")?;
    let method = cfg.resolve(a.method, "method")?.unwrap_or_else(|| "mds".into());
    let seed = require(cfg.resolve(a.seed, "seed")?, "--seed")?;
    let normalize = cfg.resolve(a.normalize, "normalize")?.unwrap_or(true);

    let text = fs::read_to_string(&input)
        .map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let matrix = DistanceMatrix::from_csv_str(&text).map_err(|e| prefix_failure(&input, e))?;
    let matrix = if normalize {
        normalize_matrix(&matrix).map_err(Failure::from)?
    } else {
        matrix
    };

    let algorithm = match method.as_str() {
        "mds" => EmbedAlgorithm::Mds,
        "kk" => EmbedAlgorithm::Kk,
        other => return Err(Failure::Usage(format!("unknown embed method {other:?}"))),
    };
    let mut config = match algorithm {
        EmbedAlgorithm::Mds => EmbedConfig::mds_defaults(),
        EmbedAlgorithm::Kk => EmbedConfig::kk_defaults(),
    };
    config.seed = seed;
    if let Some(r) = cfg.resolve(a.restarts, "restarts")? {
        config.restarts = r;
    }
    if let Some(it) = cfg.resolve(a.max_iter, "max-iter")? {
        config.max_iter = it;
    }
    let embedding: Embedding2D = match algorithm {
        EmbedAlgorithm::Mds => mds_embed(&matrix, &config).map_err(Failure::from)?,
        EmbedAlgorithm::Kk => kk_embed(&matrix, &config).map_err(Failure::from)?,
    };
    write_file(&out, &embedding.to_csv_string())?;
    println!(
        "method={} stress={} kruskal={} iterations={} out={}",
        embedding.algorithm.as_str(),
        sig12(embedding.final_stress),
        sig12(kruskal_stress1(&matrix, &embedding.points)),
        embedding.iterations_used,
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// render

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coordinates CSV produced by `embed`.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Optional style CSV: label,group,color,marker,size.
    #[arg(long)]
    style: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct PointStyle {
    group: String,
    color: String,
    marker: Marker,
    size: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Marker {
    Circle,
    Triangle,
    Cross,
    Star,
}

impl Marker {
    fn parse(s: &str) -> Result<Self, Failure> {
        Ok(match s {
            "circle" => Marker::Circle,
            "triangle" => Marker::Triangle,
            "cross" => Marker::Cross,
            "star" => Marker::Star,
            other => {
                return Err(Failure::Input(format!(
                    "unknown marker {other:?} (circle, triangle, cross, star)"
                )))
            }
        })
    }
}

fn default_style() -> PointStyle {
    PointStyle {
        group: "elections".to_string(),
        color: "#000000".to_string(),
        marker: Marker::Circle,
        size: 3.0,
    }
}

fn cmd_render(a: RenderArgs) -> Result<(), Failure> {
    let cfg = load_optional_config(&a.config)?;
    let coords_path = require(cfg.resolve(a.coords, "coords")?, "--coords")?;
    let out = require(cfg.resolve(a.out, "out")?, "--out")?;
    let style_path = cfg.resolve(a.style, "style")?;

    let text = fs::read_to_string(&coords_path)
        .map_err(|e| Failure::Input(format!("{}: {e}", coords_path.display())))?;
    let (labels, points) =
        Embedding2D::from_csv_str(&text).map_err(|e| prefix_failure(&coords_path, e))?;

    let styles = match &style_path {
        None => labels.iter().map(|_| default_style()).collect::<Vec<_>>(),
        Some(path) => load_styles(path, &labels)?,
    };
    let svg = render_svg(&labels, &points, &styles);
    write_file(&out, &svg)?;
    println!("rendered {} points to {}", labels.len(), out.display());
    Ok(())
}

fn load_styles(path: &Path, labels: &[String]) -> Result<Vec<PointStyle>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "label,group,color,marker,size" => {}
        _ => {
            return Err(Failure::Input(format!(
                "{}: expected header `label,group,color,marker,size`",
                path.display()
            )))
        }
    }
    let mut by_label: std::collections::BTreeMap<String, PointStyle> =
        std::collections::BTreeMap::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Failure::Input(format!(
                "{}: line {}: expected 5 fields",
                path.display(),
                i + 1
            )));
        }
        let size: f64 = parts[4].trim().parse().map_err(|e| {
            Failure::Input(format!("{}: line {}: bad size: {e}", path.display(), i + 1))
        })?;
        by_label.insert(
            parts[0].to_string(),
            PointStyle {
                group: parts[1].to_string(),
                color: parts[2].to_string(),
                marker: Marker::parse(parts[3].trim())?,
                size,
            },
        );
    }
    let missing: Vec<&String> = labels.iter().filter(|l| !by_label.contains_key(*l)).collect();
    let extra: Vec<&String> = by_label
        .keys()
        .filter(|l| !labels.contains(l))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("style labels do not match coordinates:");
        if !missing.is_empty() {
            let _ = write!(msg, " unstyled: {:?}.", preview(&missing));
        }
        if !extra.is_empty() {
            let _ = write!(msg, " unknown: {:?}.", preview(&extra));
        }
        return Err(Failure::Input(msg));
    }
    Ok(labels.iter().map(|l| by_label[l].clone()).collect())
}

fn preview<'a>(items: &[&'a String]) -> Vec<&'a str> {
    items.iter().take(8).map(|s| s.as_str()).collect()
}

/// Self-contained deterministic SVG scatter: inline styles, markers placed
/// in label order, legend sorted by group name.
fn render_svg(labels: &[String], points: &[(f64, f64)], styles: &[PointStyle]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 800.0;
    const MARGIN: f64 = 60.0;

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    if points.is_empty() {
        min_x = 0.0;
        max_x = 1.0;
        min_y = 0.0;
        max_y = 1.0;
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-12);
    let scale = (W - 2.0 * MARGIN) / span;
    let off_x = (W - (max_x - min_x) * scale) / 2.0;
    let off_y = (H - (max_y - min_y) * scale) / 2.0;
    let place = |x: f64, y: f64| -> (f64, f64) {
        // SVG y grows downward; flip so the layout keeps its orientation.
        ((x - min_x) * scale + off_x, H - ((y - min_y) * scale + off_y))
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>"
    );

    // Deterministic element order: sort by label, tie-break on index.
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
    for &i in &order {
        let (x, y) = place(points[i].0, points[i].1);
        let s = &styles[i];
        let _ = writeln!(
            svg,
            "  {}",
            marker_element(s.marker, x, y, s.size, &s.color, Some(&labels[i]))
        );
    }

    // Legend: one entry per distinct (group, color, marker).
    let mut legend: Vec<(String, String, Marker)> = Vec::new();
    for s in styles {
        let key = (s.group.clone(), s.color.clone(), s.marker);
        if !legend.contains(&key) {
            legend.push(key);
        }
    }
    legend.sort();
    let legend_x = W - 170.0;
    let mut legend_y = 30.0;
    let _ = writeln!(
        svg,
        "  <g font-family=\"sans-serif\" font-size=\"12\" fill=\"#000000\">"
    );
    for (group, color, marker) in &legend {
        let _ = writeln!(
            svg,
            "    {}",
            marker_element(*marker, legend_x, legend_y - 4.0, 4.0, color, None)
        );
        let _ = writeln!(
            svg,
            "    <text x=\"{:.3}\" y=\"{:.3}\">{}</text>",
            legend_x + 12.0,
            legend_y,
            xml_escape(group)
        );
        legend_y += 18.0;
    }
    let _ = writeln!(svg, "  </g>");
    svg.push_str("</svg>\n");
    svg
}

fn marker_element(
    marker: Marker,
    x: f64,
    y: f64,
    size: f64,
    color: &str,
    title: Option<&str>,
) -> String {
    let title_el = match title {
        Some(t) => format!("<title>{}</title>", xml_escape(t)),
        None => String::new(),
    };
    match marker {
        Marker::Circle => format!(
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{size:.3}\" fill=\"{color}\">{title_el}</circle>"
        ),
        Marker::Triangle => {
            let h = size * 0.866;
            format!(
                "<polygon points=\"{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}\" fill=\"{color}\">{title_el}</polygon>",
                x,
                y - size,
                x - h,
                y + size * 0.5,
                x + h,
                y + size * 0.5
            )
        }
        Marker::Cross => format!(
            "<path d=\"M {:.3} {:.3} L {:.3} {:.3} M {:.3} {:.3} L {:.3} {:.3}\" stroke=\"{color}\" stroke-width=\"1.5\" fill=\"none\">{title_el}</path>",
            x - size,
            y - size,
            x + size,
            y + size,
            x - size,
            y + size,
            x + size,
            y - size
        ),
        Marker::Star => {
            let mut pts = String::new();
            for k in 0..10 {
                let r = if k % 2 == 0 { size } else { size * 0.4 };
                let angle = std::f64::consts::PI * (k as f64 / 5.0) - std::f64::consts::FRAC_PI_2;
                if k > 0 {
                    pts.push(' ');
                }
                let _ = write!(
                    pts,
                    "{:.3},{:.3}",
                    x + r * angle.cos(),
                    y + r * angle.sin()
                );
            }
            format!("<polygon points=\"{pts}\" fill=\"{color}\">{title_el}</polygon>")
        }
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

// ---------------------------------------------------------------------------
// robustness

#[derive(Args)]
struct RobustnessArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// size (distance to the largest size) or truncation (distance of a
    /// complete election to its top-k truncations).
    #[arg(long)]
    experiment: Option<String>,
    /// dap or pos-hat.
    #[arg(long)]
    metric: Option<String>,
    /// Comma list: ic, mallows:0.5, urn:0.1, interval, id, an, un, st, ...
    #[arg(long)]
    cultures: Option<String>,
    /// Smallest candidate count (size experiment).
    #[arg(long = "m-lo")]
    m_lo: Option<usize>,
    /// Largest candidate count (size experiment; also the reference size).
    #[arg(long = "m-hi")]
    m_hi: Option<usize>,
    /// Candidate count (truncation experiment).
    #[arg(long)]
    m: Option<usize>,
    /// Comma list of top-k levels (truncation experiment).
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Samples per curve point.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

enum RobustnessMetric {
    Dap,
    PosHat,
}

impl RobustnessMetric {
    fn distance(&self, a: &Election, b: &Election, seed: u64) -> Result<f64, Failure> {
        match self {
            RobustnessMetric::PosHat => Ok(positionwise_hat(a, b, &PosHatConfig::default())
                .map_err(Failure::from)?
                .value),
            RobustnessMetric::Dap => {
                let strat = |s: u64| EmkStrategy::LocalSearch { restarts: 4, seed: s };
                let va = dap_vector(a, &DapConfig { strategy: strat(seeding::derive(seed, 1)) })
                    .map_err(Failure::from)?;
                let vb = dap_vector(b, &DapConfig { strategy: strat(seeding::derive(seed, 2)) })
                    .map_err(Failure::from)?;
                let d: f64 = va
                    .as_array()
                    .iter()
                    .zip(vb.as_array().iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                Ok(d)
            }
        }
    }
}

fn cmd_robustness(a: RobustnessArgs) -> Result<(), Failure> {
    let cfg = load_optional_config(&a.config)?;
    let experiment = require(cfg.resolve(a.experiment, "experiment")?, "--experiment")?;
    let metric_name = require(cfg.resolve(a.metric, "metric")?, "--metric")?;
    let cultures_raw = require(cfg.resolve(a.cultures, "cultures")?, "--cultures")?;
    let n = require(cfg.resolve(a.n, "n")?, "--n")?;
    let samples = require(cfg.resolve(a.samples, "samples")?, "--samples")?;
    let seed = require(cfg.resolve(a.seed, "seed")?, "--seed")?;
    let out = require(cfg.resolve(a.out, "out")?, "--out")?;

    let metric = match metric_name.as_str() {
        "dap" => RobustnessMetric::Dap,
        "pos-hat" => RobustnessMetric::PosHat,
        other => {
            return Err(Failure::Usage(format!(
                "robustness metric must be dap or pos-hat, got {other:?}"
            )))
        }
    };
    let cultures: Vec<(String, CultureKind)> = cultures_raw
        .split(',')
        .map(|name| {
            let name = name.trim();
            parse_culture_kind(name, None, None).map(|k| (name.to_string(), k))
        })
        .collect::<Result<_, _>>()?;
    if cultures.is_empty() {
        return Err(Failure::Usage("empty --cultures list".into()));
    }

    let (reference_m, xs): (usize, Vec<usize>) = match experiment.as_str() {
        "size" => {
            let lo = require(cfg.resolve(a.m_lo, "m-lo")?, "--m-lo")?;
            let hi = require(cfg.resolve(a.m_hi, "m-hi")?, "--m-hi")?;
            if lo > hi {
                return Err(Failure::Usage("--m-lo must not exceed --m-hi".into()));
            }
            (hi, (lo..=hi).collect())
        }
        "truncation" => {
            let m = require(cfg.resolve(a.m, "m")?, "--m")?;
            let levels_raw = require(cfg.resolve(a.levels, "levels")?, "--levels")?;
            let levels: Vec<usize> = levels_raw
                .split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|e| {
                        Failure::Usage(format!("bad truncation level {t:?}: {e}"))
                    })
                })
                .collect::<Result<_, _>>()?;
            for &k in &levels {
                if k == 0 || k > m {
                    return Err(Failure::Usage(format!(
                        "truncation level {k} outside 1..={m}"
                    )));
                }
            }
            (m, levels)
        }
        other => {
            return Err(Failure::Usage(format!(
                "experiment must be size or truncation, got {other:?}"
            )))
        }
    };

    // Reference diameter: the largest pairwise distance among the four
    // canonical elections at the reference size.
    let diameter = reference_diameter(&metric, reference_m, n, seed)?;
    if diameter <= 0.0 {
        return Err(Failure::Input(
            "reference diameter is zero; cannot normalize".into(),
        ));
    }

    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); xs.len()];
    for (ci, (_, kind)) in cultures.iter().enumerate() {
        for (xi, &x) in xs.iter().enumerate() {
            let mut values = Vec::with_capacity(samples);
            for s in 0..samples {
                let tag = |side: u64| {
                    seeding::derive(
                        seed,
                        ((ci as u64) << 48) | ((x as u64) << 32) | ((s as u64) << 2) | side,
                    )
                };
                let d = match experiment.as_str() {
                    "size" => {
                        let small = sample_election(&CultureSpec {
                            kind: *kind,
                            m: x,
                            n,
                            seed: tag(0),
                        })
                        .map_err(Failure::from)?;
                        let big = sample_election(&CultureSpec {
                            kind: *kind,
                            m: reference_m,
                            n,
                            seed: tag(1),
                        })
                        .map_err(Failure::from)?;
                        metric.distance(&small, &big, tag(2))?
                    }
                    _ => {
                        let full = sample_election(&CultureSpec {
                            kind: *kind,
                            m: reference_m,
                            n,
                            seed: tag(0),
                        })
                        .map_err(Failure::from)?;
                        let cut = truncate(
                            &full,
                            &TruncationSpec {
                                method: TruncationMethod::TopK { k: x },
                                seed: tag(1),
                            },
                        )
                        .map_err(Failure::from)?;
                        metric.distance(&full, &cut, tag(2))?
                    }
                };
                values.push(d / diameter);
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = if values.len() > 1 {
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (values.len() - 1) as f64
            } else {
                0.0
            };
            let ci95 = 1.96 * (var / values.len() as f64).sqrt();
            rows[xi].push(mean);
            rows[xi].push(ci95);
        }
    }

    let mut csv = String::from("x");
    for (name, _) in &cultures {
        let safe = name.replace(',', ";").replace(':', "_");
        let _ = write!(csv, ",{safe}_mean,{safe}_ci95");
    }
    csv.push('\n');
    for (xi, &x) in xs.iter().enumerate() {
        let _ = write!(csv, "{x}");
        for v in &rows[xi] {
            let _ = write!(csv, ",{}", sig12(*v));
        }
        csv.push('\n');
    }
    write_file(&out, &csv)?;
    println!(
        "robustness experiment={experiment} metric={metric_name} diameter={} out={}",
        sig12(diameter),
        out.display()
    );
    Ok(())
}

fn reference_diameter(
    metric: &RobustnessMetric,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<f64, Failure> {
    let kinds = [
        CultureKind::Identity,
        CultureKind::Antagonism,
        CultureKind::UniformityApprox,
        CultureKind::Stratification,
    ];
    let mut refs = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.iter().enumerate() {
        refs.push(
            sample_election(&CultureSpec {
                kind: *kind,
                m,
                n,
                seed: seeding::derive(seed, 0xd1a + i as u64),
            })
            .map_err(Failure::from)?,
        );
    }
    let mut worst: f64 = 0.0;
    for i in 0..refs.len() {
        for j in (i + 1)..refs.len() {
            let d = metric.distance(
                &refs[i],
                &refs[j],
                seeding::derive(seed, 0xd1a0 + (i * 7 + j) as u64),
            )?;
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// validate

#[derive(Args)]
struct ValidateArgs {
    /// Directory of preflib files to check.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Config file to parse and echo back in canonical form.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    match (&a.input, &a.config) {
        (Some(dir), None) => validate_dir(dir),
        (None, Some(path)) => {
            let cfg = ConfigFile::load(path)?;
            for (k, v) in &cfg.entries {
                println!("{k} = {v}");
            }
            Ok(())
        }
        _ => Err(Failure::Usage(
            "validate needs exactly one of --in / --config".into(),
        )),
    }
}

fn validate_dir(dir: &Path) -> Result<(), Failure> {
    let mut files: Vec<PathBuf> = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("cannot read directory {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| Failure::Input(format!("directory walk: {e}")))?;
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("soc") | Some("soi")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::Input(format!(
            "no .soc/.soi files in {}",
            dir.display()
        )));
    }
    let mut ok = 0usize;
    let mut failed = 0usize;
    let mut warned = 0usize;
    for path in &files {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned());
        let name = name.unwrap_or_else(|| path.display().to_string());
        match fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| {
            parse_preflib(&t).map_err(|e| e.to_string())
        }) {
            Ok(parsed) => {
                ok += 1;
                let e = &parsed.election;
                if parsed.warnings.is_empty() {
                    println!("{name}: ok m={} n={}", e.m(), e.n());
                } else {
                    warned += 1;
                    println!(
                        "{name}: ok m={} n={} warnings={}",
                        e.m(),
                        e.n(),
                        parsed.warnings.len()
                    );
                    for w in &parsed.warnings {
                        println!("  warning: {w}");
                    }
                }
            }
            Err(msg) => {
                failed += 1;
                println!("{name}: error: {msg}");
            }
        }
    }
    println!("checked {} files: {ok} ok ({warned} with warnings), {failed} failed", files.len());
    if failed > 0 {
        Err(Failure::Input(format!("{failed} file(s) failed to parse")))
    } else {
        Ok(())
    }
}
