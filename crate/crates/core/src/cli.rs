//! Batch command-line entry points wiring the pipeline together.
//!
//! Subcommands mirror the pipeline stages: `gen-dense`, `ingest`,
//! `cluster`, `learn`, `reduce-dl`, `synth`, `make-scenarios`, `plan`,
//! `report`. Every run writes a manifest recording the tool version,
//! configuration hash, seed, and input content hashes; two runs with the
//! same manifest produce identical outputs except wall-clock fields.
//! Runtime errors print one `error: ...` line to standard error and exit
//! 1 (user error) or 2 (I/O or serialization failure).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline_dl::reduce_control_set_dl;
use crate::clustering::{kmeans_paths, path_distance, ClusterModel};
use crate::config::ResolvedConfig;
use crate::dataset::{
    read_paths_csv, read_sampled_csv, split_indices, write_sampled_csv, NamedPath,
};
use crate::error::{Error, Result};
use crate::eval::{emit_reports, ReportInputs, ResultRow, SetSummary};
use crate::geometry::{normalize_to_origin, resample_by_arclength, Polyline, SampledPath};
use crate::grid::VehicleFootprint;
use crate::lattice::ControlSet;
use crate::manifest::RunManifest;
use crate::optimizer::{learn_control_set, LearnerConfig, ObjectiveParams};
use crate::planner::Planner;
use crate::scenario::{scenario_from_path, synth_worlds, Scenario, ScenarioKind};
use crate::spiral::generate_dense_control_set;

const KMEANS_MAX_ITER: usize = 100;

/// Per-item seed spreading, matching the synthetic world generator.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Parser)]
#[command(
    name = "latticelearn",
    version,
    about = "Learn sparse lattice-planner control sets from demonstration paths"
)]
struct Cli {
    /// INI configuration file; command-line flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the dense cubic-spiral control set.
    GenDense {
        /// Output control-set JSON.
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
    },
    /// Resample demonstration paths, split train/test, slice windows.
    Ingest {
        /// Input CSV with header path_id,x,y, or a directory of such
        /// files (path ids must be unique across files).
        #[arg(long, value_name = "CSV")]
        csv: PathBuf,
        /// Arc-length sample step in meters [default: 0.1].
        #[arg(long, value_name = "METERS")]
        delta: Option<f64>,
        /// Sliding-window length in meters [default: 10].
        #[arg(long, value_name = "METERS")]
        window: Option<f64>,
        /// Window advance in meters [default: 1].
        #[arg(long, value_name = "METERS")]
        step: Option<f64>,
        /// Train fraction of the path-level split [default: 0.85].
        #[arg(long)]
        split: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for train_slices.csv and test_paths.csv.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Fit k-means clusters over the training slices.
    Cluster {
        /// Ingest output directory containing train_slices.csv.
        #[arg(long, value_name = "DIR")]
        paths: PathBuf,
        /// Number of clusters [default: 8].
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output cluster model JSON.
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
    },
    /// Learn a sparse control set from clusters and the dense set.
    Learn {
        /// Cluster model JSON from `cluster`.
        #[arg(long, value_name = "JSON")]
        clusters: PathBuf,
        /// Dense control-set JSON from `gen-dense`.
        #[arg(long, value_name = "JSON")]
        dense: PathBuf,
        /// Size regularizer weight; 0 gives the pure matching objective
        /// [default: 0.311].
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads [default: logical cores].
        #[arg(long, value_name = "N")]
        jobs: Option<usize>,
        /// Output learned control-set JSON.
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
    },
    /// Reduce the dense set under the arc-length-factor baseline rule.
    ReduceDl {
        #[arg(long, value_name = "JSON")]
        dense: PathBuf,
        /// Arc-length factor, at least 1 [default: 1.1].
        #[arg(long)]
        factor: Option<f64>,
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
    },
    /// Generate synthetic double-swerve worlds.
    Synth {
        /// Number of worlds.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory of scenario JSON files.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Build lane scenarios around test paths.
    MakeScenarios {
        /// Ingest output directory containing test_paths.csv (or a path
        /// CSV directly).
        #[arg(long, value_name = "DIR")]
        paths: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Lane width in meters [default: 3.7].
        #[arg(long, value_name = "METERS")]
        lane_width: Option<f64>,
        /// Seed choosing each lane-change side.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Plan every scenario with every control set, repeatedly.
    Plan {
        /// Directory of scenario JSON files.
        #[arg(long, value_name = "DIR")]
        scenarios: PathBuf,
        /// Comma-separated control-set files; the first is the baseline.
        #[arg(long, value_delimiter = ',', value_name = "JSON,...")]
        sets: Vec<PathBuf>,
        /// Planning repetitions per scenario for wall-time spread
        /// [default: 5].
        #[arg(long)]
        repeat: Option<usize>,
        /// Worker threads [default: logical cores].
        #[arg(long, value_name = "N")]
        jobs: Option<usize>,
        /// Output directory for results.csv, paths/, refs/.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Aggregate planning results into tables and plots.
    Report {
        /// Plan output directory.
        #[arg(long, value_name = "DIR")]
        results: PathBuf,
        /// Report output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "lane_follow")]
    LaneFollow,
    #[value(name = "lane_change")]
    LaneChange,
}

/// The cluster model on disk: the fitted model plus the slice ids it was
/// fitted on, so reports can name members without re-reading the slices.
#[derive(Serialize, Deserialize)]
pub struct ClusterFile {
    pub delta: f64,
    pub ids: Vec<String>,
    pub model: ClusterModel,
}

/// Entry point for the binary: parse, dispatch, map errors to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = ResolvedConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenDense { out } => cmd_gen_dense(&cfg, &out),
        Command::Ingest {
            csv,
            delta,
            window,
            step,
            split,
            seed,
            out,
        } => cmd_ingest(&cfg, &csv, delta, window, step, split, seed, &out),
        Command::Cluster {
            paths,
            k,
            seed,
            out,
        } => cmd_cluster(&cfg, &paths, k, seed, &out),
        Command::Learn {
            clusters,
            dense,
            lambda,
            seed,
            jobs,
            out,
        } => cmd_learn(&cfg, &clusters, &dense, lambda, seed, jobs, &out),
        Command::ReduceDl { dense, factor, out } => cmd_reduce_dl(&cfg, &dense, factor, &out),
        Command::Synth { n, seed, out } => cmd_synth(&cfg, n, seed, &out),
        Command::MakeScenarios {
            paths,
            kind,
            lane_width,
            seed,
            out,
        } => cmd_make_scenarios(&cfg, &paths, kind, lane_width, seed, &out),
        Command::Plan {
            scenarios,
            sets,
            repeat,
            jobs,
            out,
        } => cmd_plan(&cfg, &scenarios, &sets, repeat, jobs, &out),
        Command::Report { results, out } => cmd_report(&cfg, &results, &out),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::File(dir.display().to_string(), e))
}

fn ensure_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::File(path.display().to_string(), e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, contents).map_err(|e| Error::File(path.display().to_string(), e))
}

/// `dense.json` gets its manifest at `dense.manifest.json`.
fn manifest_sibling(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Run `f` on a pool of `jobs` threads, or the global pool by default.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::InvalidParameter("jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?
            .install(f),
    }
}

/// Scenario ids double as file names; anything unsafe becomes '_'.
fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// The sample step an ingest directory was produced with, read back from
/// its manifest so downstream stages cannot drift from the data.
fn ingest_delta(dir: &Path) -> Option<f64> {
    RunManifest::read(dir)
        .ok()?
        .parameters
        .get("delta")?
        .parse()
        .ok()
}

/// Demonstration paths from one CSV, or every `*.csv` of a directory in
/// file-name order (so a plan run's `paths/` directory ingests directly).
fn read_demo_paths(csv: &Path) -> Result<Vec<crate::dataset::RawPath>> {
    if !csv.is_dir() {
        return read_paths_csv(csv);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(csv)
        .map_err(|e| Error::File(csv.display().to_string(), e))?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    let mut all = Vec::new();
    let mut seen = BTreeSet::new();
    for file in files {
        for rp in read_paths_csv(&file)? {
            if !seen.insert(rp.id.clone()) {
                return Err(Error::InvalidParameter(format!(
                    "path id {} appears in more than one file under {}",
                    rp.id,
                    csv.display()
                )));
            }
            all.push(rp);
        }
    }
    Ok(all)
}

fn cmd_gen_dense(cfg: &ResolvedConfig, out: &Path) -> Result<()> {
    let set = generate_dense_control_set(&cfg.dense()?)?;
    ensure_parent(out)?;
    set.save(out)?;
    RunManifest::new("gen-dense", &cfg.hash(), None)
        .parameter("actions", set.len())
        .write_to(&manifest_sibling(out))
}

#[allow(clippy::too_many_arguments)]
fn cmd_ingest(
    cfg: &ResolvedConfig,
    csv: &Path,
    delta: Option<f64>,
    window: Option<f64>,
    step: Option<f64>,
    split: Option<f64>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let delta = delta.unwrap_or(cfg.delta);
    let window = window.unwrap_or(cfg.ingest_window);
    let step = step.unwrap_or(cfg.ingest_step);
    let split = split.unwrap_or(cfg.ingest_split);
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let raw = read_demo_paths(csv)?;
    if raw.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no paths in {}",
            csv.display()
        )));
    }
    let mut resampled = Vec::with_capacity(raw.len());
    for rp in raw {
        let poly = Polyline::new(rp.points)?;
        resampled.push(NamedPath {
            id: rp.id,
            path: resample_by_arclength(&poly, delta)?,
        });
    }
    let (train, test) = split_indices(resampled.len(), split, seed)?;
    let mut slices = Vec::new();
    for &i in &train {
        let np = &resampled[i];
        for (j, s) in crate::geometry::slice_sliding_windows(&np.path, window, step)?
            .into_iter()
            .enumerate()
        {
            slices.push(NamedPath {
                id: format!("{}_w{j:03}", np.id),
                path: normalize_to_origin(&s),
            });
        }
    }
    let test_paths: Vec<NamedPath> = test
        .iter()
        .map(|&i| NamedPath {
            id: resampled[i].id.clone(),
            path: normalize_to_origin(&resampled[i].path),
        })
        .collect();
    create_dir(out)?;
    write_sampled_csv(&out.join("train_slices.csv"), &slices)?;
    write_sampled_csv(&out.join("test_paths.csv"), &test_paths)?;
    RunManifest::new("ingest", &cfg.hash(), Some(seed))
        .parameter("delta", delta)
        .parameter("window", window)
        .parameter("step", step)
        .parameter("split", split)
        .input("csv", csv)?
        .write(out)
}

fn cmd_cluster(
    cfg: &ResolvedConfig,
    paths: &Path,
    k: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let k = k.unwrap_or(cfg.cluster_k);
    let delta = ingest_delta(paths).unwrap_or(cfg.delta);
    let train = read_sampled_csv(&paths.join("train_slices.csv"), delta)?;
    if train.is_empty() {
        return Err(Error::InvalidParameter("no training slices".into()));
    }
    let inputs: Vec<SampledPath> = train.iter().map(|np| np.path.clone()).collect();
    let model = kmeans_paths(&inputs, k, seed, KMEANS_MAX_ITER)?;
    let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
    create_dir(&dir)?;

    let mut report = csv::Writer::from_path(dir.join("cluster_report.csv"))
        .map_err(|e| Error::File(dir.display().to_string(), std::io::Error::other(e)))?;
    report.write_record(["path_id", "cluster", "distance_to_mean"])?;
    for (np, &assignment) in train.iter().zip(model.assignments.iter()) {
        let d = path_distance(&np.path, &model.means[assignment])?;
        report.serialize((&np.id, assignment, d))?;
    }
    report.flush()?;
    let means: Vec<NamedPath> = model
        .means
        .iter()
        .enumerate()
        .map(|(c, m)| NamedPath {
            id: format!("mean_{c}"),
            path: m.clone(),
        })
        .collect();
    write_sampled_csv(&dir.join("cluster_means.csv"), &means)?;

    let file = ClusterFile {
        delta,
        ids: train.into_iter().map(|np| np.id).collect(),
        model,
    };
    write_string(out, &serde_json::to_string_pretty(&file)?)?;
    RunManifest::new("cluster", &cfg.hash(), Some(seed))
        .parameter("k", k)
        .input("paths", paths)?
        .write_to(&manifest_sibling(out))
}

fn cmd_learn(
    cfg: &ResolvedConfig,
    clusters: &Path,
    dense: &Path,
    lambda: Option<f64>,
    seed: u64,
    jobs: Option<usize>,
    out: &Path,
) -> Result<()> {
    let lambda = lambda.unwrap_or(cfg.learn_lambda);
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("lambda must be nonnegative".into()));
    }
    let file: ClusterFile = serde_json::from_str(&read_to_string(clusters)?)?;
    let dense_set = ControlSet::load(dense)?;
    let params = ObjectiveParams {
        lambda,
        dense_size: dense_set.len(),
    };
    let learner = LearnerConfig {
        paths_per_round: cfg.learn_paths_per_round,
        candidates_per_round: cfg.learn_candidates_per_round,
        no_improve_rounds: cfg.learn_no_improve_rounds,
        seed,
        initial_weight: cfg.learn_initial_weight,
        weight_alpha: cfg.learn_weight_alpha,
    };
    let state = with_jobs(jobs, || {
        learn_control_set(&file.model, &dense_set, &params, &learner)
    })?;
    ensure_parent(out)?;
    state.learned.save(out)?;
    let mut history = csv::Writer::from_path(out.with_extension("history.csv"))
        .map_err(|e| Error::File(out.display().to_string(), std::io::Error::other(e)))?;
    history.write_record(["iter", "objective", "set_size", "cluster"])?;
    for r in &state.history {
        history.serialize((r.iter, r.objective, r.set_size, r.cluster))?;
    }
    history.flush()?;
    RunManifest::new("learn", &cfg.hash(), Some(seed))
        .parameter("lambda", lambda)
        .parameter("paths_per_round", learner.paths_per_round)
        .parameter("candidates_per_round", learner.candidates_per_round)
        .parameter("no_improve_rounds", learner.no_improve_rounds)
        .parameter("initial_weight", learner.initial_weight)
        .parameter("weight_alpha", learner.weight_alpha)
        .input("clusters", clusters)?
        .input("dense", dense)?
        .write_to(&manifest_sibling(out))
}

fn cmd_reduce_dl(
    cfg: &ResolvedConfig,
    dense: &Path,
    factor: Option<f64>,
    out: &Path,
) -> Result<()> {
    let factor = factor.unwrap_or(cfg.reduce_factor);
    if !(factor >= 1.0) {
        return Err(Error::InvalidParameter(
            "arc-length factor must be at least 1".into(),
        ));
    }
    let dense_set = ControlSet::load(dense)?;
    let reduced = reduce_control_set_dl(&dense_set, factor);
    ensure_parent(out)?;
    reduced.save(out)?;
    RunManifest::new("reduce-dl", &cfg.hash(), None)
        .parameter("factor", factor)
        .parameter("actions", reduced.len())
        .input("dense", dense)?
        .write_to(&manifest_sibling(out))
}

fn cmd_synth(cfg: &ResolvedConfig, n: usize, seed: u64, out: &Path) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one world".into()));
    }
    let worlds = synth_worlds(n, seed, cfg.lane_width, cfg.delta);
    create_dir(out)?;
    for w in &worlds {
        write_string(
            &out.join(format!("{}.json", w.id)),
            &serde_json::to_string_pretty(w)?,
        )?;
    }
    RunManifest::new("synth", &cfg.hash(), Some(seed))
        .parameter("n", n)
        .parameter("lane_width", cfg.lane_width)
        .parameter("delta", cfg.delta)
        .write(out)
}

fn cmd_make_scenarios(
    cfg: &ResolvedConfig,
    paths: &Path,
    kind: KindArg,
    lane_width: Option<f64>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let lane_width = lane_width.unwrap_or(cfg.lane_width);
    if !(lane_width > 0.0) {
        return Err(Error::InvalidParameter(
            "lane width must be positive".into(),
        ));
    }
    let (file, delta) = if paths.is_file() {
        (paths.to_path_buf(), cfg.delta)
    } else {
        (
            paths.join("test_paths.csv"),
            ingest_delta(paths).unwrap_or(cfg.delta),
        )
    };
    let kind = match kind {
        KindArg::LaneFollow => ScenarioKind::LaneFollow,
        KindArg::LaneChange => ScenarioKind::LaneChange,
    };
    let named = read_sampled_csv(&file, delta)?;
    if named.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no paths in {}",
            file.display()
        )));
    }
    create_dir(out)?;
    let mut used = BTreeSet::new();
    for (i, np) in named.iter().enumerate() {
        if np.path.arc_length() < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "path {} is shorter than the 2 m scenario minimum",
                np.id
            )));
        }
        let id = sanitize_id(&np.id);
        if !used.insert(id.clone()) {
            return Err(Error::InvalidParameter(format!(
                "scenario id {id} not unique after sanitizing"
            )));
        }
        let sc = scenario_from_path(
            id.clone(),
            &np.path,
            lane_width,
            kind,
            seed ^ (i as u64).wrapping_mul(SEED_STRIDE),
        );
        write_string(
            &out.join(format!("{id}.json")),
            &serde_json::to_string_pretty(&sc)?,
        )?;
    }
    RunManifest::new("make-scenarios", &cfg.hash(), Some(seed))
        .parameter(
            "kind",
            match kind {
                ScenarioKind::LaneFollow => "lane_follow",
                ScenarioKind::LaneChange => "lane_change",
                ScenarioKind::DoubleSwerve => "double_swerve",
            },
        )
        .parameter("lane_width", lane_width)
        .input("paths", &file)?
        .write(out)
}

/// Scenario JSON files of a directory, sorted by file name. Manifests and
/// other artifacts dropped next to them are skipped.
fn load_scenarios(dir: &Path) -> Result<Vec<Scenario>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::File(dir.display().to_string(), e))?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().to_string());
            let Some(name) = name else { return false };
            name.ends_with(".json")
                && !name.ends_with(".manifest.json")
                && name != crate::manifest::MANIFEST_FILE
                && name != "sets.json"
        })
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| Ok(serde_json::from_str(&read_to_string(&p)?)?))
        .collect()
}

fn cmd_plan(
    cfg: &ResolvedConfig,
    scenarios: &Path,
    sets: &[PathBuf],
    repeat: Option<usize>,
    jobs: Option<usize>,
    out: &Path,
) -> Result<()> {
    let repeat = repeat.unwrap_or(cfg.plan_repeat);
    if repeat == 0 {
        return Err(Error::InvalidParameter("repeat must be at least 1".into()));
    }
    if sets.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one control set".into(),
        ));
    }
    let worlds = load_scenarios(scenarios)?;
    if worlds.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no scenarios in {}",
            scenarios.display()
        )));
    }
    let resolution = worlds[0].grid.resolution;
    if worlds.iter().any(|w| w.grid.resolution != resolution) {
        return Err(Error::InvalidParameter(
            "scenarios mix grid resolutions".into(),
        ));
    }
    let mut named_sets: Vec<(String, ControlSet)> = Vec::with_capacity(sets.len());
    for p in sets {
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::InvalidParameter(format!("no file stem in {}", p.display())))?;
        if named_sets.iter().any(|(n, _)| *n == name) {
            return Err(Error::InvalidParameter(format!(
                "control-set name {name} appears twice"
            )));
        }
        named_sets.push((name, ControlSet::load(p)?));
    }

    // Failed plans record a zero-cost, zero-expansion row; only the
    // success flag carries information for them.
    let (rows, planned) = with_jobs(jobs, || {
        let mut rows: Vec<ResultRow> = Vec::new();
        let mut planned: Vec<(String, String, SampledPath)> = Vec::new();
        for (name, cs) in &named_sets {
            let planner = Planner::new(cs, VehicleFootprint::default(), resolution);
            for r in 0..repeat {
                let outcomes: Vec<_> = worlds
                    .par_iter()
                    .map(|w| (w.id.clone(), planner.plan(w)))
                    .collect();
                for (id, outcome) in outcomes {
                    match outcome {
                        Ok(pr) => {
                            if r == 0 {
                                planned.push((id.clone(), name.clone(), pr.path.clone()));
                            }
                            rows.push(ResultRow {
                                scenario_id: id,
                                set_name: name.clone(),
                                cost: pr.cost,
                                expansions: pr.expansions,
                                wall_time_s: pr.wall_time_s,
                                success: true,
                            });
                        }
                        Err(Error::NoPlan) | Err(Error::EmptyGoal) => rows.push(ResultRow {
                            scenario_id: id,
                            set_name: name.clone(),
                            cost: 0.0,
                            expansions: 0,
                            wall_time_s: 0.0,
                            success: false,
                        }),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok((rows, planned))
    })?;

    create_dir(out)?;
    let mut writer = csv::Writer::from_path(out.join("results.csv"))
        .map_err(|e| Error::File(out.display().to_string(), std::io::Error::other(e)))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    let refs_dir = out.join("refs");
    create_dir(&refs_dir)?;
    for w in &worlds {
        write_sampled_csv(
            &refs_dir.join(format!("{}.csv", w.id)),
            &[NamedPath {
                id: w.id.clone(),
                path: w.reference_path.clone(),
            }],
        )?;
    }
    let paths_dir = out.join("paths");
    create_dir(&paths_dir)?;
    for (sid, set, path) in &planned {
        write_sampled_csv(
            &paths_dir.join(format!("{sid}_{set}.csv")),
            &[NamedPath {
                id: sid.clone(),
                path: path.clone(),
            }],
        )?;
    }

    let summaries: Vec<SetSummary> = named_sets
        .iter()
        .map(|(name, cs)| SetSummary {
            name: name.clone(),
            size: cs.len(),
        })
        .collect();
    write_string(
        &out.join("sets.json"),
        &serde_json::to_string_pretty(&summaries)?,
    )?;

    let mut manifest = RunManifest::new("plan", &cfg.hash(), None)
        .parameter("repeat", repeat)
        .parameter(
            "sets",
            summaries
                .iter()
                .map(|s| s.name.as_str())
                .collect::<Vec<_>>()
                .join(","),
        )
        .input("scenarios", scenarios)?;
    for (p, (name, _)) in sets.iter().zip(named_sets.iter()) {
        manifest = manifest.input(&format!("set:{name}"), p)?;
    }
    manifest.write(out)
}

fn cmd_report(cfg: &ResolvedConfig, results: &Path, out: &Path) -> Result<()> {
    let sets: Vec<SetSummary> = serde_json::from_str(&read_to_string(&results.join("sets.json"))?)?;
    let mut reader = csv::Reader::from_path(results.join("results.csv"))
        .map_err(|e| Error::File(results.display().to_string(), std::io::Error::other(e)))?;
    let rows: Vec<ResultRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()?;

    let read_single = |path: &Path| -> Result<SampledPath> {
        let mut named = read_sampled_csv(path, cfg.delta)?;
        match named.len() {
            1 => Ok(named.pop().expect("length checked").path),
            n => Err(Error::InvalidParameter(format!(
                "{} holds {n} paths, expected 1",
                path.display()
            ))),
        }
    };
    let mut planned = std::collections::BTreeMap::new();
    let mut references = std::collections::BTreeMap::new();
    for row in &rows {
        let key = (row.scenario_id.clone(), row.set_name.clone());
        if row.success && !planned.contains_key(&key) {
            let file = results
                .join("paths")
                .join(format!("{}_{}.csv", row.scenario_id, row.set_name));
            planned.insert(key, read_single(&file)?);
        }
        if !references.contains_key(&row.scenario_id) {
            let file = results
                .join("refs")
                .join(format!("{}.csv", row.scenario_id));
            references.insert(row.scenario_id.clone(), read_single(&file)?);
        }
    }
    let plan_manifest = RunManifest::read(results)
        .ok()
        .map(|m| serde_json::to_value(m).expect("manifest serializes"));
    let inputs = ReportInputs {
        sets,
        rows,
        planned,
        references,
        plan_manifest,
    };
    emit_reports(&inputs, out)
}
