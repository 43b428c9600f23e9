//! Experiment orchestration: schedules independent `(N_z, seed)` cells onto
//! a bounded worker pool, reduces each run to its metric series, and emits
//! CSV files plus a manifest through a single collector.
//!
//! Outputs are byte-identical for a given config and base seed regardless of
//! the worker count: cell randomness is derived per cell, results are
//! collected in cell order, and all files are written sequentially.

use crate::config::{ExperimentConfig, MetricKind};
use noregret::{
    metrics, par_map_cells, run_asymmetric, run_pure_fo, run_pure_zo, run_risk_asymmetric,
    run_risk_pure_zo, FeedbackAssignment, Game, Profile, QuadraticGame, RiskCournot, RunRecord,
};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug)]
pub enum RunnerError {
    Io(std::io::Error),
    Setup(String),
}

impl std::fmt::Display for RunnerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunnerError::Io(e) => write!(f, "io error: {e}"),
            RunnerError::Setup(e) => write!(f, "setup error: {e}"),
        }
    }
}

impl std::error::Error for RunnerError {}

impl From<std::io::Error> for RunnerError {
    fn from(e: std::io::Error) -> Self {
        RunnerError::Io(e)
    }
}

/// What one experiment produced: emitted files (name, sha256, bytes) and any
/// per-cell failures.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<FileEntry>,
    pub failures: Vec<String>,
}

#[derive(Debug)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

struct CellOutput {
    sq_error: Vec<f64>,
    group: Option<(Vec<f64>, Vec<f64>)>,
    regret: Option<Vec<f64>>,
}

enum GameHandle {
    Quadratic(QuadraticGame),
    Risk(RiskCournot),
}

/// Nine-significant-digit float serialization used in every CSV cell.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, RunnerError> {
    let (handle, x_star, modulus) = match (&config.game.build_quadratic(), &config.game.build_risk()) {
        (Some(g), _) => {
            let x_star = g.solve_ne().map_err(|e| RunnerError::Setup(e.to_string()))?;
            let m = g.monotonicity_modulus();
            (GameHandle::Quadratic(g.clone()), x_star, (m > 0.0).then_some(m))
        }
        (_, Some(r)) => {
            let x_star = r.solve_ne();
            (GameHandle::Risk(r.clone()), x_star, None)
        }
        _ => return Err(RunnerError::Setup("config resolved to no game".into())),
    };
    let n_agents = x_star.n_agents();

    // Resolve one schedule per N_z value up front so setup errors surface
    // before any work is scheduled.
    let mut schedules = Vec::new();
    for &n_zo in &config.n_zo {
        let sched = config
            .schedule
            .build(n_zo, n_agents, modulus)
            .map_err(RunnerError::Setup)?;
        schedules.push(sched);
    }

    // One cell per (N_z, seed index), in deterministic order.
    let cells: Vec<(usize, u32)> = config
        .n_zo
        .iter()
        .enumerate()
        .flat_map(|(vi, _)| (0..config.seeds).map(move |s| (vi, s)))
        .collect();

    let episodes = config.episodes;
    let run_cell = |&(variant_idx, seed_idx): &(usize, u32)| -> Result<CellOutput, String> {
        let n_zo = config.n_zo[variant_idx];
        let sched = &schedules[variant_idx];
        let seed = config.base_seed.wrapping_add(seed_idx as u64);
        let record = match &handle {
            GameHandle::Quadratic(game) => {
                if n_zo == 0 {
                    run_pure_fo(game, sched, episodes, seed)
                } else if n_zo == game.num_agents() {
                    run_pure_zo(game, sched, episodes, seed)
                } else {
                    let assign =
                        FeedbackAssignment::new(game.num_agents(), n_zo).map_err(|e| e.to_string())?;
                    run_asymmetric(game, &assign, sched, episodes, seed)
                }
            }
            GameHandle::Risk(game) => {
                if n_zo == 1 {
                    run_risk_asymmetric(game, sched, episodes, seed)
                } else {
                    run_risk_pure_zo(game, sched, episodes, seed)
                }
            }
        }
        .map_err(|e| e.to_string())?;
        reduce_cell(&handle, &record, &x_star, n_zo, &config.metrics).map_err(|e| e.to_string())
    };

    let results: Vec<Result<CellOutput, String>> = if config.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| RunnerError::Setup(e.to_string()))?;
        pool.install(|| par_map_cells(&cells, run_cell))
    } else {
        par_map_cells(&cells, run_cell)
    };

    // Single collector: everything below is sequential.
    std::fs::create_dir_all(&config.out_dir)?;
    let mut files: Vec<FileEntry> = Vec::new();
    let mut failures: Vec<String> = Vec::new();

    for (variant_idx, &n_zo) in config.n_zo.iter().enumerate() {
        let variant = format!("nz{n_zo}");
        let mut ok_cells: Vec<(u32, &CellOutput)> = Vec::new();
        for (cell_idx, cell) in cells.iter().enumerate() {
            if cell.0 != variant_idx {
                continue;
            }
            match &results[cell_idx] {
                Ok(out) => ok_cells.push((cell.1, out)),
                Err(e) => failures.push(format!("variant {variant} seed {}: {e}", cell.1)),
            }
        }

        // Per-cell trajectories.
        for (seed_idx, out) in &ok_cells {
            let mut body = String::from("t,value\n");
            for (t, v) in out.sq_error.iter().enumerate() {
                let _ = writeln!(body, "{},{}", t + 1, fmt_float(*v));
            }
            files.push(write_file(config, &format!("traj_{variant}_seed{seed_idx}.csv"), &body)?);
        }

        if ok_cells.is_empty() {
            continue;
        }
        let n_seeds = ok_cells.len();

        // Aggregate summary: mean and sample std of the squared equilibrium
        // distance across seeds, per episode.
        let mut body = String::from("t,mean,std,n_seeds\n");
        for t in 0..episodes {
            let values: Vec<f64> = ok_cells.iter().map(|(_, c)| c.sq_error[t]).collect();
            let (mean, std) = mean_std(&values);
            let _ = writeln!(body, "{},{},{},{}", t + 1, fmt_float(mean), fmt_float(std), n_seeds);
        }
        files.push(write_file(config, &format!("summary_{variant}.csv"), &body)?);

        if config.metrics.contains(&MetricKind::GroupErrors) {
            if let Some(rows) = group_rows(&ok_cells, episodes) {
                let mut body = String::from("t,fo_mean_err,zo_mean_err,n_seeds\n");
                for (t, fo, zo) in rows {
                    let _ =
                        writeln!(body, "{t},{},{},{}", fmt_float(fo), fmt_float(zo), n_seeds);
                }
                files.push(write_file(config, &format!("groups_{variant}.csv"), &body)?);
            }
        }

        if config.metrics.contains(&MetricKind::Regret) {
            if let Some(n_agents) = ok_cells[0].1.regret.as_ref().map(|r| r.len()) {
                let mut body = String::from("t,agent_id,value\n");
                for agent in 0..n_agents {
                    let values: Vec<f64> = ok_cells
                        .iter()
                        .filter_map(|(_, c)| c.regret.as_ref().map(|r| r[agent]))
                        .collect();
                    let (mean, _) = mean_std(&values);
                    let _ = writeln!(body, "{episodes},{agent},{}", fmt_float(mean));
                }
                files.push(write_file(config, &format!("regret_{variant}.csv"), &body)?);
            }
        }
    }

    // Manifest goes last so it can list every file with its content hash.
    let manifest = render_manifest(config, &files, &failures);
    let manifest_path = config.out_dir.join("manifest.toml");
    std::fs::write(&manifest_path, manifest.as_bytes())?;

    Ok(ExperimentOutcome { out_dir: config.out_dir.clone(), files, failures })
}

fn reduce_cell(
    handle: &GameHandle,
    record: &RunRecord,
    x_star: &Profile,
    n_zo: usize,
    wanted: &[MetricKind],
) -> Result<CellOutput, noregret::metrics::MetricsError> {
    // Round through the serialized representation so the aggregate summary
    // is exactly recomputable from the stored per-cell trajectories.
    let sq_error: Vec<f64> = metrics::ne_distance_series(record, x_star)?
        .into_iter()
        .map(|v| fmt_float(v).parse::<f64>().expect("round-trip"))
        .collect();
    let n_agents = x_star.n_agents();

    let group = if wanted.contains(&MetricKind::GroupErrors) && n_zo > 0 && n_zo < n_agents {
        let per_agent = metrics::per_agent_sq_error_series(record, x_star)?;
        let mut fo = Vec::with_capacity(per_agent.len());
        let mut zo = Vec::with_capacity(per_agent.len());
        for row in &per_agent {
            let zo_mean =
                row[..n_zo].iter().map(|v| v.sqrt()).sum::<f64>() / n_zo as f64;
            let fo_mean =
                row[n_zo..].iter().map(|v| v.sqrt()).sum::<f64>() / (n_agents - n_zo) as f64;
            fo.push(fo_mean);
            zo.push(zo_mean);
        }
        Some((fo, zo))
    } else {
        None
    };

    let regret = if wanted.contains(&MetricKind::Regret) {
        let per_agent: Result<Vec<f64>, _> = match handle {
            GameHandle::Quadratic(game) => (0..n_agents)
                .map(|i| metrics::regret(record, game, i).map(|r| r.regret))
                .collect(),
            GameHandle::Risk(game) => {
                // Regret against the closed-form objectives; the recorded
                // costs already are those objectives.
                let induced = game.induced_game();
                (0..n_agents)
                    .map(|i| metrics::regret(record, &induced, i).map(|r| r.regret))
                    .collect()
            }
        };
        Some(per_agent?)
    } else {
        None
    };

    Ok(CellOutput { sq_error, group, regret })
}

fn group_rows(
    cells: &[(u32, &CellOutput)],
    episodes: usize,
) -> Option<Vec<(usize, f64, f64)>> {
    if cells.iter().any(|(_, c)| c.group.is_none()) {
        return None;
    }
    let mut rows = Vec::with_capacity(episodes);
    for t in 0..episodes {
        let mut fo_sum = 0.0;
        let mut zo_sum = 0.0;
        for (_, c) in cells {
            let (fo, zo) = c.group.as_ref().expect("checked above");
            fo_sum += fo[t];
            zo_sum += zo[t];
        }
        let n = cells.len() as f64;
        rows.push((t + 1, fo_sum / n, zo_sum / n));
    }
    Some(rows)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

fn write_file(
    config: &ExperimentConfig,
    name: &str,
    body: &str,
) -> Result<FileEntry, RunnerError> {
    let path = config.out_dir.join(name);
    std::fs::write(&path, body.as_bytes())?;
    Ok(FileEntry { name: name.to_string(), sha256: sha256_hex(body.as_bytes()), bytes: body.len() })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Canonical description of the science-relevant fields; its hash ties the
/// outputs to the configuration that produced them.
pub fn canonical_description(config: &ExperimentConfig) -> String {
    format!(
        "label={}\ngame={}\nschedule={}\nn_zo={:?}\nepisodes={}\nseeds={}\nbase_seed={}\nmetrics={:?}\n",
        config.label,
        config.game.name(),
        config.schedule.name(),
        config.n_zo,
        config.episodes,
        config.seeds,
        config.base_seed,
        config
            .metrics
            .iter()
            .map(|m| format!("{m:?}"))
            .collect::<Vec<_>>(),
    )
}

fn render_manifest(config: &ExperimentConfig, files: &[FileEntry], failures: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "library_version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "label = \"{}\"", config.label);
    let _ = writeln!(out, "game = \"{}\"", config.game.name());
    let _ = writeln!(out, "schedule = \"{}\"", config.schedule.name());
    let _ = writeln!(out, "episodes = {}", config.episodes);
    let _ = writeln!(out, "seeds = {}", config.seeds);
    let _ = writeln!(out, "base_seed = {}", config.base_seed);
    let _ = writeln!(
        out,
        "n_zo = [{}]",
        config.n_zo.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(
        out,
        "config_sha256 = \"{}\"",
        sha256_hex(canonical_description(config).as_bytes())
    );
    for f in files {
        let _ = writeln!(out, "\n[[files]]");
        let _ = writeln!(out, "name = \"{}\"", f.name);
        let _ = writeln!(out, "sha256 = \"{}\"", f.sha256);
        let _ = writeln!(out, "bytes = {}", f.bytes);
    }
    for failure in failures {
        let _ = writeln!(out, "\n[[failures]]");
        let _ = writeln!(out, "detail = \"{}\"", failure.replace('"', "'"));
    }
    out
}
