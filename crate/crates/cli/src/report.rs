//! `report`: recompute aggregate summaries and rate fits from the per-cell
//! trajectory CSVs stored in an experiment directory.

use crate::runner::fmt_float;
use noregret::{fit_rate_exponent, SlopeFit};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug)]
pub enum ReportError {
    Io(std::io::Error),
    Malformed(String),
    NoTrajectories,
}

impl std::fmt::Display for ReportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReportError::Io(e) => write!(f, "io error: {e}"),
            ReportError::Malformed(e) => write!(f, "malformed trajectory file: {e}"),
            ReportError::NoTrajectories => write!(f, "no traj_*.csv files found"),
        }
    }
}

impl std::error::Error for ReportError {}

impl From<std::io::Error> for ReportError {
    fn from(e: std::io::Error) -> Self {
        ReportError::Io(e)
    }
}

pub struct VariantReport {
    pub variant: String,
    pub n_seeds: usize,
    pub episodes: usize,
    pub fit: Option<SlopeFit>,
    pub final_mean: f64,
}

/// Reads all trajectories, rewrites the aggregate summaries, fits rate
/// exponents of the seed-mean series over `window`, and writes
/// `rate_fits.csv`. Returns one row per variant.
pub fn run_report(dir: &Path, window: Option<(usize, usize)>) -> Result<Vec<VariantReport>, ReportError> {
    // variant -> seed index -> series
    let mut by_variant: BTreeMap<String, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(stem) = name.strip_prefix("traj_").and_then(|s| s.strip_suffix(".csv")) else {
            continue;
        };
        let Some((variant, seed)) = stem.rsplit_once("_seed") else {
            continue;
        };
        let seed: u64 = seed
            .parse()
            .map_err(|_| ReportError::Malformed(format!("{name}: bad seed index")))?;
        let series = read_series(&entry.path())?;
        by_variant.entry(variant.to_string()).or_default().insert(seed, series);
    }
    if by_variant.is_empty() {
        return Err(ReportError::NoTrajectories);
    }

    let mut reports = Vec::new();
    let mut fits_csv = String::from("variant,exponent,intercept,r_squared,t_lo,t_hi\n");
    for (variant, seeds) in &by_variant {
        let episodes = seeds.values().map(|s| s.len()).min().unwrap_or(0);
        if episodes == 0 || seeds.values().any(|s| s.len() != episodes) {
            return Err(ReportError::Malformed(format!(
                "variant {variant}: trajectories disagree on episode count"
            )));
        }
        let n_seeds = seeds.len();

        let mut body = String::from("t,mean,std,n_seeds\n");
        let mut mean_series = Vec::with_capacity(episodes);
        for t in 0..episodes {
            let values: Vec<f64> = seeds.values().map(|s| s[t]).collect();
            let mean = values.iter().sum::<f64>() / n_seeds as f64;
            let std = if n_seeds > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (n_seeds as f64 - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            mean_series.push(mean);
            let _ = writeln!(body, "{},{},{},{}", t + 1, fmt_float(mean), fmt_float(std), n_seeds);
        }
        std::fs::write(dir.join(format!("summary_{variant}.csv")), body.as_bytes())?;

        let (t_lo, t_hi) = window.unwrap_or((100.min(episodes.max(2) - 1).max(1), episodes));
        let fit = fit_rate_exponent(&mean_series, (t_lo, t_hi)).ok();
        if let Some(f) = &fit {
            let _ = writeln!(
                fits_csv,
                "{variant},{},{},{},{},{}",
                fmt_float(f.exponent),
                fmt_float(f.intercept),
                fmt_float(f.r_squared),
                f.window.0,
                f.window.1
            );
        }
        reports.push(VariantReport {
            variant: variant.clone(),
            n_seeds,
            episodes,
            fit,
            final_mean: *mean_series.last().expect("episodes >= 1"),
        });
    }
    std::fs::write(dir.join("rate_fits.csv"), fits_csv.as_bytes())?;
    Ok(reports)
}

fn read_series(path: &Path) -> Result<Vec<f64>, ReportError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "t,value" {
                return Err(ReportError::Malformed(format!(
                    "{}: unexpected header '{line}'",
                    path.display()
                )));
            }
            continue;
        }
        let Some((t, v)) = line.split_once(',') else {
            return Err(ReportError::Malformed(format!("{}: line {lineno}", path.display())));
        };
        let t: usize = t
            .parse()
            .map_err(|_| ReportError::Malformed(format!("{}: bad t on line {lineno}", path.display())))?;
        if t != out.len() + 1 {
            return Err(ReportError::Malformed(format!(
                "{}: episodes out of order at line {lineno}",
                path.display()
            )));
        }
        let v: f64 = v
            .parse()
            .map_err(|_| ReportError::Malformed(format!("{}: bad value on line {lineno}", path.display())))?;
        out.push(v);
    }
    Ok(out)
}
