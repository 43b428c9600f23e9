use clap::{Parser, Subcommand};
use noregret_cli::{load_config, run_experiment, run_report, Overrides, PRESET_NAMES};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulate no-regret learning in convex market games with mixed
/// gradient/bandit feedback and export plot-ready CSVs.
#[derive(Parser)]
#[command(name = "noregret", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write trajectory/summary CSVs.
    Run {
        /// Path to the TOML config.
        config: Option<PathBuf>,
        /// Alternative way to pass the config path.
        #[arg(long = "config", value_name = "PATH")]
        config_flag: Option<PathBuf>,
        /// Output directory (overrides config and NOREGRET_OUT_DIR).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Number of replicate seeds.
        #[arg(long, value_name = "K")]
        seeds: Option<u32>,
        /// First seed; replicate k uses base_seed + k.
        #[arg(long = "base-seed", value_name = "S")]
        base_seed: Option<u64>,
        /// Worker threads (0 = one per core).
        #[arg(long, value_name = "J")]
        jobs: Option<usize>,
    },
    /// Parse and validate a config, reporting every problem at once.
    Validate {
        config: Option<PathBuf>,
        #[arg(long = "config", value_name = "PATH")]
        config_flag: Option<PathBuf>,
    },
    /// List the embedded experiment presets.
    Presets,
    /// Recompute summaries and rate fits from stored trajectories.
    Report {
        dir: PathBuf,
        /// Fit window as "T_LO,T_HI" (default: 100 through the last episode).
        #[arg(long, value_name = "LO,HI")]
        window: Option<String>,
    },
}

const CONFIG_EXIT: u8 = 1;
const RUNTIME_EXIT: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, config_flag, out, seeds, base_seed, jobs } => {
            let Some(path) = pick_config(config, config_flag) else {
                eprintln!("error: pass the config path as an argument or via --config");
                return ExitCode::from(CONFIG_EXIT);
            };
            let overrides = Overrides { out_dir: out.or_else(env_out_dir), seeds, base_seed, jobs };
            let cfg = match load_config(&path, &overrides) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(CONFIG_EXIT);
                }
            };
            match run_experiment(&cfg) {
                Ok(outcome) => {
                    println!(
                        "wrote {} files to {}",
                        outcome.files.len(),
                        outcome.out_dir.display()
                    );
                    if outcome.failures.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        for f in &outcome.failures {
                            eprintln!("cell failed: {f}");
                        }
                        ExitCode::from(RUNTIME_EXIT)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(RUNTIME_EXIT)
                }
            }
        }
        Command::Validate { config, config_flag } => {
            let Some(path) = pick_config(config, config_flag) else {
                eprintln!("error: pass the config path as an argument or via --config");
                return ExitCode::from(CONFIG_EXIT);
            };
            match load_config(&path, &Overrides::default()) {
                Ok(cfg) => {
                    println!(
                        "ok: {} on {} with schedule {}, N_z {:?}, T={}, {} seeds from {}",
                        cfg.label,
                        cfg.game.name(),
                        cfg.schedule.name(),
                        cfg.n_zo,
                        cfg.episodes,
                        cfg.seeds,
                        cfg.base_seed,
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(CONFIG_EXIT)
                }
            }
        }
        Command::Presets => {
            for (name, summary) in PRESET_NAMES {
                println!("{name}: {summary}");
            }
            ExitCode::SUCCESS
        }
        Command::Report { dir, window } => {
            let window = match window.as_deref().map(parse_window).transpose() {
                Ok(w) => w,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(CONFIG_EXIT);
                }
            };
            match run_report(&dir, window) {
                Ok(reports) => {
                    for r in &reports {
                        match &r.fit {
                            Some(fit) => println!(
                                "{}: {} seeds, T={}, final mean {:.3e}, slope {:.3} (r^2 {:.3}) on [{}, {}]",
                                r.variant,
                                r.n_seeds,
                                r.episodes,
                                r.final_mean,
                                fit.exponent,
                                fit.r_squared,
                                fit.window.0,
                                fit.window.1
                            ),
                            None => println!(
                                "{}: {} seeds, T={}, final mean {:.3e}, no log-log fit",
                                r.variant, r.n_seeds, r.episodes, r.final_mean
                            ),
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(RUNTIME_EXIT)
                }
            }
        }
    }
}

fn pick_config(positional: Option<PathBuf>, flag: Option<PathBuf>) -> Option<PathBuf> {
    match (positional, flag) {
        (Some(p), None) | (None, Some(p)) => Some(p),
        (Some(p), Some(f)) if p == f => Some(p),
        _ => None,
    }
}

fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os("NOREGRET_OUT_DIR").map(PathBuf::from)
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(',').ok_or("window must be 'LO,HI'")?;
    let lo: usize = lo.trim().parse().map_err(|_| "window LO must be an integer".to_string())?;
    let hi: usize = hi.trim().parse().map_err(|_| "window HI must be an integer".to_string())?;
    if lo < 1 || hi <= lo {
        return Err("window must satisfy 1 <= LO < HI".into());
    }
    Ok((lo, hi))
}
