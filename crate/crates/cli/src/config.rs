//! Experiment configuration: strict TOML ingestion, embedded presets, and
//! range validation that reports every violation at once.

use noregret::{
    BoxSet, PowerLaw, QuadraticGame, QuadraticGameSpec, RiskCournot, RiskCournotSpec,
    SamplingSchedule, ScheduleSet,
};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    /// Every structural and range violation found, reported together.
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "config is not valid TOML: {e}"),
            ConfigError::Invalid(violations) => {
                writeln!(f, "invalid config ({} problem(s)):", violations.len())?;
                for v in violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Which concrete game a config resolves to.
#[derive(Debug, Clone)]
pub enum GameChoice {
    Cournot10,
    RiskCournot2,
    InlineQuadratic { spec: QuadraticGameSpec, interval: (f64, f64) },
    InlineRisk { spec: RiskCournotSpec, interval: (f64, f64) },
}

impl GameChoice {
    pub fn is_risk(&self) -> bool {
        matches!(self, GameChoice::RiskCournot2 | GameChoice::InlineRisk { .. })
    }

    pub fn num_agents(&self) -> usize {
        match self {
            GameChoice::Cournot10 => 10,
            GameChoice::RiskCournot2 | GameChoice::InlineRisk { .. } => 2,
            GameChoice::InlineQuadratic { spec, .. } => spec.a.len(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GameChoice::Cournot10 => "cournot10",
            GameChoice::RiskCournot2 => "risk-cournot2",
            GameChoice::InlineQuadratic { .. } => "inline-quadratic",
            GameChoice::InlineRisk { .. } => "inline-risk",
        }
    }

    pub fn build_quadratic(&self) -> Option<QuadraticGame> {
        match self {
            GameChoice::Cournot10 => Some(QuadraticGame::cournot10()),
            GameChoice::InlineQuadratic { spec, interval } => Some(
                QuadraticGame::with_interval("inline-quadratic", spec.clone(), interval.0, interval.1)
                    .expect("validated"),
            ),
            _ => None,
        }
    }

    pub fn build_risk(&self) -> Option<RiskCournot> {
        match self {
            GameChoice::RiskCournot2 => Some(RiskCournot::preset()),
            GameChoice::InlineRisk { spec, interval } => {
                let set = BoxSet::interval(interval.0, interval.1, 1).expect("validated");
                Some(RiskCournot::new(spec.clone(), vec![set.clone(), set]).expect("validated"))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ScheduleChoice {
    Named(String),
    Inline { eta_f: PowerLaw, eta_z: PowerLaw, delta: PowerLaw, n_samples: Option<SamplingSchedule> },
}

impl ScheduleChoice {
    pub fn name(&self) -> &str {
        match self {
            ScheduleChoice::Named(n) => n,
            ScheduleChoice::Inline { .. } => "inline",
        }
    }

    /// Instantiate for a given `(N_z, N)`, resolving `1/(m t)` style presets
    /// against the supplied monotonicity modulus.
    pub fn build(&self, n_zo: usize, n_agents: usize, modulus: Option<f64>) -> Result<ScheduleSet, String> {
        match self {
            ScheduleChoice::Inline { eta_f, eta_z, delta, n_samples } => ScheduleSet::new(
                "inline", *eta_f, *eta_z, *delta, *n_samples, n_zo, n_agents,
            )
            .map_err(|e| e.to_string()),
            ScheduleChoice::Named(name) => match name.as_str() {
                "experiment-a" => Ok(ScheduleSet::experiment_a(n_zo, n_agents)),
                "experiment-b" => Ok(ScheduleSet::experiment_b(n_zo, n_agents)),
                "no-regret" => Ok(ScheduleSet::no_regret(n_zo, n_agents)),
                "last-iterate" => {
                    let m = modulus.ok_or("schedule 'last-iterate' needs a monotonicity modulus")?;
                    Ok(ScheduleSet::last_iterate(n_zo, n_agents, m))
                }
                "fo-rate" => {
                    let m = modulus.ok_or("schedule 'fo-rate' needs a monotonicity modulus")?;
                    Ok(ScheduleSet::fo_rate(n_agents, m))
                }
                "zo-rate" => {
                    let m = modulus.ok_or("schedule 'zo-rate' needs a monotonicity modulus")?;
                    Ok(ScheduleSet::zo_rate(n_agents, m))
                }
                other => Err(format!("unknown schedule preset '{other}'")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    NeDistance,
    Regret,
    GroupErrors,
}

impl MetricKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "ne_distance" => Some(Self::NeDistance),
            "regret" => Some(Self::Regret),
            "group_errors" => Some(Self::GroupErrors),
            _ => None,
        }
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub label: String,
    pub game: GameChoice,
    pub schedule: ScheduleChoice,
    pub n_zo: Vec<usize>,
    pub episodes: usize,
    pub seeds: u32,
    pub base_seed: u64,
    pub metrics: Vec<MetricKind>,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

/// Command-line overrides applied after the file parses.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seeds: Option<u32>,
    pub base_seed: Option<u64>,
    pub jobs: Option<usize>,
}

pub const PRESET_NAMES: &[(&str, &str)] = &[
    ("fig1", "cournot10, experiment-a schedules, N_z in {0,2,5,8,10}, T=10000, 50 seeds"),
    ("fig2", "cournot10, experiment-a schedules, N_z=5, group errors, T=10000, 50 seeds"),
    ("fig4", "risk-cournot2, experiment-b schedules, mixed vs pure bandit, T=5000, 50 seeds"),
];

/// Embedded experiment presets.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let base = ExperimentConfig {
        label: name.to_string(),
        game: GameChoice::Cournot10,
        schedule: ScheduleChoice::Named("experiment-a".into()),
        n_zo: vec![],
        episodes: 10_000,
        seeds: 50,
        base_seed: 1,
        metrics: vec![MetricKind::NeDistance],
        out_dir: PathBuf::from("out").join(name),
        jobs: 0,
    };
    match name {
        "fig1" => Some(ExperimentConfig { n_zo: vec![0, 2, 5, 8, 10], ..base }),
        "fig2" => Some(ExperimentConfig {
            n_zo: vec![5],
            metrics: vec![MetricKind::NeDistance, MetricKind::GroupErrors],
            ..base
        }),
        "fig4" => Some(ExperimentConfig {
            game: GameChoice::RiskCournot2,
            schedule: ScheduleChoice::Named("experiment-b".into()),
            n_zo: vec![1, 2],
            episodes: 5_000,
            ..base
        }),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Raw TOML layer.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    game: Option<RawGame>,
    schedule: Option<RawSchedule>,
    n_zo: Option<Vec<i64>>,
    episodes: Option<i64>,
    seeds: Option<i64>,
    base_seed: Option<i64>,
    metrics: Option<Vec<String>>,
    out_dir: Option<String>,
    jobs: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawGame {
    Named(String),
    Inline(RawGameTable),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGameTable {
    kind: String,
    a: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    e: Option<Vec<f64>>,
    offset: Option<f64>,
    #[serde(rename = "box")]
    interval: Option<[f64; 2]>,
    alpha: Option<[f64; 2]>,
    noise_hi: Option<f64>,
    demand_intercept: Option<f64>,
    cost_slope: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSchedule {
    Named(String),
    Inline(RawScheduleTable),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheduleTable {
    eta_f: RawPowerLaw,
    eta_z: RawPowerLaw,
    delta: RawPowerLaw,
    n_samples: Option<RawSamples>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPowerLaw {
    coeff: f64,
    #[serde(default)]
    nz_exp: f64,
    #[serde(default)]
    n_exp: f64,
    #[serde(default)]
    t_exp: f64,
}

impl RawPowerLaw {
    fn build(&self) -> PowerLaw {
        PowerLaw { coeff: self.coeff, nz_exp: self.nz_exp, n_exp: self.n_exp, t_exp: self.t_exp }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSamples {
    n0: i64,
    exponent: f64,
}

/// Collects every unknown key in the document up front, so typos in several
/// places surface together instead of one at a time.
fn collect_unknown_keys(value: &toml::Value, violations: &mut Vec<String>) {
    const TOP: &[&str] = &[
        "preset", "game", "schedule", "n_zo", "episodes", "seeds", "base_seed", "metrics",
        "out_dir", "jobs",
    ];
    const GAME: &[&str] = &[
        "kind", "a", "b", "e", "offset", "box", "alpha", "noise_hi", "demand_intercept",
        "cost_slope",
    ];
    const SCHEDULE: &[&str] = &["eta_f", "eta_z", "delta", "n_samples"];
    const POWERLAW: &[&str] = &["coeff", "nz_exp", "n_exp", "t_exp"];
    const SAMPLES: &[&str] = &["n0", "exponent"];

    let check = |table: &toml::value::Table, allowed: &[&str], ctx: &str, out: &mut Vec<String>| {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for key in table.keys() {
            if !allowed.contains(key.as_str()) {
                out.push(format!("unknown key '{key}' in {ctx}"));
            }
        }
    };

    let Some(top) = value.as_table() else {
        violations.push("config root must be a table".into());
        return;
    };
    check(top, TOP, "config", violations);
    if let Some(game) = top.get("game").and_then(|v| v.as_table()) {
        check(game, GAME, "[game]", violations);
    }
    if let Some(sched) = top.get("schedule").and_then(|v| v.as_table()) {
        check(sched, SCHEDULE, "[schedule]", violations);
        for law in ["eta_f", "eta_z", "delta"] {
            if let Some(t) = sched.get(law).and_then(|v| v.as_table()) {
                check(t, POWERLAW, &format!("[schedule.{law}]"), violations);
            }
        }
        if let Some(t) = sched.get("n_samples").and_then(|v| v.as_table()) {
            check(t, SAMPLES, "[schedule.n_samples]", violations);
        }
    }
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let value: toml::Value = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let mut violations = Vec::new();
    collect_unknown_keys(&value, &mut violations);
    if !violations.is_empty() {
        return Err(ConfigError::Invalid(violations));
    }
    let raw: RawConfig = value.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    resolve(raw, overrides)
}

fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut violations: Vec<String> = Vec::new();

    let mut config = if let Some(name) = &raw.preset {
        let Some(mut cfg) = preset(name) else {
            return Err(ConfigError::Invalid(vec![format!(
                "unknown preset '{name}' (available: {})",
                PRESET_NAMES.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            )]));
        };
        // A preset pins the scientific fields; only run-shape fields may be
        // overridden alongside it.
        if raw.game.is_some() || raw.schedule.is_some() || raw.n_zo.is_some() || raw.metrics.is_some() {
            violations.push(
                "preset configs may only override episodes/seeds/base_seed/out_dir/jobs".into(),
            );
        }
        if let Some(t) = raw.episodes {
            cfg.episodes = t.max(0) as usize;
            if t < 1 {
                violations.push(format!("episodes must be >= 1, got {t}"));
            }
        }
        cfg
    } else {
        // Fully inline config: game, schedule, n_zo and episodes are required.
        let game = match &raw.game {
            None => {
                violations.push("missing required field 'game'".into());
                GameChoice::Cournot10
            }
            Some(RawGame::Named(name)) => match name.as_str() {
                "cournot10" => GameChoice::Cournot10,
                "risk-cournot2" => GameChoice::RiskCournot2,
                other => {
                    violations.push(format!(
                        "unknown game preset '{other}' (available: cournot10, risk-cournot2)"
                    ));
                    GameChoice::Cournot10
                }
            },
            Some(RawGame::Inline(table)) => resolve_inline_game(table, &mut violations),
        };

        let schedule = match &raw.schedule {
            None => {
                violations.push("missing required field 'schedule'".into());
                ScheduleChoice::Named("experiment-a".into())
            }
            Some(RawSchedule::Named(name)) => {
                let known = ["experiment-a", "experiment-b", "no-regret", "last-iterate", "fo-rate", "zo-rate"];
                if !known.contains(&name.as_str()) {
                    violations.push(format!(
                        "unknown schedule preset '{name}' (available: {})",
                        known.join(", ")
                    ));
                }
                ScheduleChoice::Named(name.clone())
            }
            Some(RawSchedule::Inline(t)) => {
                for (label, law) in [("eta_f", &t.eta_f), ("eta_z", &t.eta_z), ("delta", &t.delta)] {
                    if law.coeff <= 0.0 {
                        violations.push(format!("schedule.{label}.coeff must be positive"));
                    }
                    if law.t_exp > 0.0 {
                        violations.push(format!("schedule.{label}.t_exp must be <= 0 (non-increasing)"));
                    }
                }
                let n_samples = match &t.n_samples {
                    None => None,
                    Some(s) => {
                        if s.n0 < 1 {
                            violations.push(format!("schedule.n_samples.n0 must be >= 1, got {}", s.n0));
                            None
                        } else if s.exponent < 0.0 {
                            violations.push("schedule.n_samples.exponent must be >= 0".into());
                            None
                        } else {
                            Some(SamplingSchedule::new(s.n0 as u64, s.exponent).expect("checked"))
                        }
                    }
                };
                ScheduleChoice::Inline {
                    eta_f: t.eta_f.build(),
                    eta_z: t.eta_z.build(),
                    delta: t.delta.build(),
                    n_samples,
                }
            }
        };

        let episodes = match raw.episodes {
            None => {
                violations.push("missing required field 'episodes'".into());
                1
            }
            Some(t) if t < 1 => {
                violations.push(format!("episodes must be >= 1, got {t}"));
                1
            }
            Some(t) => t as usize,
        };

        let n_zo = match &raw.n_zo {
            None => {
                violations.push("missing required field 'n_zo'".into());
                vec![]
            }
            Some(list) if list.is_empty() => {
                violations.push("n_zo must contain at least one value".into());
                vec![]
            }
            Some(list) => {
                let n = game.num_agents();
                let mut out = Vec::new();
                for v in list {
                    if *v < 0 || *v > n as i64 {
                        violations.push(format!("n_zo value {v} outside [0, {n}]"));
                    } else {
                        out.push(*v as usize);
                    }
                }
                out
            }
        };

        let metrics = match &raw.metrics {
            None => vec![MetricKind::NeDistance],
            Some(names) => {
                let mut out = Vec::new();
                for name in names {
                    match MetricKind::parse(name) {
                        Some(m) => out.push(m),
                        None => violations.push(format!(
                            "unknown metric '{name}' (available: ne_distance, regret, group_errors)"
                        )),
                    }
                }
                if out.is_empty() {
                    out.push(MetricKind::NeDistance);
                }
                out
            }
        };

        ExperimentConfig {
            label: "custom".into(),
            game,
            schedule,
            n_zo,
            episodes,
            seeds: 50,
            base_seed: 1,
            metrics,
            out_dir: PathBuf::from("out/custom"),
            jobs: 0,
        }
    };

    if let Some(s) = raw.seeds {
        if s < 1 {
            violations.push(format!("seeds must be >= 1, got {s}"));
        } else {
            config.seeds = s as u32;
        }
    }
    if let Some(s) = raw.base_seed {
        if s < 0 {
            violations.push(format!("base_seed must be >= 0, got {s}"));
        } else {
            config.base_seed = s as u64;
        }
    }
    if let Some(j) = raw.jobs {
        if j < 0 {
            violations.push(format!("jobs must be >= 0, got {j}"));
        } else {
            config.jobs = j as usize;
        }
    }
    if let Some(dir) = &raw.out_dir {
        if dir.is_empty() {
            violations.push("out_dir must not be empty".into());
        } else {
            config.out_dir = PathBuf::from(dir);
        }
    }

    // Cross-field checks.
    if config.game.is_risk() {
        for v in &config.n_zo {
            if *v == 0 {
                violations.push(
                    "risk games need n_zo in {1, 2}: the risk-averse agent has no gradient feedback"
                        .into(),
                );
            }
        }
        let has_samples = match &config.schedule {
            ScheduleChoice::Named(n) => n == "experiment-b",
            ScheduleChoice::Inline { n_samples, .. } => n_samples.is_some(),
        };
        if !has_samples {
            violations.push("risk games need a schedule with n_samples (e.g. 'experiment-b')".into());
        }
        if matches!(&config.schedule, ScheduleChoice::Named(n) if ["last-iterate", "fo-rate", "zo-rate"].contains(&n.as_str()))
        {
            violations.push("modulus-based schedules are only available for quadratic games".into());
        }
    }

    // Flag overrides win over everything in the file.
    if let Some(dir) = &overrides.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(s) = overrides.seeds {
        if s < 1 {
            violations.push("--seeds must be >= 1".into());
        } else {
            config.seeds = s;
        }
    }
    if let Some(s) = overrides.base_seed {
        config.base_seed = s;
    }
    if let Some(j) = overrides.jobs {
        config.jobs = j;
    }

    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

fn resolve_inline_game(table: &RawGameTable, violations: &mut Vec<String>) -> GameChoice {
    match table.kind.as_str() {
        "quadratic" => {
            let a = table.a.clone().unwrap_or_default();
            let b = table.b.clone().unwrap_or_default();
            let e = table.e.clone().unwrap_or_default();
            let interval = table.interval.unwrap_or([0.0, 3.0]);
            if a.is_empty() || a.len() != b.len() || a.len() != e.len() {
                violations.push("quadratic game needs a, b, e vectors of one shared length".into());
            }
            if let Some(i) = a.iter().position(|v| *v <= 0.0) {
                violations.push(format!("quadratic game needs a[{i}] > 0 for convexity"));
            }
            if interval[0] > interval[1] {
                violations.push("game.box must satisfy lo <= hi".into());
            }
            GameChoice::InlineQuadratic {
                spec: QuadraticGameSpec { a, b, e, offset: table.offset.unwrap_or(1.0) },
                interval: (interval[0], interval[1]),
            }
        }
        "risk" => {
            let defaults = RiskCournotSpec::default();
            let alpha = table.alpha.unwrap_or(defaults.alpha);
            for (i, v) in alpha.iter().enumerate() {
                if !(*v > 0.0 && *v <= 1.0) {
                    violations.push(format!("game.alpha[{i}] must lie in (0, 1], got {v}"));
                }
            }
            let interval = table.interval.unwrap_or([0.0, 2.0]);
            if interval[0] > interval[1] {
                violations.push("game.box must satisfy lo <= hi".into());
            }
            if interval[0] < 0.0 {
                violations.push("risk game actions must be nonnegative (box lo >= 0)".into());
            }
            GameChoice::InlineRisk {
                spec: RiskCournotSpec {
                    alpha,
                    noise_hi: table.noise_hi.unwrap_or(defaults.noise_hi),
                    demand_intercept: table.demand_intercept.unwrap_or(defaults.demand_intercept),
                    cost_slope: table.cost_slope.unwrap_or(defaults.cost_slope),
                    offset: table.offset.unwrap_or(defaults.offset),
                },
                interval: (interval[0], interval[1]),
            }
        }
        other => {
            violations.push(format!("unknown game kind '{other}' (quadratic or risk)"));
            GameChoice::Cournot10
        }
    }
}
