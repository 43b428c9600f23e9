//! Learning dynamics: projected first-order descent, one-point bandit
//! (zeroth-order) descent, and the mixed-feedback dynamics that runs both
//! agent classes inside one game.
//!
//! Every episode is two-phase: all agents commit their plays, feedback is
//! computed from the frozen played profile, and only then do updates apply.
//! Randomness is derived per `(seed, agent, episode)`, so trajectories are
//! reproducible bit-for-bit and independent of scheduling.

use crate::games::{Game, Profile, RiskCournot};
use crate::geometry::{
    episode_rng, project_box, sample_unit_sphere, shrink_set, BoxSet, GeometryError,
    RandomDirection,
};
use crate::risk::{cvar_empirical, RiskError, SamplingSchedule};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("episode count must be at least 1")]
    ZeroEpisodes,
    #[error("assignment covers {assignment} agents, game has {game}")]
    AssignmentMismatch { assignment: usize, game: usize },
    #[error("agent {0} needs a gradient oracle for first-order updates")]
    MissingGradient(usize),
    #[error("schedule has no per-episode sample count; risk runs need one")]
    MissingSamplingSchedule,
    #[error("the first-order agent of a risk run must be risk-neutral (alpha = 1)")]
    FirstOrderAgentNotNeutral,
    #[error("perturbation size must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Game(#[from] crate::games::GameError),
    #[error(transparent)]
    Risk(#[from] RiskError),
}

/// Partition of agents into the zeroth-order class `{0..n_zo}` and the
/// first-order class `{n_zo..n_agents}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackAssignment {
    n_agents: usize,
    n_zo: usize,
}

impl FeedbackAssignment {
    pub fn new(n_agents: usize, n_zo: usize) -> Result<Self, RunError> {
        if n_zo > n_agents || n_agents == 0 {
            return Err(RunError::AssignmentMismatch { assignment: n_zo, game: n_agents });
        }
        Ok(Self { n_agents, n_zo })
    }

    pub fn pure_first_order(n_agents: usize) -> Self {
        Self { n_agents, n_zo: 0 }
    }

    pub fn pure_zeroth_order(n_agents: usize) -> Self {
        Self { n_agents, n_zo: n_agents }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_zo(&self) -> usize {
        self.n_zo
    }

    pub fn zo_agents(&self) -> std::ops::Range<usize> {
        0..self.n_zo
    }

    pub fn fo_agents(&self) -> std::ops::Range<usize> {
        self.n_zo..self.n_agents
    }

    pub fn is_zo(&self, i: usize) -> bool {
        i < self.n_zo
    }
}

/// One factor family `coeff · N_z^nz_exp · N^n_exp · t^t_exp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coeff: f64,
    pub nz_exp: f64,
    pub n_exp: f64,
    pub t_exp: f64,
}

impl PowerLaw {
    pub fn of_t(coeff: f64, t_exp: f64) -> Self {
        Self { coeff, nz_exp: 0.0, n_exp: 0.0, t_exp }
    }

    pub fn eval(&self, n_zo: usize, n_agents: usize, t: u64) -> f64 {
        self.coeff
            * (n_zo as f64).powf(self.nz_exp)
            * (n_agents as f64).powf(self.n_exp)
            * (t as f64).powf(self.t_exp)
    }
}

/// Perturbation sizes are kept strictly inside (0, 1); degenerate parameter
/// combinations (e.g. N_z = 1 at t = 1 under some presets) cap here instead
/// of emptying the shrunk set.
const DELTA_CAP: f64 = 1.0 - 1e-9;

/// Step-size and perturbation schedules bound to a given `(N_z, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSet {
    name: String,
    eta_f: PowerLaw,
    eta_z: PowerLaw,
    delta: PowerLaw,
    n_samples: Option<SamplingSchedule>,
    n_zo: usize,
    n_agents: usize,
}

impl ScheduleSet {
    pub fn new(
        name: impl Into<String>,
        eta_f: PowerLaw,
        eta_z: PowerLaw,
        delta: PowerLaw,
        n_samples: Option<SamplingSchedule>,
        n_zo: usize,
        n_agents: usize,
    ) -> Result<Self, RunError> {
        for law in [&eta_f, &eta_z, &delta] {
            if law.coeff <= 0.0 {
                return Err(RunError::NonPositiveStep(law.coeff));
            }
            if law.t_exp > 0.0 {
                // All schedules must be non-increasing in t.
                return Err(RunError::NonPositiveStep(law.t_exp));
            }
        }
        Ok(Self { name: name.into(), eta_f, eta_z, delta, n_samples, n_zo, n_agents })
    }

    /// No-regret schedules: `δ_t = (N_z t)^{-1/4}`, `η_z = N_z^{-1/4} t^{-3/4}`,
    /// `η_f = t^{-1/2}`.
    pub fn no_regret(n_zo: usize, n_agents: usize) -> Self {
        Self::new(
            "no-regret",
            PowerLaw::of_t(1.0, -0.5),
            PowerLaw { coeff: 1.0, nz_exp: -0.25, n_exp: 0.0, t_exp: -0.75 },
            PowerLaw { coeff: 1.0, nz_exp: -0.25, n_exp: 0.0, t_exp: -0.25 },
            None,
            n_zo,
            n_agents,
        )
        .expect("preset is valid")
    }

    /// Equilibrium-convergence schedules for the mixed dynamics:
    /// `δ_t = N_z^{1/6} N^{-1/3} t^{-1/3}`, `η_z = η_f = 1/(m t)`.
    pub fn last_iterate(n_zo: usize, n_agents: usize, modulus: f64) -> Self {
        let eta = PowerLaw::of_t(1.0 / modulus, -1.0);
        Self::new(
            "last-iterate",
            eta,
            eta,
            PowerLaw { coeff: 1.0, nz_exp: 1.0 / 6.0, n_exp: -1.0 / 3.0, t_exp: -1.0 / 3.0 },
            None,
            n_zo,
            n_agents,
        )
        .expect("preset is valid")
    }

    /// Pure first-order schedule `η_t = 1/(m t)`.
    pub fn fo_rate(n_agents: usize, modulus: f64) -> Self {
        let eta = PowerLaw::of_t(1.0 / modulus, -1.0);
        Self::new("fo-rate", eta, eta, PowerLaw::of_t(0.5, -1.0), None, 0, n_agents)
            .expect("preset is valid")
    }

    /// Pure zeroth-order schedules `η_t = 1/(m t)`, `δ_t = N^{-1/6} t^{-1/3}`.
    pub fn zo_rate(n_agents: usize, modulus: f64) -> Self {
        let eta = PowerLaw::of_t(1.0 / modulus, -1.0);
        Self::new(
            "zo-rate",
            eta,
            eta,
            PowerLaw { coeff: 1.0, nz_exp: 0.0, n_exp: -1.0 / 6.0, t_exp: -1.0 / 3.0 },
            None,
            n_agents,
            n_agents,
        )
        .expect("preset is valid")
    }

    /// Deterministic-market experiment schedules: `η = 0.6/t`, `δ = 0.5/t`.
    pub fn experiment_a(n_zo: usize, n_agents: usize) -> Self {
        let eta = PowerLaw::of_t(0.6, -1.0);
        Self::new("experiment-a", eta, eta, PowerLaw::of_t(0.5, -1.0), None, n_zo, n_agents)
            .expect("preset is valid")
    }

    /// Risk-market experiment schedules: `η = 0.005/t`, `δ = 0.5/t`, with the
    /// default decreasing sample schedule.
    pub fn experiment_b(n_zo: usize, n_agents: usize) -> Self {
        let eta = PowerLaw::of_t(0.005, -1.0);
        Self::new(
            "experiment-b",
            eta,
            eta,
            PowerLaw::of_t(0.5, -1.0),
            Some(SamplingSchedule::default()),
            n_zo,
            n_agents,
        )
        .expect("preset is valid")
    }

    pub fn with_samples(mut self, samples: SamplingSchedule) -> Self {
        self.n_samples = Some(samples);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eta_f(&self, t: u64) -> f64 {
        self.eta_f.eval(self.n_zo, self.n_agents, t)
    }

    pub fn eta_z(&self, t: u64) -> f64 {
        self.eta_z.eval(self.n_zo, self.n_agents, t)
    }

    pub fn delta(&self, t: u64) -> f64 {
        self.delta.eval(self.n_zo, self.n_agents, t).min(DELTA_CAP)
    }

    pub fn n_samples(&self) -> Option<SamplingSchedule> {
        self.n_samples
    }
}

/// Full trajectory of one run, tied to its seed and configuration.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub game_id: String,
    pub schedule: String,
    pub n_zo: usize,
    pub episodes: usize,
    /// Base actions `x_t` (the state the updates evolve), per episode.
    pub base: Vec<Profile>,
    /// Played profile after feasibility clipping; what costs were charged on.
    pub played: Vec<Profile>,
    /// Played profile before clipping (perturbed zeroth-order coordinates may
    /// exit the action set at its boundary).
    pub played_raw: Vec<Profile>,
    /// Instantaneous cost of every agent at the played profile.
    pub costs: Vec<Vec<f64>>,
    /// Stochastic cost-oracle draws consumed per agent.
    pub stochastic_samples: Vec<u64>,
}

impl RunRecord {
    pub fn final_base(&self) -> &Profile {
        self.base.last().expect("episodes >= 1")
    }

    /// Sum of recorded costs of agent `i` over episodes `1..=horizon`.
    pub fn cumulative_cost(&self, i: usize, horizon: usize) -> f64 {
        self.costs[..horizon].iter().map(|c| c[i]).sum()
    }
}

/// One-point gradient estimate `(d/δ) · C · u`.
pub fn zo_gradient_estimate(
    cost_value: f64,
    direction: &RandomDirection,
    dim: usize,
    delta: f64,
) -> Result<Vec<f64>, RunError> {
    if delta <= 0.0 {
        return Err(RunError::NonPositiveDelta(delta));
    }
    let scale = dim as f64 / delta * cost_value;
    Ok(direction.as_slice().iter().map(|u| scale * u).collect())
}

/// Projected first-order step `P_X(x − η ∇)`.
pub fn fo_step(x: &[f64], grad: &[f64], eta: f64, set: &BoxSet) -> Result<Vec<f64>, RunError> {
    if eta <= 0.0 {
        return Err(RunError::NonPositiveStep(eta));
    }
    if grad.len() != x.len() {
        return Err(RunError::Geometry(GeometryError::DimensionMismatch {
            expected: x.len(),
            got: grad.len(),
        }));
    }
    let moved: Vec<f64> = x.iter().zip(grad).map(|(xi, g)| xi - eta * g).collect();
    Ok(project_box(&moved, set)?)
}

/// Projected zeroth-order step `P_{(1−δ)X}(x − η g)`.
pub fn zo_step(
    x: &[f64],
    estimate: &[f64],
    eta: f64,
    set: &BoxSet,
    delta: f64,
) -> Result<Vec<f64>, RunError> {
    let shrunk = shrink_set(set, delta)?;
    fo_step(x, estimate, eta, &shrunk)
}

/// Default start: the Chebyshev center of each agent's shrunk set at `δ_1`.
/// Using the shrunk center for every agent keeps the zeroth-order iterates
/// feasible from episode 1 and puts both agent classes on an equal footing.
pub fn default_initial_profile<G: Game + ?Sized>(
    game: &G,
    sched: &ScheduleSet,
) -> Result<Profile, RunError> {
    let d = game.action_dim();
    let delta1 = sched.delta(1);
    let mut x = Profile::zeros(game.num_agents(), d);
    for i in 0..game.num_agents() {
        x.set_agent(i, &shrink_set(game.action_set(i), delta1)?.center());
    }
    Ok(x)
}

fn validate_run<G: Game + ?Sized>(
    game: &G,
    assign: &FeedbackAssignment,
    episodes: usize,
    probe: &Profile,
) -> Result<(), RunError> {
    if episodes == 0 {
        return Err(RunError::ZeroEpisodes);
    }
    if assign.n_agents() != game.num_agents() {
        return Err(RunError::AssignmentMismatch {
            assignment: assign.n_agents(),
            game: game.num_agents(),
        });
    }
    for i in assign.fo_agents() {
        if game.gradient(i, probe).is_none() {
            return Err(RunError::MissingGradient(i));
        }
    }
    Ok(())
}

/// Mixed-feedback dynamics: zeroth-order agents play sphere-perturbed
/// actions and update from one-point estimates over the shrunk set;
/// first-order agents update from their partial gradient at the played
/// (perturbed) profile.
pub fn run_asymmetric<G: Game + ?Sized>(
    game: &G,
    assign: &FeedbackAssignment,
    sched: &ScheduleSet,
    episodes: usize,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let x0 = default_initial_profile(game, sched)?;
    run_asymmetric_from(game, assign, sched, episodes, seed, &x0)
}

/// [`run_asymmetric`] from an explicit start profile.
pub fn run_asymmetric_from<G: Game + ?Sized>(
    game: &G,
    assign: &FeedbackAssignment,
    sched: &ScheduleSet,
    episodes: usize,
    seed: u64,
    start: &Profile,
) -> Result<RunRecord, RunError> {
    validate_run(game, assign, episodes, start)?;
    let n = game.num_agents();
    let d = game.action_dim();
    let mut x = start.clone();
    let mut record = empty_record(game.id(), sched.name(), assign.n_zo(), episodes, seed, n);

    for t in 1..=episodes as u64 {
        let delta = sched.delta(t);
        let (eta_f, eta_z) = (sched.eta_f(t), sched.eta_z(t));

        // Phase 1: play. Zeroth-order agents perturb along a fresh sphere
        // direction; the played action is clipped back into the action set
        // (the base point lives in the shrunk set, but boxes touching the
        // boundary can still be exited).
        let mut directions: Vec<Option<RandomDirection>> = vec![None; n];
        let mut raw = x.clone();
        let mut played = x.clone();
        for i in assign.zo_agents() {
            let mut rng = episode_rng(seed, i, t);
            let u = sample_unit_sphere(&mut rng, d)?;
            let perturbed: Vec<f64> = x
                .agent(i)
                .iter()
                .zip(u.as_slice())
                .map(|(xi, ui)| xi + delta * ui)
                .collect();
            raw.set_agent(i, &perturbed);
            played.set_agent(i, &project_box(&perturbed, game.action_set(i))?);
            directions[i] = Some(u);
        }

        // Phase 2: feedback at the frozen played profile.
        let costs: Vec<f64> = (0..n).map(|i| game.cost(i, &played)).collect();
        let fo_grads: Vec<Option<Vec<f64>>> = (0..n)
            .map(|i| {
                if assign.is_zo(i) {
                    None
                } else {
                    Some(game.gradient(i, &played).expect("validated before episode 1"))
                }
            })
            .collect();

        record.base.push(x.clone());
        record.played_raw.push(raw);
        record.played.push(played);
        record.costs.push(costs.clone());

        // Phase 3: updates.
        let mut next = x.clone();
        for i in assign.zo_agents() {
            let u = directions[i].as_ref().expect("drawn in phase 1");
            let g = zo_gradient_estimate(costs[i], u, d, delta)?;
            next.set_agent(i, &zo_step(x.agent(i), &g, eta_z, game.action_set(i), delta)?);
        }
        for i in assign.fo_agents() {
            let grad = fo_grads[i].as_ref().expect("computed in phase 2");
            next.set_agent(i, &fo_step(x.agent(i), grad, eta_f, game.action_set(i))?);
        }
        x = next;
    }
    Ok(record)
}

/// Pure first-order dynamics: every agent runs `P_X(x − η_f ∇)` on exact
/// gradients at the unperturbed profile. Consumes no randomness.
pub fn run_pure_fo<G: Game + ?Sized>(
    game: &G,
    sched: &ScheduleSet,
    episodes: usize,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let assign = FeedbackAssignment::pure_first_order(game.num_agents());
    let x0 = default_initial_profile(game, sched)?;
    validate_run(game, &assign, episodes, &x0)?;
    let n = game.num_agents();
    let mut x = x0;
    let mut record = empty_record(game.id(), sched.name(), 0, episodes, seed, n);

    for t in 1..=episodes as u64 {
        let eta_f = sched.eta_f(t);
        let costs: Vec<f64> = (0..n).map(|i| game.cost(i, &x)).collect();
        let grads: Vec<Vec<f64>> = (0..n)
            .map(|i| game.gradient(i, &x).expect("validated before episode 1"))
            .collect();

        record.base.push(x.clone());
        record.played_raw.push(x.clone());
        record.played.push(x.clone());
        record.costs.push(costs);

        let mut next = x.clone();
        for (i, grad) in grads.iter().enumerate() {
            next.set_agent(i, &fo_step(x.agent(i), grad, eta_f, game.action_set(i))?);
        }
        x = next;
    }
    Ok(record)
}

/// Pure zeroth-order dynamics: every agent plays a sphere-perturbed action
/// and updates from its one-point estimate over the shrunk set.
pub fn run_pure_zo<G: Game + ?Sized>(
    game: &G,
    sched: &ScheduleSet,
    episodes: usize,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let assign = FeedbackAssignment::pure_zeroth_order(game.num_agents());
    let x0 = default_initial_profile(game, sched)?;
    validate_run(game, &assign, episodes, &x0)?;
    let n = game.num_agents();
    let d = game.action_dim();
    let mut x = x0;
    let mut record = empty_record(game.id(), sched.name(), n, episodes, seed, n);

    for t in 1..=episodes as u64 {
        let delta = sched.delta(t);
        let eta_z = sched.eta_z(t);

        let mut directions: Vec<Option<RandomDirection>> = vec![None; n];
        let mut raw = x.clone();
        let mut played = x.clone();
        for (i, slot) in directions.iter_mut().enumerate() {
            let mut rng = episode_rng(seed, i, t);
            let u = sample_unit_sphere(&mut rng, d)?;
            let perturbed: Vec<f64> = x
                .agent(i)
                .iter()
                .zip(u.as_slice())
                .map(|(xi, ui)| xi + delta * ui)
                .collect();
            raw.set_agent(i, &perturbed);
            played.set_agent(i, &project_box(&perturbed, game.action_set(i))?);
            *slot = Some(u);
        }

        let costs: Vec<f64> = (0..n).map(|i| game.cost(i, &played)).collect();

        record.base.push(x.clone());
        record.played_raw.push(raw);
        record.played.push(played);
        record.costs.push(costs.clone());

        let mut next = x.clone();
        for i in 0..n {
            let u = directions[i].as_ref().expect("drawn above");
            let g = zo_gradient_estimate(costs[i], u, d, delta)?;
            next.set_agent(i, &zo_step(x.agent(i), &g, eta_z, game.action_set(i), delta)?);
        }
        x = next;
    }
    Ok(record)
}

/// Risk-market mixed run: agent 0 (risk-averse) is zeroth-order and feeds an
/// empirical CVaR of `n_t` stochastic cost draws into its estimate; agent 1
/// (risk-neutral) is first-order on the expected-cost gradient. Recorded
/// costs are the closed-form objectives at the played profile.
pub fn run_risk_asymmetric(
    game: &RiskCournot,
    sched: &ScheduleSet,
    episodes: usize,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let samples = sched.n_samples().ok_or(RunError::MissingSamplingSchedule)?;
    if game.spec().alpha[1] != 1.0 {
        return Err(RunError::FirstOrderAgentNotNeutral);
    }
    if episodes == 0 {
        return Err(RunError::ZeroEpisodes);
    }
    let alpha = game.spec().alpha[0];
    let mut record = empty_record(game.id(), sched.name(), 1, episodes, seed, 2);

    let delta1 = sched.delta(1);
    let mut x = Profile::scalar(vec![
        shrink_set(game.action_set(0), delta1)?.center()[0],
        shrink_set(game.action_set(1), delta1)?.center()[0],
    ]);

    for t in 1..=episodes as u64 {
        let delta = sched.delta(t);
        let (eta_f, eta_z) = (sched.eta_f(t), sched.eta_z(t));
        let n_t = samples.samples_at(t);

        let mut rng0 = episode_rng(seed, 0, t);
        let u = sample_unit_sphere(&mut rng0, 1)?;
        let raw0 = x.agent(0)[0] + delta * u.as_slice()[0];
        let played0 = project_box(&[raw0], game.action_set(0))?[0];
        let played = Profile::scalar(vec![played0, x.agent(1)[0]]);

        // Feedback: empirical CVaR of n_t draws for the bandit agent, the
        // expected-cost gradient for the first-order agent.
        let draws: Vec<f64> = (0..n_t)
            .map(|_| game.sample_cost(0, &played, &mut rng0))
            .collect::<Result<_, _>>()
            .map_err(RunError::Game)?;
        let cvar_value = cvar_empirical(&draws, alpha)?;
        let grad1 = game.mean_gradient(1, &played).expect("two agents");
        record.stochastic_samples[0] += n_t;

        let mut raw = x.clone();
        raw.set_agent(0, &[raw0]);
        record.base.push(x.clone());
        record.played_raw.push(raw);
        record.costs.push(vec![
            game.objective(0, &played).expect("played is feasible"),
            game.objective(1, &played).expect("played is feasible"),
        ]);
        record.played.push(played);

        let g = zo_gradient_estimate(cvar_value, &u, 1, delta)?;
        let next0 = zo_step(&[x.agent(0)[0]], &g, eta_z, game.action_set(0), delta)?[0];
        let next1 = fo_step(&[x.agent(1)[0]], &[grad1], eta_f, game.action_set(1))?[0];
        x = Profile::scalar(vec![next0, next1]);
    }
    Ok(record)
}

/// Pure zeroth-order risk baseline: both agents estimate their CVaR (the
/// risk-neutral agent at `alpha = 1`, i.e. the sample mean) from `n_t` draws
/// and update through one-point estimates. Uses the same sampling schedule
/// as [`run_risk_asymmetric`] for a like-for-like comparison.
pub fn run_risk_pure_zo(
    game: &RiskCournot,
    sched: &ScheduleSet,
    episodes: usize,
    seed: u64,
) -> Result<RunRecord, RunError> {
    let samples = sched.n_samples().ok_or(RunError::MissingSamplingSchedule)?;
    if episodes == 0 {
        return Err(RunError::ZeroEpisodes);
    }
    let mut record = empty_record(game.id(), sched.name(), 2, episodes, seed, 2);

    let delta1 = sched.delta(1);
    let mut x = Profile::scalar(vec![
        shrink_set(game.action_set(0), delta1)?.center()[0],
        shrink_set(game.action_set(1), delta1)?.center()[0],
    ]);

    for t in 1..=episodes as u64 {
        let delta = sched.delta(t);
        let eta_z = sched.eta_z(t);
        let n_t = samples.samples_at(t);

        let mut rngs: Vec<_> = (0..2).map(|i| episode_rng(seed, i, t)).collect();
        let mut dirs = Vec::with_capacity(2);
        let mut played_vals = [0.0f64; 2];
        let mut raw_vals = [0.0f64; 2];
        for i in 0..2 {
            let u = sample_unit_sphere(&mut rngs[i], 1)?;
            raw_vals[i] = x.agent(i)[0] + delta * u.as_slice()[0];
            played_vals[i] = project_box(&[raw_vals[i]], game.action_set(i))?[0];
            dirs.push(u);
        }
        let played = Profile::scalar(played_vals.to_vec());

        let mut cvar_values = [0.0f64; 2];
        for i in 0..2 {
            let draws: Vec<f64> = (0..n_t)
                .map(|_| game.sample_cost(i, &played, &mut rngs[i]))
                .collect::<Result<_, _>>()
                .map_err(RunError::Game)?;
            cvar_values[i] = cvar_empirical(&draws, game.spec().alpha[i])?;
            record.stochastic_samples[i] += n_t;
        }

        record.base.push(x.clone());
        record.played_raw.push(Profile::scalar(raw_vals.to_vec()));
        record.costs.push(vec![
            game.objective(0, &played).expect("played is feasible"),
            game.objective(1, &played).expect("played is feasible"),
        ]);
        record.played.push(played);

        let mut next = [0.0f64; 2];
        for i in 0..2 {
            let g = zo_gradient_estimate(cvar_values[i], &dirs[i], 1, delta)?;
            next[i] = zo_step(&[x.agent(i)[0]], &g, eta_z, game.action_set(i), delta)?[0];
        }
        x = Profile::scalar(next.to_vec());
    }
    Ok(record)
}

/// Order-preserving parallel map over replicate seeds (or any per-cell
/// payloads). Results are independent of the worker count because all
/// randomness is derived from the cell itself.
pub fn par_map_cells<C, R, F>(cells: &[C], f: F) -> Vec<R>
where
    C: Sync,
    R: Send,
    F: Fn(&C) -> R + Sync + Send,
{
    cells.par_iter().map(f).collect()
}

fn empty_record(
    game_id: &str,
    schedule: &str,
    n_zo: usize,
    episodes: usize,
    seed: u64,
    n_agents: usize,
) -> RunRecord {
    RunRecord {
        seed,
        game_id: game_id.to_string(),
        schedule: schedule.to_string(),
        n_zo,
        episodes,
        base: Vec::with_capacity(episodes),
        played: Vec::with_capacity(episodes),
        played_raw: Vec::with_capacity(episodes),
        costs: Vec::with_capacity(episodes),
        stochastic_samples: vec![0; n_agents],
    }
}
