//! Learning dynamics for repeated convex market games where agents see
//! different kinds of feedback: some observe their partial gradients, others
//! only their realized cost. The crate provides
//!
//! - box action sets with exact projections and seeded sphere/ball sampling
//!   ([`geometry`]),
//! - deterministic quadratic markets and a two-agent risk-averse stochastic
//!   market, with analytic equilibrium and monotonicity oracles ([`games`]),
//! - the projected first-order, one-point bandit, and mixed-feedback
//!   dynamics, with pluggable power-law schedules ([`learners`]),
//! - hindsight regret, equilibrium-distance series, rate fitting and
//!   Monte-Carlo smoothing diagnostics ([`metrics`]),
//! - empirical CVaR and decreasing sampling schedules for risk-averse
//!   feedback ([`risk`]).
//!
//! Runs are reproducible bit-for-bit from a seed: every random draw is
//! derived from the `(seed, agent, episode)` triple, so replicates can be
//! scheduled across any number of workers without changing results.

pub mod games;
pub mod geometry;
pub mod learners;
pub mod metrics;
pub mod risk;

pub use games::{Game, GameConstants, Profile, QuadraticGame, QuadraticGameSpec, RiskCournot, RiskCournotSpec};
pub use geometry::{
    episode_rng, project_box, sample_unit_ball, sample_unit_sphere, shrink_set, BoxSet,
    ProjectableSet,
};
pub use learners::{
    default_initial_profile, fo_step, par_map_cells, run_asymmetric, run_asymmetric_from,
    run_pure_fo, run_pure_zo, run_risk_asymmetric, run_risk_pure_zo, zo_gradient_estimate,
    zo_step, FeedbackAssignment, PowerLaw, RunRecord, ScheduleSet,
};
pub use metrics::{
    estimator_bias_check, fit_rate_exponent, ne_distance_series, one_point_estimate_mean,
    per_agent_sq_error_series, regret, regret_at, smoothed_value_mc, RegretReport, SlopeFit,
};
pub use risk::{cvar_empirical, sampling_schedule, CvarEstimator, SamplingSchedule};
