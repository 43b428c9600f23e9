//! Post-run measurement: hindsight regret with comparator certificates,
//! equilibrium-distance series, power-law rate fits, and Monte-Carlo probes
//! of the smoothed-cost properties that underpin the bandit estimator.

use crate::games::{Game, Profile};
use crate::geometry::{project_box, sample_unit_ball, sample_unit_sphere};
use crate::learners::{FeedbackAssignment, RunRecord};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("profile dimension mismatch")]
    DimensionMismatch,
    #[error("horizon {horizon} exceeds recorded episodes {episodes}")]
    HorizonTooLong { horizon: usize, episodes: usize },
    #[error("fit window [{0}, {1}] is empty or out of range")]
    BadWindow(usize, usize),
    #[error("series value at t = {0} is not positive; cannot fit in log space")]
    NonPositiveValue(usize),
    #[error("agent {0} is not in the zeroth-order class")]
    NotZerothOrder(usize),
    #[error("perturbation of size {0} would be clipped; bias check needs an interior point")]
    ClippingWouldOccur(f64),
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// Hindsight-regret evaluation for one agent.
#[derive(Debug, Clone)]
pub struct RegretReport {
    /// `Σ_t C_i(played_t) − min_y Σ_t C_i(y, others_t)`.
    pub regret: f64,
    /// The minimizing comparator action `y*`.
    pub comparator: Vec<f64>,
    /// How much a ±1e-3 projected probe around `y*` can still improve the
    /// hindsight sum; a local-optimality certificate for the comparator.
    pub comparator_residual: f64,
    pub episodes: usize,
}

/// Least-squares fit of `log v ~ exponent · log t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (usize, usize),
}

/// Regret of agent `i` against the best fixed action in hindsight, holding
/// the other agents to their realized played sequence.
///
/// The comparator solve assumes the hindsight objective is convex in the
/// agent's own action (true for every cost that is convex per episode):
/// closed form when the game provides one, golden-section search in one
/// dimension, projected gradient otherwise.
pub fn regret<G: Game + ?Sized>(
    record: &RunRecord,
    game: &G,
    i: usize,
) -> Result<RegretReport, MetricsError> {
    regret_at(record, game, i, record.episodes)
}

/// [`regret`] over the first `horizon` episodes.
pub fn regret_at<G: Game + ?Sized>(
    record: &RunRecord,
    game: &G,
    i: usize,
    horizon: usize,
) -> Result<RegretReport, MetricsError> {
    if horizon == 0 || horizon > record.played.len() {
        return Err(MetricsError::HorizonTooLong { horizon, episodes: record.played.len() });
    }
    let played = &record.played[..horizon];
    let comparator = match game.hindsight_best_response(i, played) {
        Some(y) => y,
        None if game.action_dim() == 1 => golden_section_comparator(game, i, played),
        None => projected_gradient_comparator(game, i, played),
    };

    let hindsight_sum = hindsight_cost(game, i, played, &comparator);
    let realized: f64 = record.cumulative_cost(i, horizon);

    // Probe the comparator for local optimality.
    let set = game.action_set(i);
    let mut best_probe = hindsight_sum;
    for k in 0..comparator.len() {
        for step in [-1e-3, 1e-3] {
            let mut y = comparator.clone();
            y[k] += step;
            let y = project_box(&y, set).expect("comparator has the set's dimension");
            best_probe = best_probe.min(hindsight_cost(game, i, played, &y));
        }
    }

    Ok(RegretReport {
        regret: realized - hindsight_sum,
        comparator,
        comparator_residual: (hindsight_sum - best_probe).max(0.0),
        episodes: horizon,
    })
}

fn hindsight_cost<G: Game + ?Sized>(game: &G, i: usize, played: &[Profile], y: &[f64]) -> f64 {
    let mut scratch = played[0].clone();
    played
        .iter()
        .map(|p| {
            scratch.clone_from(p);
            scratch.set_agent(i, y);
            game.cost(i, &scratch)
        })
        .sum()
}

/// Golden-section search over the agent's interval, to width 1e-8.
fn golden_section_comparator<G: Game + ?Sized>(game: &G, i: usize, played: &[Profile]) -> Vec<f64> {
    let set = game.action_set(i);
    let (mut lo, mut hi) = (set.lower()[0], set.upper()[0]);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let eval = |y: f64| hindsight_cost(game, i, played, &[y]);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while hi - lo > 1e-8 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = eval(d);
        }
    }
    vec![0.5 * (lo + hi)]
}

/// Projected gradient with central-difference gradients on the averaged
/// hindsight cost, run to a projected-step norm of 1e-6.
fn projected_gradient_comparator<G: Game + ?Sized>(
    game: &G,
    i: usize,
    played: &[Profile],
) -> Vec<f64> {
    let set = game.action_set(i);
    let d = set.dim();
    let scale = 1.0 / played.len() as f64;
    let avg_cost = |y: &[f64]| hindsight_cost(game, i, played, y) * scale;
    let mut y = set.center();
    let h = 1e-6;
    let mut step = 0.5;
    for _ in 0..10_000 {
        let mut grad = vec![0.0; d];
        for (k, g) in grad.iter_mut().enumerate() {
            let mut hi = y.clone();
            let mut lo = y.clone();
            hi[k] += h;
            lo[k] -= h;
            *g = (avg_cost(&hi) - avg_cost(&lo)) / (2.0 * h);
        }
        let moved: Vec<f64> = y.iter().zip(&grad).map(|(v, g)| v - step * g).collect();
        let projected = project_box(&moved, set).expect("dimension preserved");
        let delta: f64 = projected
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if avg_cost(&projected) <= avg_cost(&y) {
            y = projected;
            if delta <= 1e-6 * step {
                break;
            }
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    y
}

/// Squared distance `‖x_t − x*‖²` of the base actions to a reference
/// profile, per episode. This is the quantity the convergence statements
/// bound, evaluated on base (unperturbed) actions.
pub fn ne_distance_series(record: &RunRecord, x_star: &Profile) -> Result<Vec<f64>, MetricsError> {
    if record.base.is_empty()
        || record.base[0].n_agents() != x_star.n_agents()
        || record.base[0].dim() != x_star.dim()
    {
        return Err(MetricsError::DimensionMismatch);
    }
    Ok(record.base.iter().map(|x| x.sq_distance(x_star)).collect())
}

/// Per-agent squared error `‖x_{i,t} − x*_i‖²`, per episode; rows sum to the
/// profile-level squared distance.
pub fn per_agent_sq_error_series(
    record: &RunRecord,
    x_star: &Profile,
) -> Result<Vec<Vec<f64>>, MetricsError> {
    if record.base.is_empty()
        || record.base[0].n_agents() != x_star.n_agents()
        || record.base[0].dim() != x_star.dim()
    {
        return Err(MetricsError::DimensionMismatch);
    }
    Ok(record
        .base
        .iter()
        .map(|x| {
            (0..x.n_agents())
                .map(|i| {
                    x.agent(i)
                        .iter()
                        .zip(x_star.agent(i))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum()
                })
                .collect()
        })
        .collect())
}

/// Ordinary least squares on `(log t, log v_t)` for `t` in the inclusive
/// window. `series[k]` is the value at episode `t = k + 1`.
pub fn fit_rate_exponent(series: &[f64], window: (usize, usize)) -> Result<SlopeFit, MetricsError> {
    let (t_lo, t_hi) = window;
    if t_lo < 1 || t_hi <= t_lo || t_hi > series.len() {
        return Err(MetricsError::BadWindow(t_lo, t_hi));
    }
    let mut points = Vec::with_capacity(t_hi - t_lo + 1);
    for t in t_lo..=t_hi {
        let v = series[t - 1];
        if v <= 0.0 {
            return Err(MetricsError::NonPositiveValue(t));
        }
        points.push(((t as f64).ln(), v.ln()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|(x, y)| {
            let fit = intercept + exponent * x;
            (y - fit) * (y - fit)
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(SlopeFit { exponent, intercept, r_squared, window })
}

/// Evaluate the fitted power law at episode `t`.
impl SlopeFit {
    pub fn value_at(&self, t: usize) -> f64 {
        (self.intercept + self.exponent * (t as f64).ln()).exp()
    }
}

/// Monte-Carlo estimate of the smoothed cost of zeroth-order agent `i`:
/// its own coordinate perturbed by a `δ`-ball draw, every other zeroth-order
/// coordinate by a `δ`-sphere draw, first-order coordinates untouched.
/// Perturbed points are clipped to the action sets, mirroring the learners.
/// Returns `(mean, standard error)`.
pub fn smoothed_value_mc<G: Game + ?Sized, R: Rng>(
    game: &G,
    assign: &FeedbackAssignment,
    i: usize,
    x: &Profile,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64), MetricsError> {
    if !assign.is_zo(i) {
        return Err(MetricsError::NotZerothOrder(i));
    }
    if samples == 0 {
        return Err(MetricsError::NoSamples);
    }
    let d = game.action_dim();
    let mut scratch = x.clone();
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for k in 0..samples {
        for j in assign.zo_agents() {
            let perturbation: Vec<f64> = if j == i {
                sample_unit_ball(rng, d).expect("d >= 1")
            } else {
                sample_unit_sphere(rng, d).expect("d >= 1").as_slice().to_vec()
            };
            let moved: Vec<f64> = x
                .agent(j)
                .iter()
                .zip(&perturbation)
                .map(|(v, u)| v + delta * u)
                .collect();
            scratch.set_agent(j, &project_box(&moved, game.action_set(j)).expect("dim ok"));
        }
        let value = game.cost(i, &scratch);
        let delta_mean = value - mean;
        mean += delta_mean / (k + 1) as f64;
        m2 += delta_mean * (value - mean);
    }
    let stderr = if samples > 1 {
        (m2 / (samples as f64 - 1.0) / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// Mean and per-coordinate standard error of `M` one-point gradient
/// estimates `(d/δ) C(x̂) u_i` taken at base profile `x`, with every
/// zeroth-order coordinate perturbed on the `δ`-sphere.
///
/// Requires an interior point: fails if any perturbation could be clipped.
pub fn one_point_estimate_mean<G: Game + ?Sized, R: Rng>(
    game: &G,
    assign: &FeedbackAssignment,
    i: usize,
    x: &Profile,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    if !assign.is_zo(i) {
        return Err(MetricsError::NotZerothOrder(i));
    }
    if samples == 0 {
        return Err(MetricsError::NoSamples);
    }
    let d = game.action_dim();
    // Sphere components are bounded by 1, so a componentwise margin check
    // certifies the unclipped regime.
    for j in assign.zo_agents() {
        let set = game.action_set(j);
        for (k, v) in x.agent(j).iter().enumerate() {
            if v - delta < set.lower()[k] || v + delta > set.upper()[k] {
                return Err(MetricsError::ClippingWouldOccur(delta));
            }
        }
    }

    let mut scratch = x.clone();
    let mut mean = vec![0.0f64; d];
    let mut m2 = vec![0.0f64; d];
    for k in 0..samples {
        let mut own_direction = vec![0.0; d];
        for j in assign.zo_agents() {
            let u = sample_unit_sphere(rng, d).expect("d >= 1");
            let moved: Vec<f64> = x
                .agent(j)
                .iter()
                .zip(u.as_slice())
                .map(|(v, uu)| v + delta * uu)
                .collect();
            scratch.set_agent(j, &moved);
            if j == i {
                own_direction.copy_from_slice(u.as_slice());
            }
        }
        let scale = d as f64 / delta * game.cost(i, &scratch);
        for (c, (mu, m2c)) in mean.iter_mut().zip(&mut m2).enumerate() {
            let value = scale * own_direction[c];
            let delta_mean = value - *mu;
            *mu += delta_mean / (k + 1) as f64;
            *m2c += delta_mean * (value - *mu);
        }
    }
    let stderr: Vec<f64> = m2
        .iter()
        .map(|v| {
            if samples > 1 {
                (v / (samples as f64 - 1.0) / samples as f64).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok((mean, stderr))
}

/// Distance between the averaged one-point estimate and a reference gradient,
/// with the combined standard error. The reference is the analytic gradient
/// for affine-gradient games (where smoothing leaves the gradient unchanged)
/// and a central difference of the smoothed value otherwise.
pub fn estimator_bias_check<G: Game + ?Sized, R: Rng>(
    game: &G,
    assign: &FeedbackAssignment,
    i: usize,
    x: &Profile,
    delta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64), MetricsError> {
    let (mean, stderr) = one_point_estimate_mean(game, assign, i, x, delta, samples, rng)?;
    let d = game.action_dim();
    let reference: Vec<f64> = if game.gradient_is_affine() {
        game.gradient(i, x).expect("affine-gradient games expose gradients")
    } else {
        let h = 1e-3;
        let mut grad = vec![0.0; d];
        for (k, g) in grad.iter_mut().enumerate() {
            let mut hi = x.clone();
            let mut lo = x.clone();
            let mut hv = x.agent(i).to_vec();
            let mut lv = x.agent(i).to_vec();
            hv[k] += h;
            lv[k] -= h;
            hi.set_agent(i, &hv);
            lo.set_agent(i, &lv);
            let (vh, _) = smoothed_value_mc(game, assign, i, &hi, delta, samples, rng)?;
            let (vl, _) = smoothed_value_mc(game, assign, i, &lo, delta, samples, rng)?;
            *g = (vh - vl) / (2.0 * h);
        }
        grad
    };
    let bias_norm = mean
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let stderr_norm = stderr.iter().map(|s| s * s).sum::<f64>().sqrt();
    Ok((bias_norm, stderr_norm))
}
