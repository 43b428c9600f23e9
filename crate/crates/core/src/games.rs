//! Game instances: deterministic quadratic (Cournot) markets and the
//! two-agent risk-averse stochastic Cournot market, together with their
//! analytic oracles (Nash equilibria, monotonicity modulus, closed-form
//! risk objectives).

use crate::geometry::BoxSet;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("agent index {got} out of range for {agents} agents")]
    AgentOutOfRange { got: usize, agents: usize },
    #[error("profile has {got} agents, game has {expected}")]
    ProfileMismatch { expected: usize, got: usize },
    #[error("own-quadratic coefficient a[{0}] must be positive")]
    NonConvex(usize),
    #[error("parameter vectors must share one length")]
    LengthMismatch,
    #[error("game Jacobian is singular")]
    SingularSystem,
    #[error("closed-form CVaR requires nonnegative action, got {0}")]
    NegativeAction(f64),
    #[error("risk level must lie in (0, 1], got {0}")]
    InvalidRiskLevel(f64),
}

/// Joint action profile of `n_agents` agents, each with `dim` coordinates,
/// stored flat in agent-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    data: Vec<f64>,
    n_agents: usize,
    dim: usize,
}

impl Profile {
    pub fn new(data: Vec<f64>, n_agents: usize, dim: usize) -> Result<Self, GameError> {
        if data.len() != n_agents * dim || dim == 0 || n_agents == 0 {
            return Err(GameError::LengthMismatch);
        }
        Ok(Self { data, n_agents, dim })
    }

    /// Scalar-per-agent profile (`dim = 1`).
    pub fn scalar(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { data: values, n_agents: n, dim: 1 }
    }

    pub fn zeros(n_agents: usize, dim: usize) -> Self {
        Self { data: vec![0.0; n_agents * dim], n_agents, dim }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn agent(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn set_agent(&mut self, i: usize, v: &[f64]) {
        self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(v);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Sum over all agents except `i` (componentwise).
    pub fn sum_excluding(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for j in 0..self.n_agents {
            if j != i {
                for (o, v) in out.iter_mut().zip(self.agent(j)) {
                    *o += v;
                }
            }
        }
        out
    }

    pub fn sq_distance(&self, other: &Profile) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &Profile) -> f64 {
        self.sq_distance(other).sqrt()
    }
}

/// Known analytic constants of a game, when available.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GameConstants {
    /// Bound `U` on `|C_i(x)|` over the joint action set.
    pub cost_bound: Option<f64>,
    /// `L0`: bound on the cost Lipschitz constant and on `‖∇_i C_i‖`.
    pub value_lipschitz: Option<f64>,
    /// `L1`: Lipschitz constant of `x ↦ ∇_i C_i(x)`.
    pub grad_lipschitz: Option<f64>,
    /// Strong-monotonicity modulus `m` of the stacked gradient map.
    pub monotonicity: Option<f64>,
}

/// Cost/gradient oracle interface consumed by the learning dynamics.
///
/// All implementations must be pure given their inputs so that runs can be
/// replicated across threads without synchronization.
pub trait Game: Sync {
    fn id(&self) -> &str;
    fn num_agents(&self) -> usize;
    /// Per-agent action dimension (identical across agents).
    fn action_dim(&self) -> usize;
    fn action_set(&self, i: usize) -> &BoxSet;
    fn cost(&self, i: usize, x: &Profile) -> f64;
    /// Partial gradient `∇_i C_i(x)`, when the game exposes one.
    fn gradient(&self, i: usize, x: &Profile) -> Option<Vec<f64>>;
    fn constants(&self) -> GameConstants {
        GameConstants::default()
    }
    /// True when `∇_i C_i` is affine in `x`, in which case sphere/ball
    /// smoothing leaves the gradient unchanged.
    fn gradient_is_affine(&self) -> bool {
        false
    }
    /// Closed-form minimizer of `Σ_t C_i(y, others_t)` over the agent's
    /// action set, where `others_t` are the realized opponent plays.
    /// `None` defers to a numerical comparator solve.
    fn hindsight_best_response(&self, _i: usize, _played: &[Profile]) -> Option<Vec<f64>> {
        None
    }
}

/// Parameters of the quadratic market game
/// `C_i(x) = x_i (a_i x_i / 2 + b_i Σ_{j≠i} x_j − e_i) + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGameSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub offset: f64,
}

/// Deterministic quadratic game over per-agent intervals.
#[derive(Debug, Clone)]
pub struct QuadraticGame {
    id: String,
    spec: QuadraticGameSpec,
    sets: Vec<BoxSet>,
    constants: GameConstants,
}

impl QuadraticGame {
    pub fn new(id: impl Into<String>, spec: QuadraticGameSpec, sets: Vec<BoxSet>) -> Result<Self, GameError> {
        let n = spec.a.len();
        if spec.b.len() != n || spec.e.len() != n || sets.len() != n || n == 0 {
            return Err(GameError::LengthMismatch);
        }
        if let Some(i) = spec.a.iter().position(|a| *a <= 0.0) {
            return Err(GameError::NonConvex(i));
        }
        if sets.iter().any(|s| s.dim() != 1) {
            return Err(GameError::LengthMismatch);
        }
        let constants = Self::derive_constants(&spec, &sets);
        Ok(Self { id: id.into(), spec, sets, constants })
    }

    /// Same interval for every agent.
    pub fn with_interval(
        id: impl Into<String>,
        spec: QuadraticGameSpec,
        lo: f64,
        hi: f64,
    ) -> Result<Self, GameError> {
        let n = spec.a.len();
        let sets = (0..n)
            .map(|_| BoxSet::interval(lo, hi, 1).expect("valid interval"))
            .collect();
        Self::new(id, spec, sets)
    }

    /// The ten-agent market preset with actions in `[0, 3]`.
    pub fn cournot10() -> Self {
        let spec = QuadraticGameSpec {
            a: vec![2.0, 2.0, 1.5, 1.8, 2.0, 1.8, 2.0, 1.4, 1.8, 2.0],
            b: vec![0.2, 0.3, 0.3, 0.2, 0.3, 0.2, 0.3, 0.2, 0.3, 0.3],
            e: vec![1.8, 1.9, 1.5, 1.6, 1.8, 1.3, 1.2, 1.5, 1.8, 1.6],
            offset: 1.0,
        };
        Self::with_interval("cournot10", spec, 0.0, 3.0).expect("preset is valid")
    }

    pub fn spec(&self) -> &QuadraticGameSpec {
        &self.spec
    }

    /// Game Jacobian `M` with `M_ii = a_i`, `M_ij = b_i` for `j ≠ i`.
    fn jacobian(&self) -> DMatrix<f64> {
        let n = self.num_agents();
        DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                self.spec.a[r]
            } else {
                self.spec.b[r]
            }
        })
    }

    /// Exact strong-monotonicity modulus: `λ_min((M + Mᵀ)/2)`.
    pub fn monotonicity_modulus(&self) -> f64 {
        let m = self.jacobian();
        let sym = (&m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Nash equilibrium: solves `M x = e`; if the solution leaves the action
    /// set, falls back to a projected-gradient solve of the variational
    /// inequality to a fixed-point residual of 1e-10.
    pub fn solve_ne(&self) -> Result<Profile, GameError> {
        let m = self.jacobian();
        let e = DVector::from_column_slice(&self.spec.e);
        let lu = m.clone().lu();
        let x = lu.solve(&e).ok_or(GameError::SingularSystem)?;
        let feasible = (0..self.num_agents()).all(|i| self.sets[i].contains(&[x[i]]));
        if feasible {
            return Ok(Profile::scalar(x.iter().cloned().collect()));
        }
        self.solve_ne_projected(&m, &e)
    }

    fn solve_ne_projected(&self, m: &DMatrix<f64>, e: &DVector<f64>) -> Result<Profile, GameError> {
        let modulus = self.monotonicity_modulus();
        if modulus <= 0.0 {
            return Err(GameError::SingularSystem);
        }
        let lip = m
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        let step = modulus / (lip * lip);
        let n = self.num_agents();
        let mut x: Vec<f64> = (0..n).map(|i| self.sets[i].center()[0]).collect();
        for _ in 0..200_000 {
            let xv = DVector::from_column_slice(&x);
            let grad = m * &xv - e;
            let mut next = Vec::with_capacity(n);
            let mut residual = 0.0f64;
            for i in 0..n {
                let lo = self.sets[i].lower()[0];
                let hi = self.sets[i].upper()[0];
                let xi = (x[i] - step * grad[i]).clamp(lo, hi);
                residual = residual.max((xi - x[i]).abs());
                next.push(xi);
            }
            x = next;
            if residual < 1e-12 {
                break;
            }
        }
        Ok(Profile::scalar(x))
    }

    fn derive_constants(spec: &QuadraticGameSpec, sets: &[BoxSet]) -> GameConstants {
        let n = spec.a.len();
        let sum_lo: f64 = sets.iter().map(|s| s.lower()[0]).sum();
        let sum_hi: f64 = sets.iter().map(|s| s.upper()[0]).sum();
        let mut cost_bound = 0.0f64;
        let mut value_lip = 0.0f64;
        let mut grad_lip = 0.0f64;
        for (i, set) in sets.iter().enumerate() {
            let (a, b, e) = (spec.a[i], spec.b[i], spec.e[i]);
            let (lo, hi) = (set.lower()[0], set.upper()[0]);
            // Opponent-sum interval for agent i.
            let s_min = sum_lo - lo;
            let s_max = sum_hi - hi;

            // |C_i| sup: for fixed opponent sum the cost is convex quadratic in
            // x_i, so extremes sit at interval endpoints or the clamped vertex;
            // the cost is linear in the opponent sum, so it suffices to scan
            // the sum endpoints.
            for s in [s_min, s_max] {
                let vertex = ((e - b * s) / a).clamp(lo, hi);
                for xi in [lo, hi, vertex] {
                    let c = xi * (a * xi / 2.0 + b * s - e) + spec.offset;
                    cost_bound = cost_bound.max(c.abs());
                }
            }

            // Full-gradient sup (interval arithmetic, slightly conservative):
            // ∂_i = a x_i + b s − e, ∂_j = b x_i.
            let own_candidates = [a * lo + b * s_min - e, a * lo + b * s_max - e, a * hi + b * s_min - e, a * hi + b * s_max - e];
            let own_max_sq = own_candidates.iter().map(|g| g * g).fold(0.0, f64::max);
            let xi_max_sq = lo.abs().max(hi.abs()).powi(2);
            value_lip = value_lip.max((own_max_sq + (n as f64 - 1.0) * b * b * xi_max_sq).sqrt());

            // ∇_i C_i is affine with coefficient row (a at i, b elsewhere).
            grad_lip = grad_lip.max((a * a + (n as f64 - 1.0) * b * b).sqrt());
        }
        GameConstants {
            cost_bound: Some(cost_bound),
            value_lipschitz: Some(value_lip),
            grad_lipschitz: Some(grad_lip),
            monotonicity: None, // filled lazily below
        }
    }
}

impl Game for QuadraticGame {
    fn id(&self) -> &str {
        &self.id
    }

    fn num_agents(&self) -> usize {
        self.spec.a.len()
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn action_set(&self, i: usize) -> &BoxSet {
        &self.sets[i]
    }

    fn cost(&self, i: usize, x: &Profile) -> f64 {
        let s = x.sum_excluding(i)[0];
        let xi = x.agent(i)[0];
        xi * (self.spec.a[i] * xi / 2.0 + self.spec.b[i] * s - self.spec.e[i]) + self.spec.offset
    }

    fn gradient(&self, i: usize, x: &Profile) -> Option<Vec<f64>> {
        let s = x.sum_excluding(i)[0];
        let xi = x.agent(i)[0];
        Some(vec![self.spec.a[i] * xi + self.spec.b[i] * s - self.spec.e[i]])
    }

    fn constants(&self) -> GameConstants {
        let mut c = self.constants;
        let m = self.monotonicity_modulus();
        c.monotonicity = (m > 0.0).then_some(m);
        c
    }

    fn gradient_is_affine(&self) -> bool {
        true
    }

    fn hindsight_best_response(&self, i: usize, played: &[Profile]) -> Option<Vec<f64>> {
        // argmin_y Σ_t C_i(y, others_t) = clamp((e_i T − b_i Σ_t S_t) / (a_i T)).
        let t = played.len() as f64;
        let sum_s: f64 = played.iter().map(|p| p.sum_excluding(i)[0]).sum();
        let y = (self.spec.e[i] * t - self.spec.b[i] * sum_s) / (self.spec.a[i] * t);
        let lo = self.sets[i].lower()[0];
        let hi = self.sets[i].upper()[0];
        Some(vec![y.clamp(lo, hi)])
    }
}

/// Parameters of the two-agent stochastic market
/// `J_i(x, ξ) = −(intercept − x_1 − x_2) x_i + slope · x_i + ξ_i x_i + offset`
/// with `ξ_i ~ U(0, noise_hi)` and per-agent CVaR risk levels `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCournotSpec {
    pub alpha: [f64; 2],
    pub noise_hi: f64,
    pub demand_intercept: f64,
    pub cost_slope: f64,
    pub offset: f64,
}

impl Default for RiskCournotSpec {
    fn default() -> Self {
        Self {
            alpha: [0.5, 1.0],
            noise_hi: 0.4,
            demand_intercept: 2.0,
            cost_slope: 0.2,
            offset: 1.0,
        }
    }
}

/// Two-agent risk-averse Cournot market. Agent 0 evaluates its stochastic
/// cost by CVaR at level `alpha[0]`; agent 1 by expectation (`alpha[1] = 1`).
#[derive(Debug, Clone)]
pub struct RiskCournot {
    spec: RiskCournotSpec,
    sets: Vec<BoxSet>,
}

impl RiskCournot {
    pub fn new(spec: RiskCournotSpec, sets: Vec<BoxSet>) -> Result<Self, GameError> {
        if sets.len() != 2 || sets.iter().any(|s| s.dim() != 1) {
            return Err(GameError::LengthMismatch);
        }
        for alpha in spec.alpha {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(GameError::InvalidRiskLevel(alpha));
            }
        }
        Ok(Self { spec, sets })
    }

    /// The reference preset: `alpha = (0.5, 1)`, actions in `[0, 2]`.
    ///
    /// The demand intercept bounds sensible supply at 2 and the equilibrium
    /// is interior, so `[0, 2]` is the default action interval
    /// (configurable through [`RiskCournot::new`]).
    pub fn preset() -> Self {
        let sets = vec![
            BoxSet::interval(0.0, 2.0, 1).unwrap(),
            BoxSet::interval(0.0, 2.0, 1).unwrap(),
        ];
        Self::new(RiskCournotSpec::default(), sets).expect("preset is valid")
    }

    pub fn spec(&self) -> &RiskCournotSpec {
        &self.spec
    }

    pub fn id(&self) -> &str {
        "risk-cournot2"
    }

    pub fn num_agents(&self) -> usize {
        2
    }

    pub fn action_set(&self, i: usize) -> &BoxSet {
        &self.sets[i]
    }

    /// One stochastic cost draw `J_i(x, ξ_i)` with fresh `ξ_i ~ U(0, noise_hi)`.
    pub fn sample_cost<R: Rng>(&self, i: usize, x: &Profile, rng: &mut R) -> Result<f64, GameError> {
        let xi = rng.gen::<f64>() * self.spec.noise_hi;
        self.cost_with_noise(i, x, xi)
    }

    /// `J_i(x, ξ)` for an explicit noise realization.
    pub fn cost_with_noise(&self, i: usize, x: &Profile, noise: f64) -> Result<f64, GameError> {
        if i >= 2 {
            return Err(GameError::AgentOutOfRange { got: i, agents: 2 });
        }
        if x.n_agents() != 2 {
            return Err(GameError::ProfileMismatch { expected: 2, got: x.n_agents() });
        }
        let total: f64 = x.as_slice().iter().sum();
        let own = x.agent(i)[0];
        Ok(-(self.spec.demand_intercept - total) * own
            + self.spec.cost_slope * own
            + noise * own
            + self.spec.offset)
    }

    /// `CVaR_alpha` of the uniform noise `U(0, noise_hi)`:
    /// the mean of the worst `alpha` tail, `noise_hi (1 − alpha / 2)`.
    pub fn noise_cvar(&self, alpha: f64) -> f64 {
        self.spec.noise_hi * (1.0 - alpha / 2.0)
    }

    /// Linear coefficient of the closed-form objective:
    /// `C_i(x) = x_i² + x_1 x_2 − c_i x_i + offset`.
    fn objective_coeff(&self, i: usize) -> f64 {
        self.spec.demand_intercept - self.spec.cost_slope - self.noise_cvar(self.spec.alpha[i])
    }

    /// Closed-form risk objective: `CVaR_{alpha_i}[J_i]` (expectation when
    /// `alpha_i = 1`). Ground-truth oracle for equilibrium and error
    /// measurement; never exposed to the learner.
    pub fn objective(&self, i: usize, x: &Profile) -> Result<f64, GameError> {
        if i >= 2 {
            return Err(GameError::AgentOutOfRange { got: i, agents: 2 });
        }
        let own = x.agent(i)[0];
        if own < 0.0 {
            // CVaR[ξ x_i] = x_i CVaR[ξ] needs a nonnegative multiplier.
            return Err(GameError::NegativeAction(own));
        }
        let other = x.agent(1 - i)[0];
        Ok(own * own + own * other - self.objective_coeff(i) * own + self.spec.offset)
    }

    /// Gradient of the closed-form objective, `2 x_i + x_{−i} − c_i`.
    pub fn objective_gradient(&self, i: usize, x: &Profile) -> Result<f64, GameError> {
        if i >= 2 {
            return Err(GameError::AgentOutOfRange { got: i, agents: 2 });
        }
        let own = x.agent(i)[0];
        let other = x.agent(1 - i)[0];
        Ok(2.0 * own + other - self.objective_coeff(i))
    }

    /// Gradient of the expected cost `E[J_i]`; the feedback available to the
    /// risk-neutral agent.
    pub fn mean_gradient(&self, i: usize, x: &Profile) -> Result<f64, GameError> {
        if i >= 2 {
            return Err(GameError::AgentOutOfRange { got: i, agents: 2 });
        }
        let own = x.agent(i)[0];
        let other = x.agent(1 - i)[0];
        let coeff = self.spec.demand_intercept - self.spec.cost_slope - self.spec.noise_hi / 2.0;
        Ok(2.0 * own + other - coeff)
    }

    /// Nash equilibrium of the closed-form objectives:
    /// `2 x_1 + x_2 = c_1`, `x_1 + 2 x_2 = c_2`.
    pub fn solve_ne(&self) -> Profile {
        let c1 = self.objective_coeff(0);
        let c2 = self.objective_coeff(1);
        Profile::scalar(vec![(2.0 * c1 - c2) / 3.0, (2.0 * c2 - c1) / 3.0])
    }

    /// Deterministic quadratic game with the closed-form objectives as costs;
    /// the oracle against which sampled dynamics are checked.
    pub fn induced_game(&self) -> QuadraticGame {
        let spec = QuadraticGameSpec {
            a: vec![2.0, 2.0],
            b: vec![1.0, 1.0],
            e: vec![self.objective_coeff(0), self.objective_coeff(1)],
            offset: self.spec.offset,
        };
        QuadraticGame::new("risk-cournot2-induced", spec, self.sets.clone())
            .expect("induced game is valid")
    }
}
