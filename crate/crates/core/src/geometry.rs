//! Convex action sets, Euclidean projections and seeded direction sampling.
//!
//! Action sets are axis-aligned boxes, which keeps projections exact and
//! cheap. Every random draw in the library flows through [`episode_rng`], so
//! a `(seed, agent, episode)` triple always maps to the same stream no matter
//! how runs are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Errors raised by set construction, projection and sampling.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lower bound exceeds upper bound at coordinate {coord}")]
    InvalidBounds { coord: usize },
    #[error("shrink factor {0} outside [0, 1)")]
    InvalidShrink(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// Closed convex action sets with exact Euclidean projection. Boxes are the
/// only shipped implementation; other shapes (balls, simplices) can slot in
/// behind this interface without touching the learning dynamics.
pub trait ProjectableSet: Sized {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    fn diameter(&self) -> f64;
    fn project(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError>;
    /// The scaled set `(1 − delta)·X` about the origin.
    fn shrink(&self, delta: f64) -> Result<Self, GeometryError>;
}

/// An axis-aligned box `{ x : lower <= x <= upper }` used as a per-agent
/// action set.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    /// Builds a box from componentwise bounds. Fails if any `lower[k] > upper[k]`
    /// or if either bound is not finite.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        if lower.len() != upper.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(GeometryError::InvalidBounds { coord: k });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Interval `[lo, hi]` replicated over `dim` coordinates.
    pub fn interval(lo: f64, hi: f64, dim: usize) -> Result<Self, GeometryError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Euclidean diameter `‖upper − lower‖₂`.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains_origin(&self) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(lo, hi)| *lo <= 0.0 && 0.0 <= *hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Chebyshev center of the box (the midpoint).
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }
}

impl ProjectableSet for BoxSet {
    fn dim(&self) -> usize {
        BoxSet::dim(self)
    }

    fn contains(&self, x: &[f64]) -> bool {
        BoxSet::contains(self, x)
    }

    fn diameter(&self) -> f64 {
        BoxSet::diameter(self)
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        project_box(x, self)
    }

    fn shrink(&self, delta: f64) -> Result<Self, GeometryError> {
        shrink_set(self, delta)
    }
}

/// Euclidean projection of `x` onto the box: componentwise clamp.
pub fn project_box(x: &[f64], set: &BoxSet) -> Result<Vec<f64>, GeometryError> {
    if x.len() != set.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: set.dim(),
            got: x.len(),
        });
    }
    Ok(x.iter()
        .zip(set.lower.iter().zip(&set.upper))
        .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
        .collect())
}

/// The shrunk set `(1 − delta)·X`, scaled about the origin.
pub fn shrink_set(set: &BoxSet, delta: f64) -> Result<BoxSet, GeometryError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(GeometryError::InvalidShrink(delta));
    }
    let s = 1.0 - delta;
    BoxSet::new(
        set.lower.iter().map(|v| s * v).collect(),
        set.upper.iter().map(|v| s * v).collect(),
    )
}

/// A unit vector used as a perturbation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomDirection(Vec<f64>);

impl RandomDirection {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Uniform draw from the unit sphere of `R^d`: `d` standard normals,
/// normalized. For `d = 1` this yields ±1 with equal probability.
pub fn sample_unit_sphere<R: Rng>(rng: &mut R, d: usize) -> Result<RandomDirection, GeometryError> {
    if d == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // A zero draw is essentially impossible but would poison the
        // normalization; redraw instead.
        if norm > 1e-12 {
            return Ok(RandomDirection(v.into_iter().map(|x| x / norm).collect()));
        }
    }
}

/// Uniform draw from the closed unit ball of `R^d`: a sphere sample scaled by
/// `U^{1/d}` with `U` uniform on `[0, 1]`.
pub fn sample_unit_ball<R: Rng>(rng: &mut R, d: usize) -> Result<Vec<f64>, GeometryError> {
    let dir = sample_unit_sphere(rng, d)?;
    let r = rng.gen::<f64>().powf(1.0 / d as f64);
    Ok(dir.as_slice().iter().map(|x| r * x).collect())
}

/// Deterministic per-(seed, agent, episode) generator.
///
/// SplitMix64-style mixing folds the triple into a single key, so replicate
/// runs are bit-reproducible regardless of worker scheduling.
pub fn episode_rng(seed: u64, agent: usize, episode: u64) -> ChaCha8Rng {
    fn mix(mut x: u64) -> u64 {
        x ^= x >> 30;
        x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x ^= x >> 27;
        x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^ (x >> 31)
    }
    let k = mix(seed ^ mix((agent as u64).wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ mix(episode.wrapping_mul(0x2545_f491_4f6c_dd1d)));
    ChaCha8Rng::seed_from_u64(k)
}
