//! Seeded random streams and the elementary samplers used by the Gibbs sweep.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::normal;

/// A reproducible random stream.
///
/// Streams are ChaCha20 generators keyed by a 64-bit seed. Each seed owns
/// 2⁶⁴ disjoint substreams of 2⁶⁸ bytes apiece, so [`RngHandle::substream`]
/// gives every replicate of a benchmark its own non-overlapping sequence no
/// matter which thread runs it.
#[derive(Clone, Debug)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Substream `index` of `seed`. `substream(s, 0)` is `new(s)`.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self {
            seed,
            stream: index,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Which half-line a truncated normal is restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Positive,
    Negative,
}

/// Standardized distance beyond which inversion gives way to rejection.
const INVERSION_LIMIT: f64 = 4.0;

/// Draw from `N(mean, sd²)` conditioned on `x > 0` (`Positive`) or `x < 0`
/// (`Negative`). The sign of the result is always strictly correct.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    sd: f64,
    side: Side,
) -> f64 {
    debug_assert!(sd > 0.0);
    // Reduce to a standard normal restricted to (lower, ∞).
    let (lower, sign) = match side {
        Side::Positive => (-mean / sd, 1.0),
        Side::Negative => (mean / sd, -1.0),
    };
    loop {
        let t = std_normal_above(rng, lower);
        let x = sign * (mean * sign + sd * t);
        let ok = match side {
            Side::Positive => x > 0.0,
            Side::Negative => x < 0.0,
        };
        if ok && x.is_finite() {
            return x;
        }
    }
}

/// Standard normal conditioned on `t > lower`.
fn std_normal_above<R: Rng + ?Sized>(rng: &mut R, lower: f64) -> f64 {
    if lower <= INVERSION_LIMIT {
        // Invert the upper tail: Q(t) = u·Q(lower).
        let tail = normal::sf(lower);
        loop {
            let u: f64 = rng.sample(Open01);
            let t = normal::sf_inverse(u * tail);
            if t > lower && t.is_finite() {
                return t;
            }
        }
    } else {
        // Exponential proposal with the optimal rate for this truncation point.
        let rate = 0.5 * (lower + (lower * lower + 4.0).sqrt());
        loop {
            let e: f64 = rng.sample(Exp1);
            let t = lower + e / rate;
            let u: f64 = rng.sample(Open01);
            let d = t - rate;
            if t > lower && u.ln() <= -0.5 * d * d {
                return t;
            }
        }
    }
}

/// Gamma draw in the shape–rate parameterization (mean `shape / rate`).
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0);
    let dist = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters");
    loop {
        let x: f64 = dist.sample(rng);
        if x > 0.0 && x.is_finite() {
            return x;
        }
    }
}

#[inline]
pub fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Bernoulli draw with success probability `sigmoid(log_odds)`.
///
/// Works directly on the logit scale so that `|log_odds|` up to `1e6` (and
/// infinities) never overflow.
pub fn bernoulli_from_log_odds<R: Rng + ?Sized>(rng: &mut R, log_odds: f64) -> bool {
    let u: f64 = rng.sample(Open01);
    let p = if log_odds >= 0.0 {
        1.0 / (1.0 + (-log_odds).exp())
    } else {
        let e = log_odds.exp();
        e / (1.0 + e)
    };
    u < p
}

/// A validated lower-triangular Cholesky factor `L` of a covariance `L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    lower: DMatrix<f64>,
}

impl CholeskyFactor {
    pub fn new(lower: DMatrix<f64>) -> Result<Self> {
        if !lower.is_square() {
            return Err(Error::InvalidCholesky("factor is not square".into()));
        }
        let p = lower.nrows();
        for j in 0..p {
            let d = lower[(j, j)];
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidCholesky(format!(
                    "diagonal entry {} is {d}, expected a positive finite value",
                    j + 1
                )));
            }
            for i in 0..j {
                if lower[(i, j)] != 0.0 {
                    return Err(Error::InvalidCholesky(format!(
                        "entry ({}, {}) above the diagonal is nonzero",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { lower })
    }

    /// Factor a symmetric positive-definite covariance.
    pub fn of_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        let chol = nalgebra::Cholesky::new(cov.clone()).ok_or(Error::NotPositiveDefinite)?;
        Self::new(chol.l())
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// One draw from `N(0, L·Lᵀ)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let p = self.dim();
        let zeta = DVector::from_fn(p, |_, _| sample_std_normal(rng));
        let mut out = DVector::zeros(p);
        // L is column-major; accumulate column by column.
        for j in 0..p {
            let zj = zeta[j];
            for i in j..p {
                out[i] += self.lower[(i, j)] * zj;
            }
        }
        out
    }
}
