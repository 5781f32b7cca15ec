//! Standard normal density, distribution and quantile functions with
//! tail-stable variants.
//!
//! Beyond `|x| > 8` the lower tail `Φ(x)` is evaluated as `φ(x)·R(−x)` where
//! `R` is the Mills ratio `Q(t)/φ(t)`, computed by its continued fraction.
//! This keeps `ln Φ(x)` and `φ(x)/Φ(x)` finite and accurate far past the point
//! where `Φ(x)` itself underflows (around `x = −38`).

use statrs::function::erf::{erfc, erfc_inv};

/// `ln(√(2π))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Crossover point for the continued-fraction tail evaluation.
const TAIL_SWITCH: f64 = 8.0;

#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `Φ(x)`.
pub fn cdf(x: f64) -> f64 {
    if x < -TAIL_SWITCH {
        pdf(x) * mills_ratio(-x)
    } else {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }
}

/// Upper tail `Q(x) = 1 − Φ(x)` without cancellation.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn ln_cdf(x: f64) -> f64 {
    if x < -TAIL_SWITCH {
        ln_pdf(x) + mills_ratio(-x).ln()
    } else if x > 0.0 {
        (-sf(x)).ln_1p()
    } else {
        cdf(x).ln()
    }
}

/// Inverse Mills ratio `φ(x)/Φ(x)`.
///
/// For `x → −∞` this behaves like `−x`; for `x → +∞` it decays like `φ(x)`.
pub fn inv_mills(x: f64) -> f64 {
    if x < -TAIL_SWITCH {
        1.0 / mills_ratio(-x)
    } else {
        pdf(x) / cdf(x)
    }
}

/// Mills ratio `R(t) = Q(t)/φ(t)` for `t > 0`, by the Laplace continued
/// fraction `1/(t + 1/(t + 2/(t + 3/(t + …))))` evaluated bottom-up.
///
/// Intended for `t ≥ 8`, where 60 levels are far more than enough for full
/// double precision.
pub fn mills_ratio(t: f64) -> f64 {
    debug_assert!(t > 0.0);
    let mut tail = t;
    for k in (1..=60).rev() {
        tail = t + k as f64 / tail;
    }
    1.0 / tail
}

/// Standard normal quantile `Φ⁻¹(u)` for `u ∈ (0, 1)`.
pub fn quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Upper-tail quantile: the `x` with `Q(x) = u`.
pub fn sf_inverse(u: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}
