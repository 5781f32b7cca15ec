//! Probit log-likelihood, score and observed information on a chosen
//! support, and a Newton solver for the maximum-likelihood estimate.
//!
//! With `η_i = x_iᵀβ` and `ε_i = 2y_i − 1`, every per-observation quantity is
//! a function of the signed predictor `t_i = ε_i η_i`:
//!
//! ```text
//! ℓ_i   = ln Φ(t_i)
//! ∂ℓ_i  = ε_i m(t_i) x_i,             m(t) = φ(t)/Φ(t)
//! ψ_i   = t_i m(t_i) + m(t_i)²  ≥ 0
//! ```
//!
//! and the information matrix is `H = Xᵀ diag(ψ) X`, the negative of the
//! second derivative of the log-likelihood. `m` is evaluated with the tail-safe
//! inverse Mills ratio from [`crate::normal`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::normal;

#[inline]
fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// Curvature weight `ψ` for linear predictor `eta` and response `y`.
pub fn psi(eta: f64, y: bool) -> f64 {
    let t = sign(y) * eta;
    let m = normal::inv_mills(t);
    m * (t + m)
}

fn linear_predictor(x: &DMatrix<f64>, beta: &DVector<f64>) -> DVector<f64> {
    x * beta
}

/// `L_n(β) = Σ [y_i ln Φ(η_i) + (1 − y_i) ln(1 − Φ(η_i))]`.
pub fn probit_loglik(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> f64 {
    let eta = linear_predictor(x, beta);
    eta.iter().zip(y).map(|(&e, &yi)| normal::ln_cdf(sign(yi) * e)).sum()
}

/// Gradient of [`probit_loglik`].
pub fn probit_score(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> DVector<f64> {
    let eta = linear_predictor(x, beta);
    let w = DVector::from_iterator(
        y.len(),
        eta.iter().zip(y).map(|(&e, &yi)| {
            let s = sign(yi);
            s * normal::inv_mills(s * e)
        }),
    );
    x.tr_mul(&w)
}

/// Observed information `Xᵀ diag(ψ) X` (positive semidefinite).
pub fn probit_hessian(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = linear_predictor(x, beta);
    let mut weighted = x.clone();
    for (i, (&e, &yi)) in eta.iter().zip(y).enumerate() {
        let w = psi(e, yi);
        weighted.row_mut(i).scale_mut(w);
    }
    let mut h = x.tr_mul(&weighted);
    let m = h.nrows();
    for a in 0..m {
        for b in (a + 1)..m {
            let v = 0.5 * (h[(a, b)] + h[(b, a)]);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbitFitResult {
    /// Zero-based predictor indices of the support, ascending.
    pub support: Vec<usize>,
    /// Estimates on `support`, same order.
    pub beta_hat: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the (penalized, if a ridge was used) gradient at the end.
    pub final_grad_norm: f64,
    /// Ridge penalty `ρ` in `L_n(β) − ρ‖β‖²/2`; zero for a plain MLE.
    pub ridge_used: f64,
    /// The unpenalized fit classified every observation correctly.
    pub separation: bool,
}

impl ProbitFitResult {
    /// Expand to a length-`p` coefficient vector, zero off the support.
    pub fn full_beta(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (&j, &b) in self.support.iter().zip(&self.beta_hat) {
            out[j] = b;
        }
        out
    }
}

pub const GRAD_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100;
const RIDGE_START: f64 = 1e-6;
const RIDGE_MAX: f64 = 1e-2;

struct Newton {
    beta: DVector<f64>,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    singular: bool,
}

/// Maximize `L_n(β) − ridge‖β‖²/2` by Newton's method with step halving.
fn newton(x: &DMatrix<f64>, y: &[bool], ridge: f64) -> Newton {
    let m = x.ncols();
    let objective = |b: &DVector<f64>| probit_loglik(x, y, b) - 0.5 * ridge * b.norm_squared();
    let mut beta = DVector::zeros(m);
    let mut value = objective(&beta);
    let mut singular = false;
    for it in 0..MAX_ITERATIONS {
        let grad = probit_score(x, y, &beta) - ridge * &beta;
        let grad_norm = grad.amax();
        if grad_norm < GRAD_TOLERANCE {
            return Newton {
                beta,
                iterations: it,
                grad_norm,
                converged: true,
                singular,
            };
        }
        let mut info = probit_hessian(x, y, &beta);
        for a in 0..m {
            info[(a, a)] += ridge;
        }
        let step = match info.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                // information lost rank: fall back to a gradient step
                singular = true;
                grad.clone()
            }
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &beta + scale * &step;
            let v = objective(&trial);
            if v.is_finite() && v >= value {
                beta = trial;
                value = v;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Newton {
                beta,
                iterations: it + 1,
                grad_norm,
                converged: false,
                singular,
            };
        }
    }
    let grad = probit_score(x, y, &beta) - ridge * &beta;
    let grad_norm = grad.amax();
    Newton {
        beta,
        iterations: MAX_ITERATIONS,
        grad_norm,
        converged: grad_norm < GRAD_TOLERANCE,
        singular,
    }
}

fn perfectly_classified(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> bool {
    let eta = x * beta;
    eta.iter().zip(y).all(|(&e, &yi)| sign(yi) * e > 0.0)
}

/// Probit MLE restricted to the columns in `support`.
///
/// An empty support gives `β̂ = 0`. If the plain Newton iteration fails, or
/// ends at a fit that classifies every observation correctly (which only
/// happens when the data are separable and the MLE does not exist), the fit is
/// repeated with a ridge penalty of `1e−6`, escalated tenfold up to `1e−2`.
pub fn fit_probit_mle(x: &DMatrix<f64>, y: &[bool], support: &[usize]) -> Result<ProbitFitResult> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "X has {} rows but Y has {} entries",
            x.nrows(),
            y.len()
        )));
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if let Some(&j) = support.iter().find(|&&j| j >= x.ncols()) {
        return Err(Error::Index(format!("support index {} exceeds p = {}", j + 1, x.ncols())));
    }
    if support.is_empty() {
        return Ok(ProbitFitResult {
            support,
            beta_hat: Vec::new(),
            converged: true,
            iterations: 0,
            final_grad_norm: 0.0,
            ridge_used: 0.0,
            separation: false,
        });
    }
    let xs = x.select_columns(support.iter());

    let plain = newton(&xs, y, 0.0);
    let separation = perfectly_classified(&xs, y, &plain.beta);
    if plain.converged && !plain.singular && !separation {
        return Ok(ProbitFitResult {
            support,
            beta_hat: plain.beta.iter().copied().collect(),
            converged: true,
            iterations: plain.iterations,
            final_grad_norm: plain.grad_norm,
            ridge_used: 0.0,
            separation,
        });
    }

    let mut ridge = RIDGE_START;
    let mut iterations = plain.iterations;
    loop {
        let fit = newton(&xs, y, ridge);
        iterations += fit.iterations;
        if fit.converged {
            return Ok(ProbitFitResult {
                support,
                beta_hat: fit.beta.iter().copied().collect(),
                converged: true,
                iterations,
                final_grad_norm: fit.grad_norm,
                ridge_used: ridge,
                separation,
            });
        }
        ridge *= 10.0;
        if ridge > RIDGE_MAX * (1.0 + 1e-9) {
            return Err(Error::ProbitNotConverged {
                grad_norm: fit.grad_norm,
            });
        }
    }
}

/// `Φ(x_iᵀβ)` for every row.
pub fn predict_probabilities(x: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    let b = DVector::from_column_slice(beta);
    (x * b).iter().map(|&e| normal::cdf(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{sample_std_normal, RngHandle};
    use rand::Rng;

    #[test]
    fn loglik_at_zero() {
        let x = DMatrix::from_fn(7, 2, |i, j| (i * 3 + j) as f64 - 4.0);
        let y = vec![true, false, true, true, false, false, true];
        let l = probit_loglik(&x, &y, &DVector::zeros(2));
        assert!((l - 7.0 * 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn loglik_single_values() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let l = probit_loglik(&x, &[true], &DVector::from_element(1, 1.6449));
        assert!((l - 0.95f64.ln()).abs() < 1e-5);
        assert!((l + 0.05129).abs() < 1e-4);
        let l = probit_loglik(&x, &[true], &DVector::from_element(1, -40.0));
        let asym = -800.0 - (40.0 * (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!(l.is_finite());
        assert!((l - asym).abs() < 1e-2);
        assert!((l + 804.6).abs() < 0.05);
    }

    #[test]
    fn score_and_information_at_zero() {
        let x = DMatrix::from_element(1, 1, 1.0);
        let b = DVector::zeros(1);
        // φ(0)/Φ(0) = 0.3989422804/0.5
        let s = probit_score(&x, &[true], &b);
        assert!((s[0] - 0.797_884_560_802_865_4).abs() < 1e-14);
        // ψ = 0·m + m² = (φ(0)/Φ(0))²
        let h = probit_hessian(&x, &[true], &b);
        assert!((h[(0, 0)] - std::f64::consts::FRAC_2_PI).abs() < 1e-14);
        let h0 = probit_hessian(&x, &[false], &b);
        assert!((h0[(0, 0)] - h[(0, 0)]).abs() < 1e-15);
    }

    fn random_instance(rng: &mut RngHandle, n: usize, m: usize) -> (DMatrix<f64>, Vec<bool>, DVector<f64>) {
        let x = DMatrix::from_fn(n, m, |_, _| sample_std_normal(rng));
        let y = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let beta = DVector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
        (x, y, beta)
    }

    #[test]
    fn score_matches_central_differences() {
        let mut rng = RngHandle::new(1);
        let h = 1e-5;
        for _ in 0..50 {
            let n = rng.random_range(5..=50);
            let m = rng.random_range(1..=5);
            let (x, y, beta) = random_instance(&mut rng, n, m);
            let s = probit_score(&x, &y, &beta);
            for a in 0..m {
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[a] += h;
                dn[a] -= h;
                let fd = (probit_loglik(&x, &y, &up) - probit_loglik(&x, &y, &dn)) / (2.0 * h);
                let rel = (fd - s[a]).abs() / s[a].abs().max(1.0);
                assert!(rel < 1e-6, "rel={rel}");
            }
        }
    }

    #[test]
    fn information_matches_central_differences_of_score() {
        let mut rng = RngHandle::new(2);
        let h = 1e-5;
        for _ in 0..50 {
            let n = rng.random_range(5..=50);
            let m = rng.random_range(1..=5);
            let (x, y, beta) = random_instance(&mut rng, n, m);
            let info = probit_hessian(&x, &y, &beta);
            let scale = info.amax().max(1.0);
            for a in 0..m {
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[a] += h;
                dn[a] -= h;
                let fd = (probit_score(&x, &y, &up) - probit_score(&x, &y, &dn)) / (2.0 * h);
                for c in 0..m {
                    // information is the negative second derivative
                    let rel = (-fd[c] - info[(c, a)]).abs() / scale;
                    assert!(rel < 1e-5, "rel={rel}");
                }
            }
        }
    }

    #[test]
    fn psi_nonnegative() {
        let mut rng = RngHandle::new(3);
        for _ in 0..1_000_000 {
            let eta = rng.random_range(-30.0..30.0);
            let y = rng.random_bool(0.5);
            let v = psi(eta, y);
            assert!(v >= 0.0 && v.is_finite(), "eta={eta}");
        }
    }

    #[test]
    fn derivatives_finite_in_tails() {
        let x = DMatrix::from_element(2, 1, 1.0);
        for eta in [-40.0, -20.0, 20.0, 40.0] {
            let b = DVector::from_element(1, eta);
            assert!(probit_loglik(&x, &[true, false], &b).is_finite());
            assert!(probit_score(&x, &[true, false], &b)[0].is_finite());
            assert!(probit_hessian(&x, &[true, false], &b)[(0, 0)].is_finite());
        }
    }

    #[test]
    fn mle_recovers_coefficients() {
        let mut rng = RngHandle::new(4);
        let n = 500;
        let x = DMatrix::from_fn(n, 2, |_, _| sample_std_normal(&mut rng));
        let y: Vec<bool> = (0..n)
            .map(|i| x[(i, 0)] - x[(i, 1)] + sample_std_normal(&mut rng) >= 0.0)
            .collect();
        let fit = fit_probit_mle(&x, &y, &[0, 1]).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.ridge_used, 0.0);
        assert!((fit.beta_hat[0] - 1.0).abs() < 0.25);
        assert!((fit.beta_hat[1] + 1.0).abs() < 0.25);
        let g = probit_score(&x.select_columns([0usize, 1].iter()), &y, &DVector::from_column_slice(&fit.beta_hat));
        assert!(g.amax() < 1e-8);
    }

    #[test]
    fn newton_steps_never_decrease_loglik() {
        let mut rng = RngHandle::new(5);
        let (x, y, _) = random_instance(&mut rng, 40, 3);
        let mut beta = DVector::zeros(3);
        let mut prev = probit_loglik(&x, &y, &beta);
        for _ in 0..20 {
            let g = probit_score(&x, &y, &beta);
            let step = probit_hessian(&x, &y, &beta).cholesky().unwrap().solve(&g);
            let mut scale = 1.0;
            loop {
                let trial = &beta + scale * &step;
                let v = probit_loglik(&x, &y, &trial);
                if v >= prev {
                    beta = trial;
                    assert!(v >= prev);
                    prev = v;
                    break;
                }
                scale *= 0.5;
            }
        }
    }

    #[test]
    fn all_equal_responses_trigger_ridge() {
        let mut rng = RngHandle::new(6);
        let x = DMatrix::from_fn(30, 2, |_, _| rng.random_range(0.1..2.0));
        let fit = fit_probit_mle(&x, &[true; 30], &[0, 1]).unwrap();
        assert!(fit.separation);
        assert!(fit.converged);
        assert!(fit.ridge_used > 0.0);
        assert!(fit.beta_hat.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn balanced_sign_design_is_separable() {
        let x = DMatrix::from_column_slice(6, 1, &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let y = vec![true, false, true, false, true, false];
        let fit = fit_probit_mle(&x, &y, &[0]).unwrap();
        assert!(fit.separation);
        assert!(fit.ridge_used >= 1e-6);
        assert!(fit.converged);
    }

    #[test]
    fn empty_support_gives_zero() {
        let x = DMatrix::zeros(4, 3);
        let fit = fit_probit_mle(&x, &[true, false, true, false], &[]).unwrap();
        assert!(fit.beta_hat.is_empty());
        assert_eq!(fit.full_beta(3), vec![0.0; 3]);
    }
}
