//! Exact posterior over `(γ, G)` for tiny problems, by enumeration.
//!
//! With the shrinkage parameters and the precision diagonal held fixed, the
//! joint posterior mass of a configuration `(γ, G)` is
//!
//! ```text
//! exp(−a|γ| + b γᵀGγ) · q^|G| (1−q)^(E−|G|) · I_Ω(G) · I_β(γ)
//! ```
//!
//! where `I_Ω(G)` integrates the CONCORD pseudo-likelihood times the Gaussian
//! slabs over the off-diagonal entries in `G` (a Gaussian integral in closed
//! form), and `I_β(γ)` integrates the probit likelihood times the `β` slab
//! over the included coefficients (composite Gauss–Legendre quadrature, so
//! at most two coefficients may be active).
//!
//! Comparing [`enumerate_posterior`] with [`empirical_joint`] of a chain run
//! with `update_shrinkage = false` and `update_diagonal = false` checks every
//! conditional of the sampler at once.

use std::collections::BTreeMap;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gibbs::ChainTrace;
use crate::normal;
use crate::state::{Dataset, Hyperparams};

/// A `(γ, G)` configuration: included variables and upper-triangular edges,
/// both zero-based and sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub gamma: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Quadrature resolution per coefficient axis.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    /// Integrate over `[−half_width·τ, half_width·τ]`.
    pub half_width: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            panels: 32,
            nodes_per_panel: 16,
        }
    }
}

const MAX_DIM: usize = 4;
const MAX_ACTIVE: usize = 2;

/// Normalized posterior probabilities of every admissible configuration.
///
/// Respects the caps in `hyper`. Fails when `p > 4` or when the caps admit
/// more than two active variables.
pub fn enumerate_posterior(
    data: &Dataset,
    hyper: &Hyperparams,
    lambda_offdiag: f64,
    diagonal: &[f64],
    quad: Quadrature,
) -> Result<BTreeMap<Configuration, f64>> {
    hyper.validate()?;
    let p = data.p();
    if p > MAX_DIM {
        return Err(Error::Dimension(format!("enumeration supports p <= {MAX_DIM}, got {p}")));
    }
    if diagonal.len() != p {
        return Err(Error::Dimension(format!("diagonal has length {}, expected {p}", diagonal.len())));
    }
    let max_active = hyper.variable_cap(p).saturating_sub(1).min(p);
    if max_active > MAX_ACTIVE {
        return Err(Error::InvalidHyperparameter {
            field: "r2_cap",
            reason: format!("quadrature handles at most {MAX_ACTIVE} active variables; set r2_cap <= 3"),
        });
    }
    let max_edges = hyper.edge_cap(p).saturating_sub(1);
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|j| ((j + 1)..p).map(move |k| (j, k))).collect();
    let s = uncentered_cov(data);
    let n = data.n() as f64;

    let mut log_beta: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut subsets = Vec::new();
    for mask in 0u32..(1 << p) {
        let gamma: Vec<usize> = (0..p).filter(|&j| mask & (1 << j) != 0).collect();
        if gamma.len() <= max_active {
            log_beta.insert(gamma.clone(), log_beta_integral(data, hyper.tau2, &gamma, quad)?);
            subsets.push(gamma);
        }
    }

    let mut log_w = Vec::new();
    for emask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len())
            .filter(|&e| emask & (1 << e) != 0)
            .map(|e| pairs[e])
            .collect();
        if edges.len() > max_edges {
            continue;
        }
        let lo = log_omega_integral(&s, n, diagonal, &edges, lambda_offdiag)?;
        let edge_prior =
            edges.len() as f64 * hyper.q.ln() + (pairs.len() - edges.len()) as f64 * (1.0 - hyper.q).ln();
        for gamma in &subsets {
            let coupled = edges
                .iter()
                .filter(|(j, k)| gamma.contains(j) && gamma.contains(k))
                .count() as f64;
            let mrf = -hyper.a * gamma.len() as f64 + 2.0 * hyper.b * coupled;
            let lw = mrf + edge_prior + lo + log_beta[gamma];
            log_w.push((
                Configuration {
                    gamma: gamma.clone(),
                    edges: edges.clone(),
                },
                lw,
            ));
        }
    }
    let max = log_w.iter().map(|(_, w)| *w).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = log_w.iter().map(|(_, w)| (w - max).exp()).sum();
    Ok(log_w.into_iter().map(|(c, w)| (c, (w - max).exp() / total)).collect())
}

fn uncentered_cov(data: &Dataset) -> DMatrix<f64> {
    let x = data.x();
    x.tr_mul(x) / data.n() as f64
}

/// `ln ∫ exp{−(n/2) tr(ΩSΩ)} Π_{(j,k)∈G} N(ω_jk; 0, 1/λ) dω_G`, up to the
/// `G`-independent factor from the fixed diagonal.
fn log_omega_integral(s: &DMatrix<f64>, n: f64, diagonal: &[f64], edges: &[(usize, usize)], lambda: f64) -> Result<f64> {
    let m = edges.len();
    let g = |w: &[f64]| -> f64 {
        let mut om = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
        for (&(j, k), &v) in edges.iter().zip(w) {
            om[(j, k)] = v;
            om[(k, j)] = v;
        }
        let quad: f64 = w.iter().map(|v| v * v).sum();
        -0.5 * n * (&om * s * &om).trace() - 0.5 * lambda * quad
    };
    let g0 = g(&vec![0.0; m]);
    if m == 0 {
        return Ok(0.0);
    }
    // g is exactly quadratic: g(w) = g0 + hᵀw − ½ wᵀMw
    let unit = |i: usize, scale: f64| {
        let mut w = vec![0.0; m];
        w[i] = scale;
        w
    };
    let mut h = DVector::zeros(m);
    let mut mm = DMatrix::zeros(m, m);
    for i in 0..m {
        let gp = g(&unit(i, 1.0));
        let gm = g(&unit(i, -1.0));
        h[i] = 0.5 * (gp - gm);
        mm[(i, i)] = -(gp + gm - 2.0 * g0);
    }
    for i in 0..m {
        for l in (i + 1)..m {
            let mut w = vec![0.0; m];
            w[i] = 1.0;
            w[l] = 1.0;
            let gil = g(&w);
            let gi = g(&unit(i, 1.0));
            let gl = g(&unit(l, 1.0));
            let v = -(gil - gi - gl + g0);
            mm[(i, l)] = v;
            mm[(l, i)] = v;
        }
    }
    let chol = nalgebra::Cholesky::new(mm).ok_or(Error::NotPositiveDefinite)?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let sol = chol.solve(&h);
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(0.5 * m as f64 * two_pi.ln() - 0.5 * log_det + 0.5 * h.dot(&sol) + 0.5 * m as f64 * (lambda / two_pi).ln())
}

/// `ln ∫ Π_i Φ((2y_i − 1) x_iᵀβ) N(β_γ; 0, τ²I) dβ_γ`.
fn log_beta_integral(data: &Dataset, tau2: f64, gamma: &[usize], quad: Quadrature) -> Result<f64> {
    let loglik = |beta: &[f64]| -> f64 {
        (0..data.n())
            .map(|i| {
                let eta: f64 = gamma.iter().zip(beta).map(|(&j, &b)| data.x()[(i, j)] * b).sum();
                normal::ln_cdf(if data.y()[i] { eta } else { -eta })
            })
            .sum()
    };
    if gamma.is_empty() {
        return Ok(loglik(&[]));
    }
    let rule = GaussLegendre::new(quad.nodes_per_panel)
        .map_err(|e| Error::InvalidHyperparameter {
            field: "nodes_per_panel",
            reason: e.to_string(),
        })?;
    let tau = tau2.sqrt();
    let lo = -quad.half_width * tau;
    let width = 2.0 * quad.half_width * tau / quad.panels as f64;
    let mut axis = Vec::with_capacity(quad.panels * quad.nodes_per_panel);
    for panel in 0..quad.panels {
        let a = lo + panel as f64 * width;
        for &(x, w) in rule.iter() {
            axis.push((a + 0.5 * width * (x + 1.0), 0.5 * width * w));
        }
    }
    let log_prior = |beta: &[f64]| -> f64 {
        beta.iter()
            .map(|b| -0.5 * b * b / tau2 - 0.5 * (2.0 * std::f64::consts::PI * tau2).ln())
            .sum()
    };
    let mut terms = Vec::new();
    match gamma.len() {
        1 => {
            for &(b, w) in &axis {
                terms.push(w.ln() + loglik(&[b]) + log_prior(&[b]));
            }
        }
        2 => {
            for &(b1, w1) in &axis {
                for &(b2, w2) in &axis {
                    let beta = [b1, b2];
                    terms.push(w1.ln() + w2.ln() + loglik(&beta) + log_prior(&beta));
                }
            }
        }
        k => {
            return Err(Error::Dimension(format!(
                "quadrature supports at most {MAX_ACTIVE} active variables, got {k}"
            )))
        }
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln())
}

/// Relative frequency of each configuration among the kept draws.
pub fn empirical_joint(trace: &ChainTrace) -> BTreeMap<Configuration, f64> {
    let mut counts: BTreeMap<Configuration, f64> = BTreeMap::new();
    for rec in &trace.records {
        let cfg = Configuration {
            gamma: rec.gamma.iter().map(|&j| j as usize).collect(),
            edges: rec.edges.iter().map(|&(j, k)| (j as usize, k as usize)).collect(),
        };
        *counts.entry(cfg).or_default() += 1.0;
    }
    let kept = trace.records.len() as f64;
    counts.values_mut().for_each(|v| *v /= kept);
    counts
}

/// `½ Σ |p − q|` over the union of supports.
pub fn total_variation(a: &BTreeMap<Configuration, f64>, b: &BTreeMap<Configuration, f64>) -> f64 {
    let mut tv = 0.0;
    for (cfg, &pa) in a {
        tv += (pa - b.get(cfg).copied().unwrap_or(0.0)).abs();
    }
    for (cfg, &pb) in b {
        if !a.contains_key(cfg) {
            tv += pb;
        }
    }
    0.5 * tv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_integral_single_edge_matches_closed_form() {
        let s = DMatrix::from_row_slice(2, 2, &[1.2, 0.3, 0.3, 0.8]);
        let n = 25.0;
        let diag = [1.1, 0.9];
        let lambda = 2.0;
        let got = log_omega_integral(&s, n, &diag, &[(0, 1)], lambda).unwrap();
        // ln c_jk without the edge prior: ½ ln(λ/(n a)) + n b²/(2a)
        let a = s[(0, 0)] + s[(1, 1)] + lambda / n;
        let b = diag[0] * s[(0, 1)] + diag[1] * s[(1, 0)];
        let want = 0.5 * (lambda / (n * a)).ln() + n * b * b / (2.0 * a);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn tv_of_disjoint_supports_is_one() {
        let c1 = Configuration { gamma: vec![0], edges: vec![] };
        let c2 = Configuration { gamma: vec![1], edges: vec![] };
        let a = BTreeMap::from([(c1, 1.0)]);
        let b = BTreeMap::from([(c2, 1.0)]);
        assert_eq!(total_variation(&a, &b), 1.0);
        assert_eq!(total_variation(&a, &a), 0.0);
    }
}
