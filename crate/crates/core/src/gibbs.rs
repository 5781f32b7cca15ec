//! Conditional updates of the joint sampler and the driver that runs a chain.
//!
//! A sweep visits, in order: the latent probit variables, every
//! `(γ_j, β_j)` pair, every `(G_jk, ω_jk)` pair, the shrinkage parameters,
//! and the precision diagonal. Indicators are drawn with their continuous
//! partner integrated out, then the partner is drawn given the indicator.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

use crate::error::{Error, Result};
use crate::kernels::{bernoulli_from_log_odds, sample_std_normal, sample_truncated_normal, Side};
use crate::state::{Dataset, DiagUpdate, Hyperparams, ModelState, PosteriorSummary, SampleCov};

/// Visiting order of the coordinate loops within a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    /// Ascending `j`, then lexicographic `(j, k)`.
    Fixed,
    /// A fresh uniform permutation every sweep.
    Random,
}

#[derive(Clone, Debug)]
pub struct ChainOptions {
    pub scan: ScanOrder,
    /// Resample `λ_jk`, `λ_j` each sweep. Disable to hold them fixed.
    pub update_shrinkage: bool,
    /// Refresh `ω_jj` each sweep. Disable to hold the diagonal fixed.
    pub update_diagonal: bool,
    /// Store `β` in every kept trace record.
    pub keep_beta: bool,
    /// Store the full `Ω` in every kept trace record.
    pub keep_omega: bool,
    /// Run [`ModelState::check_invariants`] every this many sweeps (0 = never).
    pub invariant_check_every: usize,
    /// Emit a progress line every this many sweeps (0 = never).
    pub progress_every: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            scan: ScanOrder::Fixed,
            update_shrinkage: true,
            update_diagonal: true,
            keep_beta: false,
            keep_omega: false,
            invariant_check_every: if cfg!(debug_assertions) { 1 } else { 100 },
            progress_every: 500,
        }
    }
}

/// Integrated-out conditional of `γ_j`, and the slab conditional of `β_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariableConditional {
    /// `ln d_j`.
    pub log_odds: f64,
    /// `μ_j`.
    pub mean: f64,
    /// `σ_j`.
    pub var: f64,
}

/// Integrated-out conditional of `G_jk`, and the slab conditional of `ω_jk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeConditional {
    /// `ln c_jk`.
    pub log_odds: f64,
    /// `−b_jk / a_jk`.
    pub mean: f64,
    /// `1 / (n a_jk)`.
    pub var: f64,
}

/// Redraw every latent `z_i` from `N(x_iᵀβ, 1)` truncated to the side given
/// by `y_i`.
pub fn update_latent<R: Rng + ?Sized>(state: &mut ModelState, data: &Dataset, rng: &mut R) {
    for ((z, &mean), &yi) in state.z.iter_mut().zip(&state.xb).zip(data.y()) {
        let side = if yi { Side::Positive } else { Side::Negative };
        *z = sample_truncated_normal(rng, mean, 1.0, side);
    }
}

/// Number of included graph neighbours of `j`: `Σ_{i≠j} γ_i G_ij`.
fn active_neighbours(state: &ModelState, j: usize) -> usize {
    state
        .graph
        .neighbours(j)
        .iter()
        .zip(&state.gamma)
        .filter(|(&g, &act)| g && act)
        .count()
}

pub fn variable_conditional(state: &ModelState, data: &Dataset, hyper: &Hyperparams, j: usize) -> VariableConditional {
    let col = data.column(j);
    let sq = data.column_sq_norm(j);
    // X̃_jᵀ(z − X_{−j}β_{−j}) = X̃_jᵀ(z − Xβ) + β_j ‖X̃_j‖²
    let mut dot = 0.0;
    for ((&x, &z), &xb) in col.iter().zip(&state.z).zip(&state.xb) {
        dot += x * (z - xb);
    }
    dot += state.beta[j] * sq;
    let var = 1.0 / (sq + 1.0 / hyper.tau2);
    let mean = var * dot;
    let m = active_neighbours(state, j) as f64;
    let log_odds = 0.5 * (var / hyper.tau2).ln() - hyper.a + 2.0 * hyper.b * m + mean * mean / (2.0 * var);
    VariableConditional { log_odds, mean, var }
}

/// `ln d_j`.
pub fn variable_log_odds(state: &ModelState, data: &Dataset, hyper: &Hyperparams, j: usize) -> f64 {
    variable_conditional(state, data, hyper, j).log_odds
}

pub fn update_variable_and_beta<R: Rng + ?Sized>(
    state: &mut ModelState,
    data: &Dataset,
    hyper: &Hyperparams,
    j: usize,
    rng: &mut R,
) {
    let others = state.n_active - state.gamma[j] as usize;
    if others + 1 >= hyper.variable_cap(data.p()) {
        state.set_gamma(j, false);
        state.set_beta(data, j, 0.0);
        return;
    }
    let cond = variable_conditional(state, data, hyper, j);
    if bernoulli_from_log_odds(rng, cond.log_odds) {
        let draw = cond.mean + cond.var.sqrt() * sample_std_normal(rng);
        state.set_gamma(j, true);
        state.set_beta(data, j, draw);
    } else {
        state.set_gamma(j, false);
        state.set_beta(data, j, 0.0);
    }
}

pub fn edge_conditional(state: &ModelState, cov: &SampleCov, hyper: &Hyperparams, j: usize, k: usize) -> EdgeConditional {
    let n = cov.n() as f64;
    let lambda = state.lambda_offdiag(j, k);
    let a = cov.get(j, j) + cov.get(k, k) + lambda / n;
    let b = state.edge_linear_term(cov, j, k);
    let coupling = if state.gamma[j] && state.gamma[k] { 2.0 * hyper.b } else { 0.0 };
    let log_odds = (hyper.q / (1.0 - hyper.q)).ln() + 0.5 * (lambda / (n * a)).ln() + n * b * b / (2.0 * a) + coupling;
    EdgeConditional {
        log_odds,
        mean: -b / a,
        var: 1.0 / (n * a),
    }
}

/// `ln c_jk`.
pub fn edge_log_odds(state: &ModelState, cov: &SampleCov, hyper: &Hyperparams, j: usize, k: usize) -> f64 {
    edge_conditional(state, cov, hyper, j, k).log_odds
}

pub fn update_edge_and_omega<R: Rng + ?Sized>(
    state: &mut ModelState,
    cov: &SampleCov,
    hyper: &Hyperparams,
    j: usize,
    k: usize,
    rng: &mut R,
) {
    let others = state.graph.edge_count() - state.graph.has_edge(j, k) as usize;
    if others + 1 >= hyper.edge_cap(cov.p()) {
        state.graph.set(j, k, false);
        state.set_offdiag_unchecked(cov, j, k, 0.0);
        return;
    }
    let cond = edge_conditional(state, cov, hyper, j, k);
    if bernoulli_from_log_odds(rng, cond.log_odds) {
        let draw = cond.mean + cond.var.sqrt() * sample_std_normal(rng);
        state.graph.set(j, k, true);
        state.set_offdiag_unchecked(cov, j, k, draw);
    } else {
        state.graph.set(j, k, false);
        state.set_offdiag_unchecked(cov, j, k, 0.0);
    }
}

/// Resample `λ_jk ~ Gamma(r + ½, ω_jk²/2 + s)` and `λ_j ~ Gamma(r + 1, ω_jj + s)`
/// (shape–rate).
pub fn update_shrinkage<R: Rng + ?Sized>(state: &mut ModelState, hyper: &Hyperparams, rng: &mut R) {
    let p = state.p();
    // Gamma(shape, rate) = Gamma(shape, 1) / rate
    let off = Gamma::new(hyper.r + 0.5, 1.0).expect("positive shape");
    let diag = Gamma::new(hyper.r + 1.0, 1.0).expect("positive shape");
    for k in 1..p {
        for j in 0..k {
            let w = state.omega[(j, k)];
            let rate = 0.5 * w * w + hyper.s;
            state.lambda_offdiag[(j, k)] = positive_gamma(&off, rng) / rate;
        }
    }
    for j in 0..p {
        let rate = state.omega[(j, j)] + hyper.s;
        state.lambda_diag[j] = positive_gamma(&diag, rng) / rate;
    }
}

fn positive_gamma<R: Rng + ?Sized>(dist: &Gamma<f64>, rng: &mut R) -> f64 {
    loop {
        let x = dist.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

/// Mode of `ω ↦ ωⁿ exp{−n s ω²/2 − ω (λ + n b)}` on `ω > 0`:
///
/// ```text
/// ω* = [−(λ + n b) + √((λ + n b)² + 4 n² s)] / (2 n s)
/// ```
///
pub fn diagonal_mode(lambda: f64, b: f64, s: f64, n: f64) -> f64 {
    let c = lambda + n * b;
    let disc = (c * c + 4.0 * n * n * s).sqrt();
    if c > 0.0 {
        // rationalized form, free of cancellation for large positive c
        2.0 * n / (c + disc)
    } else {
        (disc - c) / (2.0 * n * s)
    }
}

/// Log of the unnormalized full conditional of a diagonal entry.
pub fn diagonal_log_density(omega: f64, lambda: f64, b: f64, s: f64, n: f64) -> f64 {
    if omega <= 0.0 {
        return f64::NEG_INFINITY;
    }
    n * omega.ln() - 0.5 * n * s * omega * omega - omega * (lambda + n * b)
}

/// Refresh `ω_jj`, either by plugging in the conditional mode or by one
/// Metropolis–Hastings step.
///
/// The Metropolis proposal is `ω' ~ Unif(ω/2, 2ω)` about the current value.
/// Its density `1/(1.5 ω)` is not symmetric, so the acceptance ratio carries
/// the correction `q(ω | ω') / q(ω' | ω) = ω / ω'`.
pub fn update_diagonal<R: Rng + ?Sized>(
    state: &mut ModelState,
    cov: &SampleCov,
    hyper: &Hyperparams,
    j: usize,
    rng: &mut R,
) -> Result<()> {
    let s = cov.get(j, j);
    if s.is_nan() || s <= 0.0 {
        return Err(Error::DegeneratePredictor { column: j + 1 });
    }
    let n = cov.n() as f64;
    let lambda = state.lambda_diag[j];
    let b = state.diag_linear_term(cov, j);
    let value = match hyper.diag_update {
        DiagUpdate::Mode => diagonal_mode(lambda, b, s, n),
        DiagUpdate::Metropolis => {
            let current = state.omega[(j, j)];
            let u: f64 = rng.sample(Open01);
            let proposal = current * (0.5 + 1.5 * u);
            let log_ratio = diagonal_log_density(proposal, lambda, b, s, n)
                - diagonal_log_density(current, lambda, b, s, n)
                + (current / proposal).ln();
            let v: f64 = rng.sample(Open01);
            if v.ln() < log_ratio {
                proposal
            } else {
                current
            }
        }
    };
    state.set_diag(cov, j, value);
    Ok(())
}

/// One kept draw.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// Zero-based sweep index, counting burn-in.
    pub iteration: usize,
    /// Included variables (zero-based).
    pub gamma: Vec<u32>,
    /// Upper-triangular edges `(j, k)`, `j < k` (zero-based).
    pub edges: Vec<(u32, u32)>,
    pub beta: Option<Vec<f64>>,
    pub omega: Option<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
pub struct ChainTrace {
    pub records: Vec<TraceRecord>,
    /// Per-variable inclusion counts over kept draws.
    pub gamma_counts: Vec<u64>,
    /// Upper-triangular edge inclusion counts (entry `(j, k)`, `j < k`).
    pub edge_counts: DMatrix<u64>,
    /// Wall-clock seconds of every sweep, burn-in included.
    pub sweep_seconds: Vec<f64>,
}

impl ChainTrace {
    pub fn kept(&self) -> usize {
        self.records.len()
    }
}

/// A chain bound to its data. Holds the state so callers can adjust it (for
/// instance fixing shrinkage parameters) before running.
pub struct Chain<'a> {
    data: &'a Dataset,
    cov: SampleCov,
    hyper: Hyperparams,
    options: ChainOptions,
    state: ModelState,
    edge_order: Vec<(usize, usize)>,
    var_order: Vec<usize>,
}

impl<'a> Chain<'a> {
    pub fn new<R: Rng + ?Sized>(
        data: &'a Dataset,
        hyper: Hyperparams,
        options: ChainOptions,
        warm_start: Option<&DMatrix<f64>>,
        rng: &mut R,
    ) -> Result<Self> {
        let cov = SampleCov::from_dataset(data);
        let state = ModelState::init_with_omega(data, &cov, &hyper, warm_start, rng)?;
        let p = data.p();
        for j in 0..p {
            if (cov.get(j, j).is_nan() || cov.get(j, j) <= 0.0) && options.update_diagonal {
                return Err(Error::DegeneratePredictor { column: j + 1 });
            }
        }
        let first = data.y()[0];
        if data.y().iter().all(|&v| v == first) {
            log::warn!(
                "all responses equal {}; the posterior will concentrate near the empty model",
                first as u8
            );
        }
        let edge_order = (0..p).flat_map(|j| ((j + 1)..p).map(move |k| (j, k))).collect();
        Ok(Self {
            data,
            cov,
            hyper,
            options,
            state,
            edge_order,
            var_order: (0..p).collect(),
        })
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ModelState {
        &mut self.state
    }

    pub fn sample_cov(&self) -> &SampleCov {
        &self.cov
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    /// Fix `λ_jk` and `λ_j` to given values (useful with
    /// `update_shrinkage = false`).
    pub fn set_shrinkage(&mut self, offdiag: f64, diag: f64) {
        let p = self.data.p();
        self.state.lambda_offdiag = DMatrix::from_element(p, p, offdiag);
        self.state.lambda_diag = vec![diag; p];
    }

    /// Overwrite the precision diagonal (cache repaired).
    pub fn set_diagonal(&mut self, values: &[f64]) {
        for (j, &v) in values.iter().enumerate() {
            self.state.set_diag(&self.cov, j, v);
        }
    }

    /// One full sweep.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let data = self.data;
        update_latent(&mut self.state, data, rng);

        if self.options.scan == ScanOrder::Random {
            self.var_order.shuffle(rng);
            self.edge_order.shuffle(rng);
        }
        for &j in &self.var_order {
            update_variable_and_beta(&mut self.state, data, &self.hyper, j, rng);
        }
        for &(j, k) in &self.edge_order {
            update_edge_and_omega(&mut self.state, &self.cov, &self.hyper, j, k, rng);
        }
        if self.options.update_shrinkage {
            update_shrinkage(&mut self.state, &self.hyper, rng);
        }
        if self.options.update_diagonal {
            for &j in &self.var_order {
                update_diagonal(&mut self.state, &self.cov, &self.hyper, j, rng)?;
            }
        }
        Ok(())
    }

    /// Run `burn_in + n_keep` sweeps and summarize the kept draws.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(ChainTrace, PosteriorSummary)> {
        let p = self.data.p();
        let total = self.hyper.burn_in + self.hyper.n_keep;
        let mut trace = ChainTrace {
            records: Vec::with_capacity(self.hyper.n_keep),
            gamma_counts: vec![0; p],
            edge_counts: DMatrix::zeros(p, p),
            sweep_seconds: Vec::with_capacity(total),
        };
        let mut omega_sum = DMatrix::<f64>::zeros(p, p);

        for it in 0..total {
            let start = Instant::now();
            self.sweep(rng)?;
            trace.sweep_seconds.push(start.elapsed().as_secs_f64());

            let every = self.options.invariant_check_every;
            if every > 0 && (it + 1) % every == 0 {
                self.state.check_invariants(self.data, &self.cov, &self.hyper)?;
            }
            if self.options.progress_every > 0 && (it + 1) % self.options.progress_every == 0 {
                log::info!(
                    "sweep {}/{}: |gamma| = {}, |G| = {}",
                    it + 1,
                    total,
                    self.state.active_count(),
                    self.state.graph.edge_count()
                );
            }
            if it < self.hyper.burn_in {
                continue;
            }

            let gamma: Vec<u32> = (0..p).filter(|&j| self.state.gamma[j]).map(|j| j as u32).collect();
            for &j in &gamma {
                trace.gamma_counts[j as usize] += 1;
            }
            let edges: Vec<(u32, u32)> = self.state.graph.edges().map(|(j, k)| (j as u32, k as u32)).collect();
            for &(j, k) in &edges {
                trace.edge_counts[(j as usize, k as usize)] += 1;
            }
            omega_sum += &self.state.omega;
            trace.records.push(TraceRecord {
                iteration: it,
                gamma,
                edges,
                beta: self.options.keep_beta.then(|| self.state.beta.clone()),
                omega: self.options.keep_omega.then(|| self.state.omega.clone()),
            });
        }

        let kept = self.hyper.n_keep as f64;
        let incl_gamma = trace.gamma_counts.iter().map(|&c| c as f64 / kept).collect();
        let mut incl_edge = DMatrix::zeros(p, p);
        for j in 0..p {
            for k in (j + 1)..p {
                let v = trace.edge_counts[(j, k)] as f64 / kept;
                incl_edge[(j, k)] = v;
                incl_edge[(k, j)] = v;
            }
        }
        let summary = PosteriorSummary::from_probabilities(incl_gamma, incl_edge, omega_sum / kept, self.hyper.n_keep);
        Ok((trace, summary))
    }
}

/// Initialize a chain on `data` and run it to completion.
pub fn run_chain<R: Rng + ?Sized>(
    data: &Dataset,
    hyper: &Hyperparams,
    options: &ChainOptions,
    warm_start: Option<&DMatrix<f64>>,
    rng: &mut R,
) -> Result<(ChainTrace, PosteriorSummary)> {
    let mut chain = Chain::new(data, hyper.clone(), options.clone(), warm_start, rng)?;
    chain.run(rng)
}
