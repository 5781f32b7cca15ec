//! Chain state, data containers and the incrementally maintained `Ω·S` cache.
//!
//! The edge and diagonal updates need the linear coefficients
//!
//! ```text
//! b_jk = Σ_{k'≠k} ω_jk' s_kk' + Σ_{j'≠j} ω_j'k s_jj'
//! b_j  = Σ_{j'≠j} ω_jj' s_jj'
//! ```
//!
//! Both are read off the product `T = Ω·S` in O(1):
//! `b_jk = T_jk + T_kj − ω_jk (s_jj + s_kk)` and `b_j = T_jj − ω_jj s_jj`.
//! Changing one entry of `Ω` only touches two rows of `T`, so the cache is
//! repaired in O(p) per accepted change.
//!
//! The cache is stored as `S·Ω = Tᵀ` in column-major order, which makes both
//! repairs contiguous column updates.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{sample_truncated_normal, Side};

/// Predictors and binary responses, with an optional held-out split.
#[derive(Clone, Debug)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: Vec<bool>,
    col_sq_norms: Vec<f64>,
    test: Option<TestSplit>,
}

#[derive(Clone, Debug)]
pub struct TestSplit {
    pub x: DMatrix<f64>,
    pub y: Vec<bool>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: Vec<bool>) -> Result<Self> {
        let (n, p) = x.shape();
        if n != y.len() {
            return Err(Error::Dimension(format!(
                "X has {n} rows but Y has {} entries",
                y.len()
            )));
        }
        if n < 1 {
            return Err(Error::InvalidData("at least one observation is required".into()));
        }
        if p < 2 {
            return Err(Error::InvalidData(format!(
                "at least two predictors are required, got {p}"
            )));
        }
        if let Some(idx) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry at row {}, column {}",
                idx % n + 1,
                idx / n + 1
            )));
        }
        let col_sq_norms = x.column_iter().map(|c| c.norm_squared()).collect();
        Ok(Self {
            x,
            y,
            col_sq_norms,
            test: None,
        })
    }

    /// Build from 0/1 response codes.
    pub fn from_codes(x: DMatrix<f64>, y: &[u8]) -> Result<Self> {
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidData(format!(
                "response {} is {}, expected 0 or 1",
                i + 1,
                y[i]
            )));
        }
        Self::new(x, y.iter().map(|&v| v == 1).collect())
    }

    pub fn with_test(mut self, x: DMatrix<f64>, y: Vec<bool>) -> Result<Self> {
        if x.ncols() != self.p() {
            return Err(Error::Dimension(format!(
                "test split has {} columns, training data has {}",
                x.ncols(),
                self.p()
            )));
        }
        if x.nrows() != y.len() {
            return Err(Error::Dimension(format!(
                "test X has {} rows but test Y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        self.test = Some(TestSplit { x, y });
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn test(&self) -> Option<&TestSplit> {
        self.test.as_ref()
    }

    /// Column `j` of `X` as a contiguous slice.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.x.as_slice()[j * n..(j + 1) * n]
    }

    #[inline]
    pub fn column_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }
}

/// Uncentered sample second-moment matrix `S = n⁻¹ XᵀX`.
#[derive(Clone, Debug)]
pub struct SampleCov {
    s: DMatrix<f64>,
    n: usize,
}

impl SampleCov {
    pub fn from_dataset(data: &Dataset) -> Self {
        let x = data.x();
        let n = data.n();
        let mut s = x.tr_mul(x) / n as f64;
        // Enforce exact symmetry.
        let p = s.nrows();
        for j in 0..p {
            for k in (j + 1)..p {
                let v = 0.5 * (s[(j, k)] + s[(k, j)]);
                s[(j, k)] = v;
                s[(k, j)] = v;
            }
        }
        Self { s, n }
    }

    pub fn from_matrix(s: DMatrix<f64>, n: usize) -> Result<Self> {
        if !s.is_square() {
            return Err(Error::Dimension("sample covariance must be square".into()));
        }
        Ok(Self { s, n })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.s.nrows()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.s[(j, k)]
    }

    #[inline]
    fn column(&self, j: usize) -> &[f64] {
        let p = self.p();
        &self.s.as_slice()[j * p..(j + 1) * p]
    }
}

/// How the precision diagonal is refreshed each sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagUpdate {
    /// Plug in the mode of the diagonal's full conditional.
    Mode,
    /// One Metropolis–Hastings step targeting the full conditional.
    Metropolis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    /// Model-size penalty of the Markov random field prior.
    pub a: f64,
    /// Coupling between included variables and graph neighbours.
    pub b: f64,
    /// Slab variance for regression coefficients.
    pub tau2: f64,
    /// Prior edge inclusion probability.
    pub q: f64,
    /// Gamma hyperprior shape.
    pub r: f64,
    /// Gamma hyperprior rate.
    pub s: f64,
    /// Strict upper bound on the number of edges; `None` admits every graph.
    pub r1_cap: Option<usize>,
    /// Strict upper bound on the number of variables; `None` admits every model.
    pub r2_cap: Option<usize>,
    pub burn_in: usize,
    pub n_keep: usize,
    pub diag_update: DiagUpdate,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            a: 2.75,
            b: 0.5,
            tau2: 1.0,
            q: 0.005,
            r: 1e-4,
            s: 1e-8,
            r1_cap: None,
            r2_cap: None,
            burn_in: 2000,
            n_keep: 2000,
            diag_update: DiagUpdate::Mode,
        }
    }
}

fn bad(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidHyperparameter {
        field,
        reason: reason.into(),
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = |field, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive("a", self.a)?;
        positive("tau2", self.tau2)?;
        positive("r", self.r)?;
        positive("s", self.s)?;
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(bad("b", format!("must be nonnegative and finite, got {}", self.b)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(bad("q", format!("must lie in (0, 1), got {}", self.q)));
        }
        if self.r1_cap == Some(0) {
            return Err(bad("r1_cap", "must be a positive integer"));
        }
        if self.r2_cap == Some(0) {
            return Err(bad("r2_cap", "must be a positive integer"));
        }
        if self.n_keep == 0 {
            return Err(bad("n_keep", "must be a positive integer"));
        }
        Ok(())
    }

    /// Resolved edge cap `R₁` for dimension `p`. Draws satisfy `|G| < R₁`;
    /// the default admits the complete graph.
    pub fn edge_cap(&self, p: usize) -> usize {
        self.r1_cap.unwrap_or(p * (p - 1) / 2 + 1)
    }

    /// Resolved variable cap `R₂` for dimension `p`. Draws satisfy `|γ| < R₂`;
    /// the default admits the full model.
    pub fn variable_cap(&self, p: usize) -> usize {
        self.r2_cap.unwrap_or(p + 1)
    }
}

/// Symmetric 0/1 adjacency with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    p: usize,
    bits: Vec<bool>,
    edges: usize,
}

impl Graph {
    pub fn empty(p: usize) -> Self {
        Self {
            p,
            bits: vec![false; p * p],
            edges: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.bits[j * self.p + k]
    }

    /// Set `(j, k)` and `(k, j)`. Self-loops are ignored.
    pub fn set(&mut self, j: usize, k: usize, on: bool) {
        if j == k {
            return;
        }
        let was = self.bits[j * self.p + k];
        if was != on {
            self.bits[j * self.p + k] = on;
            self.bits[k * self.p + j] = on;
            if on {
                self.edges += 1;
            } else {
                self.edges -= 1;
            }
        }
    }

    /// Number of edges (upper-triangular ones).
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Upper-triangular edges `(j, k)` with `j < k`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.p;
        (0..p).flat_map(move |j| ((j + 1)..p).filter(move |&k| self.has_edge(j, k)).map(move |k| (j, k)))
    }

    #[inline]
    pub fn neighbours(&self, j: usize) -> &[bool] {
        &self.bits[j * self.p..(j + 1) * self.p]
    }
}

/// Full state of one chain.
#[derive(Clone, Debug)]
pub struct ModelState {
    pub(crate) z: Vec<f64>,
    pub(crate) gamma: Vec<bool>,
    pub(crate) beta: Vec<f64>,
    pub(crate) graph: Graph,
    pub(crate) omega: DMatrix<f64>,
    pub(crate) lambda_offdiag: DMatrix<f64>,
    pub(crate) lambda_diag: Vec<f64>,
    /// `S·Ω`, i.e. the transpose of `T = Ω·S`.
    cross: DMatrix<f64>,
    /// `X·β`.
    pub(crate) xb: Vec<f64>,
    pub(crate) n_active: usize,
}

impl ModelState {
    /// Empty model, identity precision, shrinkage at the hyperprior mean, and
    /// latent values drawn from `N(0, 1)` truncated to agree with `Y`.
    pub fn init<R: Rng + ?Sized>(
        data: &Dataset,
        cov: &SampleCov,
        hyper: &Hyperparams,
        rng: &mut R,
    ) -> Result<Self> {
        Self::init_with_omega(data, cov, hyper, None, rng)
    }

    /// As [`ModelState::init`], optionally warm-starting `Ω` (and hence `G`)
    /// from a supplied symmetric matrix with positive diagonal.
    pub fn init_with_omega<R: Rng + ?Sized>(
        data: &Dataset,
        cov: &SampleCov,
        hyper: &Hyperparams,
        omega0: Option<&DMatrix<f64>>,
        rng: &mut R,
    ) -> Result<Self> {
        hyper.validate()?;
        let (n, p) = (data.n(), data.p());
        if cov.p() != p {
            return Err(Error::Dimension(format!(
                "sample covariance is {}x{} but the data has {p} predictors",
                cov.p(),
                cov.p()
            )));
        }
        let omega = match omega0 {
            None => DMatrix::identity(p, p),
            Some(m) => {
                validate_warm_start(m, p)?;
                m.clone()
            }
        };
        let mut graph = Graph::empty(p);
        for j in 0..p {
            for k in (j + 1)..p {
                if omega[(j, k)] != 0.0 {
                    graph.set(j, k, true);
                }
            }
        }
        if graph.edge_count() >= hyper.edge_cap(p) {
            return Err(Error::InvalidData(format!(
                "warm-start precision has {} edges, at or above the edge cap {}",
                graph.edge_count(),
                hyper.edge_cap(p)
            )));
        }
        let prior_mean = hyper.r / hyper.s;
        let z = data
            .y()
            .iter()
            .map(|&yi| {
                let side = if yi { Side::Positive } else { Side::Negative };
                sample_truncated_normal(rng, 0.0, 1.0, side)
            })
            .collect();
        let cross = cov.matrix() * &omega;
        Ok(Self {
            z,
            gamma: vec![false; p],
            beta: vec![0.0; p],
            graph,
            omega,
            lambda_offdiag: DMatrix::from_element(p, p, prior_mean),
            lambda_diag: vec![prior_mean; p],
            cross,
            xb: vec![0.0; n],
            n_active: 0,
        })
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn gamma(&self) -> &[bool] {
        &self.gamma
    }

    pub fn active_count(&self) -> usize {
        self.n_active
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    /// `λ_jk` for `j < k` (symmetric access).
    pub fn lambda_offdiag(&self, j: usize, k: usize) -> f64 {
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        self.lambda_offdiag[(a, b)]
    }

    pub fn lambda_diag(&self) -> &[f64] {
        &self.lambda_diag
    }

    /// Current linear predictor `X·β`.
    pub fn linear_predictor(&self) -> &[f64] {
        &self.xb
    }

    /// Cached `(Ω·S)_jk`.
    #[inline]
    pub fn omega_s(&self, j: usize, k: usize) -> f64 {
        self.cross[(k, j)]
    }

    /// Cached `Ω·S` as a dense matrix.
    pub fn omega_s_matrix(&self) -> DMatrix<f64> {
        self.cross.transpose()
    }

    /// `b_jk` with the current `ω_jk` excluded.
    #[inline]
    pub fn edge_linear_term(&self, cov: &SampleCov, j: usize, k: usize) -> f64 {
        self.omega_s(j, k) + self.omega_s(k, j) - self.omega[(j, k)] * (cov.get(j, j) + cov.get(k, k))
    }

    /// `b_j` with the current `ω_jj` excluded.
    #[inline]
    pub fn diag_linear_term(&self, cov: &SampleCov, j: usize) -> f64 {
        self.omega_s(j, j) - self.omega[(j, j)] * cov.get(j, j)
    }

    /// Set `ω_jk = ω_kj = value`, switch `G_jk` to match its support, and
    /// repair the cache in O(p).
    pub fn set_offdiag(&mut self, cov: &SampleCov, j: usize, k: usize, value: f64) -> Result<()> {
        let p = self.p();
        if j == k {
            return Err(Error::Index(format!(
                "({}, {}) is a diagonal entry; use set_diag",
                j + 1,
                k + 1
            )));
        }
        if j >= p || k >= p {
            return Err(Error::Index(format!("({}, {}) outside a {p}x{p} matrix", j + 1, k + 1)));
        }
        self.graph.set(j, k, value != 0.0);
        self.set_offdiag_unchecked(cov, j, k, value);
        Ok(())
    }

    #[inline]
    pub(crate) fn set_offdiag_unchecked(&mut self, cov: &SampleCov, j: usize, k: usize, value: f64) {
        let delta = value - self.omega[(j, k)];
        if delta == 0.0 {
            return;
        }
        self.omega[(j, k)] = value;
        self.omega[(k, j)] = value;
        // column j of S·Ω gains Δ·S[:, k]; column k gains Δ·S[:, j]
        axpy_column(&mut self.cross, j, delta, cov.column(k));
        axpy_column(&mut self.cross, k, delta, cov.column(j));
    }

    /// Set `ω_jj = value > 0` and repair the cache in O(p).
    pub fn set_diag(&mut self, cov: &SampleCov, j: usize, value: f64) {
        debug_assert!(value > 0.0);
        let delta = value - self.omega[(j, j)];
        if delta == 0.0 {
            return;
        }
        self.omega[(j, j)] = value;
        axpy_column(&mut self.cross, j, delta, cov.column(j));
    }

    /// Set `β_j` and keep `X·β` in sync. Does not touch `γ`.
    #[inline]
    pub(crate) fn set_beta(&mut self, data: &Dataset, j: usize, value: f64) {
        let delta = value - self.beta[j];
        if delta == 0.0 {
            return;
        }
        self.beta[j] = value;
        for (xb, &x) in self.xb.iter_mut().zip(data.column(j)) {
            *xb += delta * x;
        }
    }

    #[inline]
    pub(crate) fn set_gamma(&mut self, j: usize, on: bool) {
        if self.gamma[j] != on {
            self.gamma[j] = on;
            if on {
                self.n_active += 1;
            } else {
                self.n_active -= 1;
            }
        }
    }

    /// Overwrite the latent vector. Every `z_i` must be finite and lie on the
    /// side fixed by `y_i` (zero counts as positive).
    pub fn set_latent(&mut self, data: &Dataset, z: &[f64]) -> Result<()> {
        if z.len() != data.n() {
            return Err(Error::Dimension(format!("latent vector has length {}, expected {}", z.len(), data.n())));
        }
        for (i, (&zi, &yi)) in z.iter().zip(data.y()).enumerate() {
            if !zi.is_finite() || (zi >= 0.0) != yi {
                return Err(Error::InvalidData(format!(
                    "z_{} = {zi} is inconsistent with y_{} = {}",
                    i + 1,
                    i + 1,
                    yi as u8
                )));
            }
        }
        self.z.copy_from_slice(z);
        Ok(())
    }

    /// Set the symmetric pair `λ_jk = λ_kj = value > 0`.
    pub fn set_lambda_offdiag(&mut self, j: usize, k: usize, value: f64) {
        debug_assert!(value > 0.0 && j != k);
        self.lambda_offdiag[(j, k)] = value;
        self.lambda_offdiag[(k, j)] = value;
    }

    pub fn set_lambda_diag(&mut self, j: usize, value: f64) {
        debug_assert!(value > 0.0);
        self.lambda_diag[j] = value;
    }

    /// Fresh `Ω·S`, for checking the cache.
    pub fn recompute_omega_s(&self, cov: &SampleCov) -> DMatrix<f64> {
        &self.omega * cov.matrix()
    }

    /// Rebuild both caches from scratch.
    pub fn resync_caches(&mut self, data: &Dataset, cov: &SampleCov) {
        self.cross = cov.matrix() * &self.omega;
        let beta = nalgebra::DVector::from_column_slice(&self.beta);
        self.xb = (data.x() * beta).iter().copied().collect();
    }

    /// Verify every structural invariant of the chain state.
    pub fn check_invariants(&self, data: &Dataset, cov: &SampleCov, hyper: &Hyperparams) -> Result<()> {
        let p = self.p();
        for j in 0..p {
            if self.gamma[j] != (self.beta[j] != 0.0) {
                return Err(Error::Invariant(format!(
                    "gamma_{} = {} but beta_{} = {}",
                    j + 1,
                    self.gamma[j] as u8,
                    j + 1,
                    self.beta[j]
                )));
            }
            if self.omega[(j, j)].is_nan() || self.omega[(j, j)] <= 0.0 {
                return Err(Error::Invariant(format!("omega_{0}{0} = {1} is not positive", j + 1, self.omega[(j, j)])));
            }
            if self.graph.has_edge(j, j) {
                return Err(Error::Invariant(format!("G has a self-loop at {}", j + 1)));
            }
            for k in (j + 1)..p {
                if self.omega[(j, k)] != self.omega[(k, j)] {
                    return Err(Error::Invariant(format!("omega is asymmetric at ({}, {})", j + 1, k + 1)));
                }
                if self.graph.has_edge(j, k) != (self.omega[(j, k)] != 0.0) {
                    return Err(Error::Invariant(format!(
                        "G_{0}{1} = {2} but omega_{0}{1} = {3}",
                        j + 1,
                        k + 1,
                        self.graph.has_edge(j, k) as u8,
                        self.omega[(j, k)]
                    )));
                }
            }
        }
        if self.gamma.iter().filter(|&&g| g).count() != self.n_active {
            return Err(Error::Invariant("active-variable counter out of sync".into()));
        }
        if self.n_active >= hyper.variable_cap(p) {
            return Err(Error::Invariant(format!(
                "|gamma| = {} reaches the cap {}",
                self.n_active,
                hyper.variable_cap(p)
            )));
        }
        if self.graph.edge_count() >= hyper.edge_cap(p) {
            return Err(Error::Invariant(format!(
                "|G| = {} reaches the cap {}",
                self.graph.edge_count(),
                hyper.edge_cap(p)
            )));
        }
        for (i, (&zi, &yi)) in self.z.iter().zip(data.y()).enumerate() {
            if (zi >= 0.0) != yi {
                return Err(Error::Invariant(format!("z_{} = {zi} disagrees with y = {}", i + 1, yi as u8)));
            }
        }
        let fresh = self.recompute_omega_s(cov);
        let cached = self.omega_s_matrix();
        let scale = fresh.amax().max(1.0);
        let diff = (&fresh - &cached).amax();
        if diff > 1e-8 * scale {
            return Err(Error::Invariant(format!("Omega*S cache drifted by {diff:e}")));
        }
        let beta = nalgebra::DVector::from_column_slice(&self.beta);
        let xb = data.x() * beta;
        let scale = xb.amax().max(1.0);
        let diff = xb.iter().zip(&self.xb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff > 1e-8 * scale {
            return Err(Error::Invariant(format!("X*beta cache drifted by {diff:e}")));
        }
        Ok(())
    }
}

fn validate_warm_start(m: &DMatrix<f64>, p: usize) -> Result<()> {
    if m.shape() != (p, p) {
        return Err(Error::Dimension(format!(
            "warm-start precision is {}x{}, expected {p}x{p}",
            m.nrows(),
            m.ncols()
        )));
    }
    for j in 0..p {
        if m[(j, j)].is_nan() || m[(j, j)] <= 0.0 {
            return Err(Error::InvalidData(format!(
                "warm-start precision has non-positive diagonal at {}",
                j + 1
            )));
        }
        for k in (j + 1)..p {
            if (m[(j, k)] - m[(k, j)]).abs() > 1e-12 * (1.0 + m[(j, k)].abs()) {
                return Err(Error::InvalidData(format!(
                    "warm-start precision is not symmetric at ({}, {})",
                    j + 1,
                    k + 1
                )));
            }
        }
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidData("warm-start precision has non-finite entries".into()));
    }
    Ok(())
}

#[inline]
fn axpy_column(m: &mut DMatrix<f64>, col: usize, alpha: f64, x: &[f64]) {
    let p = m.nrows();
    let dst = &mut m.as_mut_slice()[col * p..(col + 1) * p];
    for (d, &v) in dst.iter_mut().zip(x) {
        *d += alpha * v;
    }
}

/// Posterior summaries accumulated over kept draws.
#[derive(Clone, Debug)]
pub struct PosteriorSummary {
    pub incl_prob_gamma: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub incl_prob_edge: DMatrix<f64>,
    pub mean_omega: DMatrix<f64>,
    /// Median probability model for variables.
    pub selected_gamma: Vec<bool>,
    /// Median probability model for edges.
    pub selected_graph: Graph,
    pub kept_draws: usize,
}

impl PosteriorSummary {
    /// Median probability model: inclusion probability strictly above 1/2.
    pub fn from_probabilities(
        incl_prob_gamma: Vec<f64>,
        incl_prob_edge: DMatrix<f64>,
        mean_omega: DMatrix<f64>,
        kept_draws: usize,
    ) -> Self {
        let p = incl_prob_gamma.len();
        let selected_gamma = incl_prob_gamma.iter().map(|&v| v > 0.5).collect();
        let mut selected_graph = Graph::empty(p);
        for j in 0..p {
            for k in (j + 1)..p {
                if incl_prob_edge[(j, k)] > 0.5 {
                    selected_graph.set(j, k, true);
                }
            }
        }
        Self {
            incl_prob_gamma,
            incl_prob_edge,
            mean_omega,
            selected_gamma,
            selected_graph,
            kept_draws,
        }
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        (0..self.selected_gamma.len()).filter(|&j| self.selected_gamma[j]).collect()
    }
}
