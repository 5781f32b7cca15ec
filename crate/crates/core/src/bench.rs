//! Synthetic designs, selection and estimation metrics, and multi-replicate
//! benchmark runs.
//!
//! The designs put the signal on the first ten predictors. Coefficient
//! settings:
//!
//! | setting | nonzero `β₀` entries |
//! |---------|----------------------|
//! | 1       | all `3`              |
//! | 2       | `Unif(1.5, 3)`       |
//! | 3       | all `1.5`            |
//! | 4       | `Unif(0.5, 1.5)`     |
//!
//! Precision scenarios (unit diagonal throughout):
//!
//! | scenario | off-diagonal structure                          | default `p` |
//! |----------|--------------------------------------------------|-------------|
//! | 1        | hub: `ω_1i = 0.3` for `i = 2..10`                | 150         |
//! | 2        | band: `ω_i,i+1 = 0.3`                            | 150         |
//! | 3        | band: `ω_i,i+1 = 0.5`, `ω_i,i+2 = 0.25`          | 150         |
//! | 4        | hub as scenario 1                                | 300         |

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gibbs::{run_chain, ChainOptions};
use crate::kernels::{sample_std_normal, CholeskyFactor, RngHandle};
use crate::normal;
use crate::probit::{fit_probit_mle, ProbitFitResult};
use crate::state::{Dataset, Graph, Hyperparams, PosteriorSummary};

/// Number of truly active predictors in every design.
pub const ACTIVE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientDesign {
    Setting(u8),
    /// `β₀ = 0`.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionDesign {
    Scenario(u8),
    /// `Ω₀ = I`.
    Identity,
}

impl PrecisionDesign {
    pub fn default_dim(self) -> usize {
        match self {
            PrecisionDesign::Scenario(4) => 300,
            _ => 150,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub coefficients: CoefficientDesign,
    pub precision: PrecisionDesign,
    /// Overrides the scenario's dimension.
    pub p: Option<usize>,
    pub n: usize,
    pub n_test: usize,
    pub seed: u64,
    pub replicates: usize,
}

impl SimConfig {
    pub fn new(setting: u8, scenario: u8) -> Self {
        Self {
            coefficients: CoefficientDesign::Setting(setting),
            precision: PrecisionDesign::Scenario(scenario),
            p: None,
            n: 100,
            n_test: 50,
            seed: 1,
            replicates: 20,
        }
    }

    pub fn dim(&self) -> usize {
        self.p.unwrap_or_else(|| self.precision.default_dim())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidHyperparameter { field, reason });
        if let CoefficientDesign::Setting(s) = self.coefficients {
            if !(1..=4).contains(&s) {
                return bad("setting", format!("must be 1-4, got {s}"));
            }
        }
        if let PrecisionDesign::Scenario(s) = self.precision {
            if !(1..=4).contains(&s) {
                return bad("scenario", format!("must be 1-4, got {s}"));
            }
        }
        if self.dim() < 2 {
            return bad("p", format!("must be at least 2, got {}", self.dim()));
        }
        if self.n == 0 {
            return bad("n", "must be positive".into());
        }
        if self.n_test == 0 {
            return bad("n_test", "must be positive".into());
        }
        if self.replicates == 0 {
            return bad("replicates", "must be positive".into());
        }
        Ok(())
    }
}

/// True coefficient vector: the first `min(10, p)` entries per the design,
/// the rest zero.
pub fn make_beta0<R: Rng + ?Sized>(design: CoefficientDesign, p: usize, rng: &mut R) -> Result<Vec<f64>> {
    let mut beta = vec![0.0; p];
    let active = ACTIVE.min(p);
    match design {
        CoefficientDesign::Zero => {}
        CoefficientDesign::Setting(1) => beta[..active].fill(3.0),
        CoefficientDesign::Setting(2) => beta[..active].iter_mut().for_each(|b| *b = rng.random_range(1.5..=3.0)),
        CoefficientDesign::Setting(3) => beta[..active].fill(1.5),
        CoefficientDesign::Setting(4) => beta[..active].iter_mut().for_each(|b| *b = rng.random_range(0.5..=1.5)),
        CoefficientDesign::Setting(s) => {
            return Err(Error::InvalidHyperparameter {
                field: "setting",
                reason: format!("must be 1-4, got {s}"),
            })
        }
    }
    Ok(beta)
}

/// True precision matrix for a scenario at dimension `p`.
pub fn make_omega0(design: PrecisionDesign, p: usize) -> Result<DMatrix<f64>> {
    let mut om = DMatrix::identity(p, p);
    let mut put = |i: usize, j: usize, v: f64| {
        om[(i, j)] = v;
        om[(j, i)] = v;
    };
    match design {
        PrecisionDesign::Identity => {}
        PrecisionDesign::Scenario(1) | PrecisionDesign::Scenario(4) => {
            for i in 1..ACTIVE.min(p) {
                put(0, i, 0.3);
            }
        }
        PrecisionDesign::Scenario(2) => {
            for i in 0..p - 1 {
                put(i, i + 1, 0.3);
            }
        }
        PrecisionDesign::Scenario(3) => {
            for i in 0..p - 1 {
                put(i, i + 1, 0.5);
            }
            for i in 0..p.saturating_sub(2) {
                put(i, i + 2, 0.25);
            }
        }
        PrecisionDesign::Scenario(s) => {
            return Err(Error::InvalidHyperparameter {
                field: "scenario",
                reason: format!("must be 1-4, got {s}"),
            })
        }
    }
    if nalgebra::Cholesky::new(om.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(om)
}

/// Ground truth behind a simulated dataset.
#[derive(Clone, Debug)]
pub struct Truth {
    pub beta0: Vec<f64>,
    pub omega0: DMatrix<f64>,
    pub gamma0: Vec<bool>,
    pub graph0: Graph,
}

impl Truth {
    pub fn new(beta0: Vec<f64>, omega0: DMatrix<f64>) -> Result<Self> {
        let p = beta0.len();
        if omega0.shape() != (p, p) {
            return Err(Error::Dimension(format!(
                "beta0 has length {p} but omega0 is {}x{}",
                omega0.nrows(),
                omega0.ncols()
            )));
        }
        let gamma0 = beta0.iter().map(|&b| b != 0.0).collect();
        let mut graph0 = Graph::empty(p);
        for j in 0..p {
            for k in (j + 1)..p {
                if omega0[(j, k)] != 0.0 {
                    graph0.set(j, k, true);
                }
            }
        }
        Ok(Self {
            beta0,
            omega0,
            gamma0,
            graph0,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimulatedData {
    /// Training data with the test split attached.
    pub data: Dataset,
    pub truth: Truth,
}

/// Precomputed per-configuration quantities: `Ω₀` and a Cholesky factor of
/// `Σ₀ = Ω₀⁻¹`.
#[derive(Clone, Debug)]
pub struct Design {
    config: SimConfig,
    omega0: DMatrix<f64>,
    sigma_factor: CholeskyFactor,
}

impl Design {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let p = config.dim();
        let omega0 = make_omega0(config.precision, p)?;
        let sigma0 = nalgebra::Cholesky::new(omega0.clone())
            .ok_or(Error::NotPositiveDefinite)?
            .inverse();
        let sigma_factor = CholeskyFactor::of_covariance(&symmetrized(&sigma0))?;
        Ok(Self {
            config: config.clone(),
            omega0,
            sigma_factor,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn omega0(&self) -> &DMatrix<f64> {
        &self.omega0
    }

    /// `Σ₀`, reconstructed from its factor.
    pub fn sigma0(&self) -> DMatrix<f64> {
        let l = self.sigma_factor.lower();
        l * l.transpose()
    }

    /// Draw `rows` predictor vectors from `N(0, Σ₀)`.
    pub fn draw_predictors<R: Rng + ?Sized>(&self, rows: usize, rng: &mut R) -> DMatrix<f64> {
        let p = self.sigma_factor.dim();
        let mut x = DMatrix::zeros(rows, p);
        for i in 0..rows {
            let xi = self.sigma_factor.sample(rng);
            for j in 0..p {
                x[(i, j)] = xi[j];
            }
        }
        x
    }

    /// `y_i = 1{x_iᵀβ₀ + ε_i ≥ 0}`.
    pub fn draw_responses<R: Rng + ?Sized>(&self, x: &DMatrix<f64>, beta0: &[f64], rng: &mut R) -> Vec<bool> {
        (0..x.nrows())
            .map(|i| {
                let eta: f64 = (0..x.ncols()).map(|j| x[(i, j)] * beta0[j]).sum();
                eta + sample_std_normal(rng) >= 0.0
            })
            .collect()
    }

    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimulatedData> {
        let p = self.config.dim();
        let beta0 = make_beta0(self.config.coefficients, p, rng)?;
        let x = self.draw_predictors(self.config.n, rng);
        let y = self.draw_responses(&x, &beta0, rng);
        let x_test = self.draw_predictors(self.config.n_test, rng);
        let y_test = self.draw_responses(&x_test, &beta0, rng);
        let data = Dataset::new(x, y)?.with_test(x_test, y_test)?;
        let truth = Truth::new(beta0, self.omega0.clone())?;
        Ok(SimulatedData { data, truth })
    }
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Draw one training/test dataset for `config`.
pub fn simulate_dataset<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<SimulatedData> {
    Design::new(config)?.simulate(rng)
}

/// Binary confusion counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(selected: impl IntoIterator<Item = bool>, truth: impl IntoIterator<Item = bool>) -> Self {
        let mut c = Self::default();
        for (s, t) in selected.into_iter().zip(truth) {
            match (s, t) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    /// `TP/(TP+FN)`; 1 when there are no true positives to find.
    pub fn sensitivity(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.fn_)
    }

    /// `TN/(TN+FP)`; 1 when there are no true negatives.
    pub fn specificity(&self) -> f64 {
        ratio_or_one(self.tn, self.tn + self.fp)
    }

    /// Matthews correlation; 0 when any marginal is empty.
    pub fn mcc(&self) -> f64 {
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            0.0
        } else {
            (tp * tn - fp * fn_) / denom.sqrt()
        }
    }

    pub fn errors(&self) -> usize {
        self.fp + self.fn_
    }
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariableMetrics {
    pub counts: Confusion,
    pub sensitivity: f64,
    pub specificity: f64,
    pub mcc: f64,
    /// Mean squared error of `Φ(x_testᵀβ̂)` against held-out responses.
    pub mspe: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphMetrics {
    pub counts: Confusion,
    pub sensitivity: f64,
    pub specificity: f64,
    pub mcc: f64,
    /// `FP + FN` over upper-triangular pairs.
    pub n_error: usize,
    /// Relative error in the matrix ℓ1 norm (max column sum).
    pub e1: f64,
    /// Relative error in the spectral norm.
    pub e2: f64,
    /// Relative error in the Frobenius norm.
    pub e3: f64,
    /// Relative error in the entrywise max norm.
    pub e4: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub variable: VariableMetrics,
    pub graph: GraphMetrics,
}

/// Variable-selection metrics. `beta_hat` has full length `p`.
pub fn variable_metrics(
    selected: &[bool],
    gamma0: &[bool],
    beta_hat: &[f64],
    test: Option<(&DMatrix<f64>, &[bool])>,
) -> Result<VariableMetrics> {
    if selected.len() != gamma0.len() || beta_hat.len() != gamma0.len() {
        return Err(Error::Dimension(format!(
            "selection has length {}, truth {}, coefficients {}",
            selected.len(),
            gamma0.len(),
            beta_hat.len()
        )));
    }
    let counts = Confusion::tally(selected.iter().copied(), gamma0.iter().copied());
    let mspe = match test {
        None => None,
        Some((x, y)) => {
            if x.ncols() != beta_hat.len() || x.nrows() != y.len() {
                return Err(Error::Dimension(format!(
                    "test split is {}x{} with {} responses; coefficients have length {}",
                    x.nrows(),
                    x.ncols(),
                    y.len(),
                    beta_hat.len()
                )));
            }
            Some(mspe(x, y, beta_hat))
        }
    };
    Ok(VariableMetrics {
        counts,
        sensitivity: counts.sensitivity(),
        specificity: counts.specificity(),
        mcc: counts.mcc(),
        mspe,
    })
}

pub fn mspe(x: &DMatrix<f64>, y: &[bool], beta_hat: &[f64]) -> f64 {
    let probs = crate::probit::predict_probabilities(x, beta_hat);
    let n = y.len() as f64;
    probs
        .iter()
        .zip(y)
        .map(|(&pr, &yi)| (pr - if yi { 1.0 } else { 0.0 }).powi(2))
        .sum::<f64>()
        / n
}

/// Graph-selection counts over `j < k` and relative estimation errors of
/// `omega_hat` against `omega0`.
pub fn graph_metrics(
    selected: &Graph,
    graph0: &Graph,
    omega_hat: &DMatrix<f64>,
    omega0: &DMatrix<f64>,
) -> Result<GraphMetrics> {
    let p = graph0.dim();
    if selected.dim() != p || omega_hat.shape() != (p, p) || omega0.shape() != (p, p) {
        return Err(Error::Dimension(format!(
            "graph dimensions {} vs {}, estimate {}x{}, truth {}x{}",
            selected.dim(),
            p,
            omega_hat.nrows(),
            omega_hat.ncols(),
            omega0.nrows(),
            omega0.ncols()
        )));
    }
    let pairs = || (0..p).flat_map(move |j| ((j + 1)..p).map(move |k| (j, k)));
    let counts = Confusion::tally(
        pairs().map(|(j, k)| selected.has_edge(j, k)),
        pairs().map(|(j, k)| graph0.has_edge(j, k)),
    );
    let diff = omega0 - omega_hat;
    Ok(GraphMetrics {
        counts,
        sensitivity: counts.sensitivity(),
        specificity: counts.specificity(),
        mcc: counts.mcc(),
        n_error: counts.errors(),
        e1: matrix_l1_norm(&diff) / matrix_l1_norm(omega0),
        e2: spectral_norm(&diff) / spectral_norm(omega0),
        e3: diff.norm() / omega0.norm(),
        e4: diff.amax() / omega0.amax(),
    })
}

/// Maximum absolute column sum.
pub fn matrix_l1_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value. Symmetric input goes through the symmetric
/// eigensolver, anything else through an SVD.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let symmetric = m.is_square() && (m - m.transpose()).amax() <= 1e-14 * m.amax().max(1.0);
    if symmetric {
        m.clone().symmetric_eigenvalues().amax()
    } else {
        m.clone().singular_values().max()
    }
}

/// Largest singular value by power iteration on `MᵀM`, stopping once the
/// relative change drops below `tol`.
pub fn spectral_norm_power(m: &DMatrix<f64>, tol: f64) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mtm = m.tr_mul(m);
    // deterministic start with full support
    let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_7).fract());
    v.normalize_mut();
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let w = &mtm * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w / norm;
        if (next - estimate).abs() <= tol * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Outcome of one simulated replicate.
#[derive(Clone, Debug)]
pub struct ReplicateOutcome {
    pub index: usize,
    pub metrics: MetricsReport,
    pub selected_variables: usize,
    pub selected_edges: usize,
    pub fit: ProbitFitResult,
    pub mean_sweep_seconds: f64,
}

/// Fit the chain to one simulated dataset, refit the probit on the selected
/// support, and score against the truth.
pub fn fit_and_evaluate<R: Rng + ?Sized>(
    sim: &SimulatedData,
    hyper: &Hyperparams,
    options: &ChainOptions,
    index: usize,
    rng: &mut R,
) -> Result<ReplicateOutcome> {
    let (trace, summary) = run_chain(&sim.data, hyper, options, None, rng)?;
    let mean_sweep_seconds = trace.sweep_seconds.iter().sum::<f64>() / trace.sweep_seconds.len().max(1) as f64;
    let fit = refit(&sim.data, &summary)?;
    let metrics = evaluate(&sim.data, &sim.truth, &summary, &fit)?;
    Ok(ReplicateOutcome {
        index,
        metrics,
        selected_variables: summary.selected_indices().len(),
        selected_edges: summary.selected_graph.edge_count(),
        fit,
        mean_sweep_seconds,
    })
}

/// Probit MLE on the median-probability support.
pub fn refit(data: &Dataset, summary: &PosteriorSummary) -> Result<ProbitFitResult> {
    fit_probit_mle(data.x(), data.y(), &summary.selected_indices())
}

pub fn evaluate(data: &Dataset, truth: &Truth, summary: &PosteriorSummary, fit: &ProbitFitResult) -> Result<MetricsReport> {
    let p = data.p();
    let beta_hat = fit.full_beta(p);
    let test = data.test().map(|t| (&t.x, t.y.as_slice()));
    let variable = variable_metrics(&summary.selected_gamma, &truth.gamma0, &beta_hat, test)?;
    let graph = graph_metrics(&summary.selected_graph, &truth.graph0, &summary.mean_omega, &truth.omega0)?;
    Ok(MetricsReport { variable, graph })
}

/// Mean and standard error of one metric across replicates.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricStat {
    pub name: &'static str,
    pub mean: f64,
    pub se: f64,
}

#[derive(Clone, Debug)]
pub struct BenchmarkReport {
    pub config: SimConfig,
    pub hyper: Hyperparams,
    pub replicates: Vec<ReplicateOutcome>,
}

pub const VARIABLE_COLUMNS: [&str; 4] = ["sensitivity", "specificity", "mcc", "mspe"];
pub const GRAPH_COLUMNS: [&str; 8] = ["sensitivity", "specificity", "mcc", "n_error", "e1", "e2", "e3", "e4"];

impl BenchmarkReport {
    fn stat(&self, name: &'static str, f: impl Fn(&MetricsReport) -> f64) -> MetricStat {
        let xs: Vec<f64> = self.replicates.iter().map(|r| f(&r.metrics)).collect();
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let se = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        } else {
            0.0
        };
        MetricStat { name, mean, se }
    }

    /// Replicate-averaged variable-selection metrics, in [`VARIABLE_COLUMNS`] order.
    pub fn variable_summary(&self) -> Vec<MetricStat> {
        vec![
            self.stat("sensitivity", |m| m.variable.sensitivity),
            self.stat("specificity", |m| m.variable.specificity),
            self.stat("mcc", |m| m.variable.mcc),
            self.stat("mspe", |m| m.variable.mspe.unwrap_or(f64::NAN)),
        ]
    }

    /// Replicate-averaged graph metrics, in [`GRAPH_COLUMNS`] order.
    pub fn graph_summary(&self) -> Vec<MetricStat> {
        vec![
            self.stat("sensitivity", |m| m.graph.sensitivity),
            self.stat("specificity", |m| m.graph.specificity),
            self.stat("mcc", |m| m.graph.mcc),
            self.stat("n_error", |m| m.graph.n_error as f64),
            self.stat("e1", |m| m.graph.e1),
            self.stat("e2", |m| m.graph.e2),
            self.stat("e3", |m| m.graph.e3),
            self.stat("e4", |m| m.graph.e4),
        ]
    }

    pub fn mean_selected_variables(&self) -> f64 {
        self.replicates.iter().map(|r| r.selected_variables as f64).sum::<f64>() / self.replicates.len() as f64
    }
}

/// Run `config.replicates` independent (data, chain) pairs. Replicate `i`
/// draws everything from substream `i` of `config.seed`, so results do not
/// depend on `threads` or scheduling.
pub fn run_benchmark(
    config: &SimConfig,
    hyper: &Hyperparams,
    options: &ChainOptions,
    threads: usize,
) -> Result<BenchmarkReport> {
    let design = Design::new(config)?;
    hyper.validate()?;
    let one = |i: usize| -> Result<ReplicateOutcome> {
        let mut rng = RngHandle::substream(config.seed, i as u64);
        let sim = design.simulate(&mut rng)?;
        let out = fit_and_evaluate(&sim, hyper, options, i, &mut rng)?;
        log::info!(
            "replicate {}/{}: {} variables, {} edges selected",
            i + 1,
            config.replicates,
            out.selected_variables,
            out.selected_edges
        );
        Ok(out)
    };
    let mut replicates: Vec<ReplicateOutcome> = if threads <= 1 {
        (0..config.replicates).map(one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidHyperparameter {
                field: "threads",
                reason: e.to_string(),
            })?;
        pool.install(|| (0..config.replicates).into_par_iter().map(one).collect::<Result<_>>())?
    };
    replicates.sort_by_key(|r| r.index);
    Ok(BenchmarkReport {
        config: config.clone(),
        hyper: hyper.clone(),
        replicates,
    })
}

/// Run replicate `index` of `config` alone; identical to the corresponding
/// entry of [`run_benchmark`].
pub fn run_replicate(config: &SimConfig, hyper: &Hyperparams, options: &ChainOptions, index: usize) -> Result<ReplicateOutcome> {
    let design = Design::new(config)?;
    let mut rng = RngHandle::substream(config.seed, index as u64);
    let sim = design.simulate(&mut rng)?;
    fit_and_evaluate(&sim, hyper, options, index, &mut rng)
}

/// `Φ` re-exported for callers computing predictions by hand.
pub fn std_normal_cdf(x: f64) -> f64 {
    normal::cdf(x)
}
