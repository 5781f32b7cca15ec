//! Joint Bayesian selection of predictors and of their conditional
//! dependence graph in high-dimensional probit regression.
//!
//! The model couples a spike-and-slab probit regression for a binary response
//! with a spike-and-slab prior on the precision matrix of the predictors. The
//! precision matrix enters through the CONCORD pseudo-likelihood, which is
//! quadratic in every entry, so all off-diagonal updates are conjugate. A
//! Markov random field prior on the variable indicators raises the inclusion
//! odds of predictors whose graph neighbours are already included.
//!
//! Module map:
//!
//! - [`kernels`]: seeded streams and elementary samplers.
//! - [`state`]: data containers, hyperparameters, chain state and caches.
//! - [`gibbs`]: conditional updates and the chain driver.
//! - [`probit`]: probit log-likelihood, score, information and MLE.
//! - [`bench`]: synthetic designs, selection metrics and replicate runs.
//! - [`oracle`]: exact enumeration of the posterior for tiny problems.
//!
//! ```
//! use joint_select::prelude::*;
//!
//! let config = SimConfig { p: Some(12), ..SimConfig::new(1, 1) };
//! let mut rng = RngHandle::new(3);
//! let sim = simulate_dataset(&config, &mut rng).unwrap();
//! let hyper = Hyperparams { burn_in: 100, n_keep: 100, ..Hyperparams::default() };
//! let (_, summary) = run_chain(&sim.data, &hyper, &ChainOptions::default(), None, &mut rng).unwrap();
//! assert_eq!(summary.incl_prob_gamma.len(), 12);
//! ```

pub mod bench;
pub mod error;
pub mod gibbs;
pub mod kernels;
pub mod normal;
pub mod oracle;
pub mod probit;
pub mod state;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bench::{
        graph_metrics, make_beta0, make_omega0, run_benchmark, simulate_dataset, variable_metrics, BenchmarkReport,
        CoefficientDesign, MetricsReport, PrecisionDesign, SimConfig, SimulatedData,
    };
    pub use crate::gibbs::{run_chain, Chain, ChainOptions, ChainTrace, ScanOrder};
    pub use crate::kernels::RngHandle;
    pub use crate::probit::{fit_probit_mle, ProbitFitResult};
    pub use crate::state::{Dataset, DiagUpdate, Graph, Hyperparams, ModelState, PosteriorSummary, SampleCov};
}
