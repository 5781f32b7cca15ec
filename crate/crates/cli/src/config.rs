//! Run configuration: flags, an optional `key = value` file, and defaults,
//! in that order of precedence.
//!
//! File keys are the long flag names without the leading dashes; `_` and
//! `-` are interchangeable. Blank lines and lines starting with `#` are
//! skipped.
//!
//! ```text
//! # scenario 2, weaker coupling
//! scenario = 2
//! b = 0.25
//! burn_in = 500
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use joint_select::bench::{CoefficientDesign, PrecisionDesign, SimConfig};
use joint_select::gibbs::ScanOrder;
use joint_select::state::{DiagUpdate, Hyperparams};
use serde_json::{json, Value};

use crate::error::{io_err, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiagChoice {
    Mode,
    Mh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanChoice {
    Fixed,
    Random,
}

/// Every configurable setting, each optional so that sources can be layered.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Coefficient setting (1-4).
    #[arg(long)]
    pub setting: Option<u8>,
    /// Precision scenario (1-4).
    #[arg(long)]
    pub scenario: Option<u8>,
    /// Training sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Test sample size.
    #[arg(long = "n-test")]
    pub n_test: Option<usize>,
    /// Number of predictors (defaults to the scenario's).
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of simulated replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// MRF size penalty.
    #[arg(long)]
    pub a: Option<f64>,
    /// MRF coupling.
    #[arg(long)]
    pub b: Option<f64>,
    /// Slab variance of the coefficients.
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Prior edge inclusion probability.
    #[arg(long)]
    pub q: Option<f64>,
    /// Gamma hyperprior shape.
    #[arg(long)]
    pub r: Option<f64>,
    /// Gamma hyperprior rate.
    #[arg(long)]
    pub s: Option<f64>,
    /// Strict cap on the number of edges.
    #[arg(long = "r1-cap")]
    pub r1_cap: Option<usize>,
    /// Strict cap on the number of selected variables.
    #[arg(long = "r2-cap")]
    pub r2_cap: Option<usize>,
    /// Burn-in sweeps.
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    /// Kept sweeps.
    #[arg(long)]
    pub keep: Option<usize>,
    /// Precision diagonal update.
    #[arg(long = "diag-update", value_enum)]
    pub diag_update: Option<DiagChoice>,
    /// Visiting order within a sweep.
    #[arg(long, value_enum)]
    pub scan: Option<ScanChoice>,
    /// Worker threads for replicate runs.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Headerless p×p CSV used as the initial precision matrix.
    #[arg(long = "warm-start-omega")]
    pub warm_start_omega: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Parser)]
#[command(no_binary_name = true, disable_help_flag = true)]
struct FileLine {
    #[command(flatten)]
    values: Overrides,
}

macro_rules! layer {
    ($hi:expr, $lo:expr, $($field:ident),+) => {
        Overrides { $($field: $hi.$field.or($lo.$field)),+ }
    };
}

impl Overrides {
    /// Values from `self`, falling back to `lower` where unset.
    pub fn over(self, lower: Overrides) -> Overrides {
        layer!(
            self, lower, seed, setting, scenario, n, n_test, p, replicates, a, b, tau2, q, r, s, r1_cap, r2_cap,
            burn_in, keep, diag_update, scan, threads, warm_start_omega, out
        )
    }

    /// Parse a `key = value` file.
    pub fn from_file(path: &Path) -> Result<Overrides> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse_str(&text, path)
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Overrides> {
        let mut acc = Overrides::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let err = |message: String| CliError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            if key == "config" {
                return Err(err("config files cannot include other config files".into()));
            }
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let flag = format!("--{key}");
            let parsed = FileLine::try_parse_from([flag.as_str(), value]).map_err(|e| {
                let msg = match e.kind() {
                    clap::error::ErrorKind::UnknownArgument => format!("unknown key `{key}`"),
                    _ => format!("invalid value for `{key}`: {}", first_line(&e.to_string())),
                };
                err(msg)
            })?;
            seen.push(key);
            acc = parsed.values.over(acc);
        }
        Ok(acc)
    }
}

fn first_line(s: &str) -> String {
    let line = s.lines().next().unwrap_or_default();
    line.strip_prefix("error: ").unwrap_or(line).to_string()
}

/// A fully resolved and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub sim: SimConfig,
    pub hyper: Hyperparams,
    pub scan: ScanOrder,
    pub threads: usize,
    pub warm_start_omega: Option<PathBuf>,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 1;

impl RunConfig {
    /// Layer `flags` over the file named by `config` (if any) over defaults.
    pub fn load(flags: Overrides, config: Option<&Path>) -> Result<RunConfig> {
        let file = match config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        Self::resolve(flags.over(file))
    }

    pub fn resolve(o: Overrides) -> Result<RunConfig> {
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let defaults = SimConfig::new(o.setting.unwrap_or(1), o.scenario.unwrap_or(1));
        let sim = SimConfig {
            p: o.p,
            n: o.n.unwrap_or(defaults.n),
            n_test: o.n_test.unwrap_or(defaults.n_test),
            seed,
            replicates: o.replicates.unwrap_or(defaults.replicates),
            ..defaults
        };
        sim.validate().map_err(config_err)?;
        let d = Hyperparams::default();
        let hyper = Hyperparams {
            a: o.a.unwrap_or(d.a),
            b: o.b.unwrap_or(d.b),
            tau2: o.tau2.unwrap_or(d.tau2),
            q: o.q.unwrap_or(d.q),
            r: o.r.unwrap_or(d.r),
            s: o.s.unwrap_or(d.s),
            r1_cap: o.r1_cap.or(d.r1_cap),
            r2_cap: o.r2_cap.or(d.r2_cap),
            burn_in: o.burn_in.unwrap_or(d.burn_in),
            n_keep: o.keep.unwrap_or(d.n_keep),
            diag_update: match o.diag_update {
                None => d.diag_update,
                Some(DiagChoice::Mode) => DiagUpdate::Mode,
                Some(DiagChoice::Mh) => DiagUpdate::Metropolis,
            },
        };
        hyper.validate().map_err(config_err)?;
        let threads = o.threads.unwrap_or(1);
        if threads == 0 {
            return Err(CliError::Config("`threads` must be a positive integer".into()));
        }
        Ok(RunConfig {
            seed,
            sim,
            hyper,
            scan: match o.scan {
                Some(ScanChoice::Random) => ScanOrder::Random,
                _ => ScanOrder::Fixed,
            },
            threads,
            warm_start_omega: o.warm_start_omega,
            out: o.out.unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    /// Sampler settings as JSON: seed, hyperparameters and scan options.
    pub fn echo_model(&self) -> Value {
        let h = &self.hyper;
        json!({
            "seed": self.seed,
            "a": h.a,
            "b": h.b,
            "tau2": h.tau2,
            "q": h.q,
            "r": h.r,
            "s": h.s,
            "r1_cap": h.r1_cap,
            "r2_cap": h.r2_cap,
            "burn_in": h.burn_in,
            "keep": h.n_keep,
            "diag_update": match h.diag_update {
                DiagUpdate::Mode => "mode",
                DiagUpdate::Metropolis => "mh",
            },
            "scan": match self.scan {
                ScanOrder::Fixed => "fixed",
                ScanOrder::Random => "random",
            },
            "warm_start_omega": self.warm_start_omega.as_ref().map(|p| p.display().to_string()),
        })
    }

    /// Simulation design as JSON.
    pub fn echo_design(&self) -> Value {
        let setting = match self.sim.coefficients {
            CoefficientDesign::Setting(s) => json!(s),
            CoefficientDesign::Zero => json!("zero"),
        };
        let scenario = match self.sim.precision {
            PrecisionDesign::Scenario(s) => json!(s),
            PrecisionDesign::Identity => json!("identity"),
        };
        json!({
            "seed": self.seed,
            "setting": setting,
            "scenario": scenario,
            "n": self.sim.n,
            "n_test": self.sim.n_test,
            "p": self.sim.dim(),
            "replicates": self.sim.replicates,
        })
    }

    /// The whole resolved configuration. The output directory and thread
    /// count are left out: neither affects results.
    pub fn echo(&self) -> Value {
        let mut v = self.echo_model();
        let obj = v.as_object_mut().expect("object");
        if let Value::Object(design) = self.echo_design() {
            obj.extend(design);
        }
        v
    }
}

fn config_err(e: joint_select::Error) -> CliError {
    CliError::Config(e.to_string())
}
