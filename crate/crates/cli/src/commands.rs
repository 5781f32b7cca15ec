//! The four subcommands. Every file they write embeds the seed and resolved
//! configuration, except the headerless CSVs, whose provenance is recorded
//! in the accompanying `manifest.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use joint_select::bench::{self, BenchmarkReport, Design, MetricStat, MetricsReport, ReplicateOutcome};
use joint_select::gibbs::{Chain, ChainOptions, ChainTrace};
use joint_select::kernels::RngHandle;
use joint_select::probit::{fit_probit_mle, ProbitFitResult};
use joint_select::state::{Dataset, Graph, PosteriorSummary};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{io_err, CliError, Result};
use crate::io;

/// Version tag written into every JSON output.
pub const FORMAT_VERSION: u32 = 1;

/// Stream reserved for chains started by `fit`, so that fitting data
/// simulated from the same seed does not reuse the simulation's draws.
pub const FIT_STREAM: u64 = u64::MAX;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// `simulate`: one training/test draw and its ground truth.
pub fn simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    ensure_dir(&cfg.out)?;
    let design = Design::new(&cfg.sim)?;
    let mut rng = RngHandle::substream(cfg.seed, 0);
    let sim = design.simulate(&mut rng)?;
    let test = sim.data.test().expect("simulated data carries a test split");
    let files = [
        "X.csv",
        "y.csv",
        "X_test.csv",
        "y_test.csv",
        "beta0.csv",
        "omega0.csv",
        "manifest.json",
    ];
    let path = |name: &str| cfg.out.join(name);
    io::write_matrix(&path(files[0]), sim.data.x())?;
    io::write_binary(&path(files[1]), sim.data.y())?;
    io::write_matrix(&path(files[2]), &test.x)?;
    io::write_binary(&path(files[3]), &test.y)?;
    io::write_vector(&path(files[4]), &sim.truth.beta0)?;
    io::write_matrix(&path(files[5]), &sim.truth.omega0)?;
    let active: Vec<usize> = (0..sim.truth.beta0.len()).filter(|&j| sim.truth.gamma0[j]).map(|j| j + 1).collect();
    let manifest = json!({
        "format_version": FORMAT_VERSION,
        "kind": "simulation",
        "seed": cfg.seed,
        "config": cfg.echo_design(),
        "files": &files[..6],
        "truth": {
            "active_variables": active,
            "edges": sim.truth.graph0.edge_count(),
        },
    });
    io::write_json(&path(files[6]), &manifest)?;
    Ok(files.iter().map(|f| path(f)).collect())
}

/// Inputs to `fit`.
#[derive(Clone, Debug)]
pub struct FitInputs {
    pub x: PathBuf,
    pub y: PathBuf,
    /// First row of the X file holds column names.
    pub header: bool,
    /// Also write every kept draw's support to `trace.csv`.
    pub trace: bool,
}

/// `fit`: run the chain, refit the probit on the selected support, write
/// `results.json` (deterministic) and `timing.json` (wall clock).
pub fn fit(cfg: &RunConfig, inputs: &FitInputs) -> Result<PathBuf> {
    let (x, names) = io::read_matrix(&inputs.x, inputs.header)?;
    let y = io::read_binary(&inputs.y)?;
    if x.nrows() != y.len() {
        return Err(CliError::Format {
            path: inputs.y.clone(),
            message: format!("{} responses for {} rows of X", y.len(), x.nrows()),
        });
    }
    let data = Dataset::new(x, y)?;
    let warm = match &cfg.warm_start_omega {
        Some(path) => Some(io::read_matrix(path, false)?.0),
        None => None,
    };
    ensure_dir(&cfg.out)?;
    let options = ChainOptions {
        scan: cfg.scan,
        ..ChainOptions::default()
    };
    let mut rng = RngHandle::substream(cfg.seed, FIT_STREAM);
    let mut chain = Chain::new(&data, cfg.hyper.clone(), options, warm.as_ref(), &mut rng)?;
    let (trace, summary) = chain.run(&mut rng)?;
    let fit = fit_probit_mle(data.x(), data.y(), &summary.selected_indices())?;

    let results = results_json(cfg, inputs, names.as_deref(), &data, &summary, &fit);
    let path = cfg.out.join("results.json");
    io::write_json(&path, &results)?;
    io::write_json(&cfg.out.join("timing.json"), &timing_json(cfg, &trace))?;
    if inputs.trace {
        write_trace(&cfg.out.join("trace.csv"), &trace)?;
    }
    Ok(path)
}

fn results_json(
    cfg: &RunConfig,
    inputs: &FitInputs,
    names: Option<&[String]>,
    data: &Dataset,
    summary: &PosteriorSummary,
    fit: &ProbitFitResult,
) -> Value {
    let p = data.p();
    let mut edge_probs = Vec::new();
    let mut omega_off = Vec::new();
    for j in 0..p {
        for k in (j + 1)..p {
            let prob = summary.incl_prob_edge[(j, k)];
            if prob > 0.0 {
                edge_probs.push(json!({"j": j + 1, "k": k + 1, "prob": prob}));
            }
            let w = summary.mean_omega[(j, k)];
            if w != 0.0 {
                omega_off.push(json!({"j": j + 1, "k": k + 1, "value": w}));
            }
        }
    }
    let selected: Vec<usize> = summary.selected_indices().iter().map(|j| j + 1).collect();
    let edges: Vec<[usize; 2]> = summary.selected_graph.edges().map(|(j, k)| [j + 1, k + 1]).collect();
    json!({
        "format_version": FORMAT_VERSION,
        "kind": "fit",
        "seed": cfg.seed,
        "config": cfg.echo_model(),
        "inputs": {
            "x": inputs.x.display().to_string(),
            "y": inputs.y.display().to_string(),
            "header": inputs.header,
        },
        "n": data.n(),
        "p": p,
        "variable_names": names,
        "kept_draws": summary.kept_draws,
        "inclusion_prob": summary.incl_prob_gamma,
        "edge_inclusion_prob": edge_probs,
        "selected_variables": selected,
        "selected_edges": edges,
        "omega_mean": {
            "diagonal": summary.mean_omega.diagonal().iter().copied().collect::<Vec<f64>>(),
            "offdiagonal": omega_off,
        },
        "beta_hat": {
            "support": fit.support.iter().map(|j| j + 1).collect::<Vec<_>>(),
            "values": fit.beta_hat,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "ridge": fit.ridge_used,
            "separation": fit.separation,
        },
        "timing_file": "timing.json",
    })
}

fn timing_json(cfg: &RunConfig, trace: &ChainTrace) -> Value {
    let mut secs = trace.sweep_seconds.clone();
    secs.sort_by(f64::total_cmp);
    let k = secs.len().max(1) as f64;
    let mean = secs.iter().sum::<f64>() / k;
    let sd = (secs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0)).sqrt();
    let quantile = |q: f64| secs.get(((secs.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0.0);
    json!({
        "format_version": FORMAT_VERSION,
        "seed": cfg.seed,
        "config": cfg.echo_model(),
        "sweeps": secs.len(),
        "total_seconds": secs.iter().sum::<f64>(),
        "per_sweep_seconds": {
            "mean": mean,
            "sd": sd,
            "min": secs.first().copied().unwrap_or(0.0),
            "median": quantile(0.5),
            "p95": quantile(0.95),
            "max": secs.last().copied().unwrap_or(0.0),
        },
    })
}

fn write_trace(path: &Path, trace: &ChainTrace) -> Result<()> {
    let mut text = String::from("iteration,n_variables,n_edges,variables\n");
    for r in &trace.records {
        let vars: Vec<String> = r.gamma.iter().map(|j| (j + 1).to_string()).collect();
        let _ = writeln!(text, "{},{},{},{}", r.iteration + 1, r.gamma.len(), r.edges.len(), vars.join(" "));
    }
    std::fs::write(path, text).map_err(io_err(path))
}

/// Inputs to `evaluate`.
#[derive(Clone, Debug)]
pub struct EvaluateInputs {
    pub results: PathBuf,
    pub beta0: PathBuf,
    pub omega0: PathBuf,
    pub x_test: Option<PathBuf>,
    pub y_test: Option<PathBuf>,
}

impl EvaluateInputs {
    /// Truth and test files at their `simulate` names inside `dir`.
    pub fn from_dir(results: PathBuf, dir: &Path) -> Self {
        Self {
            results,
            beta0: dir.join("beta0.csv"),
            omega0: dir.join("omega0.csv"),
            x_test: Some(dir.join("X_test.csv")),
            y_test: Some(dir.join("y_test.csv")),
        }
    }
}

/// Posterior output read back from `results.json`.
#[derive(Clone, Debug)]
pub struct FitOutput {
    pub seed: Value,
    pub config: Value,
    pub p: usize,
    pub selected_gamma: Vec<bool>,
    pub selected_graph: Graph,
    pub omega_mean: DMatrix<f64>,
    pub beta_hat: Vec<f64>,
}

fn field<'a>(v: &'a Value, key: &str, path: &Path) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| CliError::Format {
        path: path.to_path_buf(),
        message: format!("missing field `{key}`"),
    })
}

fn as_index(v: &Value, p: usize, path: &Path) -> Result<usize> {
    match v.as_u64() {
        Some(i) if i >= 1 && (i as usize) <= p => Ok(i as usize - 1),
        _ => Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("index {v} is outside 1..={p}"),
        }),
    }
}

fn as_f64(v: &Value, path: &Path) -> Result<f64> {
    v.as_f64().ok_or_else(|| CliError::Format {
        path: path.to_path_buf(),
        message: format!("expected a number, got {v}"),
    })
}

fn as_array<'a>(v: &'a Value, key: &str, path: &Path) -> Result<&'a Vec<Value>> {
    field(v, key, path)?.as_array().ok_or_else(|| CliError::Format {
        path: path.to_path_buf(),
        message: format!("`{key}` must be an array"),
    })
}

impl FitOutput {
    pub fn read(path: &Path) -> Result<Self> {
        let v = io::read_json(path)?;
        let p = field(&v, "p", path)?.as_u64().ok_or_else(|| CliError::Format {
            path: path.to_path_buf(),
            message: "`p` must be a positive integer".into(),
        })? as usize;
        let mut selected_gamma = vec![false; p];
        for j in as_array(&v, "selected_variables", path)? {
            selected_gamma[as_index(j, p, path)?] = true;
        }
        let mut selected_graph = Graph::empty(p);
        for e in as_array(&v, "selected_edges", path)? {
            let pair = e.as_array().filter(|a| a.len() == 2).ok_or_else(|| CliError::Format {
                path: path.to_path_buf(),
                message: format!("edge {e} is not a [j, k] pair"),
            })?;
            let (j, k) = (as_index(&pair[0], p, path)?, as_index(&pair[1], p, path)?);
            if j == k {
                return Err(CliError::Format {
                    path: path.to_path_buf(),
                    message: format!("edge {e} is a self-loop"),
                });
            }
            selected_graph.set(j, k, true);
        }
        let om = field(&v, "omega_mean", path)?;
        let diag = as_array(om, "diagonal", path)?;
        if diag.len() != p {
            return Err(CliError::Format {
                path: path.to_path_buf(),
                message: format!("omega_mean.diagonal has length {}, expected {p}", diag.len()),
            });
        }
        let mut omega_mean = DMatrix::zeros(p, p);
        for (j, d) in diag.iter().enumerate() {
            omega_mean[(j, j)] = as_f64(d, path)?;
        }
        for t in as_array(om, "offdiagonal", path)? {
            let (j, k) = (as_index(field(t, "j", path)?, p, path)?, as_index(field(t, "k", path)?, p, path)?);
            let w = as_f64(field(t, "value", path)?, path)?;
            omega_mean[(j, k)] = w;
            omega_mean[(k, j)] = w;
        }
        let bh = field(&v, "beta_hat", path)?;
        let support = as_array(bh, "support", path)?;
        let values = as_array(bh, "values", path)?;
        if support.len() != values.len() {
            return Err(CliError::Format {
                path: path.to_path_buf(),
                message: "beta_hat.support and beta_hat.values differ in length".into(),
            });
        }
        let mut beta_hat = vec![0.0; p];
        for (j, b) in support.iter().zip(values) {
            beta_hat[as_index(j, p, path)?] = as_f64(b, path)?;
        }
        Ok(Self {
            seed: field(&v, "seed", path)?.clone(),
            config: field(&v, "config", path)?.clone(),
            p,
            selected_gamma,
            selected_graph,
            omega_mean,
            beta_hat,
        })
    }
}

/// `evaluate`: score a fit against the truth and held-out data.
pub fn evaluate(inputs: &EvaluateInputs, out: &Path) -> Result<PathBuf> {
    let fit = FitOutput::read(&inputs.results)?;
    let beta0 = io::read_vector(&inputs.beta0)?;
    let (omega0, _) = io::read_matrix(&inputs.omega0, false)?;
    let truth = bench::Truth::new(beta0, omega0)?;
    if truth.beta0.len() != fit.p {
        return Err(joint_select::Error::Dimension(format!(
            "results have p = {} but the truth has p = {}",
            fit.p,
            truth.beta0.len()
        ))
        .into());
    }
    let test = match (&inputs.x_test, &inputs.y_test) {
        (Some(xp), Some(yp)) => {
            let (x, _) = io::read_matrix(xp, false)?;
            let y = io::read_binary(yp)?;
            Some((x, y))
        }
        _ => None,
    };
    let variable = bench::variable_metrics(
        &fit.selected_gamma,
        &truth.gamma0,
        &fit.beta_hat,
        test.as_ref().map(|(x, y)| (x, y.as_slice())),
    )?;
    let graph = bench::graph_metrics(&fit.selected_graph, &truth.graph0, &fit.omega_mean, &truth.omega0)?;
    let report = MetricsReport { variable, graph };
    ensure_dir(out)?;
    let path = out.join("metrics.json");
    io::write_json(&path, &metrics_json(&fit, inputs, &report))?;
    Ok(path)
}

fn confusion_json(c: &bench::Confusion) -> Value {
    json!({"tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn_})
}

fn metrics_json(fit: &FitOutput, inputs: &EvaluateInputs, m: &MetricsReport) -> Value {
    let v = &m.variable;
    let g = &m.graph;
    json!({
        "format_version": FORMAT_VERSION,
        "kind": "metrics",
        "seed": fit.seed,
        "config": fit.config,
        "inputs": {
            "results": inputs.results.display().to_string(),
            "beta0": inputs.beta0.display().to_string(),
            "omega0": inputs.omega0.display().to_string(),
            "x_test": inputs.x_test.as_ref().map(|p| p.display().to_string()),
            "y_test": inputs.y_test.as_ref().map(|p| p.display().to_string()),
        },
        "p": fit.p,
        "variable": {
            "counts": confusion_json(&v.counts),
            "sensitivity": v.sensitivity,
            "specificity": v.specificity,
            "mcc": v.mcc,
            "mspe": v.mspe,
        },
        "graph": {
            "counts": confusion_json(&g.counts),
            "sensitivity": g.sensitivity,
            "specificity": g.specificity,
            "mcc": g.mcc,
            "n_error": g.n_error,
            "e1": g.e1,
            "e2": g.e2,
            "e3": g.e3,
            "e4": g.e4,
        },
    })
}

/// `replicate`: the full simulation study for one (setting, scenario) cell.
pub fn replicate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    ensure_dir(&cfg.out)?;
    let options = ChainOptions {
        scan: cfg.scan,
        progress_every: 0,
        ..ChainOptions::default()
    };
    let report = bench::run_benchmark(&cfg.sim, &cfg.hyper, &options, cfg.threads)?;
    let paths = [
        cfg.out.join("table.csv"),
        cfg.out.join("table.md"),
        cfg.out.join("replicates.csv"),
        cfg.out.join("manifest.json"),
    ];
    std::fs::write(&paths[0], table_csv(&report)).map_err(io_err(&paths[0]))?;
    std::fs::write(&paths[1], table_md(cfg, &report)).map_err(io_err(&paths[1]))?;
    std::fs::write(&paths[2], replicates_csv(&report.replicates)).map_err(io_err(&paths[2]))?;
    let manifest = json!({
        "format_version": FORMAT_VERSION,
        "kind": "replicate",
        "seed": cfg.seed,
        "config": cfg.echo(),
        "files": ["table.csv", "table.md", "replicates.csv"],
    });
    io::write_json(&paths[3], &manifest)?;
    Ok(paths.to_vec())
}

fn label(cfg_b: f64) -> String {
    format!("J.BSSC (b={cfg_b})")
}

/// Long format: one row per (table, metric).
pub fn table_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("table,method,metric,mean,se,replicates\n");
    let k = report.replicates.len();
    let method = label(report.hyper.b);
    for (table, stats) in [("variable", report.variable_summary()), ("graph", report.graph_summary())] {
        for s in stats {
            let _ = writeln!(out, "{table},{method},{},{},{},{k}", s.name, s.mean, s.se);
        }
    }
    out
}

fn cell(s: &MetricStat) -> String {
    if s.name == "n_error" {
        format!("{:.1} ± {:.1}", s.mean, s.se)
    } else {
        format!("{:.3} ± {:.3}", s.mean, s.se)
    }
}

fn md_table(out: &mut String, headers: &[&str], method: &str, stats: &[MetricStat]) {
    let _ = writeln!(out, "| Method | {} |", headers.join(" | "));
    let _ = writeln!(out, "|---|{}", "---|".repeat(headers.len()));
    let cells: Vec<String> = stats.iter().map(cell).collect();
    let _ = writeln!(out, "| {method} | {} |", cells.join(" | "));
}

/// Two Markdown tables (variable selection, then graph selection and
/// estimation) with mean ± standard error over replicates.
pub fn table_md(cfg: &RunConfig, report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let method = label(report.hyper.b);
    let k = report.replicates.len();
    let _ = writeln!(
        out,
        "<!-- seed={} config={} -->\n",
        cfg.seed,
        serde_json::to_string(&cfg.echo()).expect("serializable")
    );
    let _ = writeln!(
        out,
        "Setting {}, scenario {}: n = {}, p = {}, {k} replicates, mean ± s.e.\n",
        match report.config.coefficients {
            bench::CoefficientDesign::Setting(s) => s.to_string(),
            bench::CoefficientDesign::Zero => "zero".into(),
        },
        match report.config.precision {
            bench::PrecisionDesign::Scenario(s) => s.to_string(),
            bench::PrecisionDesign::Identity => "identity".into(),
        },
        report.config.n,
        report.config.dim()
    );
    let _ = writeln!(out, "Variable selection\n");
    md_table(
        &mut out,
        &["Sensitivity", "Specificity", "MCC", "MSPE"],
        &method,
        &report.variable_summary(),
    );
    let _ = writeln!(out, "\nGraph selection and estimation\n");
    md_table(
        &mut out,
        &["Sensitivity", "Specificity", "MCC", "#Error", "E1", "E2", "E3", "E4"],
        &method,
        &report.graph_summary(),
    );
    out
}

pub fn replicates_csv(reps: &[ReplicateOutcome]) -> String {
    let mut out = String::from(
        "replicate,var_sensitivity,var_specificity,var_mcc,mspe,n_variables,\
         graph_sensitivity,graph_specificity,graph_mcc,n_error,e1,e2,e3,e4,n_edges\n",
    );
    for r in reps {
        let v = &r.metrics.variable;
        let g = &r.metrics.graph;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index + 1,
            v.sensitivity,
            v.specificity,
            v.mcc,
            v.mspe.map_or(String::new(), |m| m.to_string()),
            r.selected_variables,
            g.sensitivity,
            g.specificity,
            g.mcc,
            g.n_error,
            g.e1,
            g.e2,
            g.e3,
            g.e4,
            r.selected_edges
        );
    }
    out
}
