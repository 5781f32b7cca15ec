//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with the
//! measured values and the threshold it was held to.
//!
//! Run with `cargo test -p joint-select-cli --test acceptance`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use joint_select::bench::MetricStat;
use joint_select::gibbs::{
    diagonal_log_density, diagonal_mode, edge_conditional, update_edge_and_omega, update_shrinkage,
    update_variable_and_beta, variable_conditional,
};
use joint_select::kernels::sample_std_normal;
use joint_select::oracle::{empirical_joint, enumerate_posterior, total_variation, Quadrature};
use joint_select::prelude::*;
use joint_select::probit::{probit_hessian, probit_loglik, probit_score, psi};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Acceptance tests run one at a time so wall-clock measurements are not
/// shared with other heavy tests.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Clone, Copy)]
enum Bound {
    AtLeast(f64),
    AtMost(f64),
    Below(f64),
    Above(f64),
    /// Reported alongside, not judged.
    Info,
}

impl Bound {
    fn holds(self, v: f64) -> bool {
        match self {
            Bound::AtLeast(t) => v >= t,
            Bound::AtMost(t) => v <= t,
            Bound::Below(t) => v < t,
            Bound::Above(t) => v > t,
            Bound::Info => true,
        }
    }

    fn describe(self) -> String {
        match self {
            Bound::AtLeast(t) => format!(">= {t}"),
            Bound::AtMost(t) => format!("<= {t}"),
            Bound::Below(t) => format!("< {t}"),
            Bound::Above(t) => format!("> {t}"),
            Bound::Info => "info".into(),
        }
    }
}

struct Check {
    label: String,
    value: f64,
    bound: Bound,
}

fn check(label: impl Into<String>, value: f64, bound: Bound) -> Check {
    Check {
        label: label.into(),
        value,
        bound,
    }
}

/// Print the verdict line and fail the test if any check misses.
fn verdict(id: u32, title: &str, checks: &[Check]) {
    let pass = checks.iter().all(|c| c.bound.holds(c.value));
    let body: Vec<String> = checks
        .iter()
        .map(|c| {
            let mark = if c.bound.holds(c.value) { "" } else { " !" };
            let value = if c.value != 0.0 && c.value.abs() < 1e-3 {
                format!("{:.3e}", c.value)
            } else {
                format!("{:.6}", c.value)
            };
            format!("{} = {value} ({}){mark}", c.label, c.bound.describe())
        })
        .collect();
    let line = format!(
        "criterion {id:>2} {} {title}: {}",
        if pass { "PASS" } else { "FAIL" },
        body.join(", ")
    );
    // written past the libtest capture so the line always shows
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
    assert!(pass, "{line}");
}

fn stat(stats: &[MetricStat], name: &str) -> f64 {
    stats.iter().find(|s| s.name == name).expect("metric present").mean
}

fn options() -> ChainOptions {
    ChainOptions {
        invariant_check_every: 100,
        progress_every: 0,
        ..ChainOptions::default()
    }
}

fn benchmark(config: &SimConfig, hyper: &Hyperparams) -> BenchmarkReport {
    run_benchmark(config, hyper, &options(), 1).expect("benchmark runs")
}

fn scenario1_setting1() -> &'static BenchmarkReport {
    static REPORT: OnceLock<BenchmarkReport> = OnceLock::new();
    REPORT.get_or_init(|| benchmark(&SimConfig::new(1, 1), &Hyperparams::default()))
}

#[test]
fn criterion_01_variable_selection_scenario1_setting1() {
    let _g = serial();
    let report = scenario1_setting1();
    assert_eq!(report.replicates.len(), 20);
    assert_eq!(report.config.dim(), 150);
    let v = report.variable_summary();
    verdict(
        1,
        "variable selection, scenario 1 / setting 1, 20 replicates",
        &[
            check("sensitivity", stat(&v, "sensitivity"), Bound::AtLeast(0.75)),
            check("specificity", stat(&v, "specificity"), Bound::AtLeast(0.97)),
            check("mcc", stat(&v, "mcc"), Bound::AtLeast(0.72)),
            check("mspe", stat(&v, "mspe"), Bound::AtMost(0.15)),
        ],
    );
}

#[test]
fn criterion_02_coupling_improves_selection_scenario2() {
    let _g = serial();
    let config = SimConfig::new(1, 2);
    let joint = benchmark(&config, &Hyperparams::default());
    let separate = benchmark(
        &config,
        &Hyperparams {
            b: 0.0,
            ..Hyperparams::default()
        },
    );
    let mcc_joint = stat(&joint.variable_summary(), "mcc");
    let mcc_separate = stat(&separate.variable_summary(), "mcc");
    verdict(
        2,
        "mcc(b = 0.5) > mcc(b = 0), scenario 2 / setting 1, 20 paired replicates",
        &[
            check("mcc(b=0.5) - mcc(b=0)", mcc_joint - mcc_separate, Bound::Above(0.0)),
            check("mcc(b=0.5)", mcc_joint, Bound::Info),
            check("mcc(b=0)", mcc_separate, Bound::Info),
        ],
    );
}

#[test]
fn criterion_03_graph_selection_scenario1_setting1() {
    let _g = serial();
    let g = scenario1_setting1().graph_summary();
    verdict(
        3,
        "graph selection, scenario 1 / setting 1, 20 replicates",
        &[
            check("edge sensitivity", stat(&g, "sensitivity"), Bound::AtLeast(0.9)),
            check("edge specificity", stat(&g, "specificity"), Bound::AtLeast(0.995)),
            check("#error", stat(&g, "n_error"), Bound::AtMost(15.0)),
        ],
    );
}

#[test]
fn criterion_04_precision_estimation_scenario1_setting1() {
    let _g = serial();
    let g = scenario1_setting1().graph_summary();
    verdict(
        4,
        "posterior-mean precision error, scenario 1 / setting 1",
        &[
            check("e2", stat(&g, "e2"), Bound::AtMost(0.45)),
            check("e3", stat(&g, "e3"), Bound::AtMost(0.25)),
        ],
    );
}

struct Tiny {
    data: Dataset,
    hyper: Hyperparams,
    lambda: f64,
    diagonal: Vec<f64>,
}

fn tiny(p: usize, n: usize, seed: u64) -> Tiny {
    let mut rng = RngHandle::new(seed);
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let common = sample_std_normal(&mut rng);
        for j in 0..p {
            x[(i, j)] = 0.6 * common + sample_std_normal(&mut rng);
        }
    }
    let beta = [1.0, 0.0, -0.5];
    let y = (0..n)
        .map(|i| (0..p).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + sample_std_normal(&mut rng) >= 0.0)
        .collect();
    Tiny {
        data: Dataset::new(x, y).unwrap(),
        hyper: Hyperparams {
            a: 1.0,
            b: 0.5,
            q: 0.3,
            r2_cap: if p == 3 { Some(3) } else { None },
            burn_in: 2_000,
            n_keep: 200_000,
            ..Hyperparams::default()
        },
        lambda: 3.0,
        diagonal: (0..p).map(|j| 0.8 + 0.2 * j as f64).collect(),
    }
}

fn oracle_tv(problem: &Tiny, seed: u64) -> f64 {
    let exact = enumerate_posterior(
        &problem.data,
        &problem.hyper,
        problem.lambda,
        &problem.diagonal,
        Quadrature::default(),
    )
    .unwrap();
    let top = exact.values().copied().fold(0.0, f64::max);
    assert!(top < 0.9, "enumerated posterior is nearly degenerate ({top})");
    let opts = ChainOptions {
        update_shrinkage: false,
        update_diagonal: false,
        invariant_check_every: 1000,
        progress_every: 0,
        ..ChainOptions::default()
    };
    let mut rng = RngHandle::new(seed);
    let mut chain = Chain::new(&problem.data, problem.hyper.clone(), opts, None, &mut rng).unwrap();
    chain.set_shrinkage(problem.lambda, 1.0);
    chain.set_diagonal(&problem.diagonal);
    let (trace, _) = chain.run(&mut rng).unwrap();
    assert_eq!(trace.kept(), 200_000);
    total_variation(&exact, &empirical_joint(&trace))
}

#[test]
fn criterion_05_chain_matches_exact_enumeration() {
    let _g = serial();
    let start = Instant::now();
    let tv2 = oracle_tv(&tiny(2, 20, 11), 1);
    let tv3 = oracle_tv(&tiny(3, 30, 12), 2);
    let minutes = start.elapsed().as_secs_f64() / 60.0;
    verdict(
        5,
        "posterior over (gamma, G) vs enumeration, 2e5 kept draws",
        &[
            check("tv(p=2, n=20)", tv2, Bound::Below(0.03)),
            check("tv(p=3, n=30)", tv3, Bound::Below(0.03)),
            check("minutes", minutes, Bound::AtMost(2.0)),
        ],
    );
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / k;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    (m, v)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

const DRAWS: usize = 100_000;

#[test]
fn criterion_06_conditional_laws() {
    let _g = serial();
    let mut rng = RngHandle::new(606);
    let n = 60;
    let mut x = DMatrix::from_fn(n, 3, |_, _| sample_std_normal(&mut rng));
    for i in 0..n {
        x[(i, 1)] += 0.8 * x[(i, 0)];
    }
    // latent values proportional to column 2, responses made consistent with them
    let z: Vec<f64> = (0..n).map(|i| 3.0 * x[(i, 2)]).collect();
    let y: Vec<bool> = z.iter().map(|&v| v >= 0.0).collect();
    let data = Dataset::new(x, y).unwrap();
    let cov = SampleCov::from_dataset(&data);

    // beta slab: a small a so the slab is visited often
    let hyper = Hyperparams {
        a: 0.5,
        ..Hyperparams::default()
    };
    let mut st = ModelState::init(&data, &cov, &hyper, &mut rng).unwrap();
    st.set_latent(&data, &z).unwrap();
    let beta_cond = variable_conditional(&st, &data, &hyper, 2);
    let mut betas = Vec::with_capacity(DRAWS);
    while betas.len() < DRAWS {
        update_variable_and_beta(&mut st, &data, &hyper, 2, &mut rng);
        if st.gamma()[2] {
            betas.push(st.beta()[2]);
        }
    }
    let (bm, bv) = moments(&betas);

    // omega slab at q = 1/2 with a mean well away from zero
    let hyper = Hyperparams {
        q: 0.5,
        ..Hyperparams::default()
    };
    let mut st = ModelState::init(&data, &cov, &hyper, &mut rng).unwrap();
    st.set_offdiag(&cov, 1, 2, 0.4).unwrap();
    st.set_diag(&cov, 0, 1.3);
    st.set_lambda_offdiag(0, 1, 2.0);
    let edge_cond = edge_conditional(&st, &cov, &hyper, 0, 1);
    let nf = n as f64;
    let a_jk = cov.get(0, 0) + cov.get(1, 1) + 2.0 / nf;
    let b_jk = st.edge_linear_term(&cov, 0, 1);
    assert!((edge_cond.mean + b_jk / a_jk).abs() < 1e-14);
    assert!((edge_cond.var - 1.0 / (nf * a_jk)).abs() < 1e-15);
    let mut omegas = Vec::with_capacity(DRAWS);
    while omegas.len() < DRAWS {
        update_edge_and_omega(&mut st, &cov, &hyper, 0, 1, &mut rng);
        if st.graph().has_edge(0, 1) {
            omegas.push(st.omega()[(0, 1)]);
        }
    }
    let (om, ov) = moments(&omegas);

    // shrinkage conditionals
    let hyper = Hyperparams {
        r: 2.0,
        s: 0.5,
        ..Hyperparams::default()
    };
    let mut st = ModelState::init(&data, &cov, &hyper, &mut rng).unwrap();
    st.set_offdiag(&cov, 0, 2, 0.7).unwrap();
    st.set_diag(&cov, 1, 1.8);
    let (mut off, mut diag) = (Vec::with_capacity(DRAWS), Vec::with_capacity(DRAWS));
    for _ in 0..DRAWS {
        update_shrinkage(&mut st, &hyper, &mut rng);
        off.push(st.lambda_offdiag(0, 2));
        diag.push(st.lambda_diag()[1]);
    }
    let (lo_m, lo_v) = moments(&off);
    let (ld_m, ld_v) = moments(&diag);
    let (off_shape, off_rate) = (hyper.r + 0.5, 0.5 * 0.7 * 0.7 + hyper.s);
    let (diag_shape, diag_rate) = (hyper.r + 1.0, 1.8 + hyper.s);

    let tol = Bound::AtMost(0.02);
    verdict(
        6,
        "slab and shrinkage conditionals, relative moment error at 1e5 draws",
        &[
            check("beta mean", rel(bm, beta_cond.mean), tol),
            check("beta var", rel(bv, beta_cond.var), tol),
            check("omega mean", rel(om, edge_cond.mean), tol),
            check("omega var", rel(ov, edge_cond.var), tol),
            check("lambda_jk mean", rel(lo_m, off_shape / off_rate), tol),
            check("lambda_jk var", rel(lo_v, off_shape / (off_rate * off_rate)), tol),
            check("lambda_j mean", rel(ld_m, diag_shape / diag_rate), tol),
            check("lambda_j var", rel(ld_v, diag_shape / (diag_rate * diag_rate)), tol),
        ],
    );
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 * hi.abs().max(1e-300) {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_07_diagonal_mode() {
    let _g = serial();
    let mut rng = RngHandle::new(707);
    let (mut worst_closed, mut worst_argmax) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let lambda = rng.random_range(0.0..5.0);
        let b = rng.random_range(-1.0..1.0);
        let s = rng.random_range(0.1..3.0);
        let n = rng.random_range(10..=500) as f64;
        let mode = diagonal_mode(lambda, b, s, n);
        let c = lambda + n * b;
        let closed = (-c + (c * c + 4.0 * n * n * s).sqrt()) / (2.0 * n * s);
        worst_closed = worst_closed.max(rel(mode, closed));
        let f = |w: f64| diagonal_log_density(w, lambda, b, s, n);
        let argmax = golden_section_max(f, mode / 10.0, mode * 10.0);
        worst_argmax = worst_argmax.max(rel(argmax, mode));
    }
    verdict(
        7,
        "diagonal mode on 1000 random tuples",
        &[
            check("max rel. error vs closed form", worst_closed, Bound::AtMost(1e-12)),
            check("max rel. error vs golden-section argmax", worst_argmax, Bound::AtMost(1e-6)),
        ],
    );
}

#[test]
fn criterion_08_probit_derivatives() {
    let _g = serial();
    let mut rng = RngHandle::new(808);
    let (mut worst_score, mut worst_hess) = (0.0f64, 0.0f64);
    let mut min_psi = f64::INFINITY;
    for _ in 0..50 {
        let n = rng.random_range(10..=40);
        let p = rng.random_range(1..=5);
        let x = DMatrix::from_fn(n, p, |_, _| sample_std_normal(&mut rng));
        let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let beta = DVector::from_fn(p, |_, _| 0.7 * sample_std_normal(&mut rng));

        let score = probit_score(&x, &y, &beta);
        let info = probit_hessian(&x, &y, &beta);
        let mut fd_score = DVector::zeros(p);
        let mut fd_hess = DMatrix::zeros(p, p);
        for k in 0..p {
            let h = 1e-5 * beta[k].abs().max(1.0);
            let mut up = beta.clone();
            let mut down = beta.clone();
            up[k] += h;
            down[k] -= h;
            fd_score[k] = (probit_loglik(&x, &y, &up) - probit_loglik(&x, &y, &down)) / (2.0 * h);
            let col = (probit_score(&x, &y, &up) - probit_score(&x, &y, &down)) / (2.0 * h);
            fd_hess.set_column(k, &col);
        }
        worst_score = worst_score.max((&score - &fd_score).amax() / score.amax());
        // the information matrix is the negated second derivative
        worst_hess = worst_hess.max((&info + &fd_hess).amax() / info.amax());

        let eta = &x * &beta;
        for (&e, &yi) in eta.iter().zip(&y) {
            min_psi = min_psi.min(psi(e, yi));
        }
    }
    for i in 0..=8000 {
        let eta = -40.0 + 0.01 * i as f64;
        min_psi = min_psi.min(psi(eta, true)).min(psi(eta, false));
    }
    verdict(
        8,
        "probit score and Hessian vs central differences, 50 random instances",
        &[
            check("score max rel. error", worst_score, Bound::AtMost(1e-6)),
            check("hessian max rel. error", worst_hess, Bound::AtMost(1e-5)),
            check("min psi", min_psi, Bound::AtLeast(0.0)),
        ],
    );
}

#[test]
fn criterion_09_null_calibration() {
    let _g = serial();
    let config = SimConfig {
        coefficients: CoefficientDesign::Zero,
        precision: PrecisionDesign::Identity,
        p: Some(150),
        ..SimConfig::new(1, 1)
    };
    let report = benchmark(&config, &Hyperparams::default());
    assert_eq!(report.replicates.len(), 20);
    verdict(
        9,
        "null data (beta0 = 0, Omega0 = I), 20 replicates",
        &[
            check("specificity", stat(&report.variable_summary(), "specificity"), Bound::AtLeast(0.99)),
            check("mean |selected gamma|", report.mean_selected_variables(), Bound::AtMost(1.0)),
        ],
    );
}

fn median_sweep_seconds(scenario: u8) -> f64 {
    let config = SimConfig::new(1, scenario);
    let mut rng = RngHandle::new(1010);
    let sim = simulate_dataset(&config, &mut rng).unwrap();
    let opts = ChainOptions {
        invariant_check_every: 0,
        progress_every: 0,
        ..ChainOptions::default()
    };
    let mut chain = Chain::new(&sim.data, Hyperparams::default(), opts, None, &mut rng).unwrap();
    for _ in 0..200 {
        chain.sweep(&mut rng).unwrap();
    }
    let mut times: Vec<f64> = (0..300)
        .map(|_| {
            let start = Instant::now();
            chain.sweep(&mut rng).unwrap();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

#[test]
fn criterion_10_sweep_cost_scaling() {
    let _g = serial();
    let t150 = median_sweep_seconds(1);
    let t300 = median_sweep_seconds(4);
    verdict(
        10,
        "median single-threaded sweep time, n = 100",
        &[
            check("t(p=300) / t(p=150)", t300 / t150, Bound::AtMost(6.0)),
            check("t(p=150) ms", 1e3 * t150, Bound::AtMost(100.0)),
            check("t(p=300) ms", 1e3 * t300, Bound::Info),
        ],
    );
}

fn jbssc(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_jbssc"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn criterion_11_fit_is_deterministic() {
    let _g = serial();
    let data = tempfile::tempdir().unwrap();
    jbssc(&["simulate", "--seed", "11", "--out", p(data.path())]);
    let (x, y) = (data.path().join("X.csv"), data.path().join("y.csv"));
    let mut outputs = BTreeMap::new();
    for run in ["first", "second"] {
        let dir = data.path().join(run);
        jbssc(&["fit", "--x", p(&x), "--y", p(&y), "--seed", "12", "--out", p(&dir)]);
        outputs.insert(run, std::fs::read(dir.join("results.json")).unwrap());
    }
    let identical = outputs["first"] == outputs["second"];
    verdict(
        11,
        "two fits with equal seed and config, default sweeps",
        &[
            check("results.json identical", identical as u8 as f64, Bound::AtLeast(1.0)),
            check("bytes", outputs["first"].len() as f64, Bound::Info),
        ],
    );
}
