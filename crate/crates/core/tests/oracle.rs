use joint_select::kernels::sample_std_normal;
use joint_select::oracle::{empirical_joint, enumerate_posterior, total_variation, Quadrature};
use joint_select::prelude::*;
use nalgebra::DMatrix;

struct Problem {
    data: Dataset,
    hyper: Hyperparams,
    lambda: f64,
    diagonal: Vec<f64>,
}

fn problem(p: usize, n: usize, seed: u64) -> Problem {
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
    let hyper = Hyperparams {
        a: 1.0,
        b: 0.5,
        q: 0.3,
        r2_cap: if p == 3 { Some(3) } else { None },
        burn_in: 2_000,
        n_keep: 200_000,
        ..Hyperparams::default()
    };
    Problem {
        data: Dataset::new(x, y).unwrap(),
        hyper,
        lambda: 3.0,
        diagonal: (0..p).map(|j| 0.8 + 0.2 * j as f64).collect(),
    }
}

fn chain_tv(prob: &Problem, scan: ScanOrder, seed: u64) -> f64 {
    let exact = enumerate_posterior(&prob.data, &prob.hyper, prob.lambda, &prob.diagonal, Quadrature::default()).unwrap();
    let options = ChainOptions {
        scan,
        update_shrinkage: false,
        update_diagonal: false,
        invariant_check_every: 1000,
        progress_every: 0,
        ..ChainOptions::default()
    };
    let mut rng = RngHandle::new(seed);
    let mut chain = Chain::new(&prob.data, prob.hyper.clone(), options, None, &mut rng).unwrap();
    chain.set_shrinkage(prob.lambda, 1.0);
    chain.set_diagonal(&prob.diagonal);
    let (trace, _) = chain.run(&mut rng).unwrap();
    let tv = total_variation(&exact, &empirical_joint(&trace));
    // the enumeration must not be degenerate for the comparison to mean anything
    let top = exact.values().copied().fold(0.0, f64::max);
    assert!(top < 0.9, "posterior too concentrated ({top})");
    tv
}

#[test]
fn two_predictors_match_enumeration() {
    let prob = problem(2, 20, 11);
    let tv = chain_tv(&prob, ScanOrder::Fixed, 1);
    assert!(tv < 0.03, "TV = {tv}");
}

#[test]
fn three_predictors_match_enumeration() {
    let prob = problem(3, 30, 12);
    let tv = chain_tv(&prob, ScanOrder::Fixed, 2);
    assert!(tv < 0.03, "TV = {tv}");
}

#[test]
fn random_scan_matches_enumeration() {
    let prob = problem(3, 30, 13);
    let tv = chain_tv(&prob, ScanOrder::Random, 3);
    assert!(tv < 0.03, "TV = {tv}");
}

#[test]
fn enumeration_detects_a_wrong_coupling() {
    // same chain, oracle built with a different b: the gate must notice
    let prob = problem(3, 30, 12);
    let mut wrong = prob.hyper.clone();
    wrong.b = 2.0;
    let exact = enumerate_posterior(&prob.data, &wrong, prob.lambda, &prob.diagonal, Quadrature::default()).unwrap();
    let reference = enumerate_posterior(&prob.data, &prob.hyper, prob.lambda, &prob.diagonal, Quadrature::default()).unwrap();
    assert!(total_variation(&exact, &reference) > 0.03);
}

#[test]
fn quadrature_is_converged() {
    let prob = problem(3, 30, 12);
    let coarse = enumerate_posterior(&prob.data, &prob.hyper, prob.lambda, &prob.diagonal, Quadrature::default()).unwrap();
    let fine = Quadrature {
        half_width: 10.0,
        panels: 48,
        nodes_per_panel: 20,
    };
    let fine = enumerate_posterior(&prob.data, &prob.hyper, prob.lambda, &prob.diagonal, fine).unwrap();
    assert!(total_variation(&coarse, &fine) < 1e-8);
}
