mod common;

use common::{config, gaussian, gaussian_vec, lasso_exhaustive, max_abs_diff, median, to_na, var_sample};
use fsvar::lasso::{information_criterion, lambda_grid, lasso_row, select_lambda_ic, Criterion, RowProblem, SolverOptions, WeightsMode};
use fsvar::var::{build_lag_matrix, fit_sparse_var};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn regression(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let x = gaussian(n, p, seed);
    let b = Array1::from_shape_fn(p, |i| if i % 2 == 0 { 1.0 / (i + 1) as f64 } else { 0.0 });
    let y = x.dot(&b) + gaussian_vec(n, seed) * 0.7;
    (x, y)
}

fn weights(p: usize, seed: u64) -> Array1<f64> {
    gaussian_vec(p, seed ^ 0xabc).mapv(|v| 0.5 + v.abs().min(2.0))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn solutions_satisfy_the_optimality_conditions(n in 10usize..60, p in 1usize..12, frac in 0.0f64..1.2, seed in any::<u64>()) {
        let (x, y) = regression(n, p, seed);
        let w = weights(p, seed);
        let gram = x.t().dot(&x);
        let prob = RowProblem::new(&gram, x.t().dot(&y), y.dot(&y), n).unwrap();
        let lambda = frac * prob.lambda_max(&w.view());
        let sol = lasso_row(&x.view(), &y.view(), lambda, &w.view()).unwrap();
        let grad = x.t().dot(&(&y - &x.dot(&sol.beta))) * (-2.0 / n as f64);
        for i in 0..p {
            let pen = lambda * w[i];
            let v = if sol.beta[i] != 0.0 { (grad[i] + pen * sol.beta[i].signum()).abs() } else { (grad[i].abs() - pen).max(0.0) };
            prop_assert!(v <= 1e-5, "coordinate {i}: violation {v}");
        }
    }

    #[test]
    fn solver_matches_exhaustive_sign_search(n in 12usize..40, p in 1usize..8, frac in 0.02f64..1.0, seed in any::<u64>()) {
        let (x, y) = regression(n, p, seed);
        let w = weights(p, seed);
        let gram = x.t().dot(&x);
        let prob = RowProblem::new(&gram, x.t().dot(&y), y.dot(&y), n).unwrap();
        let lambda = frac * prob.lambda_max(&w.view());
        let sol = lasso_row(&x.view(), &y.view(), lambda, &w.view()).unwrap();
        let (beta, obj) = lasso_exhaustive(&x, &y, lambda, &w);
        prop_assert!((sol.objective - obj).abs() <= 1e-9 * obj.max(1.0));
        let diff = sol.beta.iter().zip(&beta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(diff <= 1e-5);
    }

    #[test]
    fn active_sets_grow_along_the_path(n in 20usize..60, p in 2usize..12, seed in any::<u64>()) {
        let (x, y) = regression(n, p, seed);
        let w = Array1::ones(p);
        let gram = x.t().dot(&x);
        let prob = RowProblem::new(&gram, x.t().dot(&y), y.dot(&y), n).unwrap();
        let grid = lambda_grid(prob.lambda_max(&w.view()), 25, 1e-3);
        let mut warm = None;
        let mut counts = Vec::new();
        for &l in &grid {
            let s = prob.solve(l, &w.view(), warm.as_ref(), &SolverOptions::default()).unwrap();
            counts.push(s.df());
            warm = Some(s.beta);
        }
        prop_assert_eq!(counts[0], 0);
        for k in 0..counts.len() - 1 {
            prop_assert!(counts[k] <= counts[k + 1] + 1, "path counts {:?}", counts);
        }
    }

    #[test]
    fn every_sweep_lowers_the_objective(n in 10usize..50, p in 1usize..12, frac in 0.01f64..1.0, seed in any::<u64>()) {
        let (x, y) = regression(n, p, seed);
        let w = weights(p, seed);
        let gram = x.t().dot(&x);
        let prob = RowProblem::new(&gram, x.t().dot(&y), y.dot(&y), n).unwrap();
        let lambda = frac * prob.lambda_max(&w.view());
        let opts = SolverOptions { trace: true, ..SolverOptions::default() };
        let sol = prob.solve(lambda, &w.view(), None, &opts).unwrap();
        let start = prob.objective(&Array1::zeros(p).view(), lambda, &w.view());
        let mut prev = start;
        for &v in &sol.trace {
            prop_assert!(v <= prev + 1e-12 * start.abs());
            prev = v;
        }
    }
}

#[test]
fn zero_penalty_is_least_squares() {
    let (x, y) = regression(80, 6, 21);
    let sol = lasso_row(&x.view(), &y.view(), 0.0, &Array1::ones(6).view()).unwrap();
    let xa = to_na(&x);
    let ya = nalgebra::DVector::from_iterator(80, y.iter().copied());
    let ols = (xa.transpose() * &xa).cholesky().unwrap().solve(&(xa.transpose() * ya));
    for i in 0..6 {
        assert!((sol.beta[i] - ols[i]).abs() < 1e-6);
    }
}

#[test]
fn bic_keeps_noise_regressions_empty() {
    let (t, n) = (200, 20);
    let mut empty = 0;
    for seed in 0..100 {
        let panel = gaussian(t, n, 500 + seed);
        let (x, y) = build_lag_matrix(&panel.view(), 1).unwrap();
        let target = y.column(0).to_owned();
        let gram = x.t().dot(&x);
        let prob = RowProblem::new(&gram, x.t().dot(&target), target.dot(&target), x.nrows()).unwrap();
        let ones = Array1::ones(n);
        let grid = lambda_grid(prob.lambda_max(&ones.view()), 50, 1e-3);
        let (_, sol) = select_lambda_ic(&x.view(), &target.view(), &grid, Criterion::Bic, None, 1).unwrap();
        if sol.df() == 0 {
            empty += 1;
        }
    }
    assert!(empty >= 90, "{empty} of 100 selections were empty");
}

#[test]
fn bic_isolates_a_single_strong_predictor() {
    let n = 120;
    let x = gaussian(n, 8, 31);
    let y = x.column(3).mapv(|v| 3.0 * v) + gaussian_vec(n, 32) * 0.5;
    let ones = Array1::ones(8);
    let gram = x.t().dot(&x);
    let prob = RowProblem::new(&gram, x.t().dot(&y), y.dot(&y), n).unwrap();
    let grid = lambda_grid(prob.lambda_max(&ones.view()), 50, 1e-3);
    let c_t = Criterion::Bic.c_t::<f64>(n);
    // every grid point solved from scratch
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for &l in &grid {
        let s = lasso_row(&x.view(), &y.view(), l, &ones.view()).unwrap();
        let rss = (&y - &x.dot(&s.beta)).mapv(|v| v * v).sum();
        let ic = information_criterion(rss, n, s.df(), c_t);
        if best.as_ref().is_none_or(|b| ic < b.0) {
            best = Some((ic, l, s.active_set()));
        }
    }
    let (_, l_best, active) = best.unwrap();
    assert_eq!(active, vec![3]);
    let (l_sel, sol) = select_lambda_ic(&x.view(), &y.view(), &grid, Criterion::Bic, None, 0).unwrap();
    assert_eq!(l_sel, l_best);
    assert_eq!(sol.active_set(), vec![3]);
}

#[test]
fn noise_panels_give_nearly_empty_vars() {
    let (t, n, p) = (200, 20, 1);
    let mut total = 0;
    for seed in 0..100 {
        let panel = gaussian(t, n, 900 + seed);
        total += fit_sparse_var(&panel.view(), p, Criterion::Bic, WeightsMode::default()).unwrap().nonzeros();
    }
    let bound = 0.05 * (n * n * p) as f64 * 100.0;
    assert!((total as f64) <= bound, "{total} nonzeros over 100 fits, bound {bound}");
}

fn diagonal_var(n: usize, t: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
    let a = Array2::eye(n) * 0.8;
    let x = var_sample(std::slice::from_ref(&a), n, t, 200, seed);
    let fit = fit_sparse_var(&x.view(), 1, Criterion::Bic, WeightsMode::default()).unwrap();
    (a, fit.slopes[0].clone())
}

#[test]
fn diagonal_var_is_recovered() {
    let n = 20;
    let (_, est) = diagonal_var(n, 500, 41);
    for i in 0..n {
        assert!((est[[i, i]] - 0.8).abs() < 0.1, "diagonal {i}: {}", est[[i, i]]);
    }
    let off = est.indexed_iter().filter(|((i, j), v)| i != j && **v != 0.0).count();
    assert!(off <= (n * (n - 1)) / 10, "{off} spurious off-diagonal entries");
}

#[test]
fn slope_error_shrinks_with_the_sample() {
    let err = |t: usize| {
        median((0..20).map(|s| {
            let (a, est) = diagonal_var(20, t, 60 + s);
            max_abs_diff(&a, &est)
        }).collect())
    };
    let (short, long) = (err(200), err(1000));
    assert!(long < short, "median max error {long} at T=1000 vs {short} at T=200");
}

#[test]
fn var_fit_runs_in_single_precision() {
    let (_, est64) = diagonal_var(6, 400, 77);
    let a = Array2::eye(6) * 0.8;
    let x = var_sample(std::slice::from_ref(&a), 6, 400, 200, 77).mapv(|v| v as f32);
    let fit = fit_sparse_var(&x.view(), 1, Criterion::Bic, WeightsMode::default()).unwrap();
    for i in 0..6 {
        let (a32, a64) = (fit.slopes[0][[i, i]] as f64, est64[[i, i]]);
        assert!((a32 - a64).abs() < 0.02, "diagonal {i}: f32 {a32}, f64 {a64}");
    }
}
