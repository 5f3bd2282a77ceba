mod common;

use common::{config, median, to_na};
use fsvar::linalg::spectral_radius;
use fsvar::simulation::{run_method, sample_covariance, simulate, DgpSpec, LoadingPattern, Method, MethodConfig};
use fsvar::var::companion_of;
use ndarray::{Array2, Axis};
use proptest::prelude::*;

fn nnz_rows_cols(a: &Array2<f64>) -> (usize, usize) {
    let rows = a.rows().into_iter().map(|r| r.iter().filter(|v| **v != 0.0).count()).max().unwrap_or(0);
    let cols = a.columns().into_iter().map(|c| c.iter().filter(|v| **v != 0.0).count()).max().unwrap_or(0);
    (rows, cols)
}

fn min_eig(a: &Array2<f64>) -> f64 {
    to_na(a).symmetric_eigen().eigenvalues.min()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn draws_meet_their_certificates(n in 2usize..25, r in 0usize..4, p in 1usize..4, p_f in 1usize..3, k in 1usize..25, seed in any::<u64>(), half in any::<bool>()) {
        let (r, k) = (r.min(n), k.min(n));
        let mut spec = DgpSpec::new(n, 30, r, p, p_f).with_sparsity(k, n).with_seed(seed);
        if half {
            spec.loading_pattern = LoadingPattern::Half;
        }
        let real = simulate(&spec, 3).unwrap();
        let rho = spectral_radius(&companion_of(&real.true_slopes).view()).unwrap();
        prop_assert!((rho - 0.8).abs() <= 1e-6, "idiosyncratic radius {rho}");
        if r > 0 {
            let rho_f = spectral_radius(&companion_of(&real.true_factor_slopes).view()).unwrap();
            prop_assert!((rho_f - 0.8).abs() <= 1e-6, "factor radius {rho_f}");
            prop_assert!(min_eig(&real.true_sigma_u) > 0.0);
            prop_assert_eq!(&real.true_sigma_u, &real.true_sigma_u.t());
        }
        for a in &real.true_slopes {
            let (rows, cols) = nnz_rows_cols(a);
            prop_assert!(rows <= k && cols <= k);
        }
        prop_assert!(min_eig(&real.true_sigma_v) > 0.0);
        prop_assert_eq!(&real.true_sigma_v, &real.true_sigma_v.t());
        if half {
            for col in real.true_loadings.columns() {
                prop_assert!(col.iter().filter(|v| **v == 0.0).count() >= n / 2);
            }
        }
        let x = real.true_factors.dot(&real.true_loadings.t()) + &real.true_idio;
        prop_assert_eq!(real.panel.values(), &x);
    }
}

#[test]
fn sample_covariance_converges_to_sigma_v() {
    let gap = |t: usize| {
        median((0..10).map(|s| {
            let real = simulate(&DgpSpec::new(8, t, 0, 0, 0).with_seed(50 + s), 0).unwrap();
            let s_hat = sample_covariance(&real.panel.values().view());
            let d = &s_hat - &real.true_sigma_v;
            (d.mapv(|v| v * v).sum() / real.true_sigma_v.mapv(|v| v * v).sum()).sqrt()
        }).collect())
    };
    let (short, long) = (gap(200), gap(2000));
    eprintln!("relative covariance gap {short} at T=200, {long} at T=2000");
    assert!(long * 2.0 < short);
}

#[test]
fn sample_means_shrink_at_root_t() {
    let size = |t: usize| {
        (0..20).map(|s| {
            let real = simulate(&DgpSpec::new(6, t, 1, 1, 1).with_sparsity(2, 6).with_seed(90 + s), 0).unwrap();
            real.panel.values().mean_axis(Axis(0)).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()))
        }).sum::<f64>() / 20.0
    };
    let ratio = size(400) / size(1600);
    eprintln!("mean size ratio T=400 / T=1600: {ratio}");
    assert!((1.4..2.8).contains(&ratio));
}

#[test]
fn pure_noise_forecasts_reach_the_noise_variance() {
    // N = 50, T = 200, no factors and no dynamics; the best predictor is zero
    let cfg = MethodConfig::default().with_parallel(false);
    let mut ratios = vec![Vec::new(); Method::ALL.len()];
    for seed in 0..20 {
        let real = simulate(&DgpSpec::new(50, 200, 0, 0, 0).with_seed(1000 + seed), 2000).unwrap();
        let oracle = real.true_sigma_v.diag().iter().take(cfg.n_eval).sum::<f64>() / cfg.n_eval as f64;
        for (k, &m) in Method::ALL.iter().enumerate() {
            ratios[k].push(run_method(m, &real, &cfg).unwrap().msfe / oracle);
        }
    }
    for (k, m) in Method::ALL.iter().enumerate() {
        let mean = ratios[k].iter().sum::<f64>() / ratios[k].len() as f64;
        eprintln!("{m}: MSFE / noise variance = {mean:.4}");
        assert!((mean - 1.0).abs() <= 0.05, "{m}: {mean}");
    }
}
