#![allow(dead_code)]

use fsvar::simulation::stream;
use nalgebra::{Complex, DMatrix};
use ndarray::{Array1, Array2};
use proptest::test_runner::{Config, RngSeed};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = stream(seed, 1000);
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

pub fn gaussian_vec(len: usize, seed: u64) -> Array1<f64> {
    let mut rng = stream(seed, 1001);
    Array1::from_shape_fn(len, |_| rng.sample(StandardNormal))
}

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// VAR sample with N(0, I) innovations after a burn-in.
pub fn var_sample(slopes: &[Array2<f64>], n: usize, t: usize, burn: usize, seed: u64) -> Array2<f64> {
    let e = gaussian(t + burn, n, seed);
    let mut x = Array2::<f64>::zeros((t + burn, n));
    for s in 0..t + burn {
        let mut row = e.row(s).to_owned();
        for (j, a) in slopes.iter().enumerate() {
            if s > j {
                row += &a.dot(&x.row(s - j - 1));
            }
        }
        x.row_mut(s).assign(&row);
    }
    x.slice(ndarray::s![burn.., ..]).to_owned()
}

/// Exact minimiser of `‖y − Xb‖²/n + λ Σ g_i |b_i|` by enumerating every
/// sign pattern and solving the stationarity equations on its support.
pub fn lasso_exhaustive(x: &Array2<f64>, y: &Array1<f64>, lambda: f64, w: &Array1<f64>) -> (Array1<f64>, f64) {
    let (n, p) = x.dim();
    assert!(p <= 10);
    let xa = to_na(x);
    let ya = nalgebra::DVector::from_iterator(n, y.iter().copied());
    let g = xa.transpose() * &xa;
    let c = xa.transpose() * &ya;
    let objective = |b: &Array1<f64>| {
        let fit = x.dot(b);
        let rss: f64 = y.iter().zip(fit.iter()).map(|(a, f)| (a - f).powi(2)).sum();
        rss / n as f64 + lambda * b.iter().zip(w).map(|(v, g)| (v * g).abs()).sum::<f64>()
    };
    let mut best = (Array1::zeros(p), objective(&Array1::zeros(p)));
    let total = 3usize.pow(p as u32);
    for code in 1..total {
        let mut signs = vec![0i32; p];
        let mut k = code;
        for s in signs.iter_mut() {
            *s = (k % 3) as i32 - 1;
            k /= 3;
        }
        let support: Vec<usize> = (0..p).filter(|&i| signs[i] != 0).collect();
        if support.is_empty() {
            continue;
        }
        let m = support.len();
        let gs = DMatrix::from_fn(m, m, |a, b| g[(support[a], support[b])]);
        let rhs = nalgebra::DVector::from_fn(m, |a, _| {
            let i = support[a];
            c[i] - 0.5 * n as f64 * lambda * w[i] * signs[i] as f64
        });
        let Some(sol) = gs.lu().solve(&rhs) else { continue };
        if support.iter().enumerate().any(|(a, &i)| sol[a] * signs[i] as f64 <= 0.0) {
            continue;
        }
        let mut b = Array1::zeros(p);
        for (a, &i) in support.iter().enumerate() {
            b[i] = sol[a];
        }
        let obj = objective(&b);
        if obj < best.1 {
            best = (b, obj);
        }
    }
    best
}

/// `Γ(0)` of a VAR(1) `x_t = A x_{t−1} + e_t`, `Var e = Σ`, from
/// `(I − A ⊗ A) vec Γ(0) = vec Σ`.
pub fn var1_autocov0(a: &Array2<f64>, sigma: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let an = to_na(a);
    let kron = an.kronecker(&an);
    let lhs = DMatrix::<f64>::identity(n * n, n * n) - kron;
    let vec_s = nalgebra::DVector::from_iterator(n * n, to_na(sigma).iter().copied());
    let v = lhs.lu().solve(&vec_s).expect("stable VAR");
    from_na(&DMatrix::from_column_slice(n, n, v.as_slice()))
}

pub type C = Complex<f64>;

pub fn to_nac(a: &Array2<C>) -> DMatrix<C> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn cmax_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Random Hermitian positive definite matrix `B Bᴴ + εI`.
pub fn random_hpd(n: usize, seed: u64, eps: f64) -> Array2<C> {
    let re = gaussian(n, n, seed);
    let im = gaussian(n, n, seed + 7919);
    let b = Array2::from_shape_fn((n, n), |(i, j)| C::new(re[[i, j]], im[[i, j]]));
    let mut m = b.dot(&b.t().mapv(|z| z.conj()));
    for i in 0..n {
        m[[i, i]] += C::new(eps, 0.0);
    }
    m
}
