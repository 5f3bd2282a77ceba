//! Random DGPs of the factor plus sparse VAR family, the four competing
//! forecasting methods and relative-MSFE benchmark reports.
//!
//! Every draw comes from a ChaCha8 generator seeded by the scenario seed;
//! each model block reads its own stream so that changing, say, the number of
//! factors leaves the idiosyncratic block untouched.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{estimate_factors, FactorDecomposition};
use crate::forecast::{factor_predictor, msfe, rolling_one_step, FactorMethod};
use crate::linalg;
use crate::panel::{center_panel, Centering, TimeSeriesPanel};
use crate::selection::{bai_ng, local_ic, SelectionGrid, SelectionOptions};
use crate::var::{build_lag_matrix, companion_of, fit_rows};

const T3_CLIP: f64 = 50.0;
const RADIUS_TOL: f64 = 1e-6;

const STREAM_IDIO_SLOPES: u64 = 0;
const STREAM_SIGMA_V: u64 = 1;
const STREAM_LOADINGS: u64 = 2;
const STREAM_FACTOR_SLOPES: u64 = 3;
const STREAM_SIGMA_U: u64 = 4;
const STREAM_FACTOR_NOISE: u64 = 5;
const STREAM_IDIO_NOISE: u64 = 6;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Seed of replication `rep` of a scenario with seed `seed`.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 << 32);
    rng.set_word_pos(2 * rep as u128);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoadingPattern {
    #[default]
    Full,
    Half,
    /// Upper-right and lower-left blocks zero.
    BlockHalf,
}

impl LoadingPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadingPattern::Full => "full",
            LoadingPattern::Half => "half",
            LoadingPattern::BlockHalf => "block_half",
        }
    }
}

impl std::str::FromStr for LoadingPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(LoadingPattern::Full),
            "half" => Ok(LoadingPattern::Half),
            "block_half" => Ok(LoadingPattern::BlockHalf),
            other => Err(Error::invalid(format!("unknown loading pattern {other:?} (full, half, block_half)"))),
        }
    }
}

fn default_burn_in() -> usize {
    200
}

fn default_radius() -> f64 {
    0.8
}

fn default_boost() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSpec {
    pub n: usize,
    pub t: usize,
    pub r: usize,
    pub p: usize,
    pub p_f: usize,
    /// Row and column sparsity of the idiosyncratic slopes.
    pub k: usize,
    /// Nonzeros per row of `Σ_v`.
    pub k_sigma: usize,
    #[serde(default)]
    pub loading_pattern: LoadingPattern,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_boost")]
    pub diag_boost: f64,
}

impl DgpSpec {
    /// Dense slopes and covariance, full loadings, default burn-in.
    pub fn new(n: usize, t: usize, r: usize, p: usize, p_f: usize) -> Self {
        Self {
            n,
            t,
            r,
            p,
            p_f,
            k: n,
            k_sigma: n,
            loading_pattern: LoadingPattern::Full,
            seed: 0,
            burn_in: default_burn_in(),
            radius: default_radius(),
            diag_boost: default_boost(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sparsity(mut self, k: usize, k_sigma: usize) -> Self {
        self.k = k;
        self.k_sigma = k_sigma;
        self
    }

    pub fn label(&self) -> String {
        format!(
            "N{}_T{}_r{}_p{}_pf{}_k{}_ks{}_{}",
            self.n,
            self.t,
            self.r,
            self.p,
            self.p_f,
            self.k,
            self.k_sigma,
            self.loading_pattern.as_str()
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.t == 0 {
            return Err(Error::invalid("N and T must be positive"));
        }
        if self.r > self.n {
            return Err(Error::invalid(format!("r = {} exceeds N = {}", self.r, self.n)));
        }
        if self.p > 0 && (self.k == 0 || self.k > self.n) {
            return Err(Error::invalid(format!("slope sparsity k = {} must lie in 1..=N", self.k)));
        }
        if self.k_sigma == 0 || self.k_sigma > self.n {
            return Err(Error::invalid(format!("covariance sparsity k_sigma = {} must lie in 1..=N", self.k_sigma)));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(Error::invalid("spectral radius target must lie in (0, 1)"));
        }
        if !self.diag_boost.is_finite() {
            return Err(Error::invalid("diagonal boost must be finite"));
        }
        Ok(())
    }
}

fn student_t3(rng: &mut impl Rng) -> f64 {
    let d = StudentT::<f64>::new(3.0).expect("valid degrees of freedom");
    d.sample(rng).clamp(-T3_CLIP, T3_CLIP)
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Zero entries in ascending magnitude until every row and column of `a`
/// holds at most `k` nonzeros.
pub fn sparsify_rows_cols(a: &mut Array2<f64>, k: usize) {
    let (n, m) = a.dim();
    let mut rows = vec![0usize; n];
    let mut cols = vec![0usize; m];
    let mut entries = Vec::new();
    for ((i, j), v) in a.indexed_iter() {
        if *v != 0.0 {
            rows[i] += 1;
            cols[j] += 1;
            entries.push((v.abs(), i, j));
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    for (_, i, j) in entries {
        if rows[i] > k || cols[j] > k {
            a[[i, j]] = 0.0;
            rows[i] -= 1;
            cols[j] -= 1;
        }
    }
}

/// Common factor `c` such that the companion radius of `c·A` hits `target`.
fn rescale_to_radius(slopes: &mut [Array2<f64>], target: f64) -> Result<bool> {
    let radius = |c: f64| -> Result<f64> {
        let scaled: Vec<Array2<f64>> = slopes.iter().map(|a| a * c).collect();
        linalg::spectral_radius(&companion_of(&scaled).view())
    };
    if radius(1.0)? <= 0.0 {
        return Ok(false);
    }
    let mut hi = 1.0;
    let mut n_double = 0;
    while radius(hi)? < target {
        hi *= 2.0;
        n_double += 1;
        if n_double > 200 {
            return Ok(false);
        }
    }
    let mut lo = 0.0;
    let mut c = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let rm = radius(mid)?;
        c = mid;
        if (rm - target).abs() <= 0.1 * RADIUS_TOL {
            break;
        }
        if rm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for a in slopes.iter_mut() {
        a.mapv_inplace(|v| v * c);
    }
    Ok(true)
}

fn stable_var_masked(n: usize, p: usize, k: usize, target: f64, boost: f64, mask: Option<&Array2<bool>>, rng: &mut impl Rng) -> Result<Vec<Array2<f64>>> {
    if !(target > 0.0) {
        return Err(Error::invalid("spectral radius target must be positive"));
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("sparsity k = {k} must lie in 1..=N")));
    }
    // nilpotent draws cannot be rescaled; they are redrawn
    for _ in 0..100 {
        let mut slopes: Vec<Array2<f64>> = (0..p).map(|_| Array2::from_shape_fn((n, n), |_| student_t3(rng))).collect();
        for i in 0..n {
            slopes[0][[i, i]] += boost;
        }
        for a in slopes.iter_mut() {
            if let Some(m) = mask {
                a.zip_mut_with(m, |v, &keep| {
                    if !keep {
                        *v = 0.0
                    }
                });
            }
            sparsify_rows_cols(a, k);
        }
        if rescale_to_radius(&mut slopes, target)? {
            return Ok(slopes);
        }
    }
    Err(Error::Numerical("could not draw slopes with a positive spectral radius".into()))
}

/// Random VAR slopes with at most `k` nonzeros per row and column of each
/// lag matrix, scaled so that the companion spectral radius equals `target`.
pub fn gen_stable_sparse_var(n: usize, p: usize, k: usize, target: f64, diag_boost: f64, rng: &mut impl Rng) -> Result<Vec<Array2<f64>>> {
    stable_var_masked(n, p, k, target, diag_boost, None, rng)
}

/// Haar orthogonal matrix by Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Array2<f64> {
    let mut q = Array2::from_shape_fn((n, n), |_| normal(rng));
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let d = q.column(j).dot(&q.column(k));
                let qk = q.column(k).to_owned();
                q.column_mut(j).scaled_add(-d, &qk);
            }
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    q
}

/// Covariance with eigenvalues uniform on `eig_range` in a random basis,
/// off-diagonal entries zeroed in ascending magnitude to at most `k_sigma`
/// nonzeros per row, and eigenvalues clipped at `1e-6` if that broke
/// definiteness.
pub fn gen_spd_cov(n: usize, eig_range: (f64, f64), k_sigma: usize, rng: &mut impl Rng) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::invalid("covariance dimension must be positive"));
    }
    let (lo, hi) = eig_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::invalid("eigenvalue range must be positive and ordered"));
    }
    let q = random_orthogonal(n, rng);
    let d = Array1::from_shape_fn(n, |_| lo + (hi - lo) * rng.random::<f64>());
    let mut sigma = (&q * &d).dot(&q.t());
    sigma = (&sigma + &sigma.t()) * 0.5;
    let k = k_sigma.clamp(1, n);
    if k < n {
        let mut count = vec![n; n];
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((sigma[[i, j]].abs(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        for (_, i, j) in pairs {
            if count[i] > k || count[j] > k {
                sigma[[i, j]] = 0.0;
                sigma[[j, i]] = 0.0;
                count[i] -= 1;
                count[j] -= 1;
            }
        }
    }
    clip_to_pd(sigma)
}

fn clip_to_pd(sigma: Array2<f64>) -> Result<Array2<f64>> {
    let (vals, vecs) = linalg::sym_eigen(&sigma.view())?;
    if vals.iter().all(|v| *v >= 1e-6) {
        return Ok(sigma);
    }
    let clipped = vals.mapv(|v| v.max(1e-6));
    let s = (&vecs * &clipped).dot(&vecs.t());
    Ok((&s + &s.t()) * 0.5)
}

fn factor_split(r: usize) -> usize {
    r.div_ceil(2)
}

/// `r × r` mask that is false on the off-diagonal blocks of the factor split.
fn block_mask(r: usize) -> Array2<bool> {
    let r1 = factor_split(r);
    Array2::from_shape_fn((r, r), |(a, b)| (a < r1) == (b < r1))
}

/// Uniform[−1, 1] loadings with the requested zero pattern.
pub fn gen_loadings(n: usize, r: usize, pattern: LoadingPattern, rng: &mut impl Rng) -> Array2<f64> {
    let mut lam = Array2::from_shape_fn((n, r), |_| rng.random_range(-1.0f64..=1.0));
    match pattern {
        LoadingPattern::Full => {}
        LoadingPattern::Half => {
            for mut col in lam.columns_mut() {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(a.cmp(&b)));
                for &i in idx.iter().take(n / 2) {
                    col[i] = 0.0;
                }
            }
        }
        LoadingPattern::BlockHalf => {
            let (n1, r1) = (n / 2, factor_split(r));
            for ((i, j), v) in lam.indexed_iter_mut() {
                if (i < n1) != (j < r1) {
                    *v = 0.0;
                }
            }
        }
    }
    lam
}

/// Ground truth and data of one draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpRealization {
    pub spec: DgpSpec,
    pub panel: TimeSeriesPanel<f64>,
    pub true_loadings: Array2<f64>,
    /// `T × r`.
    pub true_factors: Array2<f64>,
    /// `T × N`.
    pub true_idio: Array2<f64>,
    pub true_slopes: Vec<Array2<f64>>,
    pub true_factor_slopes: Vec<Array2<f64>>,
    pub true_sigma_u: Array2<f64>,
    pub true_sigma_v: Array2<f64>,
    /// Continuation of the same trajectory after the training sample.
    pub test_panel: Array2<f64>,
    pub test_factors: Array2<f64>,
    pub test_idio: Array2<f64>,
}

fn run_var(slopes: &[Array2<f64>], chol: &Array2<f64>, len: usize, rng: &mut impl Rng) -> Array2<f64> {
    let n = chol.nrows();
    let mut x = Array2::<f64>::zeros((len, n));
    for t in 0..len {
        let z = Array1::from_shape_fn(n, |_| normal(rng));
        let mut row = chol.dot(&z);
        for (j, a) in slopes.iter().enumerate() {
            if t > j {
                row += &a.dot(&x.row(t - j - 1));
            }
        }
        x.row_mut(t).assign(&row);
    }
    x
}

pub fn simulate(spec: &DgpSpec, test_length: usize) -> Result<DgpRealization> {
    spec.validate()?;
    let (n, r) = (spec.n, spec.r);
    let seed = spec.seed;
    let slopes = gen_stable_sparse_var(n, spec.p, spec.k, spec.radius, spec.diag_boost, &mut stream(seed, STREAM_IDIO_SLOPES))?;
    let sigma_v = gen_spd_cov(n, (1.0, 10.0), spec.k_sigma, &mut stream(seed, STREAM_SIGMA_V))?;
    let loadings = gen_loadings(n, r, spec.loading_pattern, &mut stream(seed, STREAM_LOADINGS));
    let block = spec.loading_pattern == LoadingPattern::BlockHalf && r > 1;
    let mask = block.then(|| block_mask(r));
    let (factor_slopes, sigma_u) = if r > 0 {
        let pf = stable_var_masked(r, spec.p_f, r, spec.radius, 0.0, mask.as_ref(), &mut stream(seed, STREAM_FACTOR_SLOPES))?;
        let mut su = gen_spd_cov(r, (1.0, 10.0), r, &mut stream(seed, STREAM_SIGMA_U))?;
        if let Some(m) = &mask {
            su.zip_mut_with(m, |v, &keep| {
                if !keep {
                    *v = 0.0
                }
            });
        }
        (pf, su)
    } else {
        (Vec::new(), Array2::zeros((0, 0)))
    };
    for (name, s) in [("idiosyncratic", &slopes), ("factor", &factor_slopes)] {
        if !s.is_empty() {
            let rho = linalg::spectral_radius(&companion_of(s).view())?;
            if rho > spec.radius + RADIUS_TOL || rho >= 1.0 {
                return Err(Error::Numerical(format!("generated {name} VAR has spectral radius {rho}")));
            }
        }
    }
    let len = spec.burn_in + spec.t + test_length;
    let xi = run_var(&slopes, &linalg::cholesky(&sigma_v.view())?, len, &mut stream(seed, STREAM_IDIO_NOISE));
    let f = if r > 0 {
        run_var(&factor_slopes, &linalg::cholesky(&sigma_u.view())?, len, &mut stream(seed, STREAM_FACTOR_NOISE))
    } else {
        Array2::zeros((len, 0))
    };
    let (b, e) = (spec.burn_in, spec.burn_in + spec.t);
    let true_factors = f.slice(s![b..e, ..]).to_owned();
    let true_idio = xi.slice(s![b..e, ..]).to_owned();
    let test_factors = f.slice(s![e.., ..]).to_owned();
    let test_idio = xi.slice(s![e.., ..]).to_owned();
    let x = true_factors.dot(&loadings.t()) + &true_idio;
    let test_panel = test_factors.dot(&loadings.t()) + &test_idio;
    Ok(DgpRealization {
        spec: spec.clone(),
        panel: TimeSeriesPanel::unlabeled(x)?,
        true_loadings: loadings,
        true_factors,
        true_idio,
        true_slopes: slopes,
        true_factor_slopes: factor_slopes,
        true_sigma_u: sigma_u,
        true_sigma_v: sigma_v,
        test_panel,
        test_factors,
        test_idio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ArBic,
    LSel,
    FBnAr,
    FlSel,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ArBic, Method::LSel, Method::FBnAr, Method::FlSel];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ArBic => "ar_bic",
            Method::LSel => "l_sel",
            Method::FBnAr => "f_bn_ar",
            Method::FlSel => "fl_sel",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?} (ar_bic, l_sel, f_bn_ar, fl_sel)")))
    }
}

/// Fixed choices that bypass the data-driven selection of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Overrides {
    pub r: Option<usize>,
    pub p: Option<usize>,
    pub p_f: Option<usize>,
    /// Order of every univariate AR (ar_bic and f_bn_ar).
    pub ar_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub grid: SelectionGrid,
    pub selection: SelectionOptions<f64>,
    /// Largest univariate AR order considered.
    pub ar_max: usize,
    pub factor_method: FactorMethod,
    /// Number of leading series that are forecast and scored.
    pub n_eval: usize,
    pub overrides: Overrides,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            grid: SelectionGrid::default(),
            selection: SelectionOptions::default(),
            ar_max: 8,
            factor_method: FactorMethod::YuleWalker,
            n_eval: 10,
            overrides: Overrides::default(),
        }
    }
}

impl MethodConfig {
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.selection.parallel = parallel;
        self.selection.var.parallel = parallel;
        self
    }
}

/// Orders chosen for one forecast series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesChoice {
    pub series: usize,
    pub r: usize,
    pub p: usize,
    pub p_f: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    pub method: Method,
    /// `test_length × n_eval` one-step predictions.
    pub predictions: Array2<f64>,
    pub msfe: f64,
    pub choices: Vec<SeriesChoice>,
}

/// OLS fit of an AR(q) without intercept on rows `start..T`.
fn ar_ols(x: &ArrayView1<f64>, q: usize, start: usize) -> Result<(Array1<f64>, f64)> {
    let t = x.len();
    let n = t - start;
    let y = x.slice(s![start..]);
    if q == 0 {
        return Ok((Array1::zeros(0), y.dot(&y)));
    }
    let z = Array2::from_shape_fn((n, q), |(k, j)| x[start + k - j - 1]);
    let (b, _) = linalg::pinv_solve_sym(&z.t().dot(&z).view(), &z.t().dot(&y).insert_axis(Axis(1)).view(), 1e-12)?;
    let beta = b.column(0).to_owned();
    let e = &y - &z.dot(&beta);
    Ok((beta, e.dot(&e)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArCriterion {
    Aic,
    Bic,
}

/// Order in `0..=max` minimising the criterion on the common sample
/// `max..T`, and its coefficients.
fn select_ar(x: &ArrayView1<f64>, max: usize, crit: ArCriterion) -> Result<(usize, Array1<f64>)> {
    let t = x.len();
    if t <= max + 1 {
        return Err(Error::SampleSize(format!("AR order search up to {max} needs more than {} observations", max + 1)));
    }
    let n = (t - max) as f64;
    let pen = match crit {
        ArCriterion::Aic => 2.0,
        ArCriterion::Bic => n.ln(),
    };
    let mut best: Option<(f64, usize, Array1<f64>)> = None;
    for q in 0..=max {
        let (beta, rss) = ar_ols(x, q, max)?;
        let v = (rss / n).max(1e-300).ln() + pen * q as f64 / n;
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, q, beta));
        }
    }
    let (_, q, beta) = best.expect("order 0 evaluated");
    Ok((q, beta))
}

/// One-step AR predictions over the test stream around mean `mu`.
fn ar_rolling(train: &ArrayView1<f64>, test: &ArrayView1<f64>, mu: f64, beta: &Array1<f64>) -> Array1<f64> {
    let t = train.len();
    let value = |k: usize| if k < t { train[k] } else { test[k - t] };
    Array1::from_shape_fn(test.len(), |k| {
        let now = t + k;
        mu + beta.iter().enumerate().map(|(j, b)| b * (value(now - j - 1) - mu)).sum::<f64>()
    })
}

/// Log determinant of a residual covariance; `None` if singular.
fn log_det(s: &Array2<f64>) -> Option<f64> {
    if s.is_empty() {
        return Some(0.0);
    }
    let l = linalg::cholesky(&s.view()).ok()?;
    Some(2.0 * l.diag().iter().map(|d| d.ln()).sum::<f64>())
}

/// Factor VAR order by BIC on the common sample.
fn factor_lag_bic(f: &ArrayView2<f64>, max: usize) -> Result<usize> {
    let (t, r) = f.dim();
    if r == 0 || max == 0 {
        return Ok(0);
    }
    if t <= max * r + 1 {
        return Err(Error::SampleSize("factor VAR lag search needs more observations".into()));
    }
    let n = (t - max) as f64;
    let mut best = (f64::INFINITY, 0);
    for q in 0..=max {
        let y = f.slice(s![max.., ..]).to_owned();
        let resid = if q == 0 {
            y
        } else {
            let (z, _) = build_lag_matrix(f, q)?;
            let z = z.slice(s![max - q.., ..]).to_owned();
            let (b, _) = linalg::pinv_solve_sym(&z.t().dot(&z).view(), &z.t().dot(&y).view(), 1e-12)?;
            &y - &z.dot(&b)
        };
        let cov = resid.t().dot(&resid) / n;
        let Some(ld) = log_det(&cov) else { continue };
        let v = ld + (q * r * r) as f64 * n.ln() / n;
        if v < best.0 {
            best = (v, q);
        }
    }
    Ok(best.1)
}

/// `1 × N` rows with `coef[j]` in column `i`.
fn univariate_rows(n: usize, i: usize, coef: &Array1<f64>) -> Vec<Array2<f64>> {
    coef.iter()
        .map(|c| {
            let mut a = Array2::zeros((1, n));
            a[[0, i]] = *c;
            a
        })
        .collect()
}

/// Lasso rows `1 × N` per lag from a lag-major coefficient vector.
fn lag_rows(beta: &Array1<f64>, n: usize, p: usize) -> Vec<Array2<f64>> {
    (0..p).map(|j| beta.slice(s![j * n..(j + 1) * n]).to_owned().insert_axis(Axis(0))).collect()
}

struct Fitted {
    centred: TimeSeriesPanel<f64>,
    centering: Centering<f64>,
    decomps: BTreeMap<usize, FactorDecomposition<f64>>,
}

impl Fitted {
    fn new(panel: &TimeSeriesPanel<f64>, demean: bool) -> Result<Self> {
        let (centred, centering) = center_panel(panel, demean, false)?;
        Ok(Self {
            centred,
            centering,
            decomps: BTreeMap::new(),
        })
    }

    fn decomposition(&mut self, r: usize) -> Result<&FactorDecomposition<f64>> {
        if !self.decomps.contains_key(&r) {
            let d = estimate_factors(&self.centred, r)?;
            self.decomps.insert(r, d);
        }
        Ok(&self.decomps[&r])
    }
}

/// Combined forecast of series `i` with fixed orders.
fn combined_series(fit: &mut Fitted, test: &ArrayView2<f64>, i: usize, (r, p, p_f): (usize, usize, usize), cfg: &MethodConfig) -> Result<Array1<f64>> {
    let n = fit.centred.n();
    let mut var_opts = cfg.selection.var;
    var_opts.parallel = false;
    let centering = fit.centering.clone();
    let d = fit.decomposition(r)?;
    let fv = factor_predictor(&d.factors.view(), if r == 0 { 0 } else { p_f }, cfg.factor_method)?;
    let rows = if p > 0 {
        let rf = fit_rows(&d.idio.view(), p, &[i], &var_opts)?;
        lag_rows(&rf[0].beta, n, p)
    } else {
        Vec::new()
    };
    Ok(rolling_one_step(d, &fv, &rows, &centering, &[i], test)?.column(0).to_owned())
}

fn local_choice(panel: &TimeSeriesPanel<f64>, i: usize, grid: SelectionGrid, cfg: &MethodConfig) -> Result<(usize, usize, usize)> {
    let o = cfg.overrides;
    if let (Some(r), Some(p), Some(p_f)) = (o.r, o.p, o.p_f) {
        return Ok((r, p, p_f));
    }
    let g = SelectionGrid {
        r_max: o.r.unwrap_or(grid.r_max),
        p_max: o.p.unwrap_or(grid.p_max),
        p_f_max: o.p_f.unwrap_or(grid.p_f_max),
    };
    let sel = local_ic(panel, i, g, &cfg.selection)?;
    // an override fixes the value; the sweep only starts at zero
    let fixed = |v: Option<usize>, chosen: usize| v.unwrap_or(chosen);
    if o.r.is_some() || o.p.is_some() || o.p_f.is_some() {
        let best = sel
            .grid
            .iter()
            .filter(|c| o.r.is_none_or(|v| c.r == v) && o.p.is_none_or(|v| c.p == v) && o.p_f.is_none_or(|v| c.p_f == v || c.r == 0))
            .filter_map(|c| c.value.map(|v| (v, c)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, c)| (c.r, c.p, if c.r == 0 { 0 } else { c.p_f }))
            .ok_or_else(|| Error::invalid("no feasible cell for the requested overrides"))?;
        return Ok((fixed(o.r, best.0), fixed(o.p, best.1), if fixed(o.r, best.0) == 0 { 0 } else { fixed(o.p_f, best.2) }));
    }
    Ok((sel.r, sel.p, sel.p_f))
}

/// Fit `method` on the training panel and forecast the first `n_eval`
/// series one step ahead over the whole test stream.
pub fn run_method(method: Method, real: &DgpRealization, cfg: &MethodConfig) -> Result<MethodRun> {
    forecast_method(method, &real.panel, &real.test_panel.view(), cfg)
}

/// As [`run_method`] for an arbitrary training panel and test continuation.
pub fn forecast_method(method: Method, panel: &TimeSeriesPanel<f64>, test: &ArrayView2<f64>, cfg: &MethodConfig) -> Result<MethodRun> {
    let n = panel.n();
    if test.ncols() != n {
        return Err(Error::dim("test panel width differs from the training panel"));
    }
    if test.nrows() == 0 {
        return Err(Error::invalid("empty test stream"));
    }
    let n_eval = cfg.n_eval.min(n).max(1);
    let mut pred = Array2::zeros((test.nrows(), n_eval));
    let mut choices = Vec::with_capacity(n_eval);
    let o = cfg.overrides;
    match method {
        Method::ArBic => {
            for i in 0..n_eval {
                let x = panel.values().column(i);
                let mu = x.mean().unwrap_or(0.0);
                let xc = x.mapv(|v| v - mu);
                let (q, beta) = match o.ar_order {
                    Some(q) => (q, ar_ols(&xc.view(), q, q)?.0),
                    None => select_ar(&xc.view(), cfg.ar_max, ArCriterion::Bic)?,
                };
                pred.column_mut(i).assign(&ar_rolling(&x, &test.column(i), mu, &beta));
                choices.push(SeriesChoice { series: i, r: 0, p: q, p_f: 0 });
            }
        }
        Method::LSel | Method::FlSel => {
            let mut fit = Fitted::new(panel, cfg.selection.demean)?;
            let grid = if method == Method::LSel {
                SelectionGrid {
                    r_max: 0,
                    p_f_max: 0,
                    ..cfg.grid
                }
            } else {
                cfg.grid
            };
            let mut ocfg = *cfg;
            if method == Method::LSel {
                ocfg.overrides.r = Some(0);
                ocfg.overrides.p_f = Some(0);
            }
            for i in 0..n_eval {
                let (r, p, p_f) = local_choice(panel, i, grid, &ocfg)?;
                pred.column_mut(i).assign(&combined_series(&mut fit, test, i, (r, p, p_f), cfg)?);
                choices.push(SeriesChoice { series: i, r, p, p_f });
            }
        }
        Method::FBnAr => {
            let mut fit = Fitted::new(panel, true)?;
            let r = match o.r {
                Some(r) => r,
                None => bai_ng(panel, cfg.grid.r_max.min(panel.t().min(n)))?,
            };
            let centering = fit.centering.clone();
            let d = fit.decomposition(r)?;
            let p_f = match o.p_f {
                Some(v) if r > 0 => v,
                _ => factor_lag_bic(&d.factors.view(), cfg.grid.p_f_max)?,
            };
            let fv = factor_predictor(&d.factors.view(), p_f, cfg.factor_method)?;
            for i in 0..n_eval {
                let xi = d.idio.column(i);
                let (q, beta) = match o.ar_order {
                    Some(q) => (q, ar_ols(&xi, q, q)?.0),
                    None => select_ar(&xi, cfg.ar_max, ArCriterion::Aic)?,
                };
                let rows = univariate_rows(n, i, &beta);
                let col = rolling_one_step(d, &fv, &rows, &centering, &[i], test)?;
                pred.column_mut(i).assign(&col.column(0));
                choices.push(SeriesChoice { series: i, r, p: q, p_f });
            }
        }
    }
    let cols: Vec<usize> = (0..n_eval).collect();
    let actual = test.slice(s![.., ..n_eval]);
    let m = msfe(&pred.view(), &actual, &cols)?;
    Ok(MethodRun {
        method,
        predictions: pred,
        msfe: m.average,
        choices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// MSFE per replication; `None` where the method failed.
    pub per_replication: Vec<Option<f64>>,
    /// Mean over successful replications.
    pub msfe: Option<f64>,
    /// `msfe / msfe(fl_sel)`.
    pub relative: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub label: String,
    pub spec: DgpSpec,
    pub methods: Vec<MethodSummary>,
}

impl ScenarioResult {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub replications: usize,
    pub test_length: usize,
    pub n_eval: usize,
    pub scenarios: Vec<ScenarioResult>,
    /// Wall-clock time; not serialised so that reports are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl BenchmarkReport {
    /// Mean relative MSFE of `method` over the scenarios accepted by `keep`.
    pub fn overall_relative(&self, method: Method, keep: impl Fn(&DgpSpec) -> bool) -> Option<f64> {
        let vals: Vec<f64> = self
            .scenarios
            .iter()
            .filter(|s| keep(&s.spec))
            .filter_map(|s| s.method(method).and_then(|m| m.relative))
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::invalid(e.to_string());
        w.write_record([
            "scenario", "n", "t", "r", "p", "p_f", "k", "k_sigma", "loadings", "method", "msfe", "relative", "successes", "failures",
        ])
        .map_err(io)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for sc in &self.scenarios {
            let s = &sc.spec;
            for m in &sc.methods {
                let ok = m.per_replication.iter().filter(|v| v.is_some()).count();
                w.write_record([
                    sc.label.clone(),
                    s.n.to_string(),
                    s.t.to_string(),
                    s.r.to_string(),
                    s.p.to_string(),
                    s.p_f.to_string(),
                    s.k.to_string(),
                    s.k_sigma.to_string(),
                    s.loading_pattern.as_str().to_string(),
                    m.method.to_string(),
                    opt(m.msfe),
                    opt(m.relative),
                    ok.to_string(),
                    m.failures.len().to_string(),
                ])
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub replications: usize,
    pub test_length: usize,
    pub method: MethodConfig,
    /// Run scenario × replication cells on the rayon pool.
    pub parallel: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            replications: 100,
            test_length: 10_000,
            method: MethodConfig::default(),
            parallel: true,
        }
    }
}

fn one_cell(spec: &DgpSpec, rep: usize, cfg: &BenchmarkConfig) -> Vec<std::result::Result<f64, String>> {
    let s = spec.clone().with_seed(replication_seed(spec.seed, rep));
    let real = match simulate(&s, cfg.test_length) {
        Ok(r) => r,
        Err(e) => return cfg.methods.iter().map(|_| Err(format!("rep {rep}: simulation failed: {e}"))).collect(),
    };
    let mcfg = cfg.method.with_parallel(cfg.parallel);
    cfg.methods
        .iter()
        .map(|&m| run_method(m, &real, &mcfg).map(|run| run.msfe).map_err(|e| format!("rep {rep}: {e}")))
        .collect()
}

/// MSFE of every method on every scenario, averaged over replications.
/// Replication `j` of a scenario uses the seed `replication_seed(spec.seed, j)`.
pub fn run_benchmark(scenarios: &[DgpSpec], cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if cfg.replications == 0 {
        return Err(Error::invalid("at least one replication is required"));
    }
    if cfg.methods.is_empty() {
        return Err(Error::invalid("no methods selected"));
    }
    if cfg.test_length == 0 {
        return Err(Error::invalid("test length must be positive"));
    }
    for s in scenarios {
        s.validate()?;
    }
    let start = Instant::now();
    let cells: Vec<(usize, usize)> = (0..scenarios.len()).flat_map(|s| (0..cfg.replications).map(move |j| (s, j))).collect();
    let run = |&(s, j): &(usize, usize)| one_cell(&scenarios[s], j, cfg);
    let outcomes: Vec<Vec<std::result::Result<f64, String>>> = if cfg.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    };
    let mut results = Vec::with_capacity(scenarios.len());
    for (si, spec) in scenarios.iter().enumerate() {
        let rows = &outcomes[si * cfg.replications..(si + 1) * cfg.replications];
        let mut methods: Vec<MethodSummary> = cfg
            .methods
            .iter()
            .enumerate()
            .map(|(mi, &method)| {
                let per: Vec<Option<f64>> = rows.iter().map(|r| r[mi].as_ref().ok().copied()).collect();
                let failures: Vec<String> = rows.iter().filter_map(|r| r[mi].as_ref().err().cloned()).collect();
                let ok: Vec<f64> = per.iter().flatten().copied().collect();
                let msfe = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
                MethodSummary {
                    method,
                    per_replication: per,
                    msfe,
                    relative: None,
                    failures,
                }
            })
            .collect();
        let reference = methods.iter().find(|m| m.method == Method::FlSel).and_then(|m| m.msfe);
        for m in methods.iter_mut() {
            m.relative = match (m.msfe, reference) {
                (Some(v), Some(r)) if r > 0.0 => Some(if m.method == Method::FlSel { 1.0 } else { v / r }),
                _ => None,
            };
        }
        results.push(ScenarioResult {
            label: spec.label(),
            spec: spec.clone(),
            methods,
        });
    }
    Ok(BenchmarkReport {
        replications: cfg.replications,
        test_length: cfg.test_length,
        n_eval: cfg.method.n_eval,
        scenarios: results,
        runtime: start.elapsed(),
    })
}

/// Cartesian product of scenario settings; scenario `i` gets seed
/// `replication_seed(base_seed, i)`.
pub fn scenario_grid(ns: &[usize], ts: &[usize], rs: &[usize], ps: &[usize], p_fs: &[usize], ks: &[usize], dense_sigma: bool, pattern: LoadingPattern, base_seed: u64) -> Vec<DgpSpec> {
    let mut out = Vec::new();
    for &n in ns {
        for &t in ts {
            for &r in rs {
                for &p in ps {
                    for &p_f in p_fs {
                        for &k in ks {
                            let k_sigma = if dense_sigma { n } else { (n / 10).max(1) };
                            let mut s = DgpSpec::new(n, t, r, p, p_f).with_sparsity(k.min(n), k_sigma);
                            s.loading_pattern = pattern;
                            out.push(s);
                        }
                    }
                }
            }
        }
    }
    for (i, s) in out.iter_mut().enumerate() {
        s.seed = replication_seed(base_seed, i);
    }
    out
}

/// Sample covariance `XᵀX / T` of mean-zero rows.
pub fn sample_covariance(x: &ArrayView2<f64>) -> Array2<f64> {
    x.t().dot(x) / x.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        stream(seed, 0)
    }

    fn nnz_counts(a: &Array2<f64>) -> (Vec<usize>, Vec<usize>) {
        let rows = a.rows().into_iter().map(|r| r.iter().filter(|v| **v != 0.0).count()).collect();
        let cols = a.columns().into_iter().map(|c| c.iter().filter(|v| **v != 0.0).count()).collect();
        (rows, cols)
    }

    #[test]
    fn sparsify_keeps_largest() {
        let mut a = ndarray::array![[3.0, 1.0, 0.5], [0.2, 2.0, 4.0], [1.5, 0.1, 0.3]];
        sparsify_rows_cols(&mut a, 1);
        let (r, c) = nnz_counts(&a);
        assert!(r.iter().chain(&c).all(|&k| k <= 1));
        assert_eq!(a[[1, 2]], 4.0);
        assert_eq!(a[[0, 0]], 3.0);
    }

    #[test]
    fn stable_var_hits_radius() {
        for (n, p, k) in [(10, 1, 10), (12, 3, 4), (6, 2, 1)] {
            let a = gen_stable_sparse_var(n, p, k, 0.8, 0.4, &mut rng(7)).unwrap();
            assert_eq!(a.len(), p);
            let rho = linalg::spectral_radius(&companion_of(&a).view()).unwrap();
            assert!((rho - 0.8).abs() <= 1e-6, "radius {rho}");
            for m in &a {
                let (r, c) = nnz_counts(m);
                assert!(r.iter().chain(&c).all(|&x| x <= k));
            }
        }
        assert!(gen_stable_sparse_var(4, 0, 2, 0.8, 0.4, &mut rng(1)).unwrap().is_empty());
        assert!(gen_stable_sparse_var(4, 1, 2, 0.0, 0.4, &mut rng(1)).is_err());
        assert!(gen_stable_sparse_var(4, 1, 5, 0.8, 0.4, &mut rng(1)).is_err());
    }

    #[test]
    fn covariance_draws() {
        let s = gen_spd_cov(8, (1.0, 10.0), 8, &mut rng(3)).unwrap();
        let (vals, _) = linalg::sym_eigen(&s.view()).unwrap();
        assert!(vals.iter().all(|v| *v >= 1.0 - 1e-9 && *v <= 10.0 + 1e-9));
        assert_eq!(s, s.t());
        let one = gen_spd_cov(1, (1.0, 10.0), 1, &mut rng(3)).unwrap();
        assert!(one[[0, 0]] >= 1.0 && one[[0, 0]] <= 10.0);
        let sparse = gen_spd_cov(10, (1.0, 10.0), 2, &mut rng(4)).unwrap();
        assert!(linalg::cholesky(&sparse.view()).is_ok());
        assert_eq!(sparse, sparse.t());
    }

    #[test]
    fn loading_patterns() {
        assert_eq!(gen_loadings(5, 0, LoadingPattern::Full, &mut rng(1)).dim(), (5, 0));
        let full = gen_loadings(10, 3, LoadingPattern::Full, &mut rng(1));
        assert!(full.iter().all(|v| *v != 0.0 && v.abs() <= 1.0));
        let half = gen_loadings(10, 3, LoadingPattern::Half, &mut rng(1));
        for c in half.columns() {
            assert_eq!(c.iter().filter(|v| **v == 0.0).count(), 5);
        }
        let b = gen_loadings(10, 2, LoadingPattern::BlockHalf, &mut rng(1));
        for i in 0..10 {
            assert_eq!(b[[i, 0]] == 0.0, i >= 5);
            assert_eq!(b[[i, 1]] == 0.0, i < 5);
        }
    }

    #[test]
    fn panel_identity_and_determinism() {
        let spec = DgpSpec::new(8, 60, 2, 1, 1).with_sparsity(3, 8).with_seed(11);
        let a = simulate(&spec, 20).unwrap();
        let b = simulate(&spec, 20).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.panel.values(), &(a.true_factors.dot(&a.true_loadings.t()) + &a.true_idio));
        assert_eq!(a.test_panel, a.test_factors.dot(&a.true_loadings.t()) + &a.test_idio);
        assert_eq!(a.test_panel.dim(), (20, 8));
        let c = simulate(&spec.clone().with_seed(12), 20).unwrap();
        assert_ne!(a.panel, c.panel);
    }

    #[test]
    fn block_half_factor_blocks() {
        let mut spec = DgpSpec::new(10, 40, 4, 0, 2).with_seed(5);
        spec.loading_pattern = LoadingPattern::BlockHalf;
        let real = simulate(&spec, 5).unwrap();
        let m = block_mask(4);
        for a in real.true_factor_slopes.iter().chain(std::iter::once(&real.true_sigma_u)) {
            for ((i, j), v) in a.indexed_iter() {
                if !m[[i, j]] {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(DgpSpec::new(5, 10, 6, 0, 0).validate().is_err());
        assert!(DgpSpec::new(5, 10, 1, 1, 0).with_sparsity(0, 5).validate().is_err());
        assert!(DgpSpec::new(5, 10, 1, 0, 0).with_sparsity(0, 5).validate().is_ok());
        let s: DgpSpec = serde_json::from_str(r#"{"n":5,"t":10,"r":1,"p":1,"p_f":1,"k":2,"k_sigma":5}"#).unwrap();
        assert_eq!(s.burn_in, 200);
        assert!(serde_json::from_str::<DgpSpec>(r#"{"n":5,"t":10,"r":1,"p":1,"p_f":1,"k":2,"k_sigma":5,"x":1}"#).is_err());
    }

    #[test]
    fn ar_selection_recovers_order() {
        let mut g = rng(9);
        let mut x = vec![0.0f64; 2000];
        for t in 2..x.len() {
            x[t] = 0.5 * x[t - 1] - 0.3 * x[t - 2] + normal(&mut g);
        }
        let x = Array1::from(x);
        let (q, beta) = select_ar(&x.view(), 8, ArCriterion::Bic).unwrap();
        assert_eq!(q, 2);
        assert!((beta[0] - 0.5).abs() < 0.06 && (beta[1] + 0.3).abs() < 0.06);
    }

    #[test]
    fn ar_rolling_by_hand() {
        let train = ndarray::array![1.0, 2.0, 3.0];
        let test = ndarray::array![5.0, 4.0];
        let p = ar_rolling(&train.view(), &test.view(), 1.0, &ndarray::array![0.5]);
        assert_eq!(p, ndarray::array![2.0, 3.0]);
    }

    #[test]
    fn forced_factor_paths_agree() {
        let spec = DgpSpec::new(12, 80, 2, 0, 1).with_seed(3);
        let real = simulate(&spec, 30).unwrap();
        let mut cfg = MethodConfig {
            n_eval: 4,
            ..MethodConfig::default()
        };
        cfg.overrides = Overrides {
            r: Some(2),
            p: Some(0),
            p_f: Some(1),
            ar_order: Some(0),
        };
        let a = run_method(Method::FBnAr, &real, &cfg).unwrap();
        let b = run_method(Method::FlSel, &real, &cfg).unwrap();
        assert_eq!(a.predictions, b.predictions);
    }

    #[test]
    fn report_reference_is_one() {
        let spec = DgpSpec::new(6, 50, 1, 1, 1).with_sparsity(2, 6).with_seed(2);
        let cfg = BenchmarkConfig {
            methods: vec![Method::ArBic, Method::FlSel],
            replications: 2,
            test_length: 40,
            method: MethodConfig {
                grid: SelectionGrid {
                    r_max: 2,
                    p_max: 1,
                    p_f_max: 1,
                },
                n_eval: 3,
                ..MethodConfig::default()
            },
            parallel: true,
        };
        let rep = run_benchmark(std::slice::from_ref(&spec), &cfg).unwrap();
        let fl = rep.scenarios[0].method(Method::FlSel).unwrap();
        assert_eq!(fl.relative, Some(1.0));
        let serial = run_benchmark(&[spec], &BenchmarkConfig { parallel: false, ..cfg }).unwrap();
        assert_eq!(rep.to_json().unwrap(), serial.to_json().unwrap());
        assert_eq!(rep.to_csv().unwrap(), serial.to_csv().unwrap());
        assert!(rep.to_csv().unwrap().lines().count() == 3);
    }
}
