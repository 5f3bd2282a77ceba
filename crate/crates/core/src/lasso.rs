//! Weighted lasso by cyclic coordinate descent.
//!
//! Solves, for one response `y` on a design `X` with `n` rows,
//!
//! ```text
//! minimize  (1/n) ‖y - Xβ‖² + λ Σ_i g_i |β_i|
//! ```
//!
//! using covariance updates: the solver only touches the Gram matrix `XᵀX`,
//! the cross products `Xᵀy` and `yᵀy`, so one Gram serves every row of a VAR.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Floor added to first-stage magnitudes when forming adaptive weights.
pub const ADAPTIVE_WEIGHT_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoRowSolution<T> {
    pub beta: Array1<T>,
    pub lambda: T,
    /// Penalised objective at `beta`.
    pub objective: T,
    /// Largest KKT residual at `beta`.
    pub kkt_violation: T,
    /// Coordinate-descent sweeps performed.
    pub iterations: usize,
    /// Objective after every sweep, when tracing was requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<T>,
}

impl<T: Scalar> LassoRowSolution<T> {
    pub fn active_set(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != T::zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn df(&self) -> usize {
        self.beta.iter().filter(|b| **b != T::zero()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub coef_tol: T,
    /// Required KKT accuracy at return.
    pub kkt_tol: T,
    pub max_sweeps: usize,
    pub trace: bool,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        // looser in single precision, where rounding alone exceeds 1e-6
        Self {
            coef_tol: T::c(1e-7).max(T::c(100.0) * T::epsilon()),
            kkt_tol: T::c(1e-6).max(T::c(1000.0) * T::epsilon()),
            max_sweeps: 10_000,
            trace: false,
        }
    }
}

/// Penalty-selection criterion for the lasso path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
    /// BIC scaled by `log(log(T))`.
    Mbic,
}

impl Criterion {
    /// Penalty per degree of freedom for sample size `t`.
    pub fn c_t<T: Scalar>(self, t: usize) -> T {
        let lt = T::n(t).ln();
        match self {
            Criterion::Aic => T::c(2.0),
            Criterion::Bic => lt,
            Criterion::Mbic => lt * lt.ln(),
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            "mbic" => Ok(Criterion::Mbic),
            other => Err(Error::invalid(format!("unknown criterion {other:?} (aic, bic, mbic)"))),
        }
    }
}

/// Sufficient statistics of a single lasso regression.
#[derive(Debug, Clone)]
pub struct RowProblem<'a, T> {
    gram: &'a Array2<T>,
    xty: Array1<T>,
    yty: T,
    n: usize,
}

impl<'a, T: Scalar> RowProblem<'a, T> {
    /// `gram = XᵀX`, `xty = Xᵀy`, `yty = yᵀy`, `n` rows in `X`.
    pub fn new(gram: &'a Array2<T>, xty: Array1<T>, yty: T, n: usize) -> Result<Self> {
        let p = gram.nrows();
        if gram.ncols() != p || xty.len() != p {
            return Err(Error::dim("lasso: gram / cross-product shapes disagree"));
        }
        if n == 0 {
            return Err(Error::dim("lasso: empty sample"));
        }
        Ok(Self { gram, xty, yty, n })
    }

    pub fn n_features(&self) -> usize {
        self.xty.len()
    }

    pub fn n_obs(&self) -> usize {
        self.n
    }

    /// Smallest penalty at which `β = 0` is optimal, rounded up by a few
    /// ulps so that the solver returns exact zeros there.
    pub fn lambda_max(&self, weights: &ArrayView1<T>) -> T {
        let scale = T::c(2.0) / T::n(self.n);
        let m = self
            .xty
            .iter()
            .zip(weights.iter())
            .fold(T::zero(), |m, (&c, &g)| m.max((c * scale).abs() / g));
        m * (T::one() + T::c(8.0) * T::epsilon())
    }

    pub fn rss(&self, beta: &ArrayView1<T>) -> T {
        let gb = self.gram.dot(beta);
        (self.yty - T::c(2.0) * beta.dot(&self.xty) + beta.dot(&gb)).max(T::zero())
    }

    pub fn objective(&self, beta: &ArrayView1<T>, lambda: T, weights: &ArrayView1<T>) -> T {
        let pen: T = beta.iter().zip(weights.iter()).map(|(&b, &g)| (g * b).abs()).sum();
        self.rss(beta) / T::n(self.n) + lambda * pen
    }

    /// Largest violation of the optimality conditions at `beta`.
    pub fn kkt_violation(&self, beta: &ArrayView1<T>, lambda: T, weights: &ArrayView1<T>) -> T {
        let q = &self.xty - &self.gram.dot(beta);
        self.kkt_from_residual_products(beta, &q.view(), lambda, weights)
    }

    fn kkt_from_residual_products(
        &self,
        beta: &ArrayView1<T>,
        q: &ArrayView1<T>,
        lambda: T,
        weights: &ArrayView1<T>,
    ) -> T {
        let scale = T::c(2.0) / T::n(self.n);
        let mut worst = T::zero();
        for i in 0..beta.len() {
            let grad = -scale * q[i];
            let pen = lambda * weights[i];
            let v = if beta[i] != T::zero() {
                (grad + pen * beta[i].signum()).abs()
            } else {
                (grad.abs() - pen).max(T::zero())
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Coordinate descent from `warm` (or zero).
    pub fn solve(
        &self,
        lambda: T,
        weights: &ArrayView1<T>,
        warm: Option<&Array1<T>>,
        opts: &SolverOptions<T>,
    ) -> Result<LassoRowSolution<T>> {
        let p = self.n_features();
        if weights.len() != p {
            return Err(Error::dim(format!("{} weights for {p} coefficients", weights.len())));
        }
        if !(lambda >= T::zero()) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        if weights.iter().any(|g| !(*g > T::zero())) {
            return Err(Error::invalid("lasso weights must be positive"));
        }
        let nf = T::n(self.n);
        let half_n = nf / T::c(2.0);
        let mut beta = match warm {
            Some(b) if b.len() == p => b.clone(),
            _ => Array1::zeros(p),
        };
        let mut q = &self.xty - &self.gram.dot(&beta);
        let mut trace = Vec::new();
        let mut sweeps = 0usize;
        let mut active_only = false;

        loop {
            let mut max_delta = T::zero();
            for i in 0..p {
                if active_only && beta[i] == T::zero() {
                    continue;
                }
                let gii = self.gram[[i, i]];
                if !(gii > T::zero()) {
                    continue;
                }
                let old = beta[i];
                let z = q[i] + gii * old;
                let thr = half_n * lambda * weights[i];
                let new = soft_threshold(z, thr) / gii;
                let d = new - old;
                if d != T::zero() {
                    beta[i] = new;
                    // gram is symmetric; its rows are contiguous
                    let row = self.gram.row(i);
                    match (q.as_slice_mut(), row.as_slice()) {
                        (Some(qs), Some(rs)) => qs.iter_mut().zip(rs).for_each(|(qk, &g)| *qk -= g * d),
                        _ => q.zip_mut_with(&row, |qk, &g| *qk -= g * d),
                    }
                    max_delta = max_delta.max(d.abs());
                }
            }
            sweeps += 1;
            if opts.trace {
                trace.push(self.objective(&beta.view(), lambda, weights));
            }
            if max_delta < opts.coef_tol {
                if active_only {
                    // active set settled; confirm with a full sweep
                    active_only = false;
                } else {
                    // refresh the running products before certifying
                    q = &self.xty - &self.gram.dot(&beta);
                    let kkt = self.kkt_from_residual_products(&beta.view(), &q.view(), lambda, weights);
                    if kkt <= opts.kkt_tol {
                        return Ok(LassoRowSolution {
                            objective: self.objective(&beta.view(), lambda, weights),
                            beta,
                            lambda,
                            kkt_violation: kkt,
                            iterations: sweeps,
                            trace,
                        });
                    }
                }
            } else if !active_only {
                active_only = true;
            }
            if sweeps >= opts.max_sweeps {
                let kkt = self.kkt_violation(&beta.view(), lambda, weights);
                return Err(Error::NotConverged {
                    iterations: sweeps,
                    kkt_violation: kkt.f64(),
                    context: None,
                });
            }
        }
    }
}

#[inline]
pub fn soft_threshold<T: Scalar>(z: T, thr: T) -> T {
    if z > thr {
        z - thr
    } else if z < -thr {
        z + thr
    } else {
        T::zero()
    }
}

/// Solve one weighted lasso problem from the raw design and response.
pub fn lasso_row<T: Scalar>(
    regressors: &ArrayView2<T>,
    response: &ArrayView1<T>,
    lambda: T,
    weights: &ArrayView1<T>,
) -> Result<LassoRowSolution<T>> {
    lasso_row_with(regressors, response, lambda, weights, &SolverOptions::default())
}

pub fn lasso_row_with<T: Scalar>(
    regressors: &ArrayView2<T>,
    response: &ArrayView1<T>,
    lambda: T,
    weights: &ArrayView1<T>,
    opts: &SolverOptions<T>,
) -> Result<LassoRowSolution<T>> {
    if regressors.nrows() != response.len() {
        return Err(Error::dim("lasso: regressors and response lengths differ"));
    }
    let gram = regressors.t().dot(regressors);
    let prob = RowProblem::new(&gram, regressors.t().dot(response), response.dot(response), response.len())?;
    prob.solve(lambda, weights, None, opts)
}

/// `count` log-spaced penalties from `lambda_max` down to `ratio * lambda_max`.
pub fn lambda_grid<T: Scalar>(lambda_max: T, count: usize, ratio: T) -> Vec<T> {
    if !(lambda_max > T::zero()) || count == 0 {
        return vec![T::zero()];
    }
    if count == 1 {
        return vec![lambda_max];
    }
    let hi = lambda_max.ln();
    let lo = (lambda_max * ratio).ln();
    (0..count)
        .map(|k| match k {
            0 => lambda_max,
            _ if k == count - 1 => lambda_max * ratio,
            _ => (hi + (lo - hi) * T::n(k) / T::n(count - 1)).exp(),
        })
        .collect()
}

/// Penalty path and selection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions<T> {
    pub n_lambda: usize,
    pub lambda_min_ratio: T,
    /// Stop once consecutive points lower RSS by less than this fraction of `yᵀy`.
    pub min_rss_drop: T,
    /// Stop once `1 − RSS/yᵀy` exceeds this.
    pub max_fit_ratio: T,
    /// Points whose active set exceeds this fraction of the regression rows
    /// end the path and are not eligible.
    pub max_df_fraction: T,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> Default for PathOptions<T> {
    fn default() -> Self {
        Self {
            n_lambda: 50,
            lambda_min_ratio: T::c(1e-3),
            min_rss_drop: T::c(1e-5),
            max_fit_ratio: T::c(0.999),
            max_df_fraction: T::c(0.5),
            solver: SolverOptions::default(),
        }
    }
}

/// Information criterion of a lasso fit: `ln(RSS/(n+1)) + C_T · df / (n+1)`
/// where `n = T - p` is the regression sample.
pub fn information_criterion<T: Scalar>(rss: T, n: usize, df: usize, c_t: T) -> T {
    let denom = T::n(n + 1);
    let floor = T::min_positive_value().sqrt();
    (rss / denom).max(floor).ln() + c_t * T::n(df) / denom
}

/// One evaluated point of a penalty path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint<T> {
    pub lambda: T,
    pub df: usize,
    pub ic: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcSelection<T> {
    pub lambda: T,
    pub solution: LassoRowSolution<T>,
    pub ic: T,
    pub path: Vec<PathPoint<T>>,
}

/// Walk a descending penalty grid with warm starts and keep the fit with the
/// smallest information criterion. Ties go to the larger penalty.
///
/// `sample_size` is the `T` entering `C_T`. The path stops early once the
/// active set saturates the sample (`df ≥ n - 1`) or exceeds
/// `max_df_fraction · n`, once the fit is nearly
/// perfect or stops improving (see [`PathOptions`]); a solver failure after
/// at least one successful grid point also ends the path.
pub fn select_on_grid<T: Scalar>(
    prob: &RowProblem<'_, T>,
    grid: &[T],
    weights: &ArrayView1<T>,
    criterion: Criterion,
    sample_size: usize,
    opts: &PathOptions<T>,
) -> Result<IcSelection<T>> {
    let solver = &opts.solver;
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if grid.iter().any(|l| !(*l >= T::zero())) {
        return Err(Error::invalid("lambda grid must be nonnegative"));
    }
    let mut order: Vec<T> = grid.to_vec();
    order.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let c_t = criterion.c_t::<T>(sample_size);
    let n = prob.n_obs();
    let mut warm: Option<Array1<T>> = None;
    let mut best: Option<(T, LassoRowSolution<T>)> = None;
    let mut path = Vec::with_capacity(order.len());
    let mut prev_rss: Option<T> = None;
    for &lambda in &order {
        let sol = match prob.solve(lambda, weights, warm.as_ref(), solver) {
            Ok(s) => s,
            Err(e) => {
                if best.is_some() {
                    log::warn!("lasso path truncated at lambda {lambda}: {e}");
                    break;
                }
                return Err(e);
            }
        };
        let df = sol.df();
        if !path.is_empty() && T::n(df) > opts.max_df_fraction * T::n(n) {
            break;
        }
        let rss = prob.rss(&sol.beta.view());
        let ic = information_criterion(rss, n, df, c_t);
        path.push(PathPoint { lambda, df, ic });
        let better = match &best {
            None => true,
            Some((b, _)) => ic < *b,
        };
        warm = Some(sol.beta.clone());
        if better {
            best = Some((ic, sol));
        }
        if df + 1 >= n {
            break;
        }
        if prob.yty > T::zero() {
            let fit = T::one() - rss / prob.yty;
            let drop = prev_rss.map(|p| (p - rss) / prob.yty);
            if fit > opts.max_fit_ratio || drop.is_some_and(|d| d < opts.min_rss_drop) {
                break;
            }
        }
        prev_rss = Some(rss);
    }
    let (ic, solution) = best.expect("at least one grid point evaluated");
    Ok(IcSelection {
        lambda: solution.lambda,
        solution,
        ic,
        path,
    })
}

/// Default descending grid for a problem: `n_lambda` log-spaced points from
/// `λ_max` to `ratio · λ_max`.
pub fn default_grid<T: Scalar>(prob: &RowProblem<'_, T>, weights: &ArrayView1<T>, opts: &PathOptions<T>) -> Vec<T> {
    lambda_grid(prob.lambda_max(weights), opts.n_lambda, opts.lambda_min_ratio)
}

/// Select the penalty on `lambda_grid` by information criterion.
///
/// `lags` is the VAR order behind the design, so that `C_T` uses the full
/// sample size `T = n + lags`.
pub fn select_lambda_ic<T: Scalar>(
    regressors: &ArrayView2<T>,
    response: &ArrayView1<T>,
    lambda_grid: &[T],
    criterion: Criterion,
    weights: Option<&ArrayView1<T>>,
    lags: usize,
) -> Result<(T, LassoRowSolution<T>)> {
    if regressors.nrows() != response.len() {
        return Err(Error::dim("lasso: regressors and response lengths differ"));
    }
    let gram = regressors.t().dot(regressors);
    let prob = RowProblem::new(&gram, regressors.t().dot(response), response.dot(response), response.len())?;
    let ones = Array1::ones(regressors.ncols());
    let w = weights.cloned().unwrap_or_else(|| ones.view());
    let sel = select_on_grid(&prob, lambda_grid, &w, criterion, response.len() + lags, &PathOptions::default())?;
    Ok((sel.lambda, sel.solution))
}

/// How coefficient penalties are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum WeightsMode {
    Standard,
    Adaptive { gamma: f64 },
}

impl Default for WeightsMode {
    fn default() -> Self {
        WeightsMode::Adaptive { gamma: 1.0 }
    }
}

/// `g_i = 1 / (|β̃_i|^γ + floor)`.
pub fn weights_from_pilot<T: Scalar>(pilot: &ArrayView1<T>, gamma: T) -> Array1<T> {
    let floor = T::c(ADAPTIVE_WEIGHT_FLOOR);
    pilot.mapv(|b| T::one() / (b.abs().powf(gamma) + floor))
}

/// Penalty weights for one row: ones in standard mode; in adaptive mode the
/// inverse magnitudes of a first-stage standard lasso whose penalty is chosen
/// by `criterion` on the default grid.
pub fn row_weights<T: Scalar>(
    prob: &RowProblem<'_, T>,
    mode: WeightsMode,
    criterion: Criterion,
    sample_size: usize,
    opts: &PathOptions<T>,
) -> Result<Array1<T>> {
    let p = prob.n_features();
    let ones = Array1::<T>::ones(p);
    match mode {
        WeightsMode::Standard => Ok(ones),
        WeightsMode::Adaptive { gamma } => {
            if !(gamma > 0.0) {
                return Err(Error::invalid("adaptive weight exponent must be positive"));
            }
            let grid = default_grid(prob, &ones.view(), opts);
            let pilot = select_on_grid(prob, &grid, &ones.view(), criterion, sample_size, opts)?;
            Ok(weights_from_pilot(&pilot.solution.beta.view(), T::c(gamma)))
        }
    }
}

/// Penalty weights for response `j` of a VAR design.
pub fn adaptive_weights<T: Scalar>(
    regressors: &ArrayView2<T>,
    responses: &ArrayView2<T>,
    j: usize,
    mode: WeightsMode,
    criterion: Criterion,
    lags: usize,
) -> Result<Array1<T>> {
    if j >= responses.ncols() {
        return Err(Error::dim(format!("response index {j} out of range")));
    }
    let y = responses.column(j);
    let gram = regressors.t().dot(regressors);
    let prob = RowProblem::new(&gram, regressors.t().dot(&y), y.dot(&y), y.len())?;
    row_weights(&prob, mode, criterion, y.len() + lags, &PathOptions::default())
}
