//! Sparse VAR(p) for the idiosyncratic block, fitted row by row.

use ndarray::{s, Array1, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{default_grid, row_weights, select_on_grid, Criterion, PathOptions, RowProblem, WeightsMode};
use crate::linalg;
use crate::scalar::Scalar;

/// Stacked lag design `(X, Y)` for a VAR of order `p`.
///
/// Row `k` of `X` holds `ξ_{t-1}, …, ξ_{t-p}` (lag-major blocks of width N)
/// and row `k` of `Y` holds `ξ_t`, with `t = k + p`.
pub fn build_lag_matrix<T: Scalar>(idio: &ArrayView2<T>, p: usize) -> Result<(Array2<T>, Array2<T>)> {
    build_lag_matrix_h(idio, p, 1)
}

/// Lag design with responses `h` steps ahead of the newest lag: row `k`
/// regresses `ξ_{t+h-1}` on `ξ_{t-1}, …, ξ_{t-p}`.
pub fn build_lag_matrix_h<T: Scalar>(idio: &ArrayView2<T>, p: usize, h: usize) -> Result<(Array2<T>, Array2<T>)> {
    let (t, n) = idio.dim();
    if p == 0 {
        return Err(Error::dim("lag matrix needs p ≥ 1"));
    }
    if h == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if p + h > t {
        return Err(Error::dim(format!("lag order {p} and horizon {h} leave no rows with T = {t}")));
    }
    let rows = t - p - h + 1;
    let mut x = Array2::zeros((rows, n * p));
    for j in 0..p {
        // lag j+1 of time t=k+p is row k+p-j-1
        x.slice_mut(s![.., j * n..(j + 1) * n])
            .assign(&idio.slice(s![p - j - 1..p - j - 1 + rows, ..]));
    }
    let y = idio.slice(s![p + h - 1..p + h - 1 + rows, ..]).to_owned();
    Ok((x, y))
}

/// Gram and cross products of a lag design, shared by all rows.
#[derive(Debug, Clone)]
pub struct LagDesign<T> {
    pub regressors: Array2<T>,
    pub responses: Array2<T>,
    gram: Array2<T>,
    lags: usize,
}

impl<T: Scalar> LagDesign<T> {
    pub fn new(idio: &ArrayView2<T>, p: usize, h: usize) -> Result<Self> {
        let (x, y) = build_lag_matrix_h(idio, p, h)?;
        let gram = x.t().dot(&x);
        Ok(Self {
            regressors: x,
            responses: y,
            gram,
            lags: p,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.regressors.nrows()
    }

    /// Sample size entering `C_T`.
    pub fn sample_size(&self) -> usize {
        self.n_obs() + self.lags
    }

    pub fn problem(&self, j: usize) -> Result<RowProblem<'_, T>> {
        let y = self.responses.column(j);
        RowProblem::new(&self.gram, self.regressors.t().dot(&y), y.dot(&y), y.len())
    }
}

/// Settings for a sparse VAR fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarOptions<T> {
    pub criterion: Criterion,
    pub weights_mode: WeightsMode,
    pub path: PathOptions<T>,
    /// Fit rows on the rayon pool; results are identical either way.
    pub parallel: bool,
}

impl<T: Scalar> Default for VarOptions<T> {
    fn default() -> Self {
        Self {
            criterion: Criterion::Bic,
            weights_mode: WeightsMode::default(),
            path: PathOptions::default(),
            parallel: true,
        }
    }
}

impl<T: Scalar> VarOptions<T> {
    pub fn new(criterion: Criterion, weights_mode: WeightsMode) -> Self {
        Self {
            criterion,
            weights_mode,
            ..Self::default()
        }
    }
}

/// Lasso fit of one VAR equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFit<T> {
    pub beta: Array1<T>,
    pub lambda: T,
    pub weights: Array1<T>,
    pub kkt_violation: T,
}

/// Select the penalty for row `j` and return the chosen coefficients.
pub fn fit_row<T: Scalar>(design: &LagDesign<T>, j: usize, opts: &VarOptions<T>) -> Result<RowFit<T>> {
    let prob = design.problem(j)?;
    let ss = design.sample_size();
    let weights = row_weights(&prob, opts.weights_mode, opts.criterion, ss, &opts.path)?;
    let grid = default_grid(&prob, &weights.view(), &opts.path);
    let sel = select_on_grid(&prob, &grid, &weights.view(), opts.criterion, ss, &opts.path)?;
    Ok(RowFit {
        beta: sel.solution.beta,
        lambda: sel.lambda,
        weights,
        kkt_violation: sel.solution.kkt_violation,
    })
}

/// Refit row `j` at a fixed penalty and weights.
pub fn refit_row<T: Scalar>(design: &LagDesign<T>, j: usize, lambda: T, weights: &Array1<T>, opts: &VarOptions<T>) -> Result<RowFit<T>> {
    let prob = design.problem(j)?;
    let sol = prob.solve(lambda, &weights.view(), None, &opts.path.solver)?;
    Ok(RowFit {
        beta: sol.beta,
        lambda,
        weights: weights.clone(),
        kkt_violation: sol.kkt_violation,
    })
}

/// Run `f` over `rows`, in parallel when asked, keeping row order.
pub(crate) fn map_rows<R, F>(rows: &[usize], parallel: bool, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let run = |&j: &usize| f(j).map_err(|e| e.in_row(j));
    if parallel {
        rows.par_iter().map(run).collect()
    } else {
        rows.iter().map(run).collect()
    }
}

/// Fit the selected rows of a VAR(p) on `idio`.
pub fn fit_rows<T: Scalar>(idio: &ArrayView2<T>, p: usize, rows: &[usize], opts: &VarOptions<T>) -> Result<Vec<RowFit<T>>> {
    let n = idio.ncols();
    if let Some(&bad) = rows.iter().find(|&&j| j >= n) {
        return Err(Error::dim(format!("row {bad} out of range for N = {n}")));
    }
    let design = LagDesign::new(idio, p, 1)?;
    map_rows(rows, opts.parallel, |j| fit_row(&design, j, opts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVarModel<T> {
    /// `A⁽¹⁾ … A⁽ᵖ⁾`, each N×N.
    pub slopes: Vec<Array2<T>>,
    pub p: usize,
    pub lambdas: Vec<T>,
    pub weights_mode: WeightsMode,
    pub criterion: Criterion,
    /// Per row, indices of nonzero coefficients in the stacked `Np` vector
    /// (lag-major: index `(j-1)·N + m` is lag `j`, series `m`).
    pub active_sets: Vec<Vec<usize>>,
    /// Residuals `ξ_t − Σ_j A⁽ʲ⁾ ξ_{t−j}`, `(T−p)×N`.
    pub innovations: Array2<T>,
    pub spectral_radius: T,
    /// Penalty weights per row, kept for refits at other horizons.
    pub row_weights: Vec<Array1<T>>,
}

impl<T: Scalar> SparseVarModel<T> {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Model with no lags: innovations are the series themselves.
    pub fn empty(idio: &ArrayView2<T>, criterion: Criterion, weights_mode: WeightsMode) -> Self {
        let n = idio.ncols();
        Self {
            slopes: Vec::new(),
            p: 0,
            lambdas: vec![T::zero(); n],
            weights_mode,
            criterion,
            active_sets: vec![Vec::new(); n],
            innovations: idio.to_owned(),
            spectral_radius: T::zero(),
            row_weights: Vec::new(),
        }
    }

    /// Assemble a model from known slopes, computing residuals and radius.
    pub fn from_slopes(slopes: Vec<Array2<T>>, idio: &ArrayView2<T>) -> Result<Self> {
        let n = idio.ncols();
        if slopes.iter().any(|a| a.dim() != (n, n)) {
            return Err(Error::dim("slope matrices must be N×N"));
        }
        let p = slopes.len();
        if p == 0 {
            return Ok(Self::empty(idio, Criterion::Bic, WeightsMode::Standard));
        }
        let active_sets = (0..n)
            .map(|i| {
                (0..n * p)
                    .filter(|&c| slopes[c / n][[i, c % n]] != T::zero())
                    .collect()
            })
            .collect();
        let mut m = Self {
            innovations: residuals(&slopes, idio)?,
            spectral_radius: T::zero(),
            slopes,
            p,
            lambdas: vec![T::zero(); n],
            weights_mode: WeightsMode::Standard,
            criterion: Criterion::Bic,
            active_sets,
            row_weights: Vec::new(),
        };
        m.spectral_radius = linalg::spectral_radius(&companion(&m).view())?;
        Ok(m)
    }

    pub fn nonzeros(&self) -> usize {
        self.active_sets.iter().map(Vec::len).sum()
    }

    /// Coefficients of row `i` in stacked (lag-major) order.
    pub fn row(&self, i: usize) -> Array1<T> {
        let n = self.n();
        Array1::from_shape_fn(n * self.p, |c| self.slopes[c / n][[i, c % n]])
    }
}

fn stack_rows<T: Scalar>(fits: &[RowFit<T>], n: usize, p: usize) -> Vec<Array2<T>> {
    let mut slopes = vec![Array2::zeros((n, n)); p];
    for (i, f) in fits.iter().enumerate() {
        for (c, &b) in f.beta.iter().enumerate() {
            slopes[c / n][[i, c % n]] = b;
        }
    }
    slopes
}

/// `ξ_t − Σ_j A⁽ʲ⁾ ξ_{t−j}` for `t = p … T−1`.
pub fn residuals<T: Scalar>(slopes: &[Array2<T>], idio: &ArrayView2<T>) -> Result<Array2<T>> {
    let p = slopes.len();
    let t = idio.nrows();
    if p >= t {
        return Err(Error::dim(format!("lag order {p} needs more than {t} observations")));
    }
    let mut v = idio.slice(s![p.., ..]).to_owned();
    for (j, a) in slopes.iter().enumerate() {
        let lagged = idio.slice(s![p - j - 1..t - j - 1, ..]);
        v -= &lagged.dot(&a.t());
    }
    Ok(v)
}

/// Row-wise (adaptive) lasso fit of a VAR(p) with IC-selected penalties.
pub fn fit_sparse_var<T: Scalar>(idio: &ArrayView2<T>, p: usize, criterion: Criterion, weights_mode: WeightsMode) -> Result<SparseVarModel<T>> {
    fit_sparse_var_with(idio, p, &VarOptions::new(criterion, weights_mode))
}

pub fn fit_sparse_var_with<T: Scalar>(idio: &ArrayView2<T>, p: usize, opts: &VarOptions<T>) -> Result<SparseVarModel<T>> {
    let (t, n) = idio.dim();
    if p >= t {
        return Err(Error::dim(format!("lag order {p} needs more than {t} observations")));
    }
    if idio.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("idiosyncratic panel has non-finite entries"));
    }
    if p == 0 {
        return Ok(SparseVarModel::empty(idio, opts.criterion, opts.weights_mode));
    }
    let rows: Vec<usize> = (0..n).collect();
    let fits = fit_rows(idio, p, &rows, opts)?;
    assemble(fits, idio, p, opts)
}

pub(crate) fn assemble<T: Scalar>(fits: Vec<RowFit<T>>, idio: &ArrayView2<T>, p: usize, opts: &VarOptions<T>) -> Result<SparseVarModel<T>> {
    let n = idio.ncols();
    let slopes = stack_rows(&fits, n, p);
    let innovations = residuals(&slopes, idio)?;
    let active_sets = fits
        .iter()
        .map(|f| f.beta.iter().enumerate().filter(|(_, b)| **b != T::zero()).map(|(c, _)| c).collect())
        .collect();
    let mut model = SparseVarModel {
        slopes,
        p,
        lambdas: fits.iter().map(|f| f.lambda).collect(),
        weights_mode: opts.weights_mode,
        criterion: opts.criterion,
        active_sets,
        innovations,
        spectral_radius: T::zero(),
        row_weights: fits.into_iter().map(|f| f.weights).collect(),
    };
    model.spectral_radius = linalg::spectral_radius(&companion(&model).view())?;
    Ok(model)
}

/// Companion matrix `[A⁽¹⁾ … A⁽ᵖ⁾; I 0]` of size Np×Np.
pub fn companion<T: Scalar>(model: &SparseVarModel<T>) -> Array2<T> {
    companion_of(&model.slopes)
}

pub fn companion_of<T: Scalar>(slopes: &[Array2<T>]) -> Array2<T> {
    let p = slopes.len();
    if p == 0 {
        return Array2::zeros((0, 0));
    }
    let n = slopes[0].nrows();
    let mut c = Array2::zeros((n * p, n * p));
    for (j, a) in slopes.iter().enumerate() {
        c.slice_mut(s![0..n, j * n..(j + 1) * n]).assign(a);
    }
    for k in n..n * p {
        c[[k, k - n]] = T::one();
    }
    c
}

/// Stacked slope spectral radius; zero for an empty lag list.
pub fn slopes_radius<T: Scalar>(slopes: &[Array2<T>]) -> Result<T> {
    if slopes.is_empty() {
        return Ok(T::zero());
    }
    linalg::spectral_radius(&companion_of(slopes).view())
}

/// `Σ_j A⁽ʲ⁾ x_{T+1−j}` from the last `p` rows of `history`.
pub fn predict_next<T: Scalar>(slopes: &[Array2<T>], history: &ArrayView2<T>) -> Result<Array1<T>> {
    let n = history.ncols();
    let t = history.nrows();
    if slopes.len() > t {
        return Err(Error::SampleSize(format!("{} lags need at least that many observations, got {t}", slopes.len())));
    }
    let mut out = Array1::zeros(n);
    for (j, a) in slopes.iter().enumerate() {
        out += &a.dot(&history.row(t - 1 - j));
    }
    Ok(out)
}
