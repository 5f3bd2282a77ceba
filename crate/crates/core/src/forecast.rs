//! Combined factor plus sparse-VAR prediction.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{estimate_factors, FactorDecomposition};
use crate::lasso::{default_grid, select_on_grid};
use crate::linalg;
use crate::panel::{center_panel, Centering, TimeSeriesPanel};
use crate::scalar::Scalar;
use crate::selection::factor_var_fit;
use crate::var::{fit_sparse_var_with, map_rows, predict_next, LagDesign, SparseVarModel, VarOptions};

/// Sample autocovariance `Γ̂(h) = (1/T) Σ_t x_{t+h} x_tᵀ` for `h ≥ 0`.
pub fn autocovariance<T: Scalar>(x: &ArrayView2<T>, h: usize) -> Array2<T> {
    let (t, r) = x.dim();
    if h >= t {
        return Array2::zeros((r, r));
    }
    let lead = x.slice(s![h.., ..]);
    let lag = x.slice(s![..t - h, ..]);
    lead.t().dot(&lag).mapv(|v| v / T::n(t))
}

/// Solve `Σ_j Π_j Γ(i−j) = Γ(i + shift)` for `i = 1 … p_f`, given
/// `gammas[h] = Γ(h)` for `h = 0 … p_f + shift`. `shift = 0` gives the
/// one-step predictor; `shift = h − 1` the direct `h`-step one.
pub fn yule_walker_coefs<T: Scalar>(gammas: &[Array2<T>], p_f: usize, shift: usize) -> Result<Vec<Array2<T>>> {
    if p_f == 0 {
        return Ok(Vec::new());
    }
    if gammas.len() < p_f + shift + 1 {
        return Err(Error::dim("not enough autocovariances for the requested order"));
    }
    let r = gammas[0].nrows();
    if r == 0 {
        return Ok(vec![Array2::zeros((0, 0)); p_f]);
    }
    let gamma = |h: isize| -> Array2<T> {
        if h >= 0 {
            gammas[h as usize].clone()
        } else {
            gammas[(-h) as usize].t().to_owned()
        }
    };
    // Π M = G with block (j, i) of M equal to Γ(i − j); M is symmetric
    let mut m = Array2::zeros((r * p_f, r * p_f));
    let mut g = Array2::zeros((r, r * p_f));
    for i in 0..p_f {
        for j in 0..p_f {
            m.slice_mut(s![j * r..(j + 1) * r, i * r..(i + 1) * r])
                .assign(&gamma(i as isize - j as isize));
        }
        g.slice_mut(s![.., i * r..(i + 1) * r]).assign(&gammas[i + 1 + shift]);
    }
    let m = (&m + &m.t()).mapv(|v| v / T::c(2.0));
    let gt = g.t().to_owned();
    let pit = match linalg::solve_spd(&m.view(), &gt.view()) {
        Ok(x) => x,
        Err(_) => {
            let trace: T = m.diag().sum();
            let ridge = T::c(1e-8) * trace / T::n(p_f * r);
            log::warn!("singular Yule-Walker system; adding ridge {ridge}");
            let mut mr = m.clone();
            for k in 0..r * p_f {
                mr[[k, k]] += ridge;
            }
            linalg::solve_spd(&mr.view(), &gt.view()).or_else(|_| linalg::pinv_solve_sym(&mr.view(), &gt.view(), T::c(1e-12)).map(|p| p.0))?
        }
    };
    Ok((0..p_f).map(|j| pit.slice(s![j * r..(j + 1) * r, ..]).t().to_owned()).collect())
}

/// Yule-Walker coefficients estimated from a factor sample.
pub fn yule_walker_fit<T: Scalar>(factors: &ArrayView2<T>, p_f: usize, shift: usize) -> Result<Vec<Array2<T>>> {
    let t = factors.nrows();
    if p_f > 0 && t <= p_f + shift {
        return Err(Error::SampleSize(format!("Yule-Walker order {p_f} needs more than {} observations", p_f + shift)));
    }
    let gammas: Vec<Array2<T>> = (0..=p_f + shift).map(|h| autocovariance(factors, h)).collect();
    yule_walker_coefs(&gammas, p_f, shift)
}

/// One-step Yule-Walker prediction `f̂_{T+1} = Σ_j Π̂_j F̂_{T+1−j}`.
pub fn yule_walker_predict<T: Scalar>(factors: &ArrayView2<T>, p_f: usize) -> Result<Array1<T>> {
    if p_f == 0 || factors.nrows() <= p_f {
        return Err(Error::SampleSize(format!("Yule-Walker prediction needs T > p_f ≥ 1, got T = {}, p_f = {p_f}", factors.nrows())));
    }
    let coefs = yule_walker_fit(factors, p_f, 0)?;
    predict_next(&coefs, factors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    #[default]
    YuleWalker,
    Ols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMode {
    Recursive,
    Direct,
}

impl std::str::FromStr for ForecastMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "recursive" => Ok(ForecastMode::Recursive),
            "direct" => Ok(ForecastMode::Direct),
            other => Err(Error::invalid(format!("unknown forecast mode {other:?} (recursive, direct)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedModel<T> {
    pub decomposition: FactorDecomposition<T>,
    /// `Π̂_1 … Π̂_{p_f}` of the factor predictor.
    pub factor_var: Vec<Array2<T>>,
    pub factor_method: FactorMethod,
    pub idio_var: SparseVarModel<T>,
    pub centering: Centering<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedOptions<T> {
    pub var: VarOptions<T>,
    pub factor_method: FactorMethod,
    pub demean: bool,
    pub standardize: bool,
}

impl<T: Scalar> Default for CombinedOptions<T> {
    fn default() -> Self {
        Self {
            var: VarOptions::default(),
            factor_method: FactorMethod::YuleWalker,
            demean: true,
            standardize: false,
        }
    }
}

/// Factor predictor coefficients by the chosen method.
pub fn factor_predictor<T: Scalar>(factors: &ArrayView2<T>, p_f: usize, method: FactorMethod) -> Result<Vec<Array2<T>>> {
    if factors.ncols() == 0 || p_f == 0 {
        return Ok(Vec::new());
    }
    match method {
        FactorMethod::YuleWalker => yule_walker_fit(factors, p_f, 0),
        FactorMethod::Ols => Ok(factor_var_fit(factors, p_f)?.coefs),
    }
}

/// Two-step fit with fixed `(r, p, p_f)`.
pub fn fit_combined<T: Scalar>(panel: &TimeSeriesPanel<T>, r: usize, p: usize, p_f: usize, opts: &CombinedOptions<T>) -> Result<CombinedModel<T>> {
    let (centred, centering) = center_panel(panel, opts.demean, opts.standardize)?;
    let decomposition = estimate_factors(&centred, r)?;
    let factor_var = factor_predictor(&decomposition.factors.view(), if r == 0 { 0 } else { p_f }, opts.factor_method)?;
    let idio_var = fit_sparse_var_with(&decomposition.idio.view(), p, &opts.var)?;
    Ok(CombinedModel {
        decomposition,
        factor_var,
        factor_method: opts.factor_method,
        idio_var,
        centering,
    })
}

impl<T: Scalar> CombinedModel<T> {
    pub fn n(&self) -> usize {
        self.decomposition.loadings.nrows()
    }

    pub fn r(&self) -> usize {
        self.decomposition.r()
    }

    pub fn p(&self) -> usize {
        self.idio_var.p
    }

    pub fn p_f(&self) -> usize {
        self.factor_var.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult<T> {
    /// `h × N` predictions, one row per step ahead.
    pub point: Array2<T>,
    pub horizon: usize,
    pub mode: ForecastMode,
    /// `Λ̂ f̂` on the data scale.
    pub factor_part: Array2<T>,
    /// `ξ̂` on the data scale.
    pub idio_part: Array2<T>,
    /// Column means added back.
    pub offset: Array1<T>,
}

impl<T: Scalar> ForecastResult<T> {
    fn assemble(factor_c: Array2<T>, idio_c: Array2<T>, centering: &Centering<T>, mode: ForecastMode) -> Self {
        let factor_part = &factor_c * &centering.scales;
        let idio_part = &idio_c * &centering.scales;
        let point = &(&factor_part + &idio_part) + &centering.means;
        Self {
            horizon: point.nrows(),
            point,
            mode,
            factor_part,
            idio_part,
            offset: centering.means.clone(),
        }
    }
}

/// `ξ̂_{T+1} = Σ_j Â⁽ʲ⁾ ξ̂_{T+1−j}`.
pub fn forecast_idio<T: Scalar>(model: &SparseVarModel<T>, idio: &ArrayView2<T>) -> Result<Array1<T>> {
    predict_next(&model.slopes, idio)
}

pub fn forecast_one_step<T: Scalar>(model: &CombinedModel<T>) -> Result<ForecastResult<T>> {
    forecast_h(model, 1, ForecastMode::Recursive, &HorizonOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HorizonOptions<T> {
    /// Direct mode: select λ again at every horizon instead of reusing the
    /// one-step penalties and weights.
    pub reselect_lambda: bool,
    /// Settings for direct-mode refits; defaults to the model's criterion.
    pub var: Option<VarOptions<T>>,
}

/// Predictions for steps `1 … h`.
pub fn forecast_h<T: Scalar>(model: &CombinedModel<T>, h: usize, mode: ForecastMode, opts: &HorizonOptions<T>) -> Result<ForecastResult<T>> {
    if h == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let n = model.n();
    let d = &model.decomposition;
    let r = d.r();
    let mut fpart = Array2::zeros((h, n));
    let mut ipart = Array2::zeros((h, n));
    match mode {
        ForecastMode::Recursive => {
            let mut fh = d.factors.clone();
            let mut xh = d.idio.clone();
            for k in 0..h {
                let f_next = if r > 0 { predict_next(&model.factor_var, &fh.view())? } else { Array1::zeros(0) };
                let x_next = predict_next(&model.idio_var.slopes, &xh.view())?;
                if r > 0 {
                    fpart.row_mut(k).assign(&d.loadings.dot(&f_next));
                }
                ipart.row_mut(k).assign(&x_next);
                fh.push_row(f_next.view()).expect("row width matches");
                xh.push_row(x_next.view()).expect("row width matches");
            }
        }
        ForecastMode::Direct => {
            let t = d.factors.nrows();
            let m = model.p().max(model.p_f());
            if t <= h + m {
                return Err(Error::SampleSize(format!("direct {h}-step forecast needs T − h > max(p, p_f) = {m}, got T = {t}")));
            }
            for k in 1..=h {
                let (pis, slopes) = direct_coefficients(model, k, opts)?;
                if r > 0 {
                    let f = predict_next(&pis, &d.factors.view())?;
                    fpart.row_mut(k - 1).assign(&d.loadings.dot(&f));
                }
                ipart.row_mut(k - 1).assign(&predict_next(&slopes, &d.idio.view())?);
            }
        }
    }
    Ok(ForecastResult::assemble(fpart, ipart, &model.centering, mode))
}

/// Coefficients mapping the last `p` observations to the value `k` steps ahead.
fn direct_coefficients<T: Scalar>(model: &CombinedModel<T>, k: usize, opts: &HorizonOptions<T>) -> Result<(Vec<Array2<T>>, Vec<Array2<T>>)> {
    if k == 1 {
        return Ok((model.factor_var.clone(), model.idio_var.slopes.clone()));
    }
    let d = &model.decomposition;
    let pis = match model.factor_method {
        _ if model.p_f() == 0 => Vec::new(),
        FactorMethod::YuleWalker => yule_walker_fit(&d.factors.view(), model.p_f(), k - 1)?,
        FactorMethod::Ols => ols_shifted(&d.factors.view(), model.p_f(), k)?,
    };
    let p = model.p();
    if p == 0 {
        return Ok((pis, Vec::new()));
    }
    let n = model.n();
    let var_opts = opts.var.unwrap_or_else(|| VarOptions::new(model.idio_var.criterion, model.idio_var.weights_mode));
    let design = LagDesign::new(&d.idio.view(), p, k)?;
    let rows: Vec<usize> = (0..n).collect();
    let betas = map_rows(&rows, var_opts.parallel, |j| {
        let prob = design.problem(j)?;
        let weights = model
            .idio_var
            .row_weights
            .get(j)
            .cloned()
            .unwrap_or_else(|| Array1::ones(n * p));
        if opts.reselect_lambda {
            let grid = default_grid(&prob, &weights.view(), &var_opts.path);
            let sel = select_on_grid(&prob, &grid, &weights.view(), var_opts.criterion, design.sample_size(), &var_opts.path)?;
            Ok(sel.solution.beta)
        } else {
            Ok(prob.solve(model.idio_var.lambdas[j], &weights.view(), None, &var_opts.path.solver)?.beta)
        }
    })?;
    let mut slopes = vec![Array2::zeros((n, n)); p];
    for (i, b) in betas.iter().enumerate() {
        for (c, &v) in b.iter().enumerate() {
            slopes[c / n][[i, c % n]] = v;
        }
    }
    Ok((pis, slopes))
}

fn ols_shifted<T: Scalar>(f: &ArrayView2<T>, p_f: usize, k: usize) -> Result<Vec<Array2<T>>> {
    let r = f.ncols();
    let (x, y) = crate::var::build_lag_matrix_h(f, p_f, k)?;
    let (b, _) = linalg::pinv_solve_sym(&x.t().dot(&x).view(), &x.t().dot(&y).view(), T::c(1e-12))?;
    Ok((0..p_f).map(|j| b.slice(s![j * r..(j + 1) * r, ..]).t().to_owned()).collect())
}

/// One-step predictions over a test stream that continues the training
/// sample. Row `k` predicts `test[k]` from the training data and
/// `test[..k]`; nothing is refitted. Only the columns in `cols` are returned.
///
/// `idio_rows[j]` holds the rows of `A⁽ʲ⁺¹⁾` for `cols` (`cols.len() × N`).
pub fn rolling_one_step<T: Scalar>(
    decomp: &FactorDecomposition<T>,
    factor_var: &[Array2<T>],
    idio_rows: &[Array2<T>],
    centering: &Centering<T>,
    cols: &[usize],
    test: &ArrayView2<T>,
) -> Result<Array2<T>> {
    let n = decomp.loadings.nrows();
    if test.ncols() != n {
        return Err(Error::dim("test panel width differs from the model"));
    }
    let (t_train, r) = decomp.factors.dim();
    let m = test.nrows();
    let p = idio_rows.len();
    let p_f = factor_var.len();
    if t_train < p.max(p_f) {
        return Err(Error::SampleSize("training sample shorter than the lag order".into()));
    }
    let z = centering.apply_rows(&test.to_owned());
    // factor scores and idiosyncratic parts of the test observations
    let f_test = if r > 0 {
        let mut lt = decomp.loadings.t().to_owned();
        let nf = T::n(n);
        for k in 0..r {
            let d2 = decomp.singular_values[k] * decomp.singular_values[k] * nf;
            let inv = if d2 > T::zero() { T::one() / d2 } else { T::zero() };
            lt.row_mut(k).mapv_inplace(|v| v * inv);
        }
        z.dot(&lt.t())
    } else {
        Array2::zeros((m, 0))
    };
    let xi_test = &z - &f_test.dot(&decomp.loadings.t());
    let f_all = ndarray::concatenate(Axis(0), &[decomp.factors.view(), f_test.view()]).map_err(|e| Error::dim(e.to_string()))?;
    let xi_all = ndarray::concatenate(Axis(0), &[decomp.idio.view(), xi_test.view()]).map_err(|e| Error::dim(e.to_string()))?;

    let mut pred = Array2::zeros((m, cols.len()));
    if r > 0 && p_f > 0 {
        let mut fp = Array2::<T>::zeros((m, r));
        for (j, pi) in factor_var.iter().enumerate() {
            fp += &f_all.slice(s![t_train - j - 1..t_train - j - 1 + m, ..]).dot(&pi.t());
        }
        let lam = decomp.loadings.select(Axis(0), cols);
        pred += &fp.dot(&lam.t());
    }
    for (j, a) in idio_rows.iter().enumerate() {
        pred += &xi_all.slice(s![t_train - j - 1..t_train - j - 1 + m, ..]).dot(&a.t());
    }
    let scales = centering.scales.select(Axis(0), cols);
    let means = centering.means.select(Axis(0), cols);
    Ok(&(&pred * &scales) + &means)
}

impl<T: Scalar> CombinedModel<T> {
    /// One-step predictions of every series over a test continuation.
    pub fn rolling(&self, test: &ArrayView2<T>) -> Result<Array2<T>> {
        let cols: Vec<usize> = (0..self.n()).collect();
        rolling_one_step(&self.decomposition, &self.factor_var, &self.idio_var.slopes, &self.centering, &cols, test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Msfe<T> {
    pub per_series: Vec<T>,
    pub average: T,
}

/// Mean squared forecast error per series in `subset` and their average.
/// Rows are time points, columns series.
pub fn msfe<T: Scalar>(predictions: &ArrayView2<T>, actuals: &ArrayView2<T>, subset: &[usize]) -> Result<Msfe<T>> {
    if predictions.dim() != actuals.dim() {
        return Err(Error::invalid(format!("prediction shape {:?} differs from actuals {:?}", predictions.dim(), actuals.dim())));
    }
    if subset.is_empty() {
        return Err(Error::invalid("empty series subset"));
    }
    if predictions.nrows() == 0 {
        return Err(Error::invalid("no forecasts to evaluate"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= predictions.ncols()) {
        return Err(Error::dim(format!("series {bad} out of range")));
    }
    let nt = T::n(predictions.nrows());
    let per_series: Vec<T> = subset
        .iter()
        .map(|&i| {
            let e = &predictions.column(i) - &actuals.column(i);
            e.iter().map(|v| *v * *v).sum::<T>() / nt
        })
        .collect();
    let average = per_series.iter().copied().sum::<T>() / T::n(per_series.len());
    Ok(Msfe { per_series, average })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::{Criterion, WeightsMode};
    use ndarray::array;

    fn noise(t: usize, n: usize, seed: u64) -> Array2<f64> {
        let mut s = seed;
        Array2::from_shape_fn((t, n), |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn scalar_yule_walker_is_autocorrelation_ratio() {
        let f = noise(80, 1, 2);
        let g0 = f.column(0).dot(&f.column(0)) / 80.0;
        let g1: f64 = (1..80).map(|t| f[[t, 0]] * f[[t - 1, 0]]).sum::<f64>() / 80.0;
        let c = yule_walker_fit(&f.view(), 1, 0).unwrap();
        assert!((c[0][[0, 0]] - g1 / g0).abs() < 1e-14);
        let pred = yule_walker_predict(&f.view(), 1).unwrap();
        assert!((pred[0] - g1 / g0 * f[[79, 0]]).abs() < 1e-14);
    }

    #[test]
    fn yule_walker_on_zero_factors() {
        let f = Array2::<f64>::zeros((20, 2));
        let pred = yule_walker_predict(&f.view(), 2).unwrap();
        assert!(pred.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn idio_hand_example() {
        let m = SparseVarModel::from_slopes(vec![array![[0.5, 0.0], [0.2, 0.3]]], &noise(5, 2, 1).view()).unwrap();
        let hist = array![[0.0, 0.0], [1.0, 2.0]];
        let f = forecast_idio(&m, &hist.view()).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15 && (f[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn msfe_cases() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let m = msfe(&a.view(), &a.view(), &[0, 1]).unwrap();
        assert_eq!(m.average, 0.0);
        let p = array![[1.0], [-1.0]];
        let z = Array2::zeros((2, 1));
        assert_eq!(msfe(&p.view(), &z.view(), &[0]).unwrap().average, 1.0);
        assert!(msfe(&p.view(), &a.view(), &[0]).is_err());
        assert!(msfe(&p.view(), &z.view(), &[]).is_err());
    }

    fn model(r: usize, p: usize, p_f: usize) -> CombinedModel<f64> {
        let x = noise(120, 6, 9) + noise(120, 1, 3).dot(&array![[1.0, 0.5, -0.5, 1.0, 0.8, -1.0]]) * 3.0;
        let panel = TimeSeriesPanel::unlabeled(x).unwrap();
        let opts = CombinedOptions {
            var: VarOptions::new(Criterion::Bic, WeightsMode::Standard),
            ..CombinedOptions::default()
        };
        fit_combined(&panel, r, p, p_f, &opts).unwrap()
    }

    #[test]
    fn components_add_up() {
        let m = model(1, 1, 1);
        for mode in [ForecastMode::Recursive, ForecastMode::Direct] {
            let f = forecast_h(&m, 3, mode, &HorizonOptions::default()).unwrap();
            assert_eq!(f.point.dim(), (3, 6));
            let sum = &(&f.factor_part + &f.idio_part) + &f.offset;
            assert_eq!(sum, f.point);
        }
    }

    #[test]
    fn degenerate_models_reduce() {
        let m0 = model(0, 1, 1);
        let f = forecast_one_step(&m0).unwrap();
        assert!(f.factor_part.iter().all(|v| *v == 0.0));
        let xi = forecast_idio(&m0.idio_var, &m0.decomposition.idio.view()).unwrap();
        assert_eq!(f.point.row(0).to_owned(), &xi + &m0.centering.means);

        let mf = model(1, 0, 1);
        let f = forecast_one_step(&mf).unwrap();
        assert!(f.idio_part.iter().all(|v| *v == 0.0));
        let fhat = yule_walker_predict(&mf.decomposition.factors.view(), 1).unwrap();
        let direct = mf.decomposition.loadings.dot(&fhat) + &mf.centering.means;
        assert_eq!(f.point.row(0).to_owned(), direct);
    }

    #[test]
    fn one_step_equals_first_recursive_and_direct_step() {
        let m = model(1, 1, 1);
        let one = forecast_one_step(&m).unwrap();
        let rec = forecast_h(&m, 4, ForecastMode::Recursive, &HorizonOptions::default()).unwrap();
        let dir = forecast_h(&m, 4, ForecastMode::Direct, &HorizonOptions::default()).unwrap();
        assert_eq!(one.point.row(0), rec.point.row(0));
        assert_eq!(one.point.row(0), dir.point.row(0));
    }

    #[test]
    fn recursive_diagonal_var_is_power() {
        let idio = noise(50, 3, 4);
        let phi = 0.7;
        let var = SparseVarModel::from_slopes(vec![Array2::eye(3) * phi], &idio.view()).unwrap();
        let model = CombinedModel {
            decomposition: FactorDecomposition {
                factors: Array2::zeros((50, 0)),
                loadings: Array2::zeros((3, 0)),
                singular_values: Array1::zeros(0),
                common: Array2::zeros((50, 3)),
                idio: idio.clone(),
            },
            factor_var: Vec::new(),
            factor_method: FactorMethod::YuleWalker,
            idio_var: var,
            centering: Centering::identity(3),
        };
        let f = forecast_h(&model, 2, ForecastMode::Recursive, &HorizonOptions::default()).unwrap();
        for j in 0..3 {
            assert!((f.point[[1, j]] - phi * phi * idio[[49, j]]).abs() < 1e-15);
        }
    }

    #[test]
    fn direct_needs_enough_sample() {
        let m = model(1, 1, 1);
        assert!(matches!(
            forecast_h(&m, 119, ForecastMode::Direct, &HorizonOptions::default()),
            Err(Error::SampleSize(_))
        ));
    }

    #[test]
    fn rolling_first_row_is_one_step() {
        let m = model(1, 1, 1);
        let test = noise(5, 6, 77);
        let roll = m.rolling(&test.view()).unwrap();
        let one = forecast_one_step(&m).unwrap();
        for j in 0..6 {
            assert!((roll[[0, j]] - one.point[[0, j]]).abs() < 1e-12);
        }
        assert_eq!(roll.dim(), (5, 6));
    }
}
