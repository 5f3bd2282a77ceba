//! Joint choice of the number of factors and both lag orders.

use ndarray::{s, Array1, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{estimate_factors_matrix, squared_singular_values, FactorDecomposition};
use crate::linalg;
use crate::panel::{center_panel, TimeSeriesPanel};
use crate::scalar::Scalar;
use crate::var::{fit_rows, fit_sparse_var_with, VarOptions};

/// Below this pooled residual variance the log is treated as `-inf`.
const RSS_FLOOR: f64 = 1e-300;

/// `c · log(NT/(N+T)) / log(T)`. Returned as is when negative (`N = 1`).
pub fn c_t<T: Scalar>(n: usize, t: usize, c: T) -> Result<T> {
    if n < 1 || t < 3 {
        return Err(Error::invalid(format!("C_T needs N ≥ 1 and T ≥ 3, got N = {n}, T = {t}")));
    }
    let (nf, tf) = (T::n(n), T::n(t));
    Ok(c * (nf * tf / (nf + tf)).ln() / tf.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorVarFit<T> {
    /// `Π̂_1 … Π̂_{p_f}`, each r×r.
    pub coefs: Vec<Array2<T>>,
    /// The normal equations were singular and solved by pseudoinverse.
    pub rank_deficient: bool,
}

/// Least-squares VAR(p_f) of the factors, without intercept.
pub fn factor_var_fit<T: Scalar>(factors: &ArrayView2<T>, p_f: usize) -> Result<FactorVarFit<T>> {
    let (t, r) = factors.dim();
    if p_f == 0 {
        return Ok(FactorVarFit {
            coefs: Vec::new(),
            rank_deficient: false,
        });
    }
    if t <= p_f * r.max(1) || t <= p_f {
        return Err(Error::SampleSize(format!("factor VAR({p_f}) with r = {r} needs more than {} observations, got {t}", p_f * r.max(1))));
    }
    if r == 0 {
        return Ok(FactorVarFit {
            coefs: vec![Array2::zeros((0, 0)); p_f],
            rank_deficient: false,
        });
    }
    let rows = t - p_f;
    let mut z = Array2::zeros((rows, r * p_f));
    for j in 0..p_f {
        z.slice_mut(s![.., j * r..(j + 1) * r])
            .assign(&factors.slice(s![p_f - j - 1..t - j - 1, ..]));
    }
    let y = factors.slice(s![p_f.., ..]);
    let ztz = z.t().dot(&z);
    let zty = z.t().dot(&y);
    let (b, dropped) = linalg::pinv_solve_sym(&ztz.view(), &zty.view(), T::c(1e-12))?;
    if dropped {
        log::warn!("factor VAR({p_f}) design is rank deficient; using the pseudoinverse");
    }
    let coefs = (0..p_f).map(|j| b.slice(s![j * r..(j + 1) * r, ..]).t().to_owned()).collect();
    Ok(FactorVarFit {
        coefs,
        rank_deficient: dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionMode {
    Local { series: usize },
    Global,
    BaiNg,
}

/// One evaluated `(r, p, p_f)` cell. `value` is `None` when the cell was
/// infeasible and skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint<T> {
    pub r: usize,
    pub p: usize,
    pub p_f: usize,
    pub value: Option<T>,
    pub n_params: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult<T> {
    pub r: usize,
    pub p: usize,
    pub p_f: usize,
    pub criterion_value: T,
    pub grid: Vec<GridPoint<T>>,
    pub mode: SelectionMode,
}

impl<T: Scalar> SelectionResult<T> {
    pub fn evaluated(&self) -> usize {
        self.grid.iter().filter(|g| g.value.is_some()).count()
    }

    pub fn skipped(&self) -> usize {
        self.grid.len() - self.evaluated()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions<T> {
    /// Multiplier `c` in `C_T`.
    pub c: T,
    /// Settings for the inner sparse VAR fits.
    pub var: VarOptions<T>,
    pub demean: bool,
    /// Divide residual sums by the number of residuals actually summed
    /// instead of `NT` (global) or `T` (local).
    pub effective_sample_mean: bool,
    pub parallel: bool,
}

impl<T: Scalar> Default for SelectionOptions<T> {
    fn default() -> Self {
        Self {
            c: T::c(0.5),
            var: VarOptions::default(),
            demean: true,
            effective_sample_mean: false,
            parallel: true,
        }
    }
}

/// Grid maxima for the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionGrid {
    pub r_max: usize,
    pub p_max: usize,
    pub p_f_max: usize,
}

impl Default for SelectionGrid {
    fn default() -> Self {
        Self {
            r_max: 8,
            p_max: 4,
            p_f_max: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Global,
    Local(usize),
}

/// Residuals of the one-step fit `x_t − Λ̂ Σ Π̂_j f̂_{t−j} − Σ A_j ξ̂_{t−j}`
/// over `t = m … T−1` for the columns in `cols`.
///
/// `idio_rows[j]` holds the rows of `A⁽ʲ⁺¹⁾` belonging to `cols`.
fn one_step_residuals<T: Scalar>(
    x: &ArrayView2<T>,
    decomp: &FactorDecomposition<T>,
    pis: &[Array2<T>],
    idio_rows: &[Array2<T>],
    cols: &[usize],
    m: usize,
) -> Array2<T> {
    let t = x.nrows();
    let rows = t - m;
    let mut res = Array2::zeros((rows, cols.len()));
    for (c, &i) in cols.iter().enumerate() {
        res.column_mut(c).assign(&x.slice(s![m.., i]));
    }
    if decomp.r() > 0 && !pis.is_empty() {
        let mut pred_f = Array2::<T>::zeros((rows, decomp.r()));
        for (j, pi) in pis.iter().enumerate() {
            pred_f += &decomp.factors.slice(s![m - j - 1..t - j - 1, ..]).dot(&pi.t());
        }
        let lam = decomp.loadings.select(ndarray::Axis(0), cols);
        res -= &pred_f.dot(&lam.t());
    }
    for (j, a) in idio_rows.iter().enumerate() {
        res -= &decomp.idio.slice(s![m - j - 1..t - j - 1, ..]).dot(&a.t());
    }
    res
}

fn score<T: Scalar>(ss: T, denom: T, n_params: usize, per_param: T) -> T {
    let mean = ss / denom;
    let base = if mean.f64() < RSS_FLOOR { T::neg_infinity() } else { mean.ln() };
    base + T::n(n_params) * per_param
}

/// Index of the minimum; ties go to fewer parameters, then to the earlier cell.
fn argmin<T: Scalar>(grid: &[GridPoint<T>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, g) in grid.iter().enumerate() {
        let Some(v) = g.value else { continue };
        match best {
            None => best = Some(k),
            Some(b) => {
                let bv = grid[b].value.unwrap();
                if v < bv || (v == bv && g.n_params < grid[b].n_params) {
                    best = Some(k);
                }
            }
        }
    }
    best
}

fn sweep<T: Scalar>(panel: &TimeSeriesPanel<T>, grid: SelectionGrid, target: Target, opts: &SelectionOptions<T>) -> Result<SelectionResult<T>> {
    let (t, n) = (panel.t(), panel.n());
    if let Target::Local(i) = target {
        if i >= n {
            return Err(Error::dim(format!("series index {i} out of range for N = {n}")));
        }
    }
    let centred;
    let x = if opts.demean {
        centred = center_panel(panel, true, false)?.0;
        centred.values().view()
    } else {
        panel.values().view()
    };
    let ct = c_t(n, t, opts.c)?;
    let log_t = T::n(t).ln();
    let (denom_full, per_param) = match target {
        Target::Global => (T::n(n) * T::n(t), log_t / (T::n(n) * T::n(t)) * ct),
        Target::Local(_) => (T::n(t), log_t / T::n(t) * ct),
    };
    let cols: Vec<usize> = match target {
        Target::Global => (0..n).collect(),
        Target::Local(i) => vec![i],
    };
    let r_fit = grid.r_max.min(t.min(n));
    let full = estimate_factors_matrix(&x, r_fit)?;

    let cells: Vec<(usize, usize)> = (0..=grid.r_max).flat_map(|r| (0..=grid.p_max).map(move |p| (r, p))).collect();
    let eval = |&(r, p): &(usize, usize)| -> Result<Vec<GridPoint<T>>> {
        let skip_all = |why: String| {
            (0..=grid.p_f_max)
                .map(|p_f| GridPoint {
                    r,
                    p,
                    p_f,
                    value: None,
                    n_params: 0,
                    note: Some(why.clone()),
                })
                .collect()
        };
        if r > r_fit {
            return Ok(skip_all(format!("r = {r} exceeds min(N, T)")));
        }
        if p + 2 > t {
            return Ok(skip_all(format!("p = {p} too large for T = {t}")));
        }
        let decomp = full.truncate(r)?;
        let var_opts = VarOptions {
            parallel: opts.parallel,
            ..opts.var
        };
        // rows of A⁽ʲ⁾ for the target columns, and their nonzero count
        let (idio_rows, nnz): (Vec<Array2<T>>, usize) = if p == 0 {
            (Vec::new(), 0)
        } else {
            match target {
                Target::Global => {
                    let m = fit_sparse_var_with(&decomp.idio.view(), p, &var_opts)?;
                    let nnz = m.nonzeros();
                    (m.slopes, nnz)
                }
                Target::Local(i) => {
                    let fit = fit_rows(&decomp.idio.view(), p, &[i], &var_opts)?.remove(0);
                    let nnz = fit.beta.iter().filter(|b| **b != T::zero()).count();
                    let rows = (0..p)
                        .map(|j| fit.beta.slice(s![j * n..(j + 1) * n]).to_owned().insert_axis(ndarray::Axis(0)))
                        .collect();
                    (rows, nnz)
                }
            }
        };
        let mut out = Vec::with_capacity(grid.p_f_max + 1);
        for p_f in 0..=grid.p_f_max {
            let pf_eff = if r == 0 { 0 } else { p_f };
            let m = p.max(pf_eff);
            if m + 2 > t || t <= pf_eff * r.max(1) {
                out.push(GridPoint {
                    r,
                    p,
                    p_f,
                    value: None,
                    n_params: 0,
                    note: Some(format!("p_f = {p_f} too large for T = {t}")),
                });
                continue;
            }
            let pis = factor_var_fit(&decomp.factors.view(), pf_eff)?.coefs;
            let res = one_step_residuals(&x, &decomp, &pis, &idio_rows, &cols, m);
            let ss: T = res.iter().map(|v| *v * *v).sum();
            let denom = if opts.effective_sample_mean {
                T::n(res.len())
            } else {
                denom_full
            };
            let n_params = match target {
                Target::Global => r * (pf_eff + n) + nnz,
                Target::Local(_) => r * pf_eff + nnz,
            };
            out.push(GridPoint {
                r,
                p,
                p_f,
                value: Some(score(ss, denom, n_params, per_param)),
                n_params,
                note: if r == 0 && p_f > 0 { Some("p_f ignored without factors".into()) } else { None },
            });
        }
        Ok(out)
    };
    let evaluated: Vec<Vec<GridPoint<T>>> = if opts.parallel {
        cells.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        cells.iter().map(eval).collect::<Result<_>>()?
    };
    let points: Vec<GridPoint<T>> = evaluated.into_iter().flatten().collect();
    let best = argmin(&points).ok_or_else(|| Error::invalid("no feasible (r, p, p_f) cell on the grid"))?;
    let b = &points[best];
    Ok(SelectionResult {
        r: b.r,
        p: b.p,
        p_f: if b.r == 0 { 0 } else { b.p_f },
        criterion_value: b.value.unwrap(),
        mode: match target {
            Target::Global => SelectionMode::Global,
            Target::Local(i) => SelectionMode::Local { series: i },
        },
        grid: points,
    })
}

/// Global criterion over `(r, p, p_f)`: one choice for the whole panel.
pub fn global_ic<T: Scalar>(panel: &TimeSeriesPanel<T>, grid: SelectionGrid, opts: &SelectionOptions<T>) -> Result<SelectionResult<T>> {
    sweep(panel, grid, Target::Global, opts)
}

/// Local criterion for series `i`: only row `i` of each sparse VAR is fitted.
pub fn local_ic<T: Scalar>(panel: &TimeSeriesPanel<T>, i: usize, grid: SelectionGrid, opts: &SelectionOptions<T>) -> Result<SelectionResult<T>> {
    sweep(panel, grid, Target::Local(i), opts)
}

/// `((N+T)/(NT)) · log(NT/(N+T))`.
pub fn bai_ng_penalty<T: Scalar>(n: usize, t: usize) -> T {
    let (nf, tf) = (T::n(n), T::n(t));
    (nf + tf) / (nf * tf) * (nf * tf / (nf + tf)).ln()
}

/// Factor count minimising `log V(r) + r g(N, T)` on the demeaned panel.
pub fn bai_ng_selection<T: Scalar>(panel: &TimeSeriesPanel<T>, r_max: usize) -> Result<SelectionResult<T>> {
    let (t, n) = (panel.t(), panel.n());
    if r_max > t.min(n) {
        return Err(Error::dim(format!("r_max = {r_max} exceeds min(N, T) = {}", t.min(n))));
    }
    let (centred, _) = center_panel(panel, true, false)?;
    let eig = squared_singular_values(&centred.values().view())?;
    let g = bai_ng_penalty::<T>(n, t);
    // V(r) is the tail sum of the squared singular values
    let mut tails = Array1::zeros(eig.len() + 1);
    for k in (0..eig.len()).rev() {
        tails[k] = tails[k + 1] + eig[k];
    }
    let points: Vec<GridPoint<T>> = (0..=r_max)
        .map(|r| GridPoint {
            r,
            p: 0,
            p_f: 0,
            value: Some(score(tails[r], T::one(), r, g)),
            n_params: r,
            note: None,
        })
        .collect();
    let best = argmin(&points).expect("r = 0 always evaluated");
    Ok(SelectionResult {
        r: points[best].r,
        p: 0,
        p_f: 0,
        criterion_value: points[best].value.unwrap(),
        grid: points,
        mode: SelectionMode::BaiNg,
    })
}

pub fn bai_ng<T: Scalar>(panel: &TimeSeriesPanel<T>, r_max: usize) -> Result<usize> {
    Ok(bai_ng_selection(panel, r_max)?.r)
}
