//! Inverse spectral density of the factor model and partial-coherence networks.
//!
//! The factor block is estimated by a lag-window estimator, the idiosyncratic
//! block parametrically from thresholded VAR slopes and a sparse precision
//! matrix of the innovations; the two are joined by the Woodbury identity.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{autocovariance, CombinedModel};
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    #[default]
    Bartlett,
    Parzen,
}

impl Kernel {
    /// Kernel weight at `u`; zero outside `(-1, 1)`.
    pub fn weight<T: Scalar>(self, u: T) -> T {
        let a = u.abs();
        if a >= T::one() {
            return T::zero();
        }
        match self {
            Kernel::Bartlett => T::one() - a,
            Kernel::Parzen => {
                if a <= T::c(0.5) {
                    T::one() - T::c(6.0) * a * a + T::c(6.0) * a * a * a
                } else {
                    let b = T::one() - a;
                    T::c(2.0) * b * b * b
                }
            }
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bartlett" => Ok(Kernel::Bartlett),
            "parzen" => Ok(Kernel::Parzen),
            other => Err(Error::invalid(format!("unknown kernel {other:?} (bartlett, parzen)"))),
        }
    }
}

/// `⌊T^{1/3}⌋`, at least 1.
pub fn default_bandwidth(t: usize) -> usize {
    ((t as f64).cbrt().floor() as usize).max(1)
}

/// `count` equispaced frequencies on `[0, π]`.
pub fn frequency_grid<T: Scalar>(count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..count).map(|k| T::PI() * T::n(k) / T::n(count - 1)).collect(),
    }
}

/// Hermitian matrices on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid<T> {
    pub frequencies: Vec<T>,
    pub values: Vec<Array2<Complex<T>>>,
}

impl<T: Scalar> SpectralGrid<T> {
    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |m| m.nrows())
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn max_hermitian_defect(&self) -> T {
        self.values.iter().map(linalg::hermitian_defect).fold(T::zero(), T::max)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            frequencies: self.frequencies.clone(),
            values: self.values.iter().map(|m| m.mapv(|z| z * c)).collect(),
        }
    }
}

fn check_frequencies<T: Scalar>(freqs: &[T]) -> Result<()> {
    if freqs.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("non-finite frequency"));
    }
    if freqs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("frequencies must be strictly increasing"));
    }
    Ok(())
}

/// `f̂(ω) = (1/2π) Σ_h K(h/B) e^{−ihω} Γ̂(h)` with `Γ̂(−h) = Γ̂(h)ᵀ`.
pub fn lag_window_spectral<T: Scalar>(x: &ArrayView2<T>, kernel: Kernel, bandwidth: usize, freqs: &[T]) -> Result<SpectralGrid<T>> {
    let (t, r) = x.dim();
    if bandwidth < 1 || bandwidth >= t {
        return Err(Error::invalid(format!("bandwidth must satisfy 1 ≤ B < T = {t}, got {bandwidth}")));
    }
    check_frequencies(freqs)?;
    let bw = T::n(bandwidth);
    let lags: Vec<(usize, T, Array2<T>)> = (0..bandwidth.min(t))
        .map(|h| (h, kernel.weight(T::n(h) / bw)))
        .filter(|(_, k)| *k != T::zero())
        .map(|(h, k)| (h, k, autocovariance(x, h)))
        .collect();
    let scale = T::one() / (T::c(2.0) * T::PI());
    let values = freqs
        .iter()
        .map(|&w| {
            let mut f = Array2::<Complex<T>>::zeros((r, r));
            for &(h, ref k, ref g) in &lags {
                if h == 0 {
                    f.zip_mut_with(g, |z, &v| z.re += *k * v);
                    continue;
                }
                let e = Complex::from_polar(T::one(), -T::n(h) * w);
                // e^{−ihω} Γ(h) + e^{ihω} Γ(h)ᵀ
                for a in 0..r {
                    for b in 0..r {
                        f[[a, b]] += (e * g[[a, b]] + e.conj() * g[[b, a]]) * *k;
                    }
                }
            }
            linalg::hermitian_part(&f.mapv(|z| z * scale))
        })
        .collect();
    Ok(SpectralGrid {
        frequencies: freqs.to_vec(),
        values,
    })
}

/// Elementwise `z (1 − |λ/z|^ν)₊`; `ν = ∞` is hard thresholding.
pub fn threshold_value<T: Scalar>(z: T, lambda: T, nu: T) -> T {
    if z == T::zero() || lambda == T::zero() {
        return z;
    }
    let ratio = (lambda / z).abs();
    if nu.is_infinite() {
        return if ratio < T::one() { z } else { T::zero() };
    }
    z * (T::one() - ratio.powf(nu)).max(T::zero())
}

pub fn threshold_slopes<T: Scalar>(slopes: &[Array2<T>], lambda_xi: T, nu: T) -> Result<Vec<Array2<T>>> {
    if !(lambda_xi >= T::zero()) {
        return Err(Error::invalid("threshold must be nonnegative"));
    }
    if !(nu >= T::one()) {
        return Err(Error::invalid("thresholding exponent must be at least 1"));
    }
    Ok(slopes.iter().map(|a| a.mapv(|z| threshold_value(z, lambda_xi, nu))).collect())
}

/// `c · sqrt(log N / T)`.
pub fn universal_threshold<T: Scalar>(n: usize, t: usize, c: T) -> T {
    c * (T::n(n.max(2)).ln() / T::n(t.max(1))).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMethod {
    #[default]
    GraphicalLasso,
    Clime,
}

impl std::str::FromStr for PrecisionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "graphical_lasso" | "glasso" => Ok(PrecisionMethod::GraphicalLasso),
            "clime" => Ok(PrecisionMethod::Clime),
            other => Err(Error::invalid(format!("unknown precision method {other:?} (graphical_lasso, clime)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate<T> {
    pub omega: Array2<T>,
    pub method: PrecisionMethod,
    pub penalty: T,
    /// Nonzero entries of `omega`.
    pub sparsity: usize,
}

/// `VᵀV / n` (innovations are mean zero by construction).
pub fn innovation_covariance<T: Scalar>(v: &ArrayView2<T>) -> Array2<T> {
    let n = T::n(v.nrows());
    v.t().dot(v).mapv(|x| x / n)
}

pub fn estimate_precision<T: Scalar>(innovations: &ArrayView2<T>, method: PrecisionMethod, penalty: T) -> Result<PrecisionEstimate<T>> {
    if innovations.nrows() <= 2 {
        return Err(Error::SampleSize("precision estimation needs more than 2 innovation rows".into()));
    }
    if !(penalty >= T::zero()) {
        return Err(Error::invalid("precision penalty must be nonnegative"));
    }
    let s = innovation_covariance(innovations);
    precision_from_covariance(&s.view(), method, penalty)
}

pub fn precision_from_covariance<T: Scalar>(s: &ArrayView2<T>, method: PrecisionMethod, penalty: T) -> Result<PrecisionEstimate<T>> {
    if s.diag().iter().any(|v| !(*v > T::zero())) {
        return Err(Error::Numerical("innovation covariance has a nonpositive diagonal entry".into()));
    }
    let omega = match method {
        PrecisionMethod::GraphicalLasso => graphical_lasso(s, penalty, &GlassoOptions::default())?,
        PrecisionMethod::Clime => clime(s, penalty)?,
    };
    let sparsity = omega.iter().filter(|v| **v != T::zero()).count();
    Ok(PrecisionEstimate {
        omega,
        method,
        penalty,
        sparsity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlassoOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for GlassoOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_outer: 1000,
            max_inner: 10_000,
        }
    }
}

/// Graphical lasso by block coordinate descent on the working covariance.
/// Off-diagonal entries of the precision matrix are penalised, the diagonal
/// is not.
pub fn graphical_lasso<T: Scalar>(s: &ArrayView2<T>, rho: T, opts: &GlassoOptions) -> Result<Array2<T>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::dim("covariance must be square"));
    }
    if n == 1 {
        return Ok(Array2::from_elem((1, 1), T::one() / s[[0, 0]]));
    }
    let mut w = s.to_owned();
    let mut betas = Array2::<T>::zeros((n, n - 1));
    let off_scale = {
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += s[[i, j]].abs();
                }
            }
        }
        let m = acc / T::n(n * (n - 1));
        if m > T::zero() {
            m
        } else {
            T::one()
        }
    };
    let tol = T::c(opts.tol);
    let mut converged = false;
    let mut outer = 0;
    while outer < opts.max_outer {
        outer += 1;
        let mut change = T::zero();
        for j in 0..n {
            let idx: Vec<usize> = (0..n).filter(|&k| k != j).collect();
            let mut beta = betas.row(j).to_owned();
            // coordinate descent on ½βᵀW₁₁β − βᵀs₁₂ + ρ‖β‖₁
            let mut it = 0;
            loop {
                it += 1;
                let mut delta = T::zero();
                for (a, &ka) in idx.iter().enumerate() {
                    let mut g = s[[ka, j]];
                    for (b, &kb) in idx.iter().enumerate() {
                        if a != b {
                            g -= w[[ka, kb]] * beta[b];
                        }
                    }
                    let new = crate::lasso::soft_threshold(g, rho) / w[[ka, ka]];
                    delta = delta.max((new - beta[a]).abs());
                    beta[a] = new;
                }
                if delta < tol * T::c(1e-2) {
                    break;
                }
                if it >= opts.max_inner {
                    return Err(Error::NotConverged {
                        iterations: it,
                        kkt_violation: delta.f64(),
                        context: Some(format!("graphical lasso column {j}")),
                    });
                }
            }
            for &ka in &idx {
                let mut v = T::zero();
                for (b, &kb) in idx.iter().enumerate() {
                    v += w[[ka, kb]] * beta[b];
                }
                change = change.max((v - w[[ka, j]]).abs());
                w[[ka, j]] = v;
                w[[j, ka]] = v;
            }
            betas.row_mut(j).assign(&beta);
        }
        if change <= tol * off_scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: outer,
            kkt_violation: f64::NAN,
            context: Some("graphical lasso".into()),
        });
    }
    let mut omega = Array2::zeros((n, n));
    for j in 0..n {
        let idx: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        let mut w12b = T::zero();
        for (a, &ka) in idx.iter().enumerate() {
            w12b += w[[ka, j]] * betas[[j, a]];
        }
        let denom = w[[j, j]] - w12b;
        if !(denom > T::zero()) {
            return Err(Error::Numerical(format!("graphical lasso produced a nonpositive pivot in column {j}")));
        }
        let ojj = T::one() / denom;
        omega[[j, j]] = ojj;
        for (a, &ka) in idx.iter().enumerate() {
            omega[[ka, j]] = -betas[[j, a]] * ojj;
        }
    }
    Ok((&omega + &omega.t()).mapv(|v| v / T::c(2.0)))
}

/// CLIME: per column `min ‖β‖₁` subject to `‖Sβ − e_i‖_∞ ≤ λ`, solved as a
/// linear program; symmetrised by keeping the entry of smaller magnitude.
/// Columns whose program is infeasible fall back to `e_i / s_ii`.
pub fn clime<T: Scalar>(s: &ArrayView2<T>, lambda: T) -> Result<Array2<T>> {
    let n = s.nrows();
    let sf = s.mapv(|v| v.f64());
    let lam = lambda.f64();
    let cols: Vec<Array1<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut lp = Problem::new(OptimizationDirection::Minimize);
            let u: Vec<_> = (0..n).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
            let v: Vec<_> = (0..n).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
            for r in 0..n {
                let e = if r == i { 1.0 } else { 0.0 };
                let expr: Vec<_> = (0..n).flat_map(|k| [(u[k], sf[[r, k]]), (v[k], -sf[[r, k]])]).collect();
                lp.add_constraint(expr.as_slice(), ComparisonOp::Le, e + lam);
                lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, e - lam);
            }
            match lp.solve().map_err(|e| e.to_string()).and_then(|o| o.into_solution().map_err(|_| "interrupted".to_string())) {
                Ok(sol) => Array1::from_shape_fn(n, |k| sol.var_value(u[k]) - sol.var_value(v[k])),
                Err(e) => {
                    log::warn!("CLIME column {i} failed ({e}); using the diagonal fallback");
                    let mut b = Array1::zeros(n);
                    b[i] = 1.0 / sf[[i, i]];
                    b
                }
            }
        })
        .collect();
    let mut omega = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (cols[j][i], cols[i][j]);
            omega[[i, j]] = T::c(if a.abs() <= b.abs() { a } else { b });
        }
    }
    // the symmetrised solution need not be definite; clip if it is not
    let (vals, vecs) = linalg::sym_eigen(&omega.view())?;
    let min = vals.iter().fold(T::infinity(), |m, v| m.min(*v));
    if min < T::c(-1e-8) {
        log::warn!("CLIME estimate not positive definite (min eigenvalue {min}); clipping");
        let floor = T::c(1e-6) * vals[0].abs().max(T::one());
        let clipped = vals.mapv(|v| v.max(floor));
        omega = (&vecs * &clipped).dot(&vecs.t());
        omega = (&omega + &omega.t()).mapv(|v| v / T::c(2.0));
    }
    Ok(omega)
}

/// `C(ω) = I − Σ_j A⁽ʲ⁾ e^{−ijω}`.
pub fn transfer<T: Scalar>(slopes: &[Array2<T>], n: usize, w: T) -> Array2<Complex<T>> {
    let mut c = Array2::<Complex<T>>::eye(n);
    for (j, a) in slopes.iter().enumerate() {
        let e = Complex::from_polar(T::one(), -T::n(j + 1) * w);
        c.zip_mut_with(a, |z, &v| *z -= e * v);
    }
    c
}

/// `f̂_ξ⁻¹(ω) = C(ω)ᴴ Ω C(ω)`, the inverse of the VAR spectral density
/// `C⁻¹ Σ_v C⁻ᴴ` (no `1/2π` factor).
pub fn var_inverse_spectral<T: Scalar>(slopes: &[Array2<T>], precision: &ArrayView2<T>, freqs: &[T]) -> Result<SpectralGrid<T>> {
    let n = precision.nrows();
    if precision.ncols() != n || slopes.iter().any(|a| a.dim() != (n, n)) {
        return Err(Error::dim("slopes and precision must be N×N"));
    }
    check_frequencies(freqs)?;
    let omega = linalg::to_complex(precision);
    let values = freqs
        .par_iter()
        .map(|&w| {
            let c = transfer(slopes, n, w);
            linalg::hermitian_part(&linalg::herm(&c).dot(&omega).dot(&c))
        })
        .collect();
    Ok(SpectralGrid {
        frequencies: freqs.to_vec(),
        values,
    })
}

/// Woodbury combination
/// `f_X⁻¹ = F − FΛ [f_f⁻¹ + ΛᵀFΛ]⁻¹ ΛᵀF` with `F = f_ξ⁻¹`, evaluated as
/// `F − FΛ f_f (I + ΛᵀFΛ f_f)⁻¹ ΛᵀF` so that `f_f` need not be inverted.
pub fn combine_inverse_spectral<T: Scalar>(f_xi_inv: &SpectralGrid<T>, loadings: &ArrayView2<T>, f_f: &SpectralGrid<T>) -> Result<SpectralGrid<T>> {
    let (n, r) = loadings.dim();
    if f_xi_inv.dim() != n && !f_xi_inv.is_empty() {
        return Err(Error::dim("loadings rows differ from the idiosyncratic dimension"));
    }
    if r == 0 {
        return Ok(f_xi_inv.clone());
    }
    if f_f.frequencies != f_xi_inv.frequencies {
        return Err(Error::dim("factor and idiosyncratic grids differ"));
    }
    if f_f.dim() != r {
        return Err(Error::dim("factor spectrum dimension differs from loadings"));
    }
    let lam = linalg::to_complex(loadings);
    let lam_t = lam.t().to_owned();
    let values = f_xi_inv
        .values
        .par_iter()
        .zip(f_f.values.par_iter())
        .zip(f_xi_inv.frequencies.par_iter())
        .map(|((fx, ff), w)| {
            let fl = fx.dot(&lam);
            let ltf = lam_t.dot(fx);
            let mut inner = ltf.dot(&lam).dot(ff);
            for k in 0..r {
                inner[[k, k]] += Complex::new(T::one(), T::zero());
            }
            let rhs = ltf.clone();
            let sol = match linalg::csolve(&inner, &rhs) {
                Ok(s) => s,
                Err(_) => {
                    let tr = inner.diag().iter().map(|z| z.norm()).sum::<T>();
                    let ridge = T::c(1e-8) * tr.max(T::one()) / T::n(r);
                    log::warn!("singular Woodbury system at ω = {w}; adding ridge {ridge}");
                    for k in 0..r {
                        inner[[k, k]] += Complex::new(ridge, T::zero());
                    }
                    linalg::csolve(&inner, &rhs)?
                }
            };
            Ok(linalg::hermitian_part(&(fx - &fl.dot(ff).dot(&sol))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralGrid {
        frequencies: f_xi_inv.frequencies.clone(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialCoherence<T> {
    /// `R(ω)` per grid frequency.
    pub per_frequency: Vec<Array2<T>>,
    /// Elementwise maximum over the grid.
    pub sup: Array2<T>,
}

/// `R_{uv}(ω) = |f⁻¹_{uv}| / sqrt(f⁻¹_{uu} f⁻¹_{vv})`, zero on the diagonal.
pub fn partial_coherence<T: Scalar>(f_x_inv: &SpectralGrid<T>) -> Result<PartialCoherence<T>> {
    let n = f_x_inv.dim();
    let mut sup = Array2::zeros((n, n));
    let mut per_frequency = Vec::with_capacity(f_x_inv.len());
    for (m, &w) in f_x_inv.values.iter().zip(&f_x_inv.frequencies) {
        let d: Vec<T> = (0..n).map(|u| m[[u, u]].re).collect();
        if let Some(u) = d.iter().position(|v| !(*v > T::zero())) {
            return Err(Error::Numerical(format!("nonpositive inverse spectral diagonal at ω = {w}, component {u}")));
        }
        let mut r = Array2::zeros((n, n));
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    r[[u, v]] = (m[[u, v]].norm() / (d[u] * d[v]).sqrt()).min(T::one());
                }
            }
        }
        sup.zip_mut_with(&r, |s: &mut T, &x| *s = s.max(x));
        per_frequency.push(r);
    }
    Ok(PartialCoherence { per_frequency, sup })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceNetwork<T> {
    /// Symmetric `sup_ω R` with zero diagonal.
    pub weights: Array2<T>,
    pub threshold: T,
    pub edges: Vec<Edge<T>>,
    pub labels: Vec<String>,
}

impl<T: Scalar> CoherenceNetwork<T> {
    /// Vertices incident to at least one edge.
    pub fn active_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.labels.len()];
        for e in &self.edges {
            on[e.u] = true;
            on[e.v] = true;
        }
        on.iter().enumerate().filter(|(_, a)| **a).map(|(i, _)| i).collect()
    }
}

/// Edges `u < v` with `sup R_{uv} ≥ δ`.
pub fn build_network<T: Scalar>(sup_r: &ArrayView2<T>, delta: T, labels: &[String]) -> Result<CoherenceNetwork<T>> {
    let n = sup_r.nrows();
    if sup_r.ncols() != n || labels.len() != n {
        return Err(Error::dim("coherence matrix must be square with one label per row"));
    }
    if !(delta >= T::zero()) {
        return Err(Error::invalid("threshold must be nonnegative"));
    }
    let mut weights = sup_r.to_owned();
    for u in 0..n {
        weights[[u, u]] = T::zero();
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let w = weights[[u, v]];
            if w >= delta && !(delta == T::zero() && w == T::zero()) {
                edges.push(Edge { u, v, weight: w });
            }
        }
    }
    Ok(CoherenceNetwork {
        weights,
        threshold: delta,
        edges,
        labels: labels.to_vec(),
    })
}

/// Settings of the inverse-spectral pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOptions<T> {
    pub kernel: Kernel,
    /// Lag window; `⌊T^{1/3}⌋` when unset.
    pub bandwidth: Option<usize>,
    pub n_freq: usize,
    /// Slope threshold; `c · sqrt(log N / T)` with `c = threshold_c` when unset.
    pub lambda_xi: Option<T>,
    pub threshold_c: T,
    pub nu: T,
    pub precision: PrecisionMethod,
    /// Precision penalty; `sqrt(log N / T)` when unset.
    pub precision_penalty: Option<T>,
    pub delta: T,
}

impl<T: Scalar> Default for NetworkOptions<T> {
    fn default() -> Self {
        Self {
            kernel: Kernel::Bartlett,
            bandwidth: None,
            n_freq: 128,
            lambda_xi: None,
            threshold_c: T::one(),
            nu: T::infinity(),
            precision: PrecisionMethod::GraphicalLasso,
            precision_penalty: None,
            delta: T::c(0.05),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseSpectralEstimate<T> {
    pub f_x_inv: SpectralGrid<T>,
    pub precision: PrecisionEstimate<T>,
    pub coherence: PartialCoherence<T>,
}

/// Full pipeline from a fitted model to the coherence network.
///
/// The lag-window factor spectrum carries `1/2π` while the parametric
/// idiosyncratic block does not; the factor block is multiplied by `2π`
/// before the Woodbury step so that both follow the same convention.
pub fn network_from_model<T: Scalar>(model: &CombinedModel<T>, labels: &[String], opts: &NetworkOptions<T>) -> Result<(InverseSpectralEstimate<T>, CoherenceNetwork<T>)> {
    let d = &model.decomposition;
    let (t, n) = d.idio.dim();
    let freqs = frequency_grid::<T>(opts.n_freq);
    let lambda_xi = opts.lambda_xi.unwrap_or_else(|| universal_threshold(n, t, opts.threshold_c));
    let slopes = threshold_slopes(&model.idio_var.slopes, lambda_xi, opts.nu)?;
    let innovations = if slopes.is_empty() {
        d.idio.clone()
    } else {
        crate::var::residuals(&slopes, &d.idio.view())?
    };
    let penalty = opts.precision_penalty.unwrap_or_else(|| universal_threshold(n, innovations.nrows(), T::one()));
    let precision = estimate_precision(&innovations.view(), opts.precision, penalty)?;
    let fxi = var_inverse_spectral(&slopes, &precision.omega.view(), &freqs)?;
    let fx = if d.r() > 0 {
        let bw = opts.bandwidth.unwrap_or_else(|| default_bandwidth(t));
        let ff = lag_window_spectral(&d.factors.view(), opts.kernel, bw, &freqs)?.scaled(T::c(2.0) * T::PI());
        combine_inverse_spectral(&fxi, &d.loadings.view(), &ff)?
    } else {
        fxi
    };
    let coherence = partial_coherence(&fx)?;
    let network = build_network(&coherence.sup.view(), opts.delta, labels)?;
    Ok((
        InverseSpectralEstimate {
            f_x_inv: fx,
            precision,
            coherence,
        },
        network,
    ))
}
