//! Principal-component estimation of factors and loadings.
//!
//! With `X / sqrt(NT) = U D Vᵀ`, the estimates are `F̂ = sqrt(T) U_r` and
//! `Λ̂ = sqrt(N) V_r D_r`, so that `F̂ᵀF̂ / T = I_r` and `Λ̂ᵀΛ̂` is diagonal.
//! The SVD is obtained from the eigendecomposition of the smaller Gram matrix.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::panel::TimeSeriesPanel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDecomposition<T> {
    /// `T × r` estimated factors.
    pub factors: Array2<T>,
    /// `N × r` estimated loadings.
    pub loadings: Array2<T>,
    /// Leading `r` singular values of `X / sqrt(NT)`, descending.
    pub singular_values: Array1<T>,
    /// `F̂ Λ̂ᵀ`.
    pub common: Array2<T>,
    /// `X - F̂ Λ̂ᵀ`.
    pub idio: Array2<T>,
}

impl<T: Scalar> FactorDecomposition<T> {
    pub fn r(&self) -> usize {
        self.factors.ncols()
    }

    /// The decomposition with only the leading `r` components. Principal
    /// components nest, so this equals a fresh fit with `r` factors.
    pub fn truncate(&self, r: usize) -> Result<Self> {
        if r > self.r() {
            return Err(Error::dim(format!("cannot truncate {} factors to {r}", self.r())));
        }
        let factors = self.factors.slice(s![.., ..r]).to_owned();
        let loadings = self.loadings.slice(s![.., ..r]).to_owned();
        let common = factors.dot(&loadings.t());
        let x = &self.common + &self.idio;
        let idio = &x - &common;
        Ok(Self {
            factors,
            loadings,
            singular_values: self.singular_values.slice(s![..r]).to_owned(),
            common,
            idio,
        })
    }

    /// Factor scores of a new observation vector: `(Λ̂ᵀΛ̂)⁻¹ Λ̂ᵀ x`.
    ///
    /// Applied to an in-sample row this reproduces the corresponding row of
    /// `F̂`.
    pub fn project(&self, x: &ArrayView1<T>) -> Array1<T> {
        let r = self.r();
        if r == 0 {
            return Array1::zeros(0);
        }
        let lt_x = self.loadings.t().dot(x);
        // Λ̂ᵀΛ̂ = N D², diagonal by construction
        let n = T::n(self.loadings.nrows());
        Array1::from_shape_fn(r, |k| {
            let d2 = self.singular_values[k] * self.singular_values[k] * n;
            if d2 > T::zero() {
                lt_x[k] / d2
            } else {
                T::zero()
            }
        })
    }
}

/// Estimate `r` factors from a panel.
pub fn estimate_factors<T: Scalar>(panel: &TimeSeriesPanel<T>, r: usize) -> Result<FactorDecomposition<T>> {
    estimate_factors_matrix(&panel.values().view(), r)
}

/// Estimate `r` factors from a raw `T × N` matrix.
pub fn estimate_factors_matrix<T: Scalar>(x: &ArrayView2<T>, r: usize) -> Result<FactorDecomposition<T>> {
    let (t, n) = x.dim();
    if r > t.min(n) {
        return Err(Error::dim(format!("r = {r} exceeds min(T, N) = {}", t.min(n))));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("panel contains non-finite values"));
    }
    let tt = T::n(t);
    let nn = T::n(n);
    let norm = nn * tt;
    let sqrt_t = tt.sqrt();

    let mut factors = Array2::<T>::zeros((t, r));
    let mut sv = Array1::<T>::zeros(r);
    if r > 0 {
        if n <= t {
            let gram = x.t().dot(x).mapv(|v| v / norm);
            let (vals, vecs) = linalg::sym_eigen(&gram.view())?;
            let top = vals[0].max(T::zero()).sqrt();
            let tol = top * T::epsilon() * T::n(t.max(n)) * T::c(10.0);
            for k in 0..r {
                sv[k] = vals[k].max(T::zero()).sqrt();
            }
            let mut filled = 0;
            for k in 0..r {
                let d = sv[k];
                if d > tol && d > T::zero() {
                    // u_k = X v_k / (sqrt(NT) d_k)
                    let u = x.dot(&vecs.column(k)).mapv(|v| v / (norm.sqrt() * d));
                    factors.column_mut(k).assign(&u.mapv(|v| v * sqrt_t));
                    filled += 1;
                } else {
                    break;
                }
            }
            complete_orthonormal(&mut factors, filled, sqrt_t);
        } else {
            let gram = x.dot(&x.t()).mapv(|v| v / norm);
            let (vals, vecs) = linalg::sym_eigen(&gram.view())?;
            for k in 0..r {
                sv[k] = vals[k].max(T::zero()).sqrt();
                factors.column_mut(k).assign(&vecs.column(k).mapv(|v| v * sqrt_t));
            }
        }
    }
    // Λ̂ = XᵀF̂ / T equals sqrt(N) V_r D_r when F̂ = sqrt(T) U_r
    let mut loadings = x.t().dot(&factors).mapv(|v| v / tt);

    for k in 0..r {
        let pick = |col: ArrayView1<T>| {
            col.iter()
                .fold(T::zero(), |best, &v| if v.abs() > best.abs() { v } else { best })
        };
        let mut lead = pick(loadings.column(k));
        if lead == T::zero() {
            lead = pick(factors.column(k));
        }
        if lead < T::zero() {
            factors.column_mut(k).mapv_inplace(|v| -v);
            loadings.column_mut(k).mapv_inplace(|v| -v);
        }
    }

    let common = factors.dot(&loadings.t());
    let idio = x.to_owned() - &common;
    Ok(FactorDecomposition {
        factors,
        loadings,
        singular_values: sv,
        common,
        idio,
    })
}

/// Fill columns `filled..` with unit-norm (scaled by `scale`) vectors
/// orthogonal to the preceding columns, using the canonical basis as seeds.
fn complete_orthonormal<T: Scalar>(f: &mut Array2<T>, filled: usize, scale: T) {
    let (t, r) = f.dim();
    let mut seed = 0;
    for k in filled..r {
        while seed < t {
            let mut v = Array1::<T>::zeros(t);
            v[seed] = scale;
            seed += 1;
            for j in 0..k {
                let col = f.column(j);
                let proj = col.dot(&v) / (scale * scale);
                v = &v - &col.mapv(|c| c * proj);
            }
            let nrm = v.dot(&v).sqrt();
            if nrm > scale * T::c(1e-6) {
                f.column_mut(k).assign(&v.mapv(|c| c * scale / nrm));
                break;
            }
        }
    }
}

/// All eigenvalues of the Gram matrix of `X / sqrt(NT)` (the squared singular
/// values), descending. Their tail sums give the pooled residual variance of
/// each principal-component truncation.
pub fn squared_singular_values<T: Scalar>(x: &ArrayView2<T>) -> Result<Array1<T>> {
    let (t, n) = x.dim();
    let norm = T::n(n) * T::n(t);
    let gram = if n <= t {
        x.t().dot(x).mapv(|v| v / norm)
    } else {
        x.dot(&x.t()).mapv(|v| v / norm)
    };
    let (vals, _) = linalg::sym_eigen(&gram.view())?;
    Ok(vals.mapv(|v| v.max(T::zero())))
}

/// Rotation linking estimated and true factors: `F̂ ≈ F Hᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix<T> {
    pub h: Array2<T>,
    pub condition_number: T,
}

/// `H = [(ΛᵀΛ/N)(FᵀF̂/T) D⁻²]ᵀ` from the true loadings and factors.
pub fn rotation_matrix<T: Scalar>(
    true_loadings: &ArrayView2<T>,
    true_factors: &ArrayView2<T>,
    fit: &FactorDecomposition<T>,
) -> Result<RotationMatrix<T>> {
    let r = fit.r();
    let (n, r0) = true_loadings.dim();
    let (t, r1) = true_factors.dim();
    if r0 != r || r1 != r || n != fit.loadings.nrows() || t != fit.factors.nrows() {
        return Err(Error::dim(format!(
            "rotation: loadings {:?}, factors {:?} incompatible with fit (T={}, N={}, r={r})",
            true_loadings.dim(),
            true_factors.dim(),
            fit.factors.nrows(),
            fit.loadings.nrows()
        )));
    }
    if let Some(k) = fit.singular_values.iter().position(|d| *d == T::zero()) {
        return Err(Error::SingularValue(format!("singular value {k} is zero")));
    }
    let ll = true_loadings.t().dot(true_loadings).mapv(|v| v / T::n(n));
    let ff = true_factors.t().dot(&fit.factors).mapv(|v| v / T::n(t));
    let mut ht = ll.dot(&ff);
    for k in 0..r {
        let d2 = fit.singular_values[k] * fit.singular_values[k];
        ht.column_mut(k).mapv_inplace(|v| v / d2);
    }
    let h = ht.t().to_owned();
    let condition_number = linalg::condition_number(&h.view())?;
    Ok(RotationMatrix { h, condition_number })
}
