//! Dense linear algebra kernels used across the crate.
//!
//! Everything here is generic over [`Scalar`] and deterministic: no
//! randomised starts, no thread-dependent reductions.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors as columns. Householder tridiagonalisation followed by the
/// implicit QL algorithm.
pub fn sym_eigen<T: Scalar>(a: &ArrayView2<T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dim(format!("sym_eigen expects a square matrix, got {:?}", a.dim())));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut v = Array2::<T>::zeros((n, n));
    // symmetrise on the way in so tiny asymmetries from accumulation do not leak
    for i in 0..n {
        for j in 0..n {
            v[[i, j]] = (a[[i, j]] + a[[j, i]]) * T::c(0.5);
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vecs = Array2::<T>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vecs.column_mut(dst).assign(&v.column(src));
    }
    Ok((vals, vecs))
}

fn tred2<T: Scalar>(v: &mut Array2<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = T::zero();
                v[[j, i]] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] -= f * e[k] + g * d[k];
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = T::zero();
    }
    v[[n - 1, n - 1]] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Scalar>(v: &mut Array2<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = T::c(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 * n.max(1) {
                    return Err(Error::Numerical("symmetric eigensolver did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Eigenvalues `(re, im)` of a general real square matrix.
///
/// Balancing, reduction to upper Hessenberg form by stabilised elementary
/// similarity transforms, then the shifted double-step QR iteration.
pub fn eigenvalues<T: Scalar>(a: &ArrayView2<T>) -> Result<Vec<(T, T)>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dim(format!("eigenvalues expects a square matrix, got {:?}", a.dim())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based working copy keeps the classic recurrences readable.
    let mut h = OneBased::new(n);
    for i in 0..n {
        for j in 0..n {
            *h.at(i + 1, j + 1) = a[[i, j]];
        }
    }
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

/// Largest eigenvalue modulus of a real square matrix.
pub fn spectral_radius<T: Scalar>(a: &ArrayView2<T>) -> Result<T> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(T::zero(), T::max))
}

struct OneBased<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> OneBased<T> {
    fn new(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); (n + 1) * (n + 1)],
        }
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.data[i * (self.n + 1) + j]
    }
}

fn balance<T: Scalar>(a: &mut OneBased<T>) {
    let n = a.n;
    let radix = T::c(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    let mut guard = 0;
    while !done && guard < 1000 {
        guard += 1;
        done = true;
        for i in 1..=n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 1..=n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::c(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 1..=n {
                        *a.at(i, j) *= g;
                    }
                    for j in 1..=n {
                        *a.at(j, i) *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg<T: Scalar>(a: &mut OneBased<T>) {
    let n = a.n;
    for m in 2..n {
        let mut x = T::zero();
        let mut i = m;
        for j in m..=n {
            if a.get(j, m - 1).abs() > x.abs() {
                x = a.get(j, m - 1);
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let tmp = a.get(i, j);
                *a.at(i, j) = a.get(m, j);
                *a.at(m, j) = tmp;
            }
            for j in 1..=n {
                let tmp = a.get(j, i);
                *a.at(j, i) = a.get(j, m);
                *a.at(j, m) = tmp;
            }
        }
        if x != T::zero() {
            for i in (m + 1)..=n {
                let mut y = a.get(i, m - 1);
                if y != T::zero() {
                    y /= x;
                    *a.at(i, m - 1) = y;
                    for j in m..=n {
                        let v = a.get(m, j);
                        *a.at(i, j) -= y * v;
                    }
                    for j in 1..=n {
                        let v = a.get(j, i);
                        *a.at(j, m) += y * v;
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..(i - 1) {
            *a.at(i, j) = T::zero();
        }
    }
}

fn sign<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

fn hqr<T: Scalar>(a: &mut OneBased<T>) -> Result<Vec<(T, T)>> {
    let n = a.n;
    let mut wr = vec![T::zero(); n + 1];
    let mut wi = vec![T::zero(); n + 1];
    let mut anorm = T::zero();
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a.get(i, j).abs();
        }
    }
    let mut nn = n;
    let mut t = T::zero();
    let max_its = 30 * n.max(10);
    let (mut x, mut y, mut z, mut w);
    let (mut p, mut q, mut r, mut s): (T, T, T, T);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() + s == s {
                    *a.at(l, l - 1) = T::zero();
                    break;
                }
                l -= 1;
            }
            x = a.get(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = T::zero();
                nn -= 1;
            } else {
                y = a.get(nn - 1, nn - 1);
                w = a.get(nn, nn - 1) * a.get(nn - 1, nn);
                if l == nn - 1 {
                    p = T::c(0.5) * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= T::zero() {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != T::zero() {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = T::zero();
                        wi[nn] = T::zero();
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == max_its {
                        return Err(Error::Numerical("Hessenberg QR iteration did not converge".into()));
                    }
                    // exceptional shift every tenth sweep breaks cycles on structured matrices
                    if its > 0 && its % 10 == 0 {
                        t += x;
                        for i in 1..=nn {
                            *a.at(i, i) -= x;
                        }
                        s = a.get(nn, nn - 1).abs() + a.get(nn - 1, nn - 2).abs();
                        x = T::c(0.75) * s;
                        y = x;
                        w = T::c(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a.get(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a.get(m + 1, m) + a.get(m, m + 1);
                        q = a.get(m + 1, m + 1) - z - r - s;
                        r = a.get(m + 2, m + 1);
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a.get(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a.get(m - 1, m - 1).abs() + z.abs() + a.get(m + 1, m + 1).abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        *a.at(i, i - 2) = T::zero();
                        if i != m + 2 {
                            *a.at(i, i - 3) = T::zero();
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a.get(k, k - 1);
                            q = a.get(k + 1, k - 1);
                            r = T::zero();
                            if k != nn - 1 {
                                r = a.get(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != T::zero() {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != T::zero() {
                            if k == m {
                                if l != m {
                                    *a.at(k, k - 1) = -a.get(k, k - 1);
                                }
                            } else {
                                *a.at(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a.get(k, j) + q * a.get(k + 1, j);
                                if k != nn - 1 {
                                    p += r * a.get(k + 2, j);
                                    *a.at(k + 2, j) -= p * z;
                                }
                                *a.at(k + 1, j) -= p * y;
                                *a.at(k, j) -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a.get(i, k) + y * a.get(i, k + 1);
                                if k != nn - 1 {
                                    p += z * a.get(i, k + 2);
                                    *a.at(i, k + 2) -= p * r;
                                }
                                *a.at(i, k + 1) -= p * q;
                                *a.at(i, k) -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Scalar>(a: &ArrayView2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dim("cholesky expects a square matrix"));
    }
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut s = a[[j, j]];
        for k in 0..j {
            s -= l[[j, k]] * l[[j, k]];
        }
        if !(s > T::zero()) {
            return Err(Error::Numerical(format!("matrix not positive definite (pivot {j})")));
        }
        let d = s.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(l)
}

/// Solve `A X = B` for symmetric positive definite `A`.
pub fn solve_spd<T: Scalar>(a: &ArrayView2<T>, b: &ArrayView2<T>) -> Result<Array2<T>> {
    let l = cholesky(a)?;
    let n = l.nrows();
    if b.nrows() != n {
        return Err(Error::dim("solve_spd: right-hand side rows do not match"));
    }
    let mut x = b.to_owned();
    for col in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[[i, col]];
            for k in 0..i {
                s -= l[[i, k]] * x[[k, col]];
            }
            x[[i, col]] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = x[[i, col]];
            for k in (i + 1)..n {
                s -= l[[k, i]] * x[[k, col]];
            }
            x[[i, col]] = s / l[[i, i]];
        }
    }
    Ok(x)
}

/// Solve `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: &ArrayView2<T>, b: &ArrayView2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::dim(format!("solve: incompatible shapes {:?} and {:?}", a.dim(), b.dim())));
    }
    let mut m = a.to_owned();
    let mut x = b.to_owned();
    let scale = m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, m[[r, col]].abs()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= scale * T::epsilon() * T::n(n) || pval == T::zero() {
            return Err(Error::Numerical(format!("singular matrix (column {col})")));
        }
        if piv != col {
            for j in 0..n {
                m.swap([piv, j], [col, j]);
            }
            for j in 0..x.ncols() {
                x.swap([piv, j], [col, j]);
            }
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                let v = m[[col, j]];
                m[[r, j]] -= f * v;
            }
            for j in 0..x.ncols() {
                let v = x[[col, j]];
                x[[r, j]] -= f * v;
            }
        }
    }
    for j in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[[i, j]];
            for k in (i + 1)..n {
                s -= m[[i, k]] * x[[k, j]];
            }
            x[[i, j]] = s / m[[i, i]];
        }
    }
    Ok(x)
}

pub fn inverse<T: Scalar>(a: &ArrayView2<T>) -> Result<Array2<T>> {
    solve(a, &Array2::eye(a.nrows()).view())
}

/// Minimum-norm least-squares solve for a symmetric PSD system via its
/// eigendecomposition. Eigenvalues below `rel_tol * max_eig` are dropped.
/// Returns the solution and whether any direction was dropped.
pub fn pinv_solve_sym<T: Scalar>(a: &ArrayView2<T>, b: &ArrayView2<T>, rel_tol: T) -> Result<(Array2<T>, bool)> {
    let (vals, vecs) = sym_eigen(a)?;
    let top = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cut = top * rel_tol;
    let proj = vecs.t().dot(b);
    let mut scaled = proj;
    let mut dropped = false;
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() > cut && lam != T::zero() {
            scaled.row_mut(k).mapv_inplace(|v| v / lam);
        } else {
            dropped = true;
            scaled.row_mut(k).fill(T::zero());
        }
    }
    Ok((vecs.dot(&scaled), dropped))
}

/// Condition number `σ_max / σ_min` of a square real matrix.
pub fn condition_number<T: Scalar>(a: &ArrayView2<T>) -> Result<T> {
    let (vals, _) = sym_eigen(&a.t().dot(a).view())?;
    let n = vals.len();
    if n == 0 {
        return Ok(T::one());
    }
    let hi = vals[0].max(T::zero()).sqrt();
    let lo = vals[n - 1].max(T::zero()).sqrt();
    Ok(if lo == T::zero() { T::infinity() } else { hi / lo })
}

/// Solve `A X = B` for complex `A` by Gaussian elimination with partial
/// pivoting. Fails when a pivot falls below `eps * n * max|A|`.
pub fn csolve<T: Scalar>(a: &Array2<Complex<T>>, b: &Array2<Complex<T>>) -> Result<Array2<Complex<T>>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::dim("csolve: incompatible shapes"));
    }
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = m.iter().fold(T::zero(), |acc, v| acc.max(v.norm()));
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, m[[r, col]].norm()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= scale * T::epsilon() * T::n(n) || pval == T::zero() {
            return Err(Error::Numerical(format!("singular complex matrix (column {col})")));
        }
        if piv != col {
            for j in 0..n {
                m.swap([piv, j], [col, j]);
            }
            for j in 0..x.ncols() {
                x.swap([piv, j], [col, j]);
            }
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / d;
            for j in col..n {
                let v = m[[col, j]];
                m[[r, j]] = m[[r, j]] - f * v;
            }
            for j in 0..x.ncols() {
                let v = x[[col, j]];
                x[[r, j]] = x[[r, j]] - f * v;
            }
        }
    }
    for j in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[[i, j]];
            for k in (i + 1)..n {
                s = s - m[[i, k]] * x[[k, j]];
            }
            x[[i, j]] = s / m[[i, i]];
        }
    }
    Ok(x)
}

pub fn cinverse<T: Scalar>(a: &Array2<Complex<T>>) -> Result<Array2<Complex<T>>> {
    let n = a.nrows();
    let eye = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    csolve(a, &eye)
}

/// Conjugate transpose.
pub fn herm<T: Scalar>(a: &Array2<Complex<T>>) -> Array2<Complex<T>> {
    a.t().mapv(|z| z.conj())
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part<T: Scalar>(a: &Array2<Complex<T>>) -> Array2<Complex<T>> {
    let half = T::c(0.5);
    let ah = herm(a);
    (a + &ah).mapv(|z| z * half)
}

/// Max-abs deviation from Hermitian symmetry.
pub fn hermitian_defect<T: Scalar>(a: &Array2<Complex<T>>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn to_complex<T: Scalar>(a: &ArrayView2<T>) -> Array2<Complex<T>> {
    a.mapv(|v| Complex::new(v, T::zero()))
}

/// Largest absolute entry.
pub fn max_abs<T: Scalar>(a: &ArrayView2<T>) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Column means.
pub fn column_means<T: Scalar>(a: &ArrayView2<T>) -> Array1<T> {
    let n = T::n(a.nrows().max(1));
    a.sum_axis(Axis(0)).mapv(|s| s / n)
}
