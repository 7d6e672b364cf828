//! Small dense linear algebra on `ndarray` matrices (d is tiny here, so
//! straightforward O(d³) routines are all that is needed).

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::real::Real;

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<R: Real>(a: &Array2<R>) -> Result<Array2<R>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    let mut l = Array2::<R>::zeros((n, n));
    for j in 0..n {
        let mut s = a[[j, j]];
        for k in 0..j {
            s = s - l[[j, k]] * l[[j, k]];
        }
        if !(s > R::zero()) || !s.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = s.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves L Lᵀ x = b given the lower Cholesky factor.
pub fn cholesky_solve<R: Real>(l: &Array2<R>, b: ArrayView1<R>) -> Array1<R> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s = s - l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s = s - l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Inverse of L Lᵀ, symmetrized.
pub fn cholesky_inverse<R: Real>(l: &Array2<R>) -> Array2<R> {
    let n = l.nrows();
    let mut inv = Array2::<R>::zeros((n, n));
    let mut e = Array1::<R>::zeros(n);
    for j in 0..n {
        e.fill(R::zero());
        e[j] = R::one();
        let col = cholesky_solve(l, e.view());
        inv.column_mut(j).assign(&col);
    }
    symmetrize(&inv)
}

/// ln |L Lᵀ|.
pub fn cholesky_log_det<R: Real>(l: &Array2<R>) -> R {
    let two = R::lit(2.0);
    l.diag().iter().map(|&v| two * v.ln()).sum()
}

/// (A + Aᵀ)/2.
pub fn symmetrize<R: Real>(a: &Array2<R>) -> Array2<R> {
    let h = R::lit(0.5);
    let t = a.t();
    let mut out = a.clone();
    out.zip_mut_with(&t, |x, &y| *x = (*x + y) * h);
    out
}

/// Whether `a` is square and symmetric within `rel_tol` of its largest entry.
pub fn is_symmetric<R: Real>(a: &Array2<R>, rel_tol: R) -> bool {
    let n = a.nrows();
    if a.ncols() != n {
        return false;
    }
    let scale = a.iter().fold(R::zero(), |m, v| m.max(v.abs())).max(R::min_positive_value());
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[[i, j]] - a[[j, i]]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns).
pub fn symmetric_eigen<R: Real>(a: &Array2<R>) -> (Array1<R>, Array2<R>) {
    let n = a.nrows();
    let mut m = symmetrize(a);
    let mut v = Array2::<R>::eye(n);
    let two = R::lit(2.0);
    for _sweep in 0..100 {
        let mut off = R::zero();
        let mut diag = R::zero();
        for i in 0..n {
            diag = diag + m[[i, i]] * m[[i, i]];
            for j in (i + 1)..n {
                off = off + m[[i, j]] * m[[i, j]];
            }
        }
        if off <= R::epsilon() * R::epsilon() * diag || off == R::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == R::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + R::one()).sqrt());
                let c = (t * t + R::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    (m.diag().to_owned(), v)
}

/// Raises every eigenvalue of the symmetric matrix `a` to at least `floor`.
/// Returns the repaired matrix and the total amount added to the spectrum.
pub fn floor_eigenvalues<R: Real>(a: &Array2<R>, floor: R) -> (Array2<R>, R) {
    let (vals, vecs) = symmetric_eigen(a);
    let mut added = R::zero();
    if vals.iter().all(|&v| v >= floor) {
        return (symmetrize(a), added);
    }
    let n = a.nrows();
    let mut out = Array2::<R>::zeros((n, n));
    for (k, &lam) in vals.iter().enumerate() {
        let lam_f = if lam < floor {
            added = added + (floor - lam);
            floor
        } else {
            lam
        };
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = out[[i, j]] + lam_f * vecs[[i, k]] * vecs[[j, k]];
            }
        }
    }
    (symmetrize(&out), added)
}
