use ndarray::{Array1, Array2, ArrayView2};

use super::{EStepCache, MixtureModel};
use crate::density::ComponentParams;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, floor_eigenvalues, symmetrize};
use crate::real::Real;
use crate::special::CompensatedSum;

const EIGEN_FLOOR: f64 = 1e-8;
const MAX_FLOORED_FRACTION: f64 = 0.1;
const MIN_DELTA: f64 = 1e-10;

/// Conditional maximization of ω, Σ, μ, λ (in that order; α is left alone).
///
/// Σ is updated at the current (μ, λ), then μ at the current λ, then λ at
/// the new μ. A component whose total responsibility is below d + 1 keeps
/// its location, dispersion and skewness (only its weight changes).
pub fn m_step<R: Real>(data: ArrayView2<R>, cache: &EStepCache<R>, model: &MixtureModel<R>) -> Result<MixtureModel<R>> {
    let (n, d) = data.dim();
    let k = model.k();
    if cache.tau.dim() != (n, k) {
        return Err(Error::DimensionMismatch { expected: n, got: cache.tau.nrows() });
    }
    let nr = R::of_usize(n);
    let mut weights = Vec::with_capacity(k);
    let mut components = Vec::with_capacity(k);
    for j in 0..k {
        let tau = cache.tau.column(j);
        let e1 = cache.e1.column(j);
        let e2 = cache.e2.column(j);
        let e3 = cache.e3.column(j);
        let s_tau = sum(tau.iter().copied());
        weights.push(s_tau / nr);
        let old = &model.components[j];
        let s1 = sum(e1.iter().copied());
        let s3 = sum(e3.iter().copied());
        if s_tau < R::of_usize(d + 1) || !(s1 > R::zero()) || !(s3 > R::zero()) {
            components.push(old.clone());
            continue;
        }

        // Σ at (μ_old, λ_old)
        let lam = &old.lambda;
        let mut acc = vec![CompensatedSum::<R>::new(); d * d];
        for i in 0..n {
            let r: Array1<R> = &data.row(i) - &old.mu;
            let (a1, a2, a3) = (e1[i], e2[i], e3[i]);
            for p in 0..d {
                for q in p..d {
                    let v = a1 * r[p] * r[q] - a2 * (r[p] * lam[q] + lam[p] * r[q]) + a3 * lam[p] * lam[q];
                    acc[p * d + q].add(v);
                }
            }
        }
        let mut sigma = Array2::zeros((d, d));
        for p in 0..d {
            for q in p..d {
                let v = acc[p * d + q].value() / s_tau;
                sigma[[p, q]] = v;
                sigma[[q, p]] = v;
            }
        }
        let sigma = symmetrize(&sigma);
        let trace = sigma.diag().iter().copied().fold(R::zero(), |a, b| a + b.abs());
        let (sigma, added) = floor_eigenvalues(&sigma, R::lit(EIGEN_FLOOR));
        if added > R::lit(MAX_FLOORED_FRACTION) * trace || !sigma.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularUpdate { component: j });
        }

        // μ at λ_old
        let s2 = sum(e2.iter().copied());
        let mut mu = Array1::zeros(d);
        for p in 0..d {
            let s = sum((0..n).map(|i| e1[i] * data[[i, p]]));
            mu[p] = (s - lam[p] * s2) / s1;
        }

        // λ at μ_new
        let mut lambda = Array1::zeros(d);
        for p in 0..d {
            let s = sum((0..n).map(|i| (data[[i, p]] - mu[p]) * e2[i]));
            lambda[p] = s / s3;
        }

        let lambda = clamp_delta(&sigma, lambda)?;
        components.push(ComponentParams { alpha: old.alpha, mu, sigma, lambda });
    }
    let total = sum(weights.iter().copied());
    for w in &mut weights {
        *w = *w / total;
    }
    let out = MixtureModel { weights, components };
    out.validate()?;
    Ok(out)
}

fn sum<R: Real>(it: impl Iterator<Item = R>) -> R {
    let mut acc = CompensatedSum::new();
    it.for_each(|v| acc.add(v));
    acc.value()
}

/// Shrinks λ so that δ = 1/(1 + λᵀΣ⁻¹λ) stays at or above 10⁻¹⁰.
fn clamp_delta<R: Real>(sigma: &Array2<R>, lambda: Array1<R>) -> Result<Array1<R>> {
    let l = cholesky(sigma)?;
    let q = lambda.dot(&cholesky_solve(&l, lambda.view()));
    let q_max = R::lit(1.0 / MIN_DELTA - 1.0);
    if q > q_max {
        let s = (q_max / q).sqrt();
        Ok(lambda.mapv(|v| v * s))
    } else {
        Ok(lambda)
    }
}
