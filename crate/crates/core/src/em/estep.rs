use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::{FitConfig, MixtureModel};
use crate::density::{component_geometry, ln_density_floor, ComponentEvaluator, McPool};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::Stream;
use crate::special::{log_sum_exp, CompensatedSum};
use crate::stable::SeriesConfig;

/// Responsibilities and responsibility-weighted conditional moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EStepCache<R> {
    /// τ_ik.
    pub tau: Array2<R>,
    /// τ_ik E(P⁻¹ | y_i, Θ_k).
    pub e1: Array2<R>,
    /// τ_ik E(P⁻¹T | y_i, Θ_k).
    pub e2: Array2<R>,
    /// τ_ik E(P⁻¹T² | y_i, Θ_k).
    pub e3: Array2<R>,
    /// ln g(y_i | Ψ) per row (unfloored).
    pub ln_mixture: Vec<R>,
    /// Σ_i ln g(y_i | Ψ) with each term floored at ln 10⁻³⁰⁰.
    pub loglik: R,
}

struct RowOut<R> {
    tau: Vec<R>,
    e: Vec<[R; 3]>,
    ln_g: R,
}

/// E-step with fresh pools drawn from the `Pool { iter, k }` substreams.
pub fn e_step<R: Real>(data: ArrayView2<R>, model: &MixtureModel<R>, cfg: &FitConfig, iter: usize) -> Result<EStepCache<R>> {
    let pools = (0..model.k())
        .map(|k| {
            McPool::from_stream(model.components[k].alpha, cfg.n_mc, cfg.seed, Stream::Pool { iter, component: k })
        })
        .collect::<Result<Vec<_>>>()?;
    e_step_with_pools(data, model, &pools, &cfg.series())
}

/// E-step against caller-supplied pools (one per component).
pub fn e_step_with_pools<R: Real>(
    data: ArrayView2<R>,
    model: &MixtureModel<R>,
    pools: &[McPool<R>],
    cfg: &SeriesConfig,
) -> Result<EStepCache<R>> {
    let k = model.k();
    if pools.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: pools.len() });
    }
    if data.ncols() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: data.ncols() });
    }
    let geoms = model.components.iter().map(component_geometry).collect::<Result<Vec<_>>>()?;
    let evals = model
        .components
        .iter()
        .zip(&geoms)
        .zip(pools)
        .map(|((th, g), p)| ComponentEvaluator::new(th, g, p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ln_w: Vec<R> = model.weights.iter().map(|w| w.ln()).collect();
    let floor = ln_density_floor::<R>();
    let n = data.nrows();

    let rows: Vec<RowOut<R>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let y = data.row(i);
            let mut ln_terms = vec![R::neg_infinity(); k];
            let mut e = vec![[R::zero(); 3]; k];
            for j in 0..k {
                if model.weights[j] <= R::zero() {
                    continue;
                }
                match evals[j].moments(y) {
                    Ok(mom) => {
                        ln_terms[j] = ln_w[j] + mom.ln_pdf;
                        e[j] = [mom.e_inv_p, mom.e_inv_p_t, mom.e_inv_p_t2];
                    }
                    Err(Error::DegenerateDensity) => {}
                    Err(err) => return Err(err),
                }
            }
            let ln_g = log_sum_exp(&ln_terms);
            let tau = if ln_g.is_finite() && ln_g >= floor {
                let mut t: Vec<R> = ln_terms.iter().map(|&l| (l - ln_g).exp()).collect();
                let s: R = t.iter().copied().sum();
                t.iter_mut().for_each(|v| *v = *v / s);
                t
            } else {
                vec![R::one() / R::of_usize(k); k]
            };
            Ok(RowOut { tau, e, ln_g })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tau = Array2::zeros((n, k));
    let mut e1 = Array2::zeros((n, k));
    let mut e2 = Array2::zeros((n, k));
    let mut e3 = Array2::zeros((n, k));
    let mut ln_mixture = Vec::with_capacity(n);
    let mut ll = CompensatedSum::new();
    for (i, row) in rows.into_iter().enumerate() {
        for j in 0..k {
            let t = row.tau[j];
            tau[[i, j]] = t;
            e1[[i, j]] = t * row.e[j][0];
            e2[[i, j]] = t * row.e[j][1];
            e3[[i, j]] = t * row.e[j][2];
        }
        ll.add(if row.ln_g.is_finite() { row.ln_g.max(floor) } else { floor });
        ln_mixture.push(row.ln_g);
    }
    Ok(EStepCache { tau, e1, e2, e3, ln_mixture, loglik: ll.value() })
}

/// argmax_k τ_ik (0-based), ties to the lowest k.
pub fn hard_labels<R: Real>(tau: &Array2<R>) -> Vec<usize> {
    tau.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}
