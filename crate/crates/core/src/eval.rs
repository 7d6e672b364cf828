//! Model selection and clustering quality: BIC, adjusted Rand index, and
//! classification with a fixed model.

use std::collections::HashMap;

use ndarray::ArrayView2;

use crate::density::McPool;
use crate::em::{e_step_with_pools, hard_labels, EStepCache, FitConfig, MixtureModel};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::Stream;

/// Cluster labels (any integer alphabet; 1..=K when produced here).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Free parameters of a K-component SSG mixture in d dimensions: α, μ, λ,
/// Σ per component plus K − 1 weights.
pub fn free_parameters(k: usize, d: usize) -> usize {
    k * (1 + 2 * d + d * (d + 1) / 2) + k - 1
}

/// BIC = −2 loglik + N_free ln n.
pub fn bic<R: Real>(loglik: R, n: usize, k: usize, d: usize) -> R {
    bic_from_ln_n(loglik, R::of_usize(n).ln(), k, d)
}

/// BIC with ln n supplied directly.
pub fn bic_from_ln_n<R: Real>(loglik: R, ln_n: R, k: usize, d: usize) -> R {
    -R::lit(2.0) * loglik + R::of_usize(free_parameters(k, d)) * ln_n
}

fn choose2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Hubert–Arabie adjusted Rand index. A zero denominator (both partitions
/// trivial in the same way) yields 0.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LabelLengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len() as u64;
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    if total == 0.0 {
        return Ok(0.0);
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((index - expected) / denom)
}

/// E-step of a fixed model with the classification pools
/// (`Stream::Classify`), shared by [`classify`] and the fit driver.
pub(crate) fn classify_cache<R: Real>(
    data: ArrayView2<R>,
    model: &MixtureModel<R>,
    cfg: &FitConfig,
) -> Result<EStepCache<R>> {
    let pools = (0..model.k())
        .map(|k| McPool::from_stream(model.components[k].alpha, cfg.n_mc, cfg.seed, Stream::Classify { component: k }))
        .collect::<Result<Vec<_>>>()?;
    e_step_with_pools(data, model, &pools, &cfg.series())
}

/// argmax_k τ_ik labels (1..=K, ties to the lowest k).
pub fn classify<R: Real>(data: ArrayView2<R>, model: &MixtureModel<R>, cfg: &FitConfig) -> Result<Partition> {
    model.validate()?;
    let cache = classify_cache(data, model, cfg)?;
    Ok(Partition::new(hard_labels(&cache.tau).into_iter().map(|l| l + 1).collect()))
}

/// Log-likelihood of a fixed model (same pools as [`classify`]).
pub fn log_likelihood<R: Real>(data: ArrayView2<R>, model: &MixtureModel<R>, cfg: &FitConfig) -> Result<R> {
    model.validate()?;
    Ok(classify_cache(data, model, cfg)?.loglik)
}
