use std::collections::VecDeque;
use std::time::{Duration, Instant};

use ndarray::ArrayView2;

use super::cmstep::{cm_step_alpha_component, MIN_CM_POINTS};
use super::stopping::{StopDecision, WINDOW};
use super::{e_step, hard_labels, initialize, m_step, stopping_check, FitConfig, MixtureModel};
use crate::error::{Error, Result};
use crate::eval::{bic, classify_cache};
use crate::real::Real;

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<R> {
    /// Parameters averaged over the stopping window.
    pub model: MixtureModel<R>,
    pub initial_model: MixtureModel<R>,
    /// argmax-τ labels under `model`, in 1..=K.
    pub labels: Vec<usize>,
    /// l(Ψ⁽ᵗ⁾) for every E-step performed.
    pub loglik_trace: Vec<R>,
    pub n_iter: usize,
    /// Log-likelihood of `model`.
    pub loglik: R,
    pub bic: R,
    pub converged: bool,
    /// Iterations `start..end` whose parameters were averaged.
    pub window: (usize, usize),
    pub elapsed: Duration,
}

/// Runs the EM/ECM algorithm: initialize, then repeat E-step, stopping check,
/// M-step (ω, Σ, μ, λ) and stochastic CM-step (α) until the stopping rule
/// fires (after at least `min_iter` iterations) or `max_iter` is reached.
/// Final parameters average the last 20 iterations.
pub fn fit<R: Real>(data: ArrayView2<R>, k: usize, cfg: &FitConfig) -> Result<FitResult<R>> {
    cfg.validate()?;
    let start_time = Instant::now();
    let (n, d) = data.dim();
    let required = k * (d + 2);
    if n <= required {
        return Err(Error::InsufficientData { n, required });
    }
    let (lo, hi) = (R::lit(cfg.alpha_bounds.0), R::lit(cfg.alpha_bounds.1));
    let mut model = initialize(data, k, cfg.seed)?;
    for c in &mut model.components {
        c.alpha = c.alpha.max(lo).min(hi);
    }
    let initial_model = model.clone();
    let eps = R::lit(cfg.eps);
    let mut trace = Vec::new();
    let mut history: VecDeque<MixtureModel<R>> = VecDeque::with_capacity(WINDOW + 1);
    let mut converged = false;

    for iter in 0..cfg.max_iter {
        let cache = e_step(data, &model, cfg, iter)?;
        trace.push(cache.loglik);
        history.push_back(model.clone());
        if history.len() > WINDOW {
            history.pop_front();
        }
        if trace.len() >= cfg.min_iter.max(WINDOW) {
            if let StopDecision::Stop { .. } = stopping_check(&trace, eps) {
                converged = true;
                break;
            }
        }
        if iter + 1 == cfg.max_iter {
            break;
        }
        let mut next = m_step(data, &cache, &model)?;
        if cfg.alpha_bounds.0 < cfg.alpha_bounds.1 {
            let labels = hard_labels(&cache.tau);
            for j in 0..k {
                let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == j).collect();
                if rows.len() >= MIN_CM_POINTS {
                    next.components[j].alpha = cm_step_alpha_component(data, &rows, &next.components[j], j, cfg, iter)?;
                }
            }
        } else {
            for c in &mut next.components {
                c.alpha = lo;
            }
        }
        next.validate()?;
        model = next;
    }

    let n_iter = trace.len();
    let window = (n_iter - history.len(), n_iter);
    let averaged = MixtureModel::average(history.make_contiguous())?;
    let final_cache = classify_cache(data, &averaged, cfg)?;
    let labels = hard_labels(&final_cache.tau).into_iter().map(|l| l + 1).collect();
    let loglik = final_cache.loglik;
    Ok(FitResult {
        bic: bic(loglik, n, k, d),
        model: averaged,
        initial_model,
        labels,
        loglik_trace: trace,
        n_iter,
        loglik,
        converged,
        window,
        elapsed: start_time.elapsed(),
    })
}
