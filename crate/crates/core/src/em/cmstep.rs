use ndarray::ArrayView2;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use super::{FitConfig, MixtureModel, SliceConfig};
use crate::density::{component_geometry, point_stats, ComponentParams};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::{substream, Stream};
use crate::special::ln_norm_cdf;

/// Minimum number of hard-assigned points for a tail-index update.
pub const MIN_CM_POINTS: usize = 5;

/// One slice-sampling transition from `x0` for a density on (`lower`, ∞)
/// given by its log `ln_f` (stepping-out then shrinkage).
pub fn slice_sample<R, F, G>(x0: R, ln_f: F, lower: R, cfg: &SliceConfig, rng: &mut G) -> Result<R>
where
    R: Real,
    F: Fn(R) -> R,
    G: Rng + ?Sized,
{
    let w = R::lit(cfg.width);
    let e: f64 = Exp1.sample(rng);
    let level = ln_f(x0) - R::lit(e);
    let u: f64 = rng.random();
    let mut left = x0 - w * R::lit(u);
    let mut right = left + w;
    let v: f64 = rng.random();
    let m = cfg.max_step_out;
    let mut j = (m as f64 * v).floor() as usize;
    let mut k = m.saturating_sub(1).saturating_sub(j);
    while j > 0 && left > lower && ln_f(left) > level {
        left = left - w;
        j -= 1;
    }
    left = left.max(lower);
    while k > 0 && ln_f(right) > level {
        right = right + w;
        k -= 1;
    }
    for _ in 0..cfg.max_evaluations {
        let u: f64 = rng.random();
        let x1 = left + R::lit(u) * (right - left);
        if x1 > lower && ln_f(x1) > level {
            return Ok(x1);
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
    }
    Err(Error::SliceFailure(cfg.max_evaluations))
}

/// Unnormalized log posterior of the Weibull variable W given v:
/// (d+α−1) ln w − w^α − d(v) w²/2 + ln Φ(m* w/√δ).
pub fn w_posterior_ln_density<R: Real>(w: R, alpha: R, dim: usize, d_v: R, m_v: R, delta: R) -> R {
    if !(w > R::zero()) {
        return R::neg_infinity();
    }
    (R::of_usize(dim) + alpha - R::one()) * w.ln() - w.powf(alpha) - R::lit(0.5) * d_v * w * w
        + ln_norm_cdf(m_v * w / delta.sqrt())
}

/// Maximizer over [lo, hi] of the Weibull log-likelihood
/// n ln α + α Σ ln w − Σ w^α (strictly concave in α).
pub fn weibull_alpha_mle<R: Real>(w: &[R], lo: R, hi: R) -> R {
    if lo >= hi || w.is_empty() {
        return lo;
    }
    let n = R::of_usize(w.len());
    let ln_w: Vec<R> = w.iter().map(|v| v.ln()).collect();
    let s1: R = ln_w.iter().copied().sum();
    let grad_hess = |a: R| {
        let mut g = n / a + s1;
        let mut h = -n / (a * a);
        for &l in &ln_w {
            let p = (a * l).exp();
            g = g - p * l;
            h = h - p * l * l;
        }
        (g, h)
    };
    if grad_hess(hi).0 >= R::zero() {
        return hi;
    }
    if grad_hess(lo).0 <= R::zero() {
        return lo;
    }
    // Safeguarded Newton on the decreasing gradient.
    let (mut a_lo, mut a_hi) = (lo, hi);
    let mut a = (lo + hi) * R::lit(0.5);
    let tol = R::lit(1e-12).max(R::epsilon() * R::lit(4.0));
    for _ in 0..200 {
        let (g, h) = grad_hess(a);
        if g > R::zero() {
            a_lo = a;
        } else {
            a_hi = a;
        }
        let newton = a - g / h;
        let next = if newton > a_lo && newton < a_hi { newton } else { (a_lo + a_hi) * R::lit(0.5) };
        if (next - a).abs() <= tol * a.abs().max(R::one()) {
            return next;
        }
        a = next;
    }
    a
}

/// Stochastic CM-step for one component: M repeats of (exponential
/// divisors, slice-sampled W per point, Weibull MLE), averaged and clamped.
///
/// `rows` are the indices of the points hard-assigned to the component; they
/// also key the per-point slice-sampler streams.
pub fn cm_step_alpha_component<R: Real>(
    data: ArrayView2<R>,
    rows: &[usize],
    theta: &ComponentParams<R>,
    component: usize,
    cfg: &FitConfig,
    iter: usize,
) -> Result<R> {
    let (lo, hi) = (R::lit(cfg.alpha_bounds.0), R::lit(cfg.alpha_bounds.1));
    if cfg.alpha_bounds.0 >= cfg.alpha_bounds.1 {
        return Ok(lo);
    }
    if rows.len() < MIN_CM_POINTS {
        return Err(Error::TooFewPoints { component, count: rows.len(), required: MIN_CM_POINTS });
    }
    let geom = component_geometry(theta)?;
    let dim = theta.dim();
    let stats: Vec<_> = rows.iter().map(|&i| point_stats(data.row(i), theta, &geom)).collect();
    let alpha = theta.alpha;
    let delta = geom.delta;
    let mut total = R::zero();
    for rep in 0..cfg.m_repeats {
        let mut rng = substream(cfg.seed, Stream::CmStep { iter, component, repeat: rep });
        let divisors: Vec<R> = rows
            .iter()
            .map(|_| {
                let e: f64 = Exp1.sample(&mut rng);
                R::lit(e.max(f64::MIN_POSITIVE))
            })
            .collect();
        let ws = rows
            .par_iter()
            .enumerate()
            .map(|(pos, &obs)| {
                let e = divisors[pos];
                let d_v = stats[pos].d_y / e;
                let m_v = stats[pos].m / e.sqrt();
                let ln_f = |w: R| w_posterior_ln_density(w, alpha, dim, d_v, m_v, delta);
                let dv_f = d_v.to_f64_lossy();
                let shape = dim as f64 + alpha.to_f64_lossy() - 1.0;
                let a_f = alpha.to_f64_lossy();
                let mut start = (shape.max(1e-3) / a_f).powf(1.0 / a_f);
                if dv_f > 0.0 {
                    start = start.min((shape.max(1e-3) / dv_f).sqrt());
                }
                let mut w = R::lit(start.max(1e-6));
                let mut srng = substream(cfg.seed, Stream::Slice { iter, component, repeat: rep, obs });
                for _ in 0..(cfg.slice.burn_in + cfg.slice.kept) {
                    w = slice_sample(w, ln_f, R::zero(), &cfg.slice, &mut srng)?;
                }
                Ok(w)
            })
            .collect::<Result<Vec<R>>>()?;
        total = total + weibull_alpha_mle(&ws, lo, hi);
    }
    Ok((total / R::of_usize(cfg.m_repeats)).max(lo).min(hi))
}

/// Tail-index update for every component from hard labels (0-based).
pub fn cm_step_alpha<R: Real>(
    data: ArrayView2<R>,
    labels: &[usize],
    model: &MixtureModel<R>,
    cfg: &FitConfig,
    iter: usize,
) -> Result<Vec<R>> {
    if labels.len() != data.nrows() {
        return Err(Error::LabelLengthMismatch { left: labels.len(), right: data.nrows() });
    }
    (0..model.k())
        .map(|k| {
            let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == k).collect();
            cm_step_alpha_component(data, &rows, &model.components[k], k, cfg, iter)
        })
        .collect()
}
