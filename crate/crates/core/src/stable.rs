//! The positive stable mixing variable P with Laplace transform
//! E e^{−sP} = exp(−s^{α/2}): series density, exact sampler, tail
//! probabilities, and the convergence thresholds shared by every series
//! expansion in the crate.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::seeded;
use crate::special::{sin_pi, CompensatedSum};

/// Positive stable law P ~ S(α/2, 1, cos(πα/4)^{2/α}, 0) indexed by the tail
/// index α ∈ (0, 2) of the parent sub-Gaussian stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveStableDist<R> {
    alpha: R,
}

impl<R: Real> PositiveStableDist<R> {
    pub fn new(alpha: R) -> Result<Self> {
        if !(alpha > R::zero() && alpha < R::lit(2.0)) {
            return Err(Error::InvalidParameter(format!(
                "positive stable tail index must lie in (0, 2), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    #[inline]
    pub fn alpha(&self) -> R {
        self.alpha
    }

    /// One exact draw (Kanter's representation, evaluated in logs).
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> R {
        R::lit(self.sample_f64(rng))
    }

    pub(crate) fn sample_f64<G: Rng + ?Sized>(&self, rng: &mut G) -> f64 {
        let a = self.alpha.to_f64_lossy() * 0.5;
        loop {
            let u: f64 = Open01.sample(rng);
            let u = u * std::f64::consts::PI;
            let e: f64 = Exp1.sample(rng);
            if e <= 0.0 {
                continue;
            }
            let ln_p = (a * u).sin().ln() - u.sin().ln() / a
                + (1.0 - a) / a * (((1.0 - a) * u).sin().ln() - e.ln());
            let p = ln_p.exp();
            if p > 0.0 && p.is_finite() {
                return p;
            }
        }
    }
}

/// Truncation and Monte Carlo sizes for every series/MC evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesConfig {
    pub n_terms: usize,
    pub n_mc: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { n_terms: 80, n_mc: 3000 }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_terms == 0 || self.n_mc == 0 {
            return Err(Error::InvalidParameter("n_terms and n_mc must be at least 1".into()));
        }
        Ok(())
    }
}

/// The four integral families that admit a series expansion. The `shift`
/// enters the degrees of freedom d + jα + shift of their Student-t factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesFamily {
    /// I(0): the density itself.
    I0,
    /// I(1): numerator of E(P⁻¹ | y).
    I1,
    /// J₁: numerator of the T-weighted expectation.
    J1,
    /// J₂: numerator of the T²-weighted expectation.
    J2,
}

impl SeriesFamily {
    pub const ALL: [SeriesFamily; 4] = [Self::I0, Self::I1, Self::J1, Self::J2];

    pub fn shift(self) -> usize {
        match self {
            Self::I0 => 0,
            Self::I1 | Self::J2 => 2,
            Self::J1 => 1,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Self::I0 => 0,
            Self::I1 => 1,
            Self::J1 => 2,
            Self::J2 => 3,
        }
    }
}

/// Smallest d(y) (or p, for the bare density) from which the series is used.
///
/// The term ratio of the alternating series is bounded by (2L_j/x)^{α/2}
/// with L_j a ratio of gamma functions; the threshold is 2 L^{2/α} where L is
/// the largest L_j over the retained indices j = 1..n_terms, so every
/// retained term is already in the decaying regime.
pub fn series_threshold<R: Real>(
    family: SeriesFamily,
    d: usize,
    dist: &PositiveStableDist<R>,
    cfg: &SeriesConfig,
) -> R {
    let a = dist.alpha();
    let h = R::lit(0.5);
    let one = R::one();
    let dd = R::of_usize(d + family.shift());
    let mut max_ln = R::neg_infinity();
    for j in 1..=cfg.n_terms.max(1) {
        let jr = R::of_usize(j);
        let g1 = jr * a * h + one;
        let g2 = (dd + jr * a) * h;
        let ln_l = (g1 + a * h).ln_gamma() - g1.ln_gamma() + (g2 + a * h).ln_gamma() - g2.ln_gamma()
            - (jr + one).ln();
        max_ln = max_ln.max(ln_l);
    }
    R::lit(2.0) * (R::lit(2.0) / a * max_ln).exp()
}

/// Coefficients c_j = (−1)^{j−1} Γ(jα/2 + 1)/j! · sin(jπα/2) of every series
/// in the crate, with exact zeros dropped.
#[derive(Debug, Clone)]
pub(crate) struct SeriesCoefficients<R> {
    pub(crate) terms: Vec<Coefficient<R>>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Coefficient<R> {
    pub(crate) j: usize,
    pub(crate) sign: R,
    /// ln|c_j|.
    pub(crate) ln_abs: R,
    /// ln|sin(jπα/2)|, the oscillating part of ln|c_j|.
    pub(crate) ln_sin: R,
}

impl<R: Real> SeriesCoefficients<R> {
    pub(crate) fn new(alpha: R, n_terms: usize) -> Self {
        let h = R::lit(0.5);
        let terms = (1..=n_terms)
            .filter_map(|j| {
                let jr = R::of_usize(j);
                let s = sin_pi(jr * alpha * h);
                if s == R::zero() {
                    return None;
                }
                let parity = if j % 2 == 1 { R::one() } else { -R::one() };
                let ln_sin = s.abs().ln();
                let ln_abs = (jr * alpha * h + R::one()).ln_gamma() - (jr + R::one()).ln_gamma() + ln_sin;
                Some(Coefficient { j, sign: parity * s.signum(), ln_abs, ln_sin })
            })
            .collect();
        Self { terms }
    }
}

/// One signed series term in log-magnitude form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term<R> {
    pub(crate) j: usize,
    pub(crate) sign: R,
    pub(crate) ln_abs: R,
    /// ln of the non-oscillating envelope (ln|term| − ln|sin(jπα/2)|).
    pub(crate) ln_envelope: R,
}

impl<R: Real> Term<R> {
    #[inline]
    pub(crate) fn new(c: &Coefficient<R>, ln_rest: R) -> Self {
        let ln_abs = c.ln_abs + ln_rest;
        Self { j: c.j, sign: c.sign, ln_abs, ln_envelope: ln_abs - c.ln_sin }
    }
}

/// Outcome of summing a signed series given in log-magnitude form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesSum<R> {
    /// The sum equals `scaled · exp(ln_scale)`.
    pub(crate) ln_scale: R,
    pub(crate) scaled: R,
}

impl<R: Real> SeriesSum<R> {
    pub(crate) fn ln_value(&self) -> R {
        self.ln_scale + self.scaled.ln()
    }
}

/// Sums series terms with compensated summation and rejects results that
/// are not trustworthy: a truncation-tail bound above `tail_tol` of the sum
/// (the last retained term, or the geometric tail of the envelope), an
/// envelope that is not yet decreasing at the truncation point, or
/// catastrophic cancellation.
pub(crate) fn sum_series<R: Real>(terms: &[Term<R>], tail_tol: R) -> Option<SeriesSum<R>> {
    let n = terms.len();
    if n == 0 {
        return None;
    }
    let ln_scale = terms.iter().fold(R::neg_infinity(), |m, t| m.max(t.ln_abs));
    if !ln_scale.is_finite() {
        return None;
    }
    let mut acc = CompensatedSum::new();
    let mut abs_total = R::zero();
    for t in terms {
        let v = (t.ln_abs - ln_scale).exp();
        abs_total = abs_total + v;
        acc.add(t.sign * v);
    }
    let sum = acc.value();
    let last = &terms[n - 1];
    let mut tail = (last.ln_abs - ln_scale).exp();
    if n >= 2 {
        let prev = &terms[n - 2];
        let steps = R::of_usize(last.j - prev.j);
        let ratio = ((last.ln_envelope - prev.ln_envelope) / steps).exp();
        if ratio >= R::one() {
            return None;
        }
        let env = (last.ln_envelope - ln_scale).exp();
        tail = tail.max(env * ratio / (R::one() - ratio));
    }
    let eps = R::epsilon();
    if !(sum.abs() > R::zero()) || tail > tail_tol * sum.abs() || abs_total * eps > eps.sqrt() * sum.abs() {
        return None;
    }
    Some(SeriesSum { ln_scale, scaled: sum })
}

pub(crate) const DEFAULT_TAIL_TOL: f64 = 0.1;

/// Series density of P at `p`; only available above the convergence
/// threshold (`series_threshold(SeriesFamily::I0, 1, ..)`).
pub fn positive_stable_pdf<R: Real>(p: R, dist: &PositiveStableDist<R>, cfg: &SeriesConfig) -> Result<R> {
    if !(p > R::zero()) || !p.is_finite() {
        return Err(Error::Domain(format!("positive stable density needs p > 0, got {p}")));
    }
    let threshold = series_threshold(SeriesFamily::I0, 1, dist, cfg);
    let region_err = || Error::SeriesRegion { value: p.to_f64_lossy(), threshold: threshold.to_f64_lossy() };
    if p < threshold {
        return Err(region_err());
    }
    let a = dist.alpha();
    let h = R::lit(0.5);
    let ln_p = p.ln();
    let terms: Vec<Term<R>> = SeriesCoefficients::new(a, cfg.n_terms)
        .terms
        .iter()
        .map(|c| Term::new(c, -(R::of_usize(c.j) * a * h + R::one()) * ln_p))
        .collect();
    if terms.is_empty() {
        return Err(region_err());
    }
    let sum = sum_series(&terms, R::lit(DEFAULT_TAIL_TOL)).ok_or_else(region_err)?;
    if sum.scaled <= R::zero() {
        return Ok(R::zero());
    }
    Ok((sum.ln_value() - R::PI().ln()).exp())
}

/// `n` i.i.d. draws of P from a seeded generator.
pub fn positive_stable_sample<R: Real>(dist: &PositiveStableDist<R>, n: usize, seed: u64) -> Vec<R> {
    let mut rng = seeded(seed);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Monte Carlo estimate of Pr(P > p) from `n_draws` draws.
pub fn positive_stable_upper_tail<R: Real>(p: R, dist: &PositiveStableDist<R>, n_draws: usize, seed: u64) -> Result<R> {
    if !(p > R::zero()) {
        return Err(Error::Domain(format!("tail probability needs p > 0, got {p}")));
    }
    if n_draws == 0 {
        return Err(Error::InvalidParameter("n_draws must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let pf = p.to_f64_lossy();
    let hits = (0..n_draws).filter(|_| dist.sample_f64(&mut rng) > pf).count();
    Ok(R::of_usize(hits) / R::of_usize(n_draws))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levy(p: f64) -> f64 {
        let c = 0.5;
        (c / (2.0 * std::f64::consts::PI)).sqrt() * p.powf(-1.5) * (-c / (2.0 * p)).exp()
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(PositiveStableDist::new(0.0_f64).is_err());
        assert!(PositiveStableDist::new(2.0_f64).is_err());
        assert!(PositiveStableDist::new(f64::NAN).is_err());
    }

    #[test]
    fn levy_point_value() {
        let dist = PositiveStableDist::new(1.0_f64).unwrap();
        let v = positive_stable_pdf(2.0, &dist, &SeriesConfig::default()).unwrap();
        assert!((v - 0.08803).abs() < 1e-4);
        assert!((v - levy(2.0)).abs() / levy(2.0) < 1e-12);
    }

    #[test]
    fn leading_term_dominates_far_out() {
        let dist = PositiveStableDist::new(1.0_f64).unwrap();
        let cfg = SeriesConfig::default();
        // j = 1 term: Γ(3/2) sin(π/2) p^{-3/2} / π
        let lead = |p: f64| libm::tgamma(1.5) * p.powf(-1.5) / std::f64::consts::PI;
        let r1 = positive_stable_pdf(10.0, &dist, &cfg).unwrap() / lead(10.0);
        let r2 = positive_stable_pdf(1e4, &dist, &cfg).unwrap() / lead(1e4);
        assert!((r2 - 1.0).abs() < (r1 - 1.0).abs());
        assert!((r2 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn region_and_domain_errors() {
        let dist = PositiveStableDist::new(1.5_f64).unwrap();
        let cfg = SeriesConfig::default();
        assert!(matches!(positive_stable_pdf(-1.0, &dist, &cfg), Err(Error::Domain(_))));
        let thr = series_threshold(SeriesFamily::I0, 1, &dist, &cfg);
        assert!(matches!(positive_stable_pdf(thr * 0.5, &dist, &cfg), Err(Error::SeriesRegion { .. })));
    }

    #[test]
    fn threshold_at_alpha_one_is_exact() {
        // At α = 1, d = 1 every L_j equals 1/2.
        let dist = PositiveStableDist::new(1.0_f64).unwrap();
        let t = series_threshold(SeriesFamily::I0, 1, &dist, &SeriesConfig::default());
        assert!((t - 0.5).abs() < 1e-13);
    }

    #[test]
    fn threshold_frozen_value() {
        // 2 max_j L_j^{2/α} at d = 2, α = 1.5, 80 terms, evaluated with mpmath.
        let dist = PositiveStableDist::new(1.5_f64).unwrap();
        let t = series_threshold(SeriesFamily::I0, 2, &dist, &SeriesConfig::default());
        assert!((t / THRESH_D2_A15 - 1.0).abs() < 1e-10, "{t}");
    }

    const THRESH_D2_A15: f64 = 21.147_816_084_030_62;

    #[test]
    fn sampler_is_deterministic() {
        let dist = PositiveStableDist::new(1.3_f64).unwrap();
        let a: Vec<f64> = positive_stable_sample(&dist, 100, 9);
        let b: Vec<f64> = positive_stable_sample(&dist, 100, 9);
        assert_eq!(a, b);
        assert!(a.iter().all(|&p| p > 0.0 && p.is_finite()));
    }

    #[test]
    fn levy_tail_probability() {
        let dist = PositiveStableDist::new(1.0_f64).unwrap();
        let est: f64 = positive_stable_upper_tail(2.0, &dist, 200_000, 3).unwrap();
        assert!((est - 0.3829).abs() < 0.01);
    }

    #[test]
    fn f32_path_works() {
        let dist = PositiveStableDist::new(1.0_f32).unwrap();
        let v = positive_stable_pdf(2.0_f32, &dist, &SeriesConfig::default()).unwrap();
        assert!((v - 0.088_016).abs() < 1e-4);
    }
}
