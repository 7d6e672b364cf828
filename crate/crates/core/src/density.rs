//! SSG component densities and the conditional expectations of P⁻¹, P⁻¹T
//! and P⁻¹T² given an observation. Each underlying integral has a series
//! branch (used beyond its convergence threshold) and a Monte Carlo branch
//! over a shared pool of positive stable draws.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use crate::em::MixtureModel;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_inverse, cholesky_log_det, is_symmetric};
use crate::real::Real;
use crate::rng::{seeded, Stream};
use crate::special::{
    ln_norm_cdf, ln_norm_second_kernel, ln_student_t_cdf, ln_t_partial_second_moment, log_sum_exp, norm_cdf,
};
use crate::stable::{
    series_threshold, sum_series, PositiveStableDist, SeriesCoefficients, SeriesConfig, SeriesFamily, Term,
};

/// Smallest density reported in linear scale.
pub const DENSITY_FLOOR: f64 = 1e-300;

pub(crate) fn ln_density_floor<R: Real>() -> R {
    R::lit(DENSITY_FLOOR.ln())
}

fn floor_linear<R: Real>(ln_v: R) -> R {
    ln_v.exp().max(R::lit(DENSITY_FLOOR)).max(R::min_positive_value())
}

/// One mixture component Θ = (α, μ, Σ, λ).
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentParams<R> {
    pub alpha: R,
    pub mu: Array1<R>,
    pub sigma: Array2<R>,
    pub lambda: Array1<R>,
}

impl<R: Real> ComponentParams<R> {
    pub fn new(alpha: R, mu: Array1<R>, sigma: Array2<R>, lambda: Array1<R>) -> Result<Self> {
        let theta = Self { alpha, mu, sigma, lambda };
        theta.validate()?;
        Ok(theta)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Checks shapes, finiteness, α ∈ (0, 2], and that Σ is symmetric
    /// positive definite.
    pub fn validate(&self) -> Result<()> {
        let d = self.mu.len();
        if d == 0 {
            return Err(Error::InvalidParameter("component dimension must be at least 1".into()));
        }
        if !(self.alpha > R::zero() && self.alpha <= R::lit(2.0)) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if self.lambda.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.lambda.len() });
        }
        if self.sigma.nrows() != d || self.sigma.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.sigma.nrows() });
        }
        let finite = self.mu.iter().chain(self.lambda.iter()).chain(self.sigma.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("component parameters must be finite".into()));
        }
        if !is_symmetric(&self.sigma, R::lit(1e-10).max(R::epsilon() * R::lit(8.0))) {
            return Err(Error::InvalidParameter("sigma must be symmetric".into()));
        }
        cholesky(&self.sigma)?;
        Ok(())
    }
}

/// Quantities derived from Θ that every density evaluation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentGeometry<R> {
    /// Ω = Σ + λλᵀ.
    pub omega: Array2<R>,
    pub omega_inv: Array2<R>,
    /// δ = 1 − λᵀΩ⁻¹λ ∈ (0, 1].
    pub delta: R,
    pub log_det_sigma: R,
    /// C₀ = 2(2π)^{−(d+1)/2}|Σ|^{−1/2}.
    pub c0: R,
    pub ln_c0: R,
    /// Lower Cholesky factor of Σ.
    pub sigma_chol: Array2<R>,
}

/// Derives Ω, Ω⁻¹, δ and the normalizing constant from Θ.
pub fn component_geometry<R: Real>(theta: &ComponentParams<R>) -> Result<ComponentGeometry<R>> {
    let d = theta.dim();
    let sigma_chol = cholesky(&theta.sigma)?;
    let lam = &theta.lambda;
    let mut omega = theta.sigma.clone();
    for i in 0..d {
        for j in 0..d {
            omega[[i, j]] = omega[[i, j]] + lam[i] * lam[j];
        }
    }
    let omega_chol = cholesky(&omega)?;
    let omega_inv = cholesky_inverse(&omega_chol);
    // δ = 1/(1 + λᵀΣ⁻¹λ) avoids the cancellation in 1 − λᵀΩ⁻¹λ.
    let s_inv_l = crate::linalg::cholesky_solve(&sigma_chol, lam.view());
    let q = lam.dot(&s_inv_l);
    let delta = (R::one() + q).recip();
    let log_det_sigma = cholesky_log_det(&sigma_chol);
    let h = R::lit(0.5);
    let ln_c0 = R::LN_2() - (R::of_usize(d) + R::one()) * h * (R::TAU()).ln() - h * log_det_sigma;
    Ok(ComponentGeometry { omega, omega_inv, delta, log_det_sigma, c0: ln_c0.exp(), ln_c0, sigma_chol })
}

/// d(y) = (y−μ)ᵀΩ⁻¹(y−μ) and m = λᵀΩ⁻¹(y−μ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStats<R> {
    pub d_y: R,
    pub m: R,
}

pub fn point_stats<R: Real>(y: ArrayView1<R>, theta: &ComponentParams<R>, geom: &ComponentGeometry<R>) -> PointStats<R> {
    let r = &y - &theta.mu;
    let w = geom.omega_inv.dot(&r);
    PointStats { d_y: r.dot(&w).max(R::zero()), m: theta.lambda.dot(&w) }
}

/// Where a pool came from, for reproducibility records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolOrigin {
    pub seed: u64,
    pub stream: Option<Stream>,
}

/// A pool of positive stable draws shared by every observation of one
/// component, with the per-draw transforms the integrands need.
#[derive(Debug, Clone, PartialEq)]
pub struct McPool<R> {
    alpha: R,
    draws: Vec<R>,
    ln_draws: Vec<R>,
    inv_draws: Vec<R>,
    inv_sqrt_draws: Vec<R>,
    pub origin: Option<PoolOrigin>,
}

impl<R: Real> McPool<R> {
    /// `n` draws for tail index `alpha`; α = 2 gives the point mass at 1.
    pub fn sample<G: Rng + ?Sized>(alpha: R, n: usize, rng: &mut G) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Monte Carlo pool must be non-empty".into()));
        }
        let draws = if alpha >= R::lit(2.0) {
            vec![R::one(); n]
        } else {
            let dist = PositiveStableDist::new(alpha)?;
            (0..n).map(|_| dist.sample(rng)).collect()
        };
        Self::from_draws(alpha, draws)
    }

    pub fn from_seed(alpha: R, n: usize, seed: u64) -> Result<Self> {
        let mut pool = Self::sample(alpha, n, &mut seeded(seed))?;
        pool.origin = Some(PoolOrigin { seed, stream: None });
        Ok(pool)
    }

    pub fn from_stream(alpha: R, n: usize, master: u64, stream: Stream) -> Result<Self> {
        let mut pool = Self::sample(alpha, n, &mut crate::rng::substream(master, stream))?;
        pool.origin = Some(PoolOrigin { seed: master, stream: Some(stream) });
        Ok(pool)
    }

    pub fn from_draws(alpha: R, draws: Vec<R>) -> Result<Self> {
        if draws.is_empty() || draws.iter().any(|&p| !(p > R::zero()) || !p.is_finite()) {
            return Err(Error::InvalidParameter("pool draws must be positive and finite".into()));
        }
        let ln_draws = draws.iter().map(|p| p.ln()).collect();
        let inv_draws = draws.iter().map(|p| p.recip()).collect();
        let inv_sqrt_draws = draws.iter().map(|p| p.sqrt().recip()).collect();
        Ok(Self { alpha, draws, ln_draws, inv_draws, inv_sqrt_draws, origin: None })
    }

    #[inline]
    pub fn alpha(&self) -> R {
        self.alpha
    }

    #[inline]
    pub fn draws(&self) -> &[R] {
        &self.draws
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

/// How the evaluator chooses between series and Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    /// Series beyond the convergence threshold (falling back to MC if the
    /// series is rejected), Monte Carlo otherwise.
    #[default]
    Auto,
    ForceMonteCarlo,
    /// Series only; region errors are returned instead of falling back.
    ForceSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Series,
    MonteCarlo,
}

/// ln I₀, ln I₁, ln J₁, ln J₂ at one point, and the branch used for each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnIntegrals<R> {
    pub values: [R; 4],
    pub branches: [Branch; 4],
}

impl<R: Real> LnIntegrals<R> {
    #[inline]
    pub fn get(&self, family: SeriesFamily) -> R {
        self.values[family.index()]
    }
}

/// Density and conditional expectations at one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondMoments<R> {
    /// ln f_Y(y | Θ), not floored.
    pub ln_pdf: R,
    /// E(P⁻¹ | y).
    pub e_inv_p: R,
    /// E(P⁻¹T | y).
    pub e_inv_p_t: R,
    /// E(P⁻¹T² | y).
    pub e_inv_p_t2: R,
}

/// Per-family constants of the series terms (degrees of freedom or gamma
/// shape, and the ln Γ factor), indexed like the coefficients.
#[derive(Debug, Clone)]
struct FamilyTable<R> {
    nu: Vec<R>,
    ln_const: Vec<R>,
}

/// Evaluates densities and conditional moments of one component against one
/// pool. Construction precomputes everything that depends only on (Θ, pool).
#[derive(Debug, Clone)]
pub struct ComponentEvaluator<'a, R> {
    theta: &'a ComponentParams<R>,
    geom: &'a ComponentGeometry<R>,
    pool: &'a McPool<R>,
    policy: BranchPolicy,
    thresholds: [R; 4],
    coeffs: SeriesCoefficients<R>,
    tables: [FamilyTable<R>; 4],
    tail_tol: R,
}

const COMBINE_CANCELLATION_LIMIT: f64 = 1e3;

impl<'a, R: Real> ComponentEvaluator<'a, R> {
    pub fn new(
        theta: &'a ComponentParams<R>,
        geom: &'a ComponentGeometry<R>,
        pool: &'a McPool<R>,
        cfg: &SeriesConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if pool.alpha() != theta.alpha {
            return Err(Error::InvalidParameter(format!(
                "pool drawn for alpha {} used with alpha {}",
                pool.alpha(),
                theta.alpha
            )));
        }
        let d = theta.dim();
        let a = theta.alpha;
        let h = R::lit(0.5);
        let (thresholds, coeffs) = if a < R::lit(2.0) {
            let dist = PositiveStableDist::new(a)?;
            let t = SeriesFamily::ALL.map(|f| series_threshold(f, d, &dist, cfg));
            (t, SeriesCoefficients::new(a, cfg.n_terms))
        } else {
            ([R::infinity(); 4], SeriesCoefficients { terms: Vec::new() })
        };
        let dr = R::of_usize(d);
        let table = |f: SeriesFamily| {
            let mut nu = Vec::with_capacity(coeffs.terms.len());
            let mut ln_const = Vec::with_capacity(coeffs.terms.len());
            for c in &coeffs.terms {
                let ja = R::of_usize(c.j) * a;
                let (n, g) = match f {
                    SeriesFamily::I0 | SeriesFamily::I1 => {
                        let n = dr + ja + R::of_usize(f.shift());
                        (n, (n * h).ln_gamma())
                    }
                    SeriesFamily::J1 => {
                        let s = (dr + R::one() + ja) * h;
                        (s, s.ln_gamma())
                    }
                    SeriesFamily::J2 => {
                        let n = dr + R::lit(2.0) + ja;
                        (n, (n * h).ln_gamma() - n.ln())
                    }
                };
                nu.push(n);
                ln_const.push(g);
            }
            FamilyTable { nu, ln_const }
        };
        let tables = SeriesFamily::ALL.map(table);
        Ok(Self {
            theta,
            geom,
            pool,
            policy: BranchPolicy::Auto,
            thresholds,
            coeffs,
            tables,
            tail_tol: R::lit(crate::stable::DEFAULT_TAIL_TOL),
        })
    }

    pub fn with_policy(mut self, policy: BranchPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn threshold(&self, family: SeriesFamily) -> R {
        self.thresholds[family.index()]
    }

    pub fn stats(&self, y: ArrayView1<R>) -> PointStats<R> {
        point_stats(y, self.theta, self.geom)
    }

    /// Series value of ln(family integral); `None` if the series is not
    /// usable at this point.
    fn ln_series(&self, family: SeriesFamily, st: &PointStats<R>) -> Option<R> {
        let d_y = st.d_y;
        if !(d_y > self.thresholds[family.index()]) || self.coeffs.terms.is_empty() {
            return None;
        }
        let h = R::lit(0.5);
        let delta = self.geom.delta;
        let m = st.m;
        let tab = &self.tables[family.index()];
        let ln_half_d = (d_y * h).ln();
        let mut terms = Vec::with_capacity(tab.nu.len());
        let prefactor;
        match family {
            SeriesFamily::I0 | SeriesFamily::I1 => {
                let scale = m / (d_y * delta).sqrt();
                for (k, c) in self.coeffs.terms.iter().enumerate() {
                    let nu = tab.nu[k];
                    let l = tab.ln_const[k] - (nu + R::one()) * h * ln_half_d + ln_student_t_cdf(scale * nu.sqrt(), nu);
                    terms.push(Term::new(c, l));
                }
                prefactor = self.geom.ln_c0 + h * (d_y * delta / R::PI()).ln();
            }
            SeriesFamily::J1 => {
                let ln_b = (d_y * h + m * m / (R::lit(2.0) * delta)).ln();
                for (k, c) in self.coeffs.terms.iter().enumerate() {
                    terms.push(Term::new(c, tab.ln_const[k] - tab.nu[k] * ln_b));
                }
                prefactor = self.geom.ln_c0 + delta.ln() - R::PI().ln();
            }
            SeriesFamily::J2 => {
                let scale = m / (d_y * delta).sqrt();
                for (k, c) in self.coeffs.terms.iter().enumerate() {
                    let nu = tab.nu[k];
                    let l = tab.ln_const[k] - (nu + R::one()) * h * ln_half_d
                        + ln_t_partial_second_moment(nu, scale * nu.sqrt());
                    terms.push(Term::new(c, l));
                }
                prefactor = self.geom.ln_c0 + R::lit(1.5) * (d_y * delta).ln() - h * R::PI().ln();
            }
        }
        let sum = sum_series(&terms, self.tail_tol)?;
        if sum.scaled <= R::zero() {
            return None;
        }
        let v = prefactor + sum.ln_value();
        v.is_finite().then_some(v)
    }

    /// Monte Carlo values of all four ln-integrals in one pass over the pool.
    fn ln_monte_carlo(&self, st: &PointStats<R>) -> [R; 4] {
        let pool = self.pool;
        let n = pool.len();
        let h = R::lit(0.5);
        let d_half = R::of_usize(self.theta.dim()) * h;
        let delta = self.geom.delta;
        let zk = st.m / delta.sqrt();
        let half_dy = st.d_y * h;

        let base = |r: usize| -d_half * pool.ln_draws[r] - half_dy * pool.inv_draws[r];
        let mut max_base = R::neg_infinity();
        for r in 0..n {
            max_base = max_base.max(base(r));
        }
        let (mut s0, mut s1, mut sj1, mut sj2) = (R::zero(), R::zero(), R::zero(), R::zero());
        let inv_sqrt_2pi = R::lit(0.398_942_280_401_432_7);
        for r in 0..n {
            let e = (base(r) - max_base).exp();
            let z = zk * pool.inv_sqrt_draws[r];
            let phi_big = norm_cdf(z);
            let g = (-h * z * z).exp();
            let w0 = e * phi_big;
            s0 = s0 + w0;
            s1 = s1 + w0 * pool.inv_draws[r];
            sj1 = sj1 + e * g * pool.inv_sqrt_draws[r];
            sj2 = sj2 + e * (phi_big - z * g * inv_sqrt_2pi);
        }
        let tiny = R::min_positive_value() * R::lit(1e20);
        let ln_n = R::of_usize(n).ln();
        let ln_i_const = self.geom.ln_c0 + h * (R::TAU() * delta).ln() - ln_n + max_base;
        let ln_j1_const = self.geom.ln_c0 + delta.ln() - ln_n + max_base;
        let ln_j2_const = self.geom.ln_c0 + h * R::TAU().ln() + R::lit(1.5) * delta.ln() - ln_n + max_base;

        if s0 > tiny && s1 > tiny && sj1 > tiny && sj2 > tiny {
            return [
                ln_i_const + s0.ln(),
                ln_i_const + s1.ln(),
                ln_j1_const + sj1.ln(),
                ln_j2_const + sj2.ln(),
            ];
        }
        // Log-domain fallback when Φ (or the Gaussian factor) underflows.
        let mut t0 = Vec::with_capacity(n);
        let mut t1 = Vec::with_capacity(n);
        let mut tj1 = Vec::with_capacity(n);
        let mut tj2 = Vec::with_capacity(n);
        for r in 0..n {
            let b = base(r) - max_base;
            let z = zk * pool.inv_sqrt_draws[r];
            let lp = ln_norm_cdf(z);
            t0.push(b + lp);
            t1.push(b + lp - pool.ln_draws[r]);
            tj1.push(b - h * z * z - h * pool.ln_draws[r]);
            tj2.push(b + ln_norm_second_kernel(z));
        }
        [
            ln_i_const + log_sum_exp(&t0),
            ln_i_const + log_sum_exp(&t1),
            ln_j1_const + log_sum_exp(&tj1),
            ln_j2_const + log_sum_exp(&tj2),
        ]
    }

    fn ln_integrals_with(&self, st: &PointStats<R>, policy: BranchPolicy) -> Result<LnIntegrals<R>> {
        let mut values = [R::nan(); 4];
        let mut branches = [Branch::MonteCarlo; 4];
        let mut need_mc = false;
        for f in SeriesFamily::ALL {
            let i = f.index();
            match policy {
                BranchPolicy::ForceMonteCarlo => need_mc = true,
                BranchPolicy::Auto => match self.ln_series(f, st) {
                    Some(v) => {
                        values[i] = v;
                        branches[i] = Branch::Series;
                    }
                    None => need_mc = true,
                },
                BranchPolicy::ForceSeries => {
                    let v = self.ln_series(f, st).ok_or(Error::SeriesRegion {
                        value: st.d_y.to_f64_lossy(),
                        threshold: self.thresholds[i].to_f64_lossy(),
                    })?;
                    values[i] = v;
                    branches[i] = Branch::Series;
                }
            }
        }
        if need_mc {
            let mc = self.ln_monte_carlo(st);
            for i in 0..4 {
                if branches[i] == Branch::MonteCarlo {
                    values[i] = mc[i];
                }
            }
        }
        Ok(LnIntegrals { values, branches })
    }

    /// ln-integrals at a point under the evaluator's policy.
    pub fn ln_integrals(&self, y: ArrayView1<R>) -> Result<LnIntegrals<R>> {
        self.ln_integrals_with(&self.stats(y), self.policy)
    }

    /// ln f_Y(y | Θ) (unfloored).
    pub fn ln_pdf(&self, y: ArrayView1<R>) -> Result<R> {
        let st = self.stats(y);
        let v = match self.policy {
            BranchPolicy::ForceMonteCarlo => self.ln_monte_carlo(&st)[0],
            policy => match self.ln_series(SeriesFamily::I0, &st) {
                Some(v) => v,
                None if policy == BranchPolicy::ForceSeries => {
                    return Err(Error::SeriesRegion {
                        value: st.d_y.to_f64_lossy(),
                        threshold: self.thresholds[0].to_f64_lossy(),
                    })
                }
                None => self.ln_monte_carlo(&st)[0],
            },
        };
        Ok(v)
    }

    fn combine(ints: &LnIntegrals<R>, m: R) -> Result<(CondMoments<R>, R)> {
        let ln_i0 = ints.values[0];
        if !ln_i0.is_finite() {
            return Err(Error::DegenerateDensity);
        }
        let e1 = (ints.values[1] - ln_i0).exp();
        let j1 = (ints.values[2] - ln_i0).exp();
        let j2 = (ints.values[3] - ln_i0).exp();
        if !(e1.is_finite() && j1.is_finite() && j2.is_finite()) {
            return Err(Error::DegenerateDensity);
        }
        let e2 = j1 + m * e1;
        let two = R::lit(2.0);
        let e3_raw = j2 + two * m * j1 + m * m * e1;
        // Conditional Cauchy–Schwarz: E(P⁻¹T²)·E(P⁻¹) ≥ E(P⁻¹T)².
        let e3 = e3_raw.max(e2 * e2 / e1);
        let scale2 = (j1 + (m * e1).abs()) / e2.abs().max(R::min_positive_value());
        let scale3 = (j2 + (two * m * j1).abs() + m * m * e1) / e3_raw.abs().max(R::min_positive_value());
        let cancellation = scale2.max(scale3);
        Ok((CondMoments { ln_pdf: ln_i0, e_inv_p: e1, e_inv_p_t: e2, e_inv_p_t2: e3 }, cancellation))
    }

    /// Density and all three conditional expectations at `y`.
    ///
    /// The expectations combine the four integrals as
    /// E(P⁻¹T) = (J₁ + m I₁)/I₀ and E(P⁻¹T²) = (J₂ + 2m J₁ + m² I₁)/I₀. When
    /// m is strongly negative these combinations cancel; if independent
    /// series truncation errors could dominate, the point is re-evaluated on
    /// the Monte Carlo branch, whose errors are coupled through the pool.
    pub fn moments(&self, y: ArrayView1<R>) -> Result<CondMoments<R>> {
        let st = self.stats(y);
        let ints = self.ln_integrals_with(&st, self.policy)?;
        let (mom, cancellation) = Self::combine(&ints, st.m)?;
        let any_series = ints.branches.iter().any(|&b| b == Branch::Series);
        if any_series && self.policy == BranchPolicy::Auto && cancellation > R::lit(COMBINE_CANCELLATION_LIMIT) {
            let mc = self.ln_integrals_with(&st, BranchPolicy::ForceMonteCarlo)?;
            return Ok(Self::combine(&mc, st.m)?.0);
        }
        Ok(mom)
    }
}

/// I(i | Θ) for i ∈ {0, 1}, floored at 10⁻³⁰⁰.
pub fn i_integral<R: Real>(
    i: usize,
    y: ArrayView1<R>,
    theta: &ComponentParams<R>,
    geom: &ComponentGeometry<R>,
    pool: &McPool<R>,
    cfg: &SeriesConfig,
) -> Result<R> {
    let family = match i {
        0 => SeriesFamily::I0,
        1 => SeriesFamily::I1,
        _ => return Err(Error::InvalidParameter(format!("I(i) is defined for i in {{0, 1}}, got {i}"))),
    };
    let ev = ComponentEvaluator::new(theta, geom, pool, cfg)?;
    Ok(floor_linear(ev.ln_integrals(y)?.get(family)))
}

/// SSG density f_Y(y | Θ), floored at 10⁻³⁰⁰.
pub fn ssg_pdf<R: Real>(
    y: ArrayView1<R>,
    theta: &ComponentParams<R>,
    geom: &ComponentGeometry<R>,
    pool: &McPool<R>,
    cfg: &SeriesConfig,
) -> Result<R> {
    let ev = ComponentEvaluator::new(theta, geom, pool, cfg)?;
    Ok(floor_linear(ev.ln_pdf(y)?))
}

fn moments_at<R: Real>(
    y: ArrayView1<R>,
    theta: &ComponentParams<R>,
    geom: &ComponentGeometry<R>,
    pool: &McPool<R>,
    cfg: &SeriesConfig,
) -> Result<CondMoments<R>> {
    ComponentEvaluator::new(theta, geom, pool, cfg)?.moments(y)
}

/// E(P⁻¹ | y, Θ).
pub fn cond_e_inv_p<R: Real>(
    y: ArrayView1<R>,
    theta: &ComponentParams<R>,
    geom: &ComponentGeometry<R>,
    pool: &McPool<R>,
    cfg: &SeriesConfig,
) -> Result<R> {
    Ok(moments_at(y, theta, geom, pool, cfg)?.e_inv_p)
}

/// E(P⁻¹T | y, Θ).
pub fn cond_e_inv_p_t<R: Real>(
    y: ArrayView1<R>,
    theta: &ComponentParams<R>,
    geom: &ComponentGeometry<R>,
    pool: &McPool<R>,
    cfg: &SeriesConfig,
) -> Result<R> {
    Ok(moments_at(y, theta, geom, pool, cfg)?.e_inv_p_t)
}

/// E(P⁻¹T² | y, Θ).
pub fn cond_e_inv_p_t2<R: Real>(
    y: ArrayView1<R>,
    theta: &ComponentParams<R>,
    geom: &ComponentGeometry<R>,
    pool: &McPool<R>,
    cfg: &SeriesConfig,
) -> Result<R> {
    Ok(moments_at(y, theta, geom, pool, cfg)?.e_inv_p_t2)
}

/// Second moment of a Student-t with ν > 2 degrees of freedom truncated to
/// (−∞, b].
pub fn truncated_t_second_moment<R: Real>(nu: R, b: R) -> Result<R> {
    if !(nu > R::lit(2.0)) {
        return Err(Error::Domain(format!("truncated t second moment needs nu > 2, got {nu}")));
    }
    if b == R::infinity() {
        return Ok(nu / (nu - R::lit(2.0)));
    }
    Ok((ln_t_partial_second_moment(nu, b) - ln_student_t_cdf(b, nu)).exp())
}

/// Mixture density g(y | Ψ) = Σ ω_k f_Y(y | Θ_k), floored at 10⁻³⁰⁰. One
/// pool per component.
pub fn mixture_pdf<R: Real>(
    y: ArrayView1<R>,
    model: &MixtureModel<R>,
    pools: &[McPool<R>],
    cfg: &SeriesConfig,
) -> Result<R> {
    if pools.len() != model.k() {
        return Err(Error::DimensionMismatch { expected: model.k(), got: pools.len() });
    }
    let mut terms = Vec::with_capacity(model.k());
    for ((w, theta), pool) in model.weights.iter().zip(&model.components).zip(pools) {
        let geom = component_geometry(theta)?;
        let ev = ComponentEvaluator::new(theta, &geom, pool, cfg)?;
        terms.push(w.ln() + ev.ln_pdf(y)?);
    }
    Ok(floor_linear(log_sum_exp(&terms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn theta_1d(alpha: f64, lambda: f64) -> ComponentParams<f64> {
        ComponentParams::new(alpha, array![0.0], array![[1.0]], array![lambda]).unwrap()
    }

    #[test]
    fn geometry_scalar_case() {
        let th = theta_1d(1.5, 1.0);
        let g = component_geometry(&th).unwrap();
        assert!((g.omega[[0, 0]] - 2.0).abs() < 1e-15);
        assert!((g.delta - 0.5).abs() < 1e-15);
        let st = point_stats(array![2.0].view(), &th, &g);
        assert!((st.d_y - 2.0).abs() < 1e-15);
        assert!((st.m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn geometry_sherman_morrison_case() {
        let th = ComponentParams::new(1.5_f64, array![0.0, 0.0], Array2::eye(2), array![5.0, 1.0]).unwrap();
        let g = component_geometry(&th).unwrap();
        assert!((g.delta - 1.0 / 27.0).abs() < 1e-15);
        let zero = th.lambda.mapv(|_| 0.0);
        let th0 = ComponentParams { lambda: zero, ..th };
        let g0 = component_geometry(&th0).unwrap();
        assert_eq!(g0.delta, 1.0);
        assert_eq!(g0.omega, th0.sigma);
    }

    #[test]
    fn point_stats_at_location() {
        let th = theta_1d(1.2, 0.7);
        let g = component_geometry(&th).unwrap();
        let st = point_stats(th.mu.view(), &th, &g);
        assert_eq!(st.d_y, 0.0);
        assert_eq!(st.m, 0.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(ComponentParams::new(1.5, array![0.0], array![[-1.0]], array![0.0]).is_err());
        assert!(ComponentParams::new(2.5, array![0.0], array![[1.0]], array![0.0]).is_err());
        assert!(ComponentParams::new(1.5, array![0.0, 1.0], array![[1.0]], array![0.0]).is_err());
        assert!(ComponentParams::new(1.5, array![0.0, 0.0], array![[1.0, 0.5], [0.4, 1.0]], array![0.0, 0.0]).is_err());
    }

    #[test]
    fn gaussian_limit_at_origin() {
        let th = theta_1d(1.99, 0.0);
        let g = component_geometry(&th).unwrap();
        let pool = McPool::from_seed(1.99, 100_000, 11).unwrap();
        let v = ssg_pdf(array![0.0].view(), &th, &g, &pool, &SeriesConfig::default()).unwrap();
        assert!((v / 0.398_942_280_401_432_7 - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn truncated_t_values() {
        assert!((truncated_t_second_moment(5.0_f64, 0.0).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        assert!((truncated_t_second_moment(5.0_f64, 1e6).unwrap() - 5.0 / 3.0).abs() < 1e-9);
        // adaptive quadrature of x² t₅(x) / T₅(1) over (−∞, 1]
        assert!((truncated_t_second_moment(5.0_f64, 1.0).unwrap() - 1.129_809_037_729_342_2).abs() < 1e-10);
        assert!(truncated_t_second_moment(2.0, 1.0).is_err());
    }

    #[test]
    fn lambda_zero_second_moment_is_one() {
        let th = theta_1d(1.3, 0.0);
        let g = component_geometry(&th).unwrap();
        let pool = McPool::from_seed(1.3, 3000, 5).unwrap();
        let cfg = SeriesConfig::default();
        for y in [0.0, 0.5, 3.0, 40.0] {
            let v = cond_e_inv_p_t2(array![y].view(), &th, &g, &pool, &cfg).unwrap();
            assert!((v - 1.0).abs() < 0.03, "y={y}: {v}");
        }
    }

    #[test]
    fn alpha_two_is_skew_normal() {
        // α = 2: P ≡ 1 and f_Y is the skew-normal density 2φ(y; Ω)Φ(m/√δ).
        let th = theta_1d(2.0, 1.0);
        let g = component_geometry(&th).unwrap();
        let pool = McPool::from_seed(2.0, 10, 0).unwrap();
        let cfg = SeriesConfig::default();
        let y = 0.7;
        let v = ssg_pdf(array![y].view(), &th, &g, &pool, &cfg).unwrap();
        let sn = 2.0 * (-y * y / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt() * norm_cdf(0.5 * y / 0.5_f64.sqrt());
        assert!((v - sn).abs() < 1e-12);
    }
}
