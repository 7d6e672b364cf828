//! Simulation of SSG vectors, labelled SSG mixtures, and the two
//! constructions of V = (Y − μ)/√E used to check the Weibull hierarchy.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::density::ComponentParams;
use crate::em::MixtureModel;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::real::Real;
use crate::rng::{seeded, substream, Stream};
use crate::stable::PositiveStableDist;

/// Simulated observations with their generating component (1..=K).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<R> {
    pub data: Array2<R>,
    pub labels: Vec<usize>,
    pub seed: u64,
}

/// Draws √P (λ|Z₀| + L Z₁) for one component given its Cholesky factor.
struct SsgDraw<'a, R> {
    theta: &'a ComponentParams<R>,
    chol: Array2<R>,
    dist: Option<PositiveStableDist<R>>,
}

impl<'a, R: Real> SsgDraw<'a, R> {
    fn new(theta: &'a ComponentParams<R>) -> Result<Self> {
        theta.validate()?;
        let dist = if theta.alpha < R::lit(2.0) { Some(PositiveStableDist::new(theta.alpha)?) } else { None };
        Ok(Self { theta, chol: cholesky(&theta.sigma)?, dist })
    }

    fn p<G: Rng + ?Sized>(&self, rng: &mut G) -> R {
        self.dist.map_or(R::one(), |d| d.sample(rng))
    }

    /// λ|Z₀| + L Z₁ (the skew-normal kernel, without location or scale).
    fn kernel<G: Rng + ?Sized>(&self, rng: &mut G) -> Array1<R> {
        let d = self.theta.dim();
        let z0: f64 = StandardNormal.sample(rng);
        let z1: Vec<R> = (0..d)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                R::lit(z)
            })
            .collect();
        let z1 = Array1::from(z1);
        let mut out = self.chol.dot(&z1);
        let t = R::lit(z0.abs());
        out.zip_mut_with(&self.theta.lambda, |o, &l| *o = *o + l * t);
        out
    }

    fn draw<G: Rng + ?Sized>(&self, rng: &mut G) -> Array1<R> {
        let s = self.p(rng).sqrt();
        let mut y = self.kernel(rng);
        y.zip_mut_with(&self.theta.mu, |v, &m| *v = m + s * *v);
        y
    }
}

fn draw_rows<R: Real, G: Rng + ?Sized>(n: usize, sampler: &SsgDraw<'_, R>, rng: &mut G) -> Array2<R> {
    let d = sampler.theta.dim();
    let mut out = Array2::zeros((n, d));
    for mut row in out.rows_mut() {
        row.assign(&sampler.draw(rng));
    }
    out
}

/// `n` i.i.d. SSG draws Y = μ + √P λ|Z₀| + √P Σ^{1/2} Z₁.
pub fn sample_ssg<R: Real>(n: usize, theta: &ComponentParams<R>, seed: u64) -> Result<Array2<R>> {
    let sampler = SsgDraw::new(theta)?;
    Ok(draw_rows(n, &sampler, &mut seeded(seed)))
}

/// `n` draws from the mixture with multinomially drawn component labels.
pub fn sample_mixture<R: Real>(n: usize, model: &MixtureModel<R>, seed: u64) -> Result<LabeledSample<R>> {
    model.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let samplers = model.components.iter().map(SsgDraw::new).collect::<Result<Vec<_>>>()?;
    let mut rng = substream(seed, Stream::Simulate);
    let cum: Vec<f64> = model
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w.to_f64_lossy();
            Some(*acc)
        })
        .collect();
    let d = model.dim();
    let mut data = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random::<f64>() * cum[cum.len() - 1];
        let k = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
        data.row_mut(i).assign(&samplers[k].draw(&mut rng));
        labels.push(k + 1);
    }
    Ok(LabeledSample { data, labels, seed })
}

/// The two-component bivariate design of the reference simulation study:
/// ω = (0.25, 0.75), α = (1.5, 1.5), μ = ((1, 1), (−2, −2)),
/// λ = ((5, 1), (1, 5)), unit variances with correlations ∓0.5.
pub fn sim_study_design<R: Real>() -> MixtureModel<R> {
    let l = |v: f64| R::lit(v);
    let component = |mu: [f64; 2], rho: f64, lambda: [f64; 2]| {
        ComponentParams::new(
            l(1.5),
            Array1::from_iter(mu.map(l)),
            Array2::from_shape_vec((2, 2), vec![l(1.0), l(rho), l(rho), l(1.0)]).expect("2x2 shape"),
            Array1::from_iter(lambda.map(l)),
        )
        .expect("design parameters are valid")
    };
    MixtureModel::new(
        vec![l(0.25), l(0.75)],
        vec![component([1.0, 1.0], -0.5, [5.0, 1.0]), component([-2.0, -2.0], 0.5, [1.0, 5.0])],
    )
    .expect("design weights are valid")
}

/// Weibull(α) draw by inversion, w = (−ln u)^{1/α}.
pub fn sample_weibull<R: Real, G: Rng + ?Sized>(alpha: R, rng: &mut G) -> R {
    let u: f64 = rng.random();
    let e = -(1.0 - u).ln();
    R::lit(e.powf(1.0 / alpha.to_f64_lossy()))
}

/// Two independent samples of V: (Y − μ)/√E with E ~ Exp(1), and directly
/// from the hierarchy V | W = w ~ (λ|Z₀| + Σ^{1/2} Z₁)/w, W ~ Weibull(α).
pub fn sample_hierarchy_v<R: Real>(n: usize, theta: &ComponentParams<R>, seed: u64) -> Result<(Array2<R>, Array2<R>)> {
    let sampler = SsgDraw::new(theta)?;
    let d = theta.dim();
    let mut rng = seeded(seed);
    let mut via_y = Array2::zeros((n, d));
    for mut row in via_y.rows_mut() {
        let y = sampler.draw(&mut rng);
        let e: f64 = Exp1.sample(&mut rng);
        let s = R::lit(e.sqrt());
        row.assign(&((&y - &theta.mu) / s));
    }
    let mut via_w = Array2::zeros((n, d));
    for mut row in via_w.rows_mut() {
        let w = sample_weibull(theta.alpha, &mut rng);
        row.assign(&(sampler.kernel(&mut rng) / w));
    }
    Ok((via_y, via_w))
}
