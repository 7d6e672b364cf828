use ndarray::{Array1, Array2};

use crate::density::ComponentParams;
use crate::error::{Error, Result};
use crate::real::Real;

/// Mixture parameters Ψ = (ω₁..ω_K, Θ₁..Θ_K).
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel<R> {
    pub weights: Vec<R>,
    pub components: Vec<ComponentParams<R>>,
}

impl<R: Real> MixtureModel<R> {
    pub fn new(weights: Vec<R>, components: Vec<ComponentParams<R>>) -> Result<Self> {
        let model = Self { weights, components };
        model.validate()?;
        Ok(model)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, ComponentParams::dim)
    }

    /// Tolerance on Σω = 1: 10⁻¹² or a few ulps for low-precision scalars.
    fn simplex_tol(&self) -> R {
        R::lit(1e-12).max(R::epsilon() * R::of_usize(4 * self.k().max(1)))
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        if self.weights.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: self.weights.len() });
        }
        if self.weights.iter().any(|&w| !(w >= R::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be non-negative".into()));
        }
        let total: R = self.weights.iter().copied().sum();
        if (total - R::one()).abs() > self.simplex_tol() {
            return Err(Error::InvalidParameter(format!("weights must sum to 1, got {total}")));
        }
        let d = self.dim();
        for c in &self.components {
            if c.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.dim() });
            }
            c.validate()?;
        }
        Ok(())
    }

    /// Componentwise average of a non-empty sequence of models with the same
    /// shape (convex combinations keep every invariant).
    pub fn average(models: &[MixtureModel<R>]) -> Result<Self> {
        let first = models.first().ok_or_else(|| Error::InvalidParameter("nothing to average".into()))?;
        let n = R::of_usize(models.len());
        let (k, d) = (first.k(), first.dim());
        let mut weights = vec![R::zero(); k];
        let mut comps: Vec<ComponentParams<R>> = (0..k)
            .map(|_| ComponentParams {
                alpha: R::zero(),
                mu: Array1::zeros(d),
                sigma: Array2::zeros((d, d)),
                lambda: Array1::zeros(d),
            })
            .collect();
        for m in models {
            if m.k() != k || m.dim() != d {
                return Err(Error::DimensionMismatch { expected: k, got: m.k() });
            }
            for j in 0..k {
                weights[j] = weights[j] + m.weights[j] / n;
                let (acc, c) = (&mut comps[j], &m.components[j]);
                acc.alpha = acc.alpha + c.alpha / n;
                acc.mu.zip_mut_with(&c.mu, |a, &b| *a = *a + b / n);
                acc.sigma.zip_mut_with(&c.sigma, |a, &b| *a = *a + b / n);
                acc.lambda.zip_mut_with(&c.lambda, |a, &b| *a = *a + b / n);
            }
        }
        let total: R = weights.iter().copied().sum();
        for w in &mut weights {
            *w = *w / total;
        }
        Self::new(weights, comps)
    }

    /// Copy with components (and weights) reordered by `perm`: new component
    /// j is old component `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
            components: perm.iter().map(|&p| self.components[p].clone()).collect(),
        }
    }
}
