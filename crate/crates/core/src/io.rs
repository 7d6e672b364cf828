//! JSON persistence of fitted models.
//!
//! ```json
//! { "k": 2, "d": 2, "weights": [..],
//!   "components": [ { "alpha": .., "mu": [..], "lambda": [..], "sigma": [[..], [..]] } ],
//!   "meta": { "seeds": { "master": 1 }, "config": { .. }, "loglik": .., "bic": .. } }
//! ```
//! Σ is stored row-major; every number is written in shortest round-trip
//! form, so write → read → write is byte-identical.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::ComponentParams;
use crate::em::{FitConfig, FitResult, MixtureModel};
use crate::error::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model: {0}")]
    Model(#[from] Error),
    #[error("inconsistent model file: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub alpha: f64,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seeds: SeedRecord,
    pub config: FitConfig,
    pub loglik: f64,
    pub bic: f64,
    pub n: usize,
    pub n_iter: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub k: usize,
    pub d: usize,
    pub weights: Vec<f64>,
    pub components: Vec<ComponentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ModelMeta>,
}

impl ModelRecord {
    pub fn from_model(model: &MixtureModel<f64>, meta: Option<ModelMeta>) -> Self {
        let components = model
            .components
            .iter()
            .map(|c| ComponentRecord {
                alpha: c.alpha,
                mu: c.mu.to_vec(),
                lambda: c.lambda.to_vec(),
                sigma: c.sigma.rows().into_iter().map(|r| r.to_vec()).collect(),
            })
            .collect();
        Self { k: model.k(), d: model.dim(), weights: model.weights.clone(), components, meta }
    }

    pub fn from_fit(result: &FitResult<f64>, cfg: &FitConfig, n: usize) -> Self {
        let meta = ModelMeta {
            seeds: SeedRecord { master: cfg.seed },
            config: *cfg,
            loglik: result.loglik,
            bic: result.bic,
            n,
            n_iter: result.n_iter,
            converged: result.converged,
        };
        Self::from_model(&result.model, Some(meta))
    }

    pub fn to_model(&self) -> Result<MixtureModel<f64>, FormatError> {
        if self.components.len() != self.k || self.weights.len() != self.k {
            return Err(FormatError::Shape(format!(
                "k = {} but {} components and {} weights",
                self.k,
                self.components.len(),
                self.weights.len()
            )));
        }
        let d = self.d;
        let comps = self
            .components
            .iter()
            .map(|c| {
                if c.sigma.len() != d || c.sigma.iter().any(|r| r.len() != d) {
                    return Err(FormatError::Shape(format!("sigma must be {d}x{d}")));
                }
                let flat: Vec<f64> = c.sigma.iter().flatten().copied().collect();
                let sigma = Array2::from_shape_vec((d, d), flat).map_err(|e| FormatError::Shape(e.to_string()))?;
                Ok(ComponentParams::new(c.alpha, Array1::from(c.mu.clone()), sigma, Array1::from(c.lambda.clone()))?)
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(MixtureModel::new(self.weights.clone(), comps)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}
