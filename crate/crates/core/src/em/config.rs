use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::SeriesConfig;

/// Tuning of the univariate slice sampler used in the CM-step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    /// Initial bracket width.
    pub width: f64,
    /// Maximum number of stepping-out expansions (split between both ends).
    pub max_step_out: usize,
    pub burn_in: usize,
    /// Draws kept per observation and repeat (the last one is used).
    pub kept: usize,
    /// Density evaluations allowed in one shrinkage phase before giving up.
    pub max_evaluations: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self { width: 1.0, max_step_out: 50, burn_in: 50, kept: 1, max_evaluations: 1000 }
    }
}

/// Every constant of the fitting algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Series truncation 𝒩.
    pub n_terms: usize,
    /// Monte Carlo pool size N.
    pub n_mc: usize,
    /// CM-step repeats M.
    pub m_repeats: usize,
    /// Stopping tolerance ε on the difference of block slopes.
    pub eps: f64,
    pub max_iter: usize,
    pub min_iter: usize,
    /// Tail indices are kept inside [lo, hi]; lo == hi fixes α.
    pub alpha_bounds: (f64, f64),
    pub slice: SliceConfig,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_terms: 80,
            n_mc: 3000,
            m_repeats: 5,
            eps: 0.10,
            max_iter: 500,
            min_iter: 30,
            alpha_bounds: (0.3, 1.99),
            slice: SliceConfig::default(),
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn series(&self) -> SeriesConfig {
        SeriesConfig { n_terms: self.n_terms, n_mc: self.n_mc }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.n_terms == 0 || self.n_mc == 0 || self.m_repeats == 0 || self.max_iter == 0 {
            return bad("n_terms, n_mc, m_repeats and max_iter must be positive");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        let (lo, hi) = self.alpha_bounds;
        if !(lo > 0.0 && lo <= hi && hi < 2.0) {
            return bad("alpha_bounds must satisfy 0 < lo <= hi < 2");
        }
        let s = &self.slice;
        if !(s.width > 0.0) || s.kept == 0 || s.max_evaluations == 0 {
            return bad("slice width, kept and max_evaluations must be positive");
        }
        Ok(())
    }
}
