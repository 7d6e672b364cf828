//! Finite mixtures of skewed sub-Gaussian stable (SSG) distributions.
//!
//! An SSG vector is `Y = μ + √P λ|Z₀| + √P Σ^{1/2} Z₁` with `P` a positive
//! stable variable of index α/2, `Z₀` standard normal and `Z₁` d-variate
//! standard normal. The crate provides
//!
//! * the positive stable law (series density, sampler, tail probabilities),
//! * SSG densities and the conditional expectations needed by EM, each with
//!   a series branch and a Monte Carlo branch,
//! * simulation of SSG samples and labelled mixtures,
//! * an EM/ECM fitter with a stochastic CM-step for α,
//! * BIC, adjusted Rand index and classification,
//! * JSON/CSV persistence used by the command-line tool.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below name the usual double-precision instantiations.

pub mod density;
pub mod em;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod real;
pub mod rng;
pub mod sampling;
pub mod special;
pub mod stable;

pub use density::{
    component_geometry, cond_e_inv_p, cond_e_inv_p_t, cond_e_inv_p_t2, i_integral, mixture_pdf, point_stats,
    ssg_pdf, truncated_t_second_moment, BranchPolicy, ComponentEvaluator, ComponentGeometry, ComponentParams,
    CondMoments, McPool, PointStats,
};
pub use em::{
    cm_step_alpha, e_step, fit, initialize, m_step, stopping_check, EStepCache, FitConfig, FitResult, MixtureModel,
    SliceConfig, StopDecision,
};
pub use error::{Error, Result};
pub use eval::{adjusted_rand_index, bic, classify, free_parameters, Partition};
pub use real::Real;
pub use sampling::{sample_hierarchy_v, sample_mixture, sample_ssg, sim_study_design, LabeledSample};
pub use stable::{
    positive_stable_pdf, positive_stable_sample, positive_stable_upper_tail, series_threshold, PositiveStableDist,
    SeriesConfig, SeriesFamily,
};

pub type ComponentParamsF64 = ComponentParams<f64>;
pub type ComponentGeometryF64 = ComponentGeometry<f64>;
pub type MixtureModelF64 = MixtureModel<f64>;
pub type FitResultF64 = FitResult<f64>;
pub type EStepCacheF64 = EStepCache<f64>;
pub type McPoolF64 = McPool<f64>;
pub type LabeledSampleF64 = LabeledSample<f64>;
pub type PositiveStableDistF64 = PositiveStableDist<f64>;
