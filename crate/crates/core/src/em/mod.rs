//! EM/ECM fitting: initialization, E-step, M-step, stochastic CM-step for
//! the tail indices, stopping rule and the driver.

mod cmstep;
mod config;
mod estep;
mod fit;
mod init;
mod model;
mod mstep;
mod stopping;

pub use cmstep::{cm_step_alpha, cm_step_alpha_component, slice_sample, w_posterior_ln_density, weibull_alpha_mle};
pub use config::{FitConfig, SliceConfig};
pub use estep::{e_step, e_step_with_pools, hard_labels, EStepCache};
pub use fit::{fit, FitResult};
pub use init::{initial_partition, initialize, k_medoids_l1};
pub use model::MixtureModel;
pub use mstep::m_step;
pub use stopping::{stopping_check, StopDecision};
