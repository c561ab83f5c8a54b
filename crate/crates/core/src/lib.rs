//! Cooperative RIS + STAR-RIS massive-MIMO downlink: statistical channel model,
//! deterministic-equivalent sum spectral efficiency, closed-form gradients and
//! projected-gradient surface design, with Monte-Carlo oracles for every closed form.
//!
//! The usual entry point is [`model::SystemModel`], built from a
//! [`scenario::ScenarioConfig`] and an [`experiment::Architecture`]. It evaluates
//! the sum SE and its gradients for any [`channel_stats::SurfaceConfig`], and the
//! [`optimizer`] drives it to a stationary point.

pub mod channel_stats;
pub mod correlation;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod gradients;
pub mod model;
pub mod montecarlo;
pub mod operator;
pub mod optimizer;
pub mod performance;
pub mod presets;
pub mod scenario;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
