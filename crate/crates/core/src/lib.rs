//! Uncertainty-gated two-stage classification.
//!
//! A stage-1 ensemble of elastic-net logistic models scores every record from
//! cheap clinical/ECG features. The spread of the ensemble's probabilities is
//! used as an uncertainty signal. Uncertain records, and records whose mean
//! probability sits too close to 0.5, are escalated to a stage-2 ensemble that
//! also sees imaging features. Everything needed to evaluate such a cascade is
//! included: nested cross-validation, a guideline rule baseline, DeLong and
//! McNemar comparisons, feature importance, a sample-size simulation, and a
//! synthetic cohort generator.

pub mod cascade;
pub mod cli;
pub mod cohort;
pub mod ensemble;
pub mod error;
pub mod files;
pub mod glm;
pub mod guideline;
pub mod importance;
pub mod pipeline;
pub mod preprocess;
pub mod seed;
pub(crate) mod serde_f64;
pub mod stats;
pub mod svg;

pub use error::{Error, Result};
