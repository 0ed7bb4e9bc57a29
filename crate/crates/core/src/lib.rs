//! Error-rate fairness auditing for prior-authorization decision systems.
//!
//! The crate compares the error rate of an automated review system between
//! two groups defined by a protected attribute (sex, age, race or a
//! socioeconomic proxy). An error is a false approval or an unnecessary
//! escalation. Results are reported against a tolerance band: a confidence
//! interval lying inside `[-δ, δ]` supports equivalence, one lying outside
//! supports a disparity, and anything else is inconclusive.
//!
//! * [`cohort`] loads case files, maps raw attribute values to groups and
//!   describes the cohort.
//! * [`stats`] holds the unadjusted two-proportion analysis and power.
//! * [`glm`] fits the logistic models used for covariate adjustment.
//! * [`inference`] bootstraps adjusted disparities.
//! * [`synth`] generates cohorts with a known disparity.
//! * [`report`] runs a configured audit and renders JSON and Markdown.

pub mod cohort;
pub mod error;
pub mod glm;
pub mod inference;
pub mod numeric;
pub mod report;
pub mod stats;
pub mod synth;

pub use cohort::{Attribute, Cohort, DerivedCase, RawCase, ReviewOutcome};
pub use error::{Error, Result};
pub use stats::{Classification, ToleranceBand};
