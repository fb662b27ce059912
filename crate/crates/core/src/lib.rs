//! Privacy-preserving flow-based intrusion detection.
//!
//! The pipeline reduces a flow-feature matrix by dropping redundant,
//! highly correlated columns, distorts the retained values with a
//! least-squares affine transform, measures how much the distortion moved
//! the data, and benchmarks five classifiers on the result.
//!
//! ```text
//! dataset ─▶ feature_selection ─▶ distortion ─▶ privacy_metrics
//!                                      │
//!                                      └──────▶ classifiers ─▶ evaluation
//! ```
//!
//! [`pipeline`] ties the stages together behind a TOML config.

pub mod classifiers;
pub mod config;
pub mod dataset;
pub mod distortion;
pub mod evaluation;
pub mod feature_selection;
pub mod linalg;
pub mod par;
pub mod pipeline;
pub mod privacy_metrics;
pub mod unsw;
