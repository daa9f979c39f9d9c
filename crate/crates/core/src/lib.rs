//! Decision layer for harmful algal bloom (HAB) risk at desalination intakes.
//!
//! Tabular multi-sensor evidence goes in; a calibrated operational risk
//! index, two-level alert states, leakage-safe evaluation and drift reports
//! come out. Every stage is a plain function over [`SampleRecord`] slices, so
//! the pieces compose without the pipeline driver.

// Validation uses `!(x >= lo)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod console;
pub mod drift;
pub mod error;
pub mod fusion;
pub mod indices;
pub mod ingest;
pub mod labeling;
pub mod metrics;
pub mod monthly;
pub mod ops_risk;
pub mod output;
pub mod pipeline;
pub mod record;
pub mod splits;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use record::{AlertState, Driver, LabelSet, SampleRecord};
