//! Cyber-physical microgrid attack simulator and lightweight intrusion
//! detectors.
//!
//! The crate is organised as the pipeline runs:
//!
//! * [`sim`] integrates a ten-generator droop/consensus microgrid,
//! * [`attack`] corrupts the consensus signals exchanged between controllers,
//! * [`dataset`] labels, merges, downsamples, normalises and splits the logs,
//! * [`gbdt`] trains histogram gradient-boosted trees,
//! * [`distill`] compresses a multiclass teacher into a small student,
//! * [`eval`] scores models, runs ablations and measures latency,
//! * [`pipeline`] wires the stages together end to end.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod attack;
pub mod dataset;
pub mod distill;
pub mod error;
pub mod eval;
pub mod gbdt;
pub mod pipeline;
pub mod sim;

pub use attack::{AttackMode, AttackSpec};
pub use dataset::SampleTable;
pub use error::{Error, Result};
pub use sim::{DGState, SimConfig};
