//! Scheduling rank functions for the M/G/1 queue with unknown job sizes.
//!
//! The crate builds the Gittins, SERPT and M-SERPT rank functions for a
//! discrete job size distribution, decomposes rank functions into hills and
//! valleys, evaluates exact mean response times for monotone-rank policies,
//! and simulates arbitrary rank-based preemptive policies exactly.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the companion `soap-sched` crate.

#![no_std]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod dist;
mod error;
pub mod hillvalley;
pub mod oracle;
pub mod props;
pub mod rank;
pub mod sim;
pub mod stats;

pub use analytic::AnalyticResult;
pub use dist::{ContinuousSpec, DiscreteDist, Family, Mg1};
pub use error::{Error, Result};
pub use hillvalley::HvDecomp;
pub use rank::{GittinsTable, PiecewiseLinearFn, PolicySpec};
pub use sim::{SimConfig, SimResult};

/// Absolute/relative tolerance used to classify two ranks as tied.
pub const RANK_TOL: f64 = 1e-12;

/// Tie tolerance for ranks near `v`: [`RANK_TOL`] scaled by magnitude above 1.
#[inline]
pub(crate) fn rank_tol(v: f64) -> f64 {
    RANK_TOL * libm::fabs(v).max(1.0)
}
