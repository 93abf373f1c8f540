//! Business-rules capacity expansion planning.
//!
//! A [`scenario::Scenario`] describes nodes, lines, generators and storages
//! together with demand and availability traces. Candidate portfolios are
//! evaluated by the heuristic unit commitment in [`dispatch`], priced by
//! [`costing`], searched by the differential evolution driver in [`evolve`]
//! and post-processed by [`analysis`]. [`aggregate`] holds standalone
//! temporal-aggregation transforms.

// Guards of the form `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod analysis;
pub mod costing;
pub mod dispatch;
mod error;
pub mod evolve;
pub mod network;
pub mod scenario;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
