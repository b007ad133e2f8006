//! Capacity analysis of an energy-harvesting decode-and-forward relay.
//!
//! The relay harvests RF energy from both the source signal and a set of
//! co-channel interferers, under either a time-switching (TS) or a
//! power-splitting (PS) receiver, and spends it forwarding the decoded
//! message. This crate provides:
//!
//! * closed-form and quadrature evaluations of the end-to-end outage
//!   probability, ergodic capacity, outage capacity and throughput
//!   ([`link`], [`capacity`]),
//! * the hypoexponential mixture describing aggregate interference
//!   ([`mixture`]),
//! * the special functions these need ([`special`]),
//! * a reproducible Monte Carlo simulator of the physical model used as an
//!   independent oracle ([`monte_carlo`]),
//! * ratio sweeps, optimal-ratio search and majorization ordering checks
//!   ([`analysis`]),
//! * a CSV-emitting command-line front end ([`cli`]).

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod analysis;
pub mod capacity;
pub mod cli;
pub mod error;
pub mod link;
pub mod mixture;
pub mod monte_carlo;
pub mod special;

pub use error::{Error, Result};
