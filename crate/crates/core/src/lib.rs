//! Partial metric spaces, orbital contraction conditions and certified
//! Picard iteration.
//!
//! * [`space`]: the partial-metric abstraction and axiom audits
//! * [`spaces`] / [`table`]: built-in spaces and validated finite tables
//! * [`convergence`]: tau(p), proper and Cauchy analysis of sequence traces
//! * [`contraction`]: orbits, diameters, gauges and condition checks
//! * [`solver`]: Picard iteration with pm1-based certificates
//! * [`witness`]: the fixed-point-free contraction on an incomplete space

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
pub mod convergence;
pub mod error;
pub mod solver;
pub mod space;
pub mod spaces;
pub mod table;
pub mod witness;

pub use error::{Error, Result};
pub use space::{PartialMetric, PartialMetricSpace, Point};
