//! Classical laboratory for quantum phase-estimation eigensolvers applied to
//! periodic finite-difference operators.

pub mod cost;
pub mod error;
pub mod experiments;
pub mod operator;
pub mod phase;
pub mod registry;
pub mod solver;
pub mod sparse;
pub mod splitting;

pub use error::{Error, Result};
