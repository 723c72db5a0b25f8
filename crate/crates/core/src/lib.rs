//! Reduced dynamics of excitonic networks coupled to Drude–Lorentz baths via
//! the hierarchical equations of motion, and quantum-information measures
//! (global entanglement, concurrence, coherence length) on the resulting
//! density matrices.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod heom;
pub mod measures;
pub mod model;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
pub use units::UnitSystem;
