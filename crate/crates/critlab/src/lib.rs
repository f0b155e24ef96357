//! critlab: a finite-element laboratory for mixed Robin/Dirichlet elliptic
//! operators in divergence form.
//!
//! The crate assembles the weak bilinear form of an operator pair (interior
//! operator + oblique boundary operator), computes principal eigenvalues
//! with positive eigenfunctions, approximates minimal positive Green
//! functions by exhaustion limits, and classifies operators as subcritical,
//! critical, or supercritical.

pub mod error;
pub mod geometry;
pub mod operator;
pub mod sparse;
pub mod criticality;
pub mod discretize;
pub mod green;
pub mod oracle;
pub mod spectral;
mod pencil;

pub use error::{Error, Result};
