//! Exact computations for smooth hypertoric varieties: circuits, stable
//! bases, Steinberg operators, quantum multiplication, and the nested-set
//! and toric charts of the compactified parameter space.

pub mod circuit_matroid;
pub mod cli_reporting;
pub mod error;
pub mod exact_core;
pub mod fan_compactify;
pub mod stable_basis;
pub mod nested_charts;
pub mod toric_layers;

pub use error::{HyperqError, Result};
pub mod operators;
pub mod sampling;
