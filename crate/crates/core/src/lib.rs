//! Symmetry reduction of autonomous ODE systems via σ-prolonged vector fields.

pub mod error;
pub mod expr;

pub use error::{Error, Result};
pub use expr::{parse, Expr, Symbol};
pub mod chart;
pub mod field;
pub mod integrate;
pub mod jet;
pub mod linalg;
pub mod pipeline;
pub mod problem;
pub mod reduction;
pub mod report;
pub mod sample;
pub mod symmetry;
