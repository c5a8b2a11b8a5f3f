//! Finite-dimensional real operator spaces: matrix norms, complexification,
//! minimal and maximal quantizations, one-sided M-projections, operator
//! systems and ternary rings of operators.

pub mod error;
pub mod linalg;
pub mod mideal;
pub mod opspace;
pub mod quantization;
pub mod rng;
mod search;
pub mod systems;

pub use error::{Error, Result};
pub use linalg::Mat;
pub use opspace::{CBMap, MatElem, OpSpace};
