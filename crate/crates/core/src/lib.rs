// Negated comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod domain;
pub mod error;
pub mod exactsol;
pub mod model;
pub mod quad;
pub mod solver;

pub use error::{PmeError, Result};
