//! Local symbolic approximation of implicit first-order ODEs `F(x, y, y') = 0`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod builtin;
pub mod cli;
pub mod expr;
pub mod jet;
pub mod numeric;
pub mod report;
pub mod series;
mod poly;
