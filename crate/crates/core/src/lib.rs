//! Closed-form, regularized and finite-difference solvers for the beam
//! interface problem `(a u)'' + P u = g` on `[0, 1]` with a jump of `a` at `x0`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod beam;
pub mod bump;
pub mod closed_form;
pub mod error;
pub mod quad;
pub mod singular_set;
pub mod linalg;
pub mod regularize;
pub mod oracle;
pub mod mollify;
pub mod expr;
pub mod cli;

pub use error::{Error, Result};
