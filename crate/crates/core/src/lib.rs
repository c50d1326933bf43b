#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod elliptic;
pub mod error;
pub mod harness;
pub mod lanczos;
pub mod linalg;
pub mod pole;
pub mod pencil;
pub mod sparse;
pub mod subsolve;

pub use error::{Error, Result};
