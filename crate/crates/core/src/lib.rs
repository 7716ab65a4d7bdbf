#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod gjf;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
