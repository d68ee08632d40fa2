// `!(x > 0.0)` deliberately rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hill;
pub mod ode;
pub mod oracles;
pub mod profile;
mod roots;
pub mod spectrum;

pub use error::{Error, Result};
