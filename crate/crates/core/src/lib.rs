// `!(x >= 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accountant;
pub mod assembler;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod serde_ext;
pub mod tape;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
