// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod features;
pub mod geometry;
pub mod kernels;
pub mod mondrian;
pub mod regression;
pub mod rng;
pub mod rotation;
pub mod stochgeom;

pub use error::{Error, Result};
