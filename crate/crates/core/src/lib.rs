//! Power dissipation on the Feynman-Sierpinski ladder.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harmonic;
pub mod ladder;
mod linalg;
pub mod measure;
pub mod network;
pub mod singularity;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::CMatrix;
