//! Weight sequences, weight functions, growth indices and an explicit
//! extension operator for ultraholomorphic classes on unbounded sectors.
//!
//! Numerical routines are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the double-precision instantiation that all
//! documented tolerances refer to.

pub mod constructions;
pub mod error;
pub mod extension;
pub mod indices;
pub mod properties;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod sequence;
pub mod special;
pub mod weight;

pub use error::{Error, Result};
pub use indices::IndexEstimate;
pub use properties::{check_property, compare_sequences, mixed_gamma_statistic, Property};
pub use report::{PropertyReport, TailEstimate, Verdict};
pub use scalar::Real;
pub use sequence::{SequenceDescriptor, SequenceTransform, WeightSequence};
pub use weight::{WeightDescriptor, WeightFunction, WeightMatrix, WeightOp};

pub type WeightSequence64 = WeightSequence<f64>;
pub type WeightFunction64 = WeightFunction<f64>;
