//! Exact computations on finite pointed metric spaces: Lipschitz and
//! free-space norms, slice diameters, diameter-two witnesses and transfer
//! property checks, all reduced to certified linear programs.
//!
//! Everything is generic over [`Scalar`], implemented for exact
//! [`Rational`] numbers and for `f64` with a fixed tolerance.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod flow;
pub mod free;
pub mod lip;
pub mod lp;
pub mod metric;
mod par;
pub mod probes;
pub mod scalar;
pub mod transfer;

pub use free::{FreeVector, NormMethod};
pub use lip::LipFunction;
pub use metric::{MetricSpace, PairSet, StructureError, SubsetMask};
pub use scalar::{ratio, Rational, Scalar};
