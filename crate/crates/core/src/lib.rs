//! Piecewise-linear neural network representations.
//!
//! The crate covers the conventional region-by-region form, the compact
//! shallow models (CPLR, nested CPLR, HH, GHH, HL-CPLR, AHH, SBF, lattice),
//! conversions between them, incremental fitting algorithms, and a small deep
//! PWL network engine with linear-region analysis.

pub mod affine;
pub mod catalog;
pub mod conventional;
pub mod dnn;
pub mod error;
pub mod learning;
pub mod lp;
pub mod model;
pub mod repr;
pub mod transforms;
mod text;

pub use affine::{AffineFunction, BoxDomain, Halfspace, Region};
pub use conventional::ConventionalPwl;
pub use model::Model;
pub use error::{PwlError, Result};
pub use repr::PwlFunction;
pub use text::{fmt_real, sniff_kind};
