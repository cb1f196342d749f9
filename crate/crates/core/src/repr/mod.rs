//! Compact shallow representations.

mod ahh;
mod cplr;
mod ghh;
mod hinge;
mod hlcplr;
mod lattice;
mod nested;
mod sbf;

pub use ahh::{AhhBasis, AhhFactor, AhhModel};
pub use cplr::{AbsTerm, CplrModel};
pub use ghh::{GhhModel, GhhTerm};
pub use hinge::{Hinge, HingeModel};
pub use hlcplr::{HlCplrBasis, HlCplrModel};
pub use lattice::LatticeModel;
pub use nested::{NestedCplrModel, NestedNode};
pub use sbf::{SbfBasis, SbfModel};

use crate::error::Result;

/// A continuous piecewise-linear map `R^n → R`.
pub trait PwlFunction {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<f64>;

    /// Upper bound on the Lipschitz constant computed from the parameters.
    fn lipschitz_bound(&self) -> f64;
}

impl<T: PwlFunction + ?Sized> PwlFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }

    fn lipschitz_bound(&self) -> f64 {
        (**self).lipschitz_bound()
    }
}
