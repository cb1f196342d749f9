//! Incremental learning for the shallow representations.

mod ahh;
mod data;
mod hinge;
mod lsq;
mod sbf;

pub use ahh::{fit_ahh, AhhFit, AhhNode, AhhTree};
pub use data::{Dataset, FitConfig, FitTrace, TraceAction, TraceRecord};
pub use hinge::{find_hinge, fit_hh, HingeFit, HingeInit, HINGE_RESTARTS};
pub use lsq::least_squares;
pub use nalgebra::DMatrix;
pub use sbf::{fit_sbf, GAMMA_GRID};
