//! Deep networks with piecewise-linear activations.

mod activation;
mod network;
mod regions;
mod train;

pub use activation::Activation;
pub use network::{DenseLayer, Forward, InitScheme, PwlNetwork};
pub use regions::{
    activation_pattern, count_regions, local_map, zaslavsky_bound, ActivationPattern, RegionCert, RegionCount,
    RegionMethod, REGION_BUDGET,
};
pub use train::{train_sgd, TrainConfig, TrainOutcome};
