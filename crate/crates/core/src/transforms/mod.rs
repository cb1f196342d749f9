//! Conversions between representations and equivalence checking.

mod cplr_build;
mod dc;
mod equivalence;
mod lattice_build;
mod to_dc;

pub use cplr_build::{cplr_from_consistent, cplr_from_hh, hh_from_cplr};
pub use dc::{ghh_from_dc, DcForm, DC_CAP};
pub use equivalence::{check_equivalence, halton, EquivalenceReport, DEFAULT_TOLERANCE, HALTON_SAMPLES};
pub use lattice_build::{lattice_from_conventional, DEFAULT_PROBES};
pub use to_dc::ToDc;
