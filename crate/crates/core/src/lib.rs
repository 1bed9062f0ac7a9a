//! Hyperplane sections of the regular simplex.
//!
//! * [`simplex`]: dimensions, canonical directions and metric constants.
//! * [`section`]: the parallel section function `A(a, t)`.
//! * [`slice`]: exact geometric slicing used as an independent oracle.
//! * [`search`]: extremal sections by multistart local search, the known
//!   extremal families in dimensions 2 and 3, and crossover constants.
//! * [`verify`]: runnable claim suites producing pass/fail records.

pub mod divdiff;
pub mod error;
pub mod search;
pub mod section;
pub mod simplex;
pub mod slice;
pub mod verify;

pub use error::{Error, Result};
pub use section::{
    axis_section_volume, confluent_eval, dirksen_sum, section_volume, section_volume_with, Branch,
    KnotConfiguration, SectionValue,
};
pub use simplex::{
    axis_direction, canonicalize, psi_bound, simplex_constants, CanonicalDirection, Dimension,
    SectionQuery, SimplexConstants,
};
pub use slice::{
    cap_volume, derivative_check, slice_polytope, slice_volume_exact, CapVolumes, SlicePolytope,
};
