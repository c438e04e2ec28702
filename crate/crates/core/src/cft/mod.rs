//! Conformal data for the boundary loop model: Kac weights, exact
//! character series, level coincidences between sectors and finite-size
//! exponent fits.

pub mod coincidence;
pub mod fit;
pub mod kac;
pub mod series;

pub use coincidence::{verify_level_coincidences, CoincidenceReport, InclusionCheck};
pub use fit::{estimate_exponent, estimate_gap_exponent, fit_finite_size, velocity_for, ExponentEstimate, GapCluster, Reference, SizeFit};
pub use kac::{central_charge, kac_weight, r_of_y, y_of_r, KacParams};
