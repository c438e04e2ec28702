//! Boundary loop model (blob algebra) and A_p RSOS transfer matrices on the
//! annulus: exact finite-size constructions and numerical checks.

pub mod amplitudes;
pub mod cabling;
pub mod cft;
pub mod error;
pub mod linkstate;
pub mod matrix;
pub mod oracle;
pub mod transfer;
pub mod ring;
pub mod rsos;
pub mod spectrum;

pub use error::{Error, Result};
pub use linkstate::{BasisKind, GeneratorAction, LinkState, LoopFactor, SectorLabel};
pub use ring::{Poly, RingMode, Scalar, Var};
