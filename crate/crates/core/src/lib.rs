//! Simulation and design toolkit for heralded single-photon sources based on
//! pulsed parametric downconversion.
//!
//! The pipeline runs from crystal dispersion ([`crystal`]) through the joint
//! spectral amplitude ([`state`]) to heralded-photon analysis, either in the
//! closed-form Gaussian model ([`gaussian`]) or numerically ([`wigner`],
//! [`schmidt`]). [`design`] solves for group-velocity-matched geometries.

pub mod contour;
pub mod crystal;
pub mod design;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod pipeline;
pub mod roots;
pub mod scenario;
pub mod schmidt;
pub mod sellmeier;
pub mod state;
pub mod units;
pub mod wigner;

pub use crystal::{CrystalSpec, Dispersion, PmType, Walkoff};
pub use error::{Error, Result};
pub use sellmeier::{Material, Polarization, SellmeierTable};
