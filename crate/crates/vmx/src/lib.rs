//! A relativistic Vlasov-Maxwell laboratory: characteristic transport of a
//! collisionless plasma, a staggered-grid Maxwell solver, retarded light-cone
//! field reconstruction, and a battery of continuation-criterion diagnostics
//! and inequality verification campaigns.
//!
//! Units: c = 1, particle rest mass = 1, charge = 1.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod gs;
pub mod io;
pub mod kinetic;
pub mod lemma_lab;
pub mod lightcone;
pub mod quadrature;
pub mod runner;
pub mod spectral;
pub mod vec3;

pub use error::{Result, VmxError};
pub use vec3::Vec3;
