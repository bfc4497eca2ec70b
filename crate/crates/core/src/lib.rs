//! Equilibrium and non-equilibrium Casimir forces in dipole order, for two
//! spheres and for a sphere facing a plate, each body at its own temperature.
//!
//! Forces are scalars along the line joining the bodies, positive for
//! attraction.

pub mod constants;
pub mod materials;
pub mod quadrature;
pub mod force;
pub mod sphere_plate;
pub mod two_spheres;
pub mod asymptotics;
pub mod analysis;

mod error;

pub use error::Error;
pub use force::{axial_component, Body, ForceBreakdown, PlateSplit, SignConvention};
