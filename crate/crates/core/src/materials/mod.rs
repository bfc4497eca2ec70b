//! Material response: permittivity models, sphere polarizabilities and
//! dipole T-operators, plate Fresnel coefficients, and the material library.

mod dielectric;
pub mod library;
mod response;

use std::path::PathBuf;

use thiserror::Error;

pub use dielectric::{DielectricModel, LorentzSet, Oscillator, TabulatedPermittivity};
pub use response::{
    branch_sqrt, dipole_t, dipole_warnings, fresnel, fresnel_coefficient, magnetic_polarizability,
    polarizability, static_expansion, static_permittivity, DipoleT, PlateSpec, Polarization,
    SphereSpec, StaticExpansion, CONDUCTOR_LIMIT, DIPOLE_VALIDITY_LIMIT, QUADRATIC_T_LIMIT,
};
pub(crate) use response::{fresnel_evanescent, fresnel_propagating};

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("omega = {omega:e} rad/s outside the tabulated range [{min:e}, {max:e}] rad/s")]
    OutOfRange { omega: f64, min: f64, max: f64 },
    #[error("unsupported material: {0}")]
    UnsupportedMaterial(String),
    #[error("polarizability pole (eps + 2 = 0) at omega = {omega:e} rad/s")]
    Pole { omega: f64 },
    #[error("invalid material definition: {0}")]
    Invalid(String),
    #[error("material `{0}` not found")]
    NotFound(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("{what} did not converge (value {value:e}, error estimate {error_estimate:e})")]
    Quadrature {
        what: String,
        value: f64,
        error_estimate: f64,
    },
}
