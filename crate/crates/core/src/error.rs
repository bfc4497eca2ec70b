use thiserror::Error;

use crate::materials::MaterialError;
use crate::quadrature::QuadratureError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("{0}")]
    Analysis(String),
}
