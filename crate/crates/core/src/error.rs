use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("targets are not sorted ascending (index {index})")]
    UnsortedTargets { index: usize },

    #[error("expansion point coincides with the target (x_c = y = {0})")]
    CoincidentExpansion(f64),

    #[error("cluster radius {r} is not inside the contour radius {big_r}")]
    NotSeparated { r: f64, big_r: f64 },

    #[error("quadrature order {0} is outside the supported range 1..=16")]
    UnsupportedQuadratureOrder(usize),

    #[error("charge system is empty")]
    EmptySystem,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("reference field is identically zero; relative error is undefined")]
    ZeroReference,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
