use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `sin(r x / 2)` vanishes (to within the guard threshold) at `x`.
    #[error("abscissa {x} is singular for step {r}: nearest singular point 2*{l}*pi/{r} = {nearest}")]
    Singular { x: f64, r: i64, l: i64, nearest: f64 },

    /// `x` is not strictly inside the requested half-band.
    #[error("abscissa {x} is not strictly inside a half-band of step {r} (band index {l})")]
    OutsideHalfBand { x: f64, r: u64, l: i64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty block list")]
    EmptyBlocks,

    #[error("step {r1} does not divide step {r2}")]
    NotDivisible { r1: u64, r2: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
