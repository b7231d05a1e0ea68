use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_nm:.3} nm outside the {material} {polarization} Sellmeier range [{min_nm}, {max_nm}] nm")]
    WavelengthOutOfRange {
        material: String,
        polarization: String,
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not phasematchable: {0}")]
    NotPhasematchable(String),

    #[error("no {condition} point in range [{min_nm}, {max_nm}] nm")]
    NoDesignPoint {
        condition: &'static str,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("support clipped: boundary holds {fraction:.3e} of the total |f|^2 (limit {limit:.0e})")]
    SupportClipped { fraction: f64, limit: f64 },

    #[error("Gaussian model outside its validity: T_ss^2 T_ii^2 - T_si^4 = {determinant:.6e} fs^4 is not positive")]
    DegenerateState { determinant: f64 },

    #[error("trigger filter does not overlap the grid; heralding probability is zero")]
    EmptyHeralding,

    #[error("profile maximum sits on the grid edge (index {index})")]
    ClippedProfile { index: usize },

    #[error("profile never drops below the e^-1 level on the {side} side")]
    DegenerateProfile { side: &'static str },

    #[error("contour at level {level} is empty")]
    EmptyContour { level: f64 },

    #[error("p = 1/K only holds for a frequency-independent trigger; the density matrix was built with a trigger filter")]
    FilteredTrigger,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed input files rather than the computation.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}
