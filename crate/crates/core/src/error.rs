// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("unsupported dimension {0}; expected 2 or 4")]
    Dimension(usize),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("group closure exceeded {cap} elements")]
    ClosureCap { cap: usize },

    #[error("group element not found during key lookup")]
    MissingElement,

    #[error("perturbative regime violated: {0}")]
    Regime(String),

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error("group cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
