use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    LabelCollision(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NegativeEigenvalue(f64),

    #[error("matrix is not unitary (max deviation of U^dag U from identity {0:e})")]
    NotUnitary(f64),

    #[error("Kraus family is not trace preserving (max deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{0}")]
    Unreachable(String),

    #[error("cross-check failed{}: {detail}", seed_suffix(.seed))]
    CrossCheck { seed: Option<u64>, detail: String },

    #[error("invalid channel description: {0}")]
    BadDescription(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn seed_suffix(seed: &Option<u64>) -> String {
    seed.map(|s| format!(" for seed {s}")).unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

pub(crate) fn check_dimension(name: &'static str, value: usize, min: usize) -> Result<()> {
    if value < min {
        return Err(Error::InvalidParameter {
            name,
            value: value as f64,
            reason: "dimension too small",
        });
    }
    Ok(())
}
