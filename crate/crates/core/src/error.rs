use thiserror::Error;

#[derive(Debug, Error)]
pub enum RrwError {
    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("empty spectrum: no positive frequency up to lambda = {0}")]
    EmptySpectrum(f64),
    #[error("mode index {index} out of range (count {count})")]
    ModeIndex { index: usize, count: usize },
    #[error("point lies on a pole of the spherical parameterization")]
    Pole,
    #[error("tangent vector of norm {norm} exceeds the chart guard {guard}")]
    ChartGuard { norm: f64, guard: f64 },
    #[error("grid resolution unstable: {coarse} -> {fine} ({rel_change:.3e} relative change)")]
    Resolution {
        coarse: f64,
        fine: f64,
        rel_change: f64,
    },
    #[error("nodal set is empty; ratio undefined")]
    EmptyNodalSet,
    #[error("check is vacuous: {0}")]
    Vacuous(String),
    #[error("config: {0}")]
    Config(String),
    #[error("config hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RrwError>;
