//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SvError>;

#[derive(Debug, Error)]
pub enum SvError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported scheme order {0}: supported orders are 2..=5")]
    UnsupportedOrder(usize),

    #[error("unsupported Gauss rule with {0} points: supported counts are 1..=6")]
    UnsupportedQuadrature(usize),

    #[error("nonphysical state {state:?} at {location}")]
    NonPhysical { state: Vec<f64>, location: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("solver aborted at step {step}, stage {stage}, t = {t:.6e}: {reason}")]
    Aborted {
        step: usize,
        stage: usize,
        t: f64,
        reason: String,
        /// CV averages of the last accepted step, for post-mortem dumps.
        last_good: Vec<f64>,
    },

    #[error("vacuum generated by the Riemann data (no positive star pressure)")]
    Vacuum,

    #[error("singular linear system in {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
