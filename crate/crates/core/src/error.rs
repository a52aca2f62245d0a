use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{op} requires a neumann_mirror grid")]
    PeriodicRejected { op: &'static str },

    #[error("{op} requires a periodic grid")]
    NeumannRejected { op: &'static str },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("degenerate input: |f| = {magnitude:e} at node {node}")]
    Degenerate { node: usize, magnitude: f64 },

    #[error("field is not unit-valued: max ||u|-1| = {drift:e} exceeds {tol:e}")]
    NotUnit { drift: f64, tol: f64 },

    #[error("field is not tangent: max |<w,u>| = {drift:e} exceeds {tol:e}")]
    NotTangent { drift: f64, tol: f64 },

    #[error("field violates the Neumann condition: boundary flux {flux:e} exceeds {tol:e}")]
    NotNeumann { flux: f64, tol: f64 },

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("blow-up detected at t = {time}: max |du| grew by {growth:e}")]
    BlowUp { time: f64, growth: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
