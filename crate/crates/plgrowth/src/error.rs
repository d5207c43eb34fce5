//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("barrier argument t = {t} lies outside the interval (-inf, {m4r}]")]
    OutsideBarrierInterval { t: f64, m4r: f64 },

    #[error("barrier conditions (C-1)-(C-4) fail on [{lo}, {hi}]")]
    BarrierConditionsFailed { lo: f64, hi: f64 },

    #[error("spacing {spacing} too coarse for window radius {radius}: the dyadic measurements need spacing <= R/16 = {limit}")]
    GridTooCoarse { spacing: f64, radius: f64, limit: f64 },

    #[error("domain ∩ B(x0, R) contains no interior grid node")]
    EmptyWindow,

    #[error("no grid nodes in {what}")]
    EmptyNodeSet { what: String },

    #[error("non-finite boundary value at node ({i}, {j})")]
    NonFiniteBoundary { i: usize, j: usize },

    #[error("solver diverged: non-finite {what} after {iterations} sweeps")]
    SolverDiverged { what: &'static str, iterations: usize },

    #[error("solver did not converge: residual {residual:.3e} > tol {tol:.3e} after {iterations} sweeps")]
    NonConvergence {
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("continuation stage {stage} (p = {p}) did not converge: residual {residual:.3e} > tol {tol:.3e} after {iterations} sweeps")]
    ContinuationStage {
        stage: usize,
        p: f64,
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("ball B(({cx}, {cy}), {r}) is not interior to the domain")]
    BallNotInterior { cx: f64, cy: f64, r: f64 },

    #[error("ball B(({cx}, {cy}), {r}) exceeds the grid window")]
    BallOutsideWindow { cx: f64, cy: f64, r: f64 },

    #[error("growth measurement: all M(r) <= 0, the field admits no positive value in the window")]
    NoPositiveValue,

    #[error("resolution failure: {0}")]
    ResolutionFailure(String),

    #[error("field/grid mismatch: {0}")]
    FieldGridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for configuration/validation
    /// problems, 3 for solver non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidDomain(_)
            | Error::InvalidParameter { .. }
            | Error::GridTooCoarse { .. }
            | Error::Config(_) => 2,
            Error::NonConvergence { .. }
            | Error::ContinuationStage { .. }
            | Error::SolverDiverged { .. } => 3,
            _ => 1,
        }
    }
}
