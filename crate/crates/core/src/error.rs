use thiserror::Error;

/// Errors surfaced by the solver pipeline.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid piecewise function: {0}")]
    InvalidPiecewise(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid rational time: q = {q}, r = {r} must be positive and co-prime")]
    InvalidRationalTime { q: u64, r: u64 },
    #[error("non-finite state encountered at x = {x}")]
    NonFinite { x: f64 },
    #[error("non-finite integrand sample at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("lambda = {lambda} must exceed max V = {max_v} for the Prufer phase")]
    LambdaBelowPotential { lambda: f64, max_v: f64 },
    #[error("initial phase theta0 = {theta0} outside [0, pi)")]
    InvalidInitialPhase { theta0: f64 },
    #[error("eigenvalue bracket exhausted at index {index}")]
    BracketExhausted { index: usize },
    #[error("boundary matrix has no null vector at lambda = {lambda} (sigma_min = {sigma})")]
    InconsistentEigenvalue { lambda: f64, sigma: f64 },
    #[error("root count mismatch: {sign_changes} sign changes vs {phase_count} from the phase lift")]
    RootCountMismatch { sign_changes: usize, phase_count: usize },
    #[error("potential ordering violated at x = {x}: V1 = {v1} < V = {v}")]
    OrderingViolated { x: f64, v1: f64, v: f64 },
    #[error("eigenfunction basis failed the Gram check (max off-identity deviation {max_dev})")]
    GramCheckFailed { max_dev: f64 },
    #[error("coefficient fit degenerate at pair index {m}: both projections below threshold")]
    FitDegenerate { m: usize },
    #[error("mean of potential is {mean}, expected zero (remove the mean first)")]
    MeanNotRemoved { mean: f64 },
    #[error("wave fields live on different grids")]
    GridMismatch,
    #[error("negative eigenvalue {lambda} under square root")]
    NegativeEigenvalue { lambda: f64 },
}

pub type Result<T> = std::result::Result<T, SolverError>;
