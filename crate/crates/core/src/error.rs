use crate::iteration::IterationTrace;
use crate::params::GridFunction;
use crate::solver::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point x = {x} is not inside the open interval ({a}, {b})")]
    OutsideDomain { x: f64, a: f64, b: f64 },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("grid function has {got} values but the grid has {expected} interior nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid function contains a non-finite value at node {0}")]
    NonFinite(usize),

    #[error("the function is identically zero")]
    ZeroFunction,

    #[error("inner solve stopped after {} iterations with residual {:.3e}", .0.iterations, .0.final_gradient_norm)]
    SolverMaxIterations(Box<SolveReport>),

    #[error("inverse iteration did not converge in {} outer steps", .0.mu.len())]
    OuterMaxIterations(Box<IterationTrace>),

    #[error("inner solve returned the zero function (degenerate right-hand side)")]
    ZeroIterate,

    #[error("oracle requires p = q = 2, got p = {p}, q = {q}")]
    NotQuadratic { p: f64, q: f64 },

    #[error("coordinate search supports at most 6 nodes, got {0}")]
    TooManyNodes(usize),

    #[error("oracle did not converge: {0}")]
    OracleNotConverged(String),

    #[error("coordinate-search starts disagree (spread {spread:.3e}); problem looks multimodal")]
    Multimodal { spread: f64, best: Box<GridFunction> },

    #[error("subinterval [{lo}, {hi}] is not compactly contained in ({a}, {b})")]
    NotCompactlyContained { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::GridMismatch => "grid_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::ZeroFunction => "zero_function",
            Error::SolverMaxIterations(_) => "solver_max_iterations",
            Error::OuterMaxIterations(_) => "outer_max_iterations",
            Error::ZeroIterate => "zero_iterate",
            Error::NotQuadratic { .. } => "not_quadratic",
            Error::TooManyNodes(_) => "too_many_nodes",
            Error::OracleNotConverged(_) => "oracle_not_converged",
            Error::Multimodal { .. } => "multimodal",
            Error::NotCompactlyContained { .. } => "not_compactly_contained",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
