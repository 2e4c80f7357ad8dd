//! First eigenpair of the mixed local/nonlocal Dirichlet `(p,q)`-eigenvalue problem
//!
//! ```text
//! -Δ_p u + (-Δ_p)^s u = λ ‖u‖_q^{p-q} |u|^{q-2} u   in Ω = (a, b),
//!                   u = 0                          in ℝ \ Ω,
//! ```
//!
//! discretized on a uniform interior mesh with zero exterior extension.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: admissible exponents, the grid, grid functions and the closed-form
//!   exterior tail weight of the nonlocal kernel.
//! * [`operators`]: the discrete energies and the pairings `⟨A v, w⟩`, `⟨B v, w⟩`.
//! * [`solver`]: solves `A(u) = f` by minimizing a strictly convex energy.
//! * [`iteration`]: the nonlinear inverse iteration producing a certified eigenpair.
//! * [`oracles`]: independent brute-force routes to the same discrete eigenvalue.
//! * [`diagnostics`]: boundedness, positivity and inequality reports.
//!
//! ```
//! use pq_eigen::{inverse_iteration, Grid, GridFunction, Params};
//!
//! let params = Params::new(2.0, 2.0, 0.5, 1).unwrap();
//! let grid = Grid::new(0.0, 1.0, 40).unwrap();
//! let start = GridFunction::constant(grid, 1.0);
//! let pair = inverse_iteration(&params, &start, 1e-8, 200).unwrap();
//! assert!(pair.residual <= 1e-8);
//! assert!(pair.lambda > std::f64::consts::PI.powi(2));
//! ```

pub mod diagnostics;
mod error;
pub mod iteration;
pub mod operators;
pub mod oracles;
pub mod params;
pub mod solver;

pub use diagnostics::{
    inequality_report, level_set_report, linf_norm, positivity_check, InequalityReport,
    LevelSetReport,
};
pub use error::{Error, Result};
pub use iteration::{
    eigen_residual, inverse_iteration, rayleigh_quotient, EigenPair, IterationOptions,
    IterationTrace,
};
pub use operators::{
    grad_a, local_energy, lq_norm, nonlocal_energy, pair_a, pair_b, x_energy, DualVector,
    EnergyBreakdown, MixedOperator,
};
pub use oracles::{
    coordinate_search_min, dense_p2_eigen, projected_gradient_min, OracleMethod, OracleResult,
};
pub use params::{tail_weight, Grid, GridFunction, Params, Terms};
pub use solver::{solve_operator_equation, SolveReport, SolverOptions};
