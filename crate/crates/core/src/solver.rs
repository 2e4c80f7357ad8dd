//! Solving the operator equation `⟨A u, φ⟩ = f(φ)` for all `φ`.
//!
//! `A` is the gradient of the strictly convex energy `‖u‖_X^p / p`, so the solution is
//! the unique minimizer of
//!
//! ```text
//! Φ(u) = ‖u‖_X^p / p - f(u).
//! ```
//!
//! Each step takes a Newton direction built from the (regularized) Jacobian of `A` and
//! backtracks by halving until the Armijo condition with parameter `1e-4` holds. Success
//! is declared on the scaled sup-norm of the Euler–Lagrange residual,
//! `max_i |⟨A u, e_i⟩ - f(e_i)| / h`, computed with the exact, unregularized operator.
//!
//! When `f` (and the warm start) are exactly mirror-symmetric about the midpoint, the
//! unique minimizer is too, and every iterate is projected onto mirror-symmetric vectors.
//! For `p < 2` this matters: `ψ_p` is not Lipschitz at zero, so a roundoff-sized asymmetry
//! across the flat top would otherwise leave a residual floor far above the tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{dot, DualVector, MixedOperator};
use crate::params::{GridFunction, Params};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;
// steps without a 10% residual improvement before the solve counts as stalled
const STALL_WINDOW: usize = 30;
// relative size of the smoothing in ψ_p' used for the Newton matrix only
const SLOPE_SMOOTHING: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: GridFunction,
    pub iterations: usize,
    /// Scaled sup-norm residual of the operator equation at `solution`.
    pub final_gradient_norm: f64,
    /// `Φ(solution)`.
    pub objective: f64,
    /// `Φ` at the start and after every accepted step.
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 200 }
    }
}

/// Finds `u` with `A(u) = f`. See the module docs for the algorithm.
///
/// Fails with [`Error::SolverMaxIterations`], carrying the last iterate, when the residual
/// is still above `tol` after `max_iter` steps, when it has stagnated at a roundoff floor,
/// or when the line search can make no further progress.
pub fn solve_operator_equation(
    f: &DualVector,
    params: &Params,
    tol: f64,
    max_iter: usize,
    warm_start: Option<&GridFunction>,
) -> Result<SolveReport> {
    let op = MixedOperator::new(params, &f.grid)?;
    solve_with(&op, f, SolverOptions { tol, max_iter }, warm_start)
}

pub(crate) fn solve_with(
    op: &MixedOperator,
    f: &DualVector,
    opts: SolverOptions,
    warm_start: Option<&GridFunction>,
) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if f.grid != *op.grid() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = f.coefficients.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let grid = *op.grid();
    let (h, p) = (grid.h, op.params().p);
    let rhs = &f.coefficients;

    let objective = |u: &[f64]| op.energy_raw(u).total / p - h * dot(rhs, u);
    let residual = |u: &[f64]| -> (Vec<f64>, f64) {
        let r: Vec<f64> = op.grad_raw(u).iter().zip(rhs).map(|(g, f)| g - f).collect();
        let sup = r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        (r, sup)
    };

    let shape = match warm_start {
        Some(w) => {
            if w.grid != grid {
                return Err(Error::GridMismatch);
            }
            w.values.clone()
        }
        None => rhs.clone(),
    };
    let symmetric = is_mirror_symmetric(rhs) && is_mirror_symmetric(&shape);
    let mut u = scale_along_ray(op, rhs, shape);

    let mut phi = objective(&u);
    let mut history = vec![phi];
    let (mut r, mut res) = residual(&u);
    let mut iterations = 0;
    let (mut best_res, mut last_improvement) = (res, 0);

    while res > opts.tol {
        if iterations == opts.max_iter || iterations - last_improvement > STALL_WINDOW {
            return Err(stalled(grid, u, iterations, res, phi, history));
        }
        iterations += 1;

        let mut direction = newton_direction(op, &u, &r);
        if symmetric {
            symmetrize(&mut direction);
        }
        let slope = h * dot(&r, &direction);
        let slack = 1e-12 * (phi.abs() + h * dot(rhs, &u).abs()).max(f64::MIN_POSITIVE);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(&direction).map(|(x, d)| x + step * d).collect();
            let phi_trial = objective(&trial);
            if phi_trial <= phi + ARMIJO * step * slope {
                let (r_trial, res_trial) = residual(&trial);
                accepted = Some((trial, phi_trial, r_trial, res_trial));
                break;
            }
            // Near the minimizer Φ no longer resolves the decrease; fall back to the residual.
            if phi_trial <= phi + slack {
                let (r_trial, res_trial) = residual(&trial);
                if res_trial < res {
                    accepted = Some((trial, phi_trial.min(phi), r_trial, res_trial));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, phi_trial, r_trial, res_trial)) => {
                u = trial;
                phi = phi_trial;
                r = r_trial;
                res = res_trial;
                history.push(phi);
                if res < 0.9 * best_res {
                    best_res = res;
                    last_improvement = iterations;
                }
            }
            None => return Err(stalled(grid, u, iterations, res, phi, history)),
        }
    }

    Ok(SolveReport {
        solution: GridFunction { grid, values: u },
        iterations,
        final_gradient_norm: res,
        objective: phi,
        objective_history: history,
    })
}

fn stalled(
    grid: crate::params::Grid,
    u: Vec<f64>,
    iterations: usize,
    res: f64,
    phi: f64,
    history: Vec<f64>,
) -> Error {
    Error::SolverMaxIterations(Box::new(SolveReport {
        solution: GridFunction { grid, values: u },
        iterations,
        final_gradient_norm: res,
        objective: phi,
        objective_history: history,
    }))
}

pub(crate) fn is_mirror_symmetric(v: &[f64]) -> bool {
    v.iter().zip(v.iter().rev()).all(|(a, b)| a == b)
}

/// Replaces `v` by the average of itself and its mirror image; the result is exactly
/// symmetric.
pub(crate) fn symmetrize(v: &mut [f64]) {
    let m = v.len();
    for i in 0..m / 2 {
        let avg = 0.5 * (v[i] + v[m - 1 - i]);
        v[i] = avg;
        v[m - 1 - i] = avg;
    }
}

/// Symmetrizes `v` once its asymmetry has decayed below `1e-6 · max|v|`.
///
/// The reflection `x ↦ a + b - x` commutes with every map in this crate and fixes the first
/// eigenfunction, so projecting onto symmetric vectors never moves an iterate away from it.
pub(crate) fn snap_symmetric(v: &mut [f64]) {
    let top = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let asym = v.iter().zip(v.iter().rev()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    if asym <= 1e-6 * top {
        symmetrize(v);
    }
}

/// Best multiple `t·shape`: minimizes `|t|^p E / p - t f(shape)` in closed form.
fn scale_along_ray(op: &MixedOperator, rhs: &[f64], shape: Vec<f64>) -> Vec<f64> {
    let p = op.params().p;
    let energy = op.energy_raw(&shape).total;
    let load = op.grid().h * dot(rhs, &shape);
    if energy <= 0.0 || load == 0.0 {
        return vec![0.0; shape.len()];
    }
    let t = (load.abs() / energy).powf(1.0 / (p - 1.0)).copysign(load);
    shape.into_iter().map(|x| t * x).collect()
}

/// Solves `J d = -r`; falls back to steepest descent if the factorization fails.
fn newton_direction(op: &MixedOperator, u: &[f64], r: &[f64]) -> Vec<f64> {
    let h = op.grid().h;
    let scale = u.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) / h;
    let delta = SLOPE_SMOOTHING * scale.max(1e-12);
    let jac = op.grad_jacobian(u, delta);
    let rhs = nalgebra::DVector::from_iterator(r.len(), r.iter().map(|x| -x));
    match jac.cholesky() {
        Some(chol) => chol.solve(&rhs).iter().copied().collect(),
        None => rhs.iter().copied().collect(),
    }
}
