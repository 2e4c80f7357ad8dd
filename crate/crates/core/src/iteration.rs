//! Nonlinear inverse iteration for the first eigenpair.
//!
//! Starting from `w_0 = w0 / ‖w0‖_q`, each outer step solves `A(v_{n+1}) = B(w_n)` and sets
//!
//! ```text
//! μ_n     = ‖v_{n+1}‖_q^{-(p-1)}
//! w_{n+1} = v_{n+1} / ‖v_{n+1}‖_q
//! ```
//!
//! so that, by the `(p-1)`-homogeneity of `A`, `A(w_{n+1}) = μ_n B(w_n)`. Both `μ_n` and
//! `‖w_{n+1}‖_X^p` are nonincreasing and interlace as `μ_{n+1} ≤ ‖w_{n+1}‖_X^p ≤ μ_n`; the
//! driver stops once their gap is below `tol · μ_n` *and* the eigen-equation residual of
//! `(‖w_{n+1}‖_X^p, w_{n+1})` is below `tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{lq_norm, lq_norm_raw, signed_pow, DualVector, MixedOperator};
use crate::params::{GridFunction, Params};
use crate::solver::{solve_with, is_mirror_symmetric, snap_symmetric, SolverOptions};

/// Per-step record of the outer iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// `μ_n`.
    pub mu: Vec<f64>,
    /// `‖w_{n+1}‖_X^p`.
    pub x_energy_next: Vec<f64>,
    /// `‖w_{n+1}‖_q`, one by construction.
    pub lq_norms: Vec<f64>,
    /// Newton steps spent in each inner solve.
    pub inner_iterations: Vec<usize>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Largest violation of `μ_{n+1} ≤ μ_n` (zero when monotone).
    pub fn mu_increase(&self) -> f64 {
        self.mu.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max)
    }

    /// Largest violation of `‖w_{n+1}‖_X^p ≤ μ_n`.
    pub fn energy_excess(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.x_energy_next)
            .map(|(m, e)| (e - m).max(0.0))
            .fold(0.0, f64::max)
    }

    /// `|μ_n - ‖w_{n+1}‖_X^p|` at the last step.
    pub fn terminal_gap(&self) -> Option<f64> {
        Some((self.mu.last()? - self.x_energy_next.last()?).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Eigenfunction normalized to `‖w‖_q = 1`.
    pub w: GridFunction,
    pub residual: f64,
    pub trace: IterationTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_outer: usize,
    /// Newton budget for each inner solve.
    pub inner_max_iter: usize,
}

impl IterationOptions {
    pub fn new(tol: f64, max_outer: usize) -> Self {
        IterationOptions { tol, max_outer, inner_max_iter: 200 }
    }
}

/// Runs the inverse iteration from `w0` until the eigenpair is certified to `tol`.
///
/// ```
/// use pq_eigen::{inverse_iteration, eigen_residual, Grid, GridFunction, Params};
///
/// let params = Params::new(3.0, 2.0, 0.5, 1).unwrap();
/// let grid = Grid::new(0.0, 1.0, 30).unwrap();
/// let pair = inverse_iteration(&params, &GridFunction::hat(grid), 1e-8, 500).unwrap();
/// assert!(eigen_residual(pair.lambda, &pair.w, &params).unwrap() <= 1e-8);
/// ```
pub fn inverse_iteration(
    params: &Params,
    w0: &GridFunction,
    tol: f64,
    max_outer: usize,
) -> Result<EigenPair> {
    inverse_iteration_with(params, w0, IterationOptions::new(tol, max_outer))
}

pub fn inverse_iteration_with(
    params: &Params,
    w0: &GridFunction,
    opts: IterationOptions,
) -> Result<EigenPair> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let grid = w0.grid;
    let op = MixedOperator::new(params, &grid)?;
    let (p, q, h) = (params.p, params.q, grid.h);

    let norm0 = lq_norm(w0, q);
    if norm0 == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let mut w = w0.scaled(1.0 / norm0);
    snap_symmetric(&mut w.values);
    let mut trace = IterationTrace::default();
    let mut gap = 0.0;
    let mut mu_prev: Option<f64> = None;

    for _ in 0..opts.max_outer {
        let rhs = DualVector::from_b(&w, q);
        // The first solve uses the Rayleigh quotient of w_0 as its estimate of μ and is solved
        // tightly, so that a start that is already an eigenfunction is recognized at once.
        let mu_est = mu_prev.unwrap_or_else(|| op.energy_raw(&w.values).total);
        let mu_scale = mu_est.max(1.0);
        // At a fixed point v_{n+1} = μ^{-1/(p-1)} w_n.
        let warm = w.scaled(mu_est.powf(-1.0 / (p - 1.0)));
        // loose while the outer gap is large, 0.01·tol/μ near convergence
        let inner_tol = (0.1 * gap / mu_scale)
            .min(1e-3)
            .max(0.01 * opts.tol / mu_scale)
            .max(inner_floor(&rhs, &warm, p));
        let inner = SolverOptions { tol: inner_tol, max_iter: opts.inner_max_iter };
        let report = match solve_with(&op, &rhs, inner, Some(&warm)) {
            Ok(r) => r,
            // A solve stalled near its roundoff floor is still usable; the outer stopping
            // test certifies the eigenpair independently.
            Err(Error::SolverMaxIterations(r)) if r.final_gradient_norm <= 1e3 * inner_tol => *r,
            Err(e) => return Err(e),
        };
        let v = report.solution;
        let v_norm = lq_norm_raw(&v.values, h, q);
        if v_norm == 0.0 {
            return Err(Error::ZeroIterate);
        }
        let mu = v_norm.powf(-(p - 1.0));
        let mut next = v.scaled(1.0 / v_norm);
        // The first eigenfunction of the mirror-invariant problem is symmetric; once the
        // transient asymmetry has decayed to roundoff level, remove it exactly.
        snap_symmetric(&mut next.values);
        let energy = op.energy_raw(&next.values).total;

        trace.mu.push(mu);
        trace.x_energy_next.push(energy);
        trace.lq_norms.push(lq_norm(&next, q));
        trace.inner_iterations.push(report.iterations);

        gap = (mu - energy).abs();
        mu_prev = Some(mu);
        w = next;
        if gap <= opts.tol * mu {
            let residual = residual_with(&op, energy, &w)?;
            if residual <= opts.tol {
                return Ok(EigenPair { lambda: energy, w, residual, trace });
            }
        }
    }
    Err(Error::OuterMaxIterations(Box::new(trace)))
}

// Roundoff floor of the scaled residual for right-hand side `f` near the solution `v`. For
// p < 2, ψ_p is only Hölder continuous with exponent p - 1, so a one-ulp error in a near-zero
// difference quotient shows up as (ε|v|/h)^{p-1}/h in the residual. Mirror-symmetric data
// is exempt: the solver then keeps the central difference exactly zero.
fn inner_floor(f: &DualVector, v: &GridFunction, p: f64) -> f64 {
    let scale = f.coefficients.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let relative = 1e-13 * scale.max(1.0);
    if p >= 2.0 || is_mirror_symmetric(&f.coefficients) {
        return relative;
    }
    let h = v.grid.h;
    let top = v.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    relative.max((f64::EPSILON * top / h).powf(p - 1.0) / h)
}

/// `max_i |⟨A u, e_i⟩ - λ ‖u‖_q^{p-q} ⟨B u, e_i⟩| / h`.
pub fn eigen_residual(lambda: f64, u: &GridFunction, params: &Params) -> Result<f64> {
    let op = MixedOperator::new(params, &u.grid)?;
    residual_with(&op, lambda, u)
}

pub(crate) fn residual_with(op: &MixedOperator, lambda: f64, u: &GridFunction) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let (p, q) = (op.params().p, op.params().q);
    let factor = lambda * lq_norm(u, q).powf(p - q);
    let g = op.grad(u)?.coefficients;
    Ok(g.iter()
        .zip(&u.values)
        .map(|(gi, &ui)| (gi - factor * signed_pow(ui, q)).abs())
        .fold(0.0, f64::max))
}

/// `‖u‖_X^p / ‖u‖_q^p`; scale invariant.
pub fn rayleigh_quotient(u: &GridFunction, params: &Params) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let op = MixedOperator::new(params, &u.grid)?;
    Ok(op.energy(u)?.total / lq_norm(u, params.q).powf(params.p))
}
