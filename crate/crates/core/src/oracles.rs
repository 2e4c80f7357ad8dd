//! Independent routes to the discrete first eigenvalue.
//!
//! None of these share code paths with [`solver`](crate::solver) or
//! [`iteration`](crate::iteration) beyond energy and gradient evaluation:
//!
//! * [`dense_p2_eigen`] assembles the quadratic form term by term and diagonalizes it with
//!   cyclic Jacobi rotations (`p = q = 2` only).
//! * [`projected_gradient_min`] minimizes the Rayleigh quotient directly, renormalizing
//!   onto the `L^q` sphere after every step. Gradients are measured in the metric of the
//!   operator's Jacobian, which only affects the speed, not the limit.
//! * [`coordinate_search_min`] does cyclic exact coordinate minimization from many starts
//!   on tiny grids.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::residual_with;
use crate::operators::{lq_norm, signed_pow, MixedOperator};
use crate::params::{Grid, GridFunction, Params};
use crate::solver::snap_symmetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    DenseP2,
    ProjectedGradient,
    CoordinateSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub lambda: f64,
    /// Minimizer with `‖·‖_q = 1` and nonnegative node sum.
    pub minimizer: GridFunction,
    pub method: OracleMethod,
}

fn normalized(mut u: GridFunction, q: f64) -> GridFunction {
    let n = lq_norm(&u, q);
    let sign = if u.values.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    u.values.iter_mut().for_each(|v| *v *= sign / n);
    u
}

/// Matrix `G` with `⟨A v, w⟩ = h wᵀ G v` for `p = 2`, assembled from the squared linear
/// forms that make up the energy.
pub fn p2_matrix(grid: &Grid, params: &Params) -> Result<DMatrix<f64>> {
    params.require_1d()?;
    if params.p != 2.0 {
        return Err(Error::NotQuadratic { p: params.p, q: params.q });
    }
    let m = grid.m;
    let h = grid.h;
    let x = grid.nodes();
    let order = 1.0 + 2.0 * params.s;
    let mut s = DMatrix::<f64>::zeros(m, m);
    if params.terms.local() {
        // h ((u_{i+1} - u_i)/h)^2 over the m+1 cells; boundary cells touch one node
        let c = 1.0 / h;
        for cell in 0..=m {
            let left = cell.checked_sub(1);
            let right = (cell < m).then_some(cell);
            if let Some(l) = left {
                s[(l, l)] += c;
            }
            if let Some(r) = right {
                s[(r, r)] += c;
            }
            if let (Some(l), Some(r)) = (left, right) {
                s[(l, r)] -= c;
                s[(r, l)] -= c;
            }
        }
    }
    if params.terms.nonlocal() {
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                // h^2 (u_i - u_j)^2 K_ij
                let c = h * h * (x[i] - x[j]).abs().powf(-order);
                s[(i, i)] += c;
                s[(j, j)] += c;
                s[(i, j)] -= c;
                s[(j, i)] -= c;
            }
            let ps = 2.0 * params.s;
            let tail = ((x[i] - grid.a).powf(-ps) + (grid.b - x[i]).powf(-ps)) / ps;
            s[(i, i)] += 2.0 * h * tail;
        }
    }
    // E(u) = uᵀ S u and ⟨A v, w⟩ = wᵀ S v = h wᵀ G v
    Ok(s / h)
}

/// Eigenvalues (ascending) and matching column eigenvectors of a symmetric matrix by
/// cyclic Jacobi rotations.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    const MAX_SWEEPS: usize = 100;
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::OracleNotConverged("Jacobi sweeps exhausted".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Smallest eigenvalue of the quadratic problem (`p = q = 2`).
pub fn dense_p2_eigen(grid: &Grid, params: &Params) -> Result<OracleResult> {
    if params.p != 2.0 || params.q != 2.0 {
        return Err(Error::NotQuadratic { p: params.p, q: params.q });
    }
    let g = p2_matrix(grid, params)?;
    let (values, vectors) = symmetric_eigen(&g)?;
    let u = GridFunction::new(*grid, vectors.column(0).iter().copied().collect())?;
    Ok(OracleResult { lambda: values[0], minimizer: normalized(u, params.q), method: OracleMethod::DenseP2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientOptions {
    /// Stop when the sup-norm stationarity residual drops below `tol · max(R, 1)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GradientOptions {
    fn default() -> Self {
        GradientOptions { tol: 1e-9, max_iter: 20_000 }
    }
}

/// Start profiles shared by the direct minimizers: constant, hat, then seeded random
/// positive vectors.
fn starts(grid: &Grid, count: usize) -> Vec<GridFunction> {
    (0..count)
        .map(|k| match k {
            0 => GridFunction::constant(*grid, 1.0),
            1 => GridFunction::hat(*grid),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
                GridFunction { grid: *grid, values: (0..grid.m).map(|_| rng.gen_range(0.1..1.0)).collect() }
            }
        })
        .collect()
}

/// Minimizing sequence for the Rayleigh quotient by preconditioned gradient steps, each
/// followed by renormalization to `‖u‖_q = 1`. Returns the best result over the converged
/// ones among `restarts` starts.
pub fn projected_gradient_min(params: &Params, grid: &Grid, restarts: usize) -> Result<OracleResult> {
    projected_gradient_min_with(params, grid, restarts, GradientOptions::default())
}

pub fn projected_gradient_min_with(
    params: &Params,
    grid: &Grid,
    restarts: usize,
    opts: GradientOptions,
) -> Result<OracleResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let op = MixedOperator::new(params, grid)?;
    let mut best: Option<OracleResult> = None;
    let mut failure = None;
    for start in starts(grid, restarts) {
        match descend(&op, start, opts) {
            Ok((lambda, u)) => {
                if best.as_ref().is_none_or(|b| lambda < b.lambda) {
                    best = Some(OracleResult { lambda, minimizer: u, method: OracleMethod::ProjectedGradient });
                }
            }
            Err(e) => failure = Some(e),
        }
    }
    // a restart that fails to converge is dropped; all of them failing is an error
    best.ok_or_else(|| failure.expect("restarts >= 1"))
}

fn descend(op: &MixedOperator, start: GridFunction, opts: GradientOptions) -> Result<(f64, GridFunction)> {
    const STALL_WINDOW: usize = 200;
    let params = *op.params();
    let (p, q, h) = (params.p, params.q, op.grid().h);
    // stationarity of R on the unit sphere, in density units: g - R ψ_q(u)
    let stationarity = |u: &[f64], lambda: f64| -> Vec<f64> {
        op.grad_raw(u).iter().zip(u).map(|(gi, &ui)| gi - lambda * signed_pow(ui, q)).collect()
    };
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

    let mut u = normalized(start, q);
    let mut lambda = op.energy_raw(&u.values).total;
    let mut r = stationarity(&u.values, lambda);
    let mut res = sup(&r);
    let target = opts.tol * lambda.max(1.0);
    // Unit Newton step in the metric; the secant slope used for p < 2 underestimates the
    // curvature by the factor p - 1.
    let natural_step = if p < 2.0 { 1.0 / (p - 1.0) } else { 1.0 };
    let (mut best_res, mut last_improvement) = (res, 0);

    for it in 0..opts.max_iter {
        if res <= target {
            return Ok((lambda, u));
        }
        if it - last_improvement > STALL_WINDOW {
            break;
        }
        let direction: Vec<f64> = precondition(op, &u.values, &r).iter().map(|d| -d).collect();
        // derivative of R along the direction is p·h·Σ r_i d_i
        let slope = p * h * r.iter().zip(&direction).map(|(a, b)| a * b).sum::<f64>();
        let slack = 1e-13 * lambda;

        let mut step = natural_step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial = GridFunction {
                grid: u.grid,
                values: u.values.iter().zip(&direction).map(|(x, d)| x + step * d).collect(),
            };
            let mut trial = normalized(trial, q);
            snap_symmetric(&mut trial.values);
            let value = op.energy_raw(&trial.values).total;
            if value < lambda && value <= lambda + 1e-4 * step * slope {
                accepted = Some((trial, value));
                break;
            }
            // below the resolution of R, accept on a smaller stationarity residual
            if value <= lambda + slack {
                let r_trial = stationarity(&trial.values, value);
                if sup(&r_trial) < res {
                    accepted = Some((trial, value.min(lambda)));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, value)) = accepted else { break };
        u = trial;
        lambda = value;
        r = stationarity(&u.values, lambda);
        res = sup(&r);
        if res < 0.9 * best_res {
            best_res = res;
            last_improvement = it;
        }
    }
    if res <= 100.0 * target {
        return Ok((lambda, u));
    }
    Err(Error::OracleNotConverged(format!("projected gradient stalled at stationarity residual {res:.3e}")))
}

/// Applies the inverse of the (regularized) Jacobian of `grad` at `u`, i.e. measures the
/// gradient in the local energy metric. Falls back to the raw residual if the factorization
/// fails.
fn precondition(op: &MixedOperator, u: &[f64], r: &[f64]) -> Vec<f64> {
    let h = op.grid().h;
    let delta = 1e-8 * u.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300) / h;
    let rhs = DVector::from_column_slice(r);
    match op.grad_jacobian(u, delta).cholesky() {
        Some(chol) => chol.solve(&rhs).iter().copied().collect(),
        None => r.to_vec(),
    }
}

/// Multi-start cyclic coordinate minimization of the Rayleigh quotient on grids with at
/// most six nodes.
pub fn coordinate_search_min(params: &Params, grid: &Grid) -> Result<OracleResult> {
    const STARTS: usize = 10;
    const TOL: f64 = 1e-10;
    const MAX_SWEEPS: usize = 200_000;
    if grid.m > 6 {
        return Err(Error::TooManyNodes(grid.m));
    }
    let op = MixedOperator::new(params, grid)?;
    let q = params.q;

    let mut results = Vec::with_capacity(STARTS);
    for start in starts(grid, STARTS) {
        let mut u = start.values;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            for i in 0..grid.m {
                minimize_coordinate(&op, &mut u, i);
            }
            let gf = normalized(GridFunction { grid: *grid, values: u.clone() }, q);
            let lambda = op.energy_raw(&gf.values).total;
            if residual_with(&op, lambda, &gf)? <= TOL * lambda.max(1.0) {
                converged = true;
                u = gf.values;
                break;
            }
            u = gf.values;
        }
        if !converged {
            return Err(Error::OracleNotConverged("coordinate search sweeps exhausted".into()));
        }
        let gf = GridFunction { grid: *grid, values: u };
        let lambda = op.energy_raw(&gf.values).total;
        results.push((lambda, gf));
    }
    let lo = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let (lambda, minimizer) = results.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("starts");
    if (hi - lo) > 1e-6 * lo {
        return Err(Error::Multimodal { spread: hi - lo, best: Box::new(minimizer) });
    }
    Ok(OracleResult { lambda, minimizer, method: OracleMethod::CoordinateSearch })
}

/// `∂R/∂u_i` up to the positive factor `p h / ‖u‖_q^p`.
fn partial(op: &MixedOperator, u: &[f64], i: usize) -> f64 {
    let params = op.params();
    let (p, q, h) = (params.p, params.q, op.grid().h);
    let energy = op.energy_raw(u).total;
    let norm = crate::operators::lq_norm_raw(u, h, q);
    let g = op.grad_raw(u)[i];
    g - energy / norm.powf(p) * norm.powf(p - q) * signed_pow(u[i], q)
}

/// Moves `u[i]` to a zero of the partial derivative, bracketing from the current value in
/// the descent direction and bisecting to full precision.
fn minimize_coordinate(op: &MixedOperator, u: &mut [f64], i: usize) {
    let x0 = u[i];
    let d0 = partial(op, u, i);
    if d0 == 0.0 {
        return;
    }
    let scale = u.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-12);
    let dir = -d0.signum();
    let eval = |u: &mut [f64], x: f64| {
        u[i] = x;
        partial(op, u, i)
    };
    let mut lo = x0;
    let mut width = 1e-3 * scale;
    let mut hi = x0 + dir * width;
    let mut found = false;
    for _ in 0..80 {
        if eval(u, hi) * d0 <= 0.0 {
            found = true;
            break;
        }
        lo = hi;
        width *= 2.0;
        hi = x0 + dir * width;
    }
    if !found {
        u[i] = x0;
        return;
    }
    // invariant: partial(lo) has the sign of d0, partial(hi) does not
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if eval(u, mid) * d0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    u[i] = 0.5 * (lo + hi);
}
