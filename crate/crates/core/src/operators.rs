//! Discrete energies and the operator pairings.
//!
//! With `D_i u = (u_{i+1} - u_i)/h` (and `u_0 = u_{M+1} = 0`), `K_ij = |x_i - x_j|^{-(1+ps)}`
//! and the exterior weight `T_i` from [`tail_weight`](crate::params::tail_weight):
//!
//! ```text
//! local(u)    = h Σ_{i=0..M} |D_i u|^p
//! nonlocal(u) = h² Σ_{i≠j} |u_i - u_j|^p K_ij + 2h Σ_i |u_i|^p T_i
//! ⟨A v, w⟩    = h Σ ψ_p(D_i v) D_i w + h² Σ_{i≠j} ψ_p(v_i - v_j)(w_i - w_j) K_ij
//!               + 2h Σ_i ψ_p(v_i) w_i T_i
//! ⟨B v, w⟩    = h Σ_i ψ_q(v_i) w_i
//! ```
//!
//! where `ψ_r(t) = |t|^{r-2} t`. The diagonal `i = j` of the double sum is skipped. The
//! energy `local + nonlocal` is what the rest of the crate calls `‖u‖_X^p`, and
//! `⟨A v, v⟩` reproduces it exactly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{tail_unchecked, Grid, GridFunction, Params};

/// `|t|^r`, exact for `r = 2`.
#[inline]
pub(crate) fn abs_pow(t: f64, r: f64) -> f64 {
    if r == 2.0 {
        t * t
    } else {
        t.abs().powf(r)
    }
}

/// `ψ_r(t) = |t|^{r-2} t`, with `ψ_r(0) = 0` for every `r > 1`.
#[inline]
pub(crate) fn signed_pow(t: f64, r: f64) -> f64 {
    if r == 2.0 {
        t
    } else if t == 0.0 {
        0.0
    } else {
        t.abs().powf(r - 1.0).copysign(t)
    }
}

/// Curvature used for `ψ_r` in the Newton matrix, with `δ > 0` keeping it finite and
/// nonzero at `t = 0`.
///
/// For `r ≥ 2` this is the derivative `(r-1)(t² + δ²)^{(r-2)/2}`. For `r < 2` it is the
/// secant slope `ψ_r(t)/t = (t² + δ²)^{(r-2)/2}`, the curvature of the tightest quadratic
/// majorizer of `|t|^r / r` at `t`; the exact derivative overshoots zero crossings.
#[inline]
fn signed_pow_slope(t: f64, r: f64, delta: f64) -> f64 {
    if r == 2.0 {
        1.0
    } else if r > 2.0 {
        (r - 1.0) * (t * t + delta * delta).powf(0.5 * (r - 2.0))
    } else {
        (t * t + delta * delta).powf(0.5 * (r - 2.0))
    }
}

/// Split of `‖u‖_X^p` into its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub local: f64,
    pub nonlocal: f64,
    pub total: f64,
}

/// Functional `φ ↦ h Σ_i coefficients_i φ_i` on grid functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVector {
    pub grid: Grid,
    pub coefficients: Vec<f64>,
}

impl DualVector {
    pub fn new(grid: Grid, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != grid.m {
            return Err(Error::LengthMismatch { expected: grid.m, got: coefficients.len() });
        }
        if let Some(i) = coefficients.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(DualVector { grid, coefficients })
    }

    pub fn zeros(grid: Grid) -> Self {
        DualVector { grid, coefficients: vec![0.0; grid.m] }
    }

    pub fn apply(&self, phi: &GridFunction) -> Result<f64> {
        if phi.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.h * dot(&self.coefficients, &phi.values))
    }

    pub fn scaled(&self, t: f64) -> Self {
        DualVector { grid: self.grid, coefficients: self.coefficients.iter().map(|c| t * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// The functional `B(w)`, i.e. coefficients `ψ_q(w_i)`.
    pub fn from_b(w: &GridFunction, q: f64) -> Self {
        DualVector { grid: w.grid, coefficients: w.values.iter().map(|&v| signed_pow(v, q)).collect() }
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The mixed operator on one grid, with the kernel and tail weights tabulated.
///
/// All reductions run sequentially in a fixed order, so every quantity is bit-reproducible.
#[derive(Debug, Clone)]
pub struct MixedOperator {
    params: Params,
    grid: Grid,
    // kernel[d] = (d h)^{-(1+ps)}, kernel[0] unused
    kernel: Vec<f64>,
    tail: Vec<f64>,
}

impl MixedOperator {
    pub fn new(params: &Params, grid: &Grid) -> Result<Self> {
        params.require_1d()?;
        let order = params.kernel_order();
        let ps = params.p * params.s;
        let mut kernel = vec![0.0; grid.m];
        for (d, k) in kernel.iter_mut().enumerate().skip(1) {
            *k = (d as f64 * grid.h).powf(-order);
        }
        let tail = (0..grid.m).map(|i| tail_unchecked(grid.node(i), grid.a, grid.b, ps)).collect();
        Ok(MixedOperator { params: *params, grid: *grid, kernel, tail })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Tabulated `T(x_i)`.
    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    /// `K` for two nodes `d` cells apart (`d ≥ 1`).
    pub fn kernel(&self, d: usize) -> f64 {
        self.kernel[d]
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        if u.values.len() != self.grid.m {
            return Err(Error::LengthMismatch { expected: self.grid.m, got: u.values.len() });
        }
        Ok(())
    }

    pub fn local_energy(&self, u: &GridFunction) -> Result<f64> {
        self.check(u)?;
        Ok(self.local_energy_raw(&u.values))
    }

    pub fn nonlocal_energy(&self, u: &GridFunction) -> Result<f64> {
        self.check(u)?;
        Ok(self.nonlocal_energy_raw(&u.values))
    }

    /// Energy with both parts, respecting [`Terms`](crate::params::Terms).
    pub fn energy(&self, u: &GridFunction) -> Result<EnergyBreakdown> {
        self.check(u)?;
        Ok(self.energy_raw(&u.values))
    }

    pub(crate) fn energy_raw(&self, u: &[f64]) -> EnergyBreakdown {
        let terms = self.params.terms;
        let local = if terms.local() { self.local_energy_raw(u) } else { 0.0 };
        let nonlocal = if terms.nonlocal() { self.nonlocal_energy_raw(u) } else { 0.0 };
        EnergyBreakdown { local, nonlocal, total: local + nonlocal }
    }

    pub(crate) fn local_energy_raw(&self, u: &[f64]) -> f64 {
        let (h, p) = (self.grid.h, self.params.p);
        let m = u.len();
        let mut sum = 0.0;
        let mut prev = 0.0;
        for i in 0..=m {
            let next = if i < m { u[i] } else { 0.0 };
            sum += abs_pow((next - prev) / h, p);
            prev = next;
        }
        h * sum
    }

    pub(crate) fn nonlocal_energy_raw(&self, u: &[f64]) -> f64 {
        let (h, p) = (self.grid.h, self.params.p);
        let m = u.len();
        let mut inner = 0.0;
        for i in 0..m {
            let mut row = 0.0;
            for j in (i + 1)..m {
                row += abs_pow(u[i] - u[j], p) * self.kernel[j - i];
            }
            inner += row;
        }
        let mut tail = 0.0;
        for i in 0..m {
            tail += abs_pow(u[i], p) * self.tail[i];
        }
        2.0 * h * h * inner + 2.0 * h * tail
    }

    /// `⟨A v, w⟩`.
    pub fn pair_a(&self, v: &GridFunction, w: &GridFunction) -> Result<f64> {
        self.check(v)?;
        self.check(w)?;
        let (h, p) = (self.grid.h, self.params.p);
        let (v, w) = (&v.values, &w.values);
        let m = v.len();
        let terms = self.params.terms;
        let mut total = 0.0;
        if terms.local() {
            let mut sum = 0.0;
            for i in 0..=m {
                let dv = (at(v, i) - at_prev(v, i)) / h;
                let dw = (at(w, i) - at_prev(w, i)) / h;
                sum += signed_pow(dv, p) * dw;
            }
            total += h * sum;
        }
        if terms.nonlocal() {
            let mut inner = 0.0;
            for i in 0..m {
                let mut row = 0.0;
                for j in (i + 1)..m {
                    row += signed_pow(v[i] - v[j], p) * (w[i] - w[j]) * self.kernel[j - i];
                }
                inner += row;
            }
            let mut tail = 0.0;
            for i in 0..m {
                tail += signed_pow(v[i], p) * w[i] * self.tail[i];
            }
            total += 2.0 * h * h * inner + 2.0 * h * tail;
        }
        Ok(total)
    }

    /// Density coefficients `g` with `h g_i = ⟨A v, e_i⟩`.
    pub fn grad(&self, v: &GridFunction) -> Result<DualVector> {
        self.check(v)?;
        Ok(DualVector { grid: self.grid, coefficients: self.grad_raw(&v.values) })
    }

    pub(crate) fn grad_raw(&self, v: &[f64]) -> Vec<f64> {
        let (h, p) = (self.grid.h, self.params.p);
        let m = v.len();
        let terms = self.params.terms;
        let mut g = vec![0.0; m];
        if terms.local() {
            // flux[i] = ψ(D_i v), i = 0..=m
            let flux: Vec<f64> =
                (0..=m).map(|i| signed_pow((at(v, i) - at_prev(v, i)) / h, p)).collect();
            for j in 0..m {
                g[j] += (flux[j] - flux[j + 1]) / h;
            }
        }
        if terms.nonlocal() {
            for j in 0..m {
                let mut row = 0.0;
                for i in 0..m {
                    if i != j {
                        row += signed_pow(v[j] - v[i], p) * self.kernel[i.abs_diff(j)];
                    }
                }
                g[j] += 2.0 * h * row + 2.0 * signed_pow(v[j], p) * self.tail[j];
            }
        }
        g
    }

    /// Jacobian of [`grad`](Self::grad) with `ψ_p'` regularized by `delta` (and replaced by
    /// the secant slope when `p < 2`).
    ///
    /// Symmetric positive definite for every `v` when `delta > 0`.
    pub(crate) fn grad_jacobian(&self, v: &[f64], delta: f64) -> DMatrix<f64> {
        let (h, p) = (self.grid.h, self.params.p);
        let m = v.len();
        let terms = self.params.terms;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        if terms.local() {
            let h2 = h * h;
            for i in 0..=m {
                let d = (at(v, i) - at_prev(v, i)) / h;
                let c = signed_pow_slope(d, p, delta) / h2;
                // D_i couples nodes i-1 and i (zero-based); endpoints drop out
                if i >= 1 {
                    jac[(i - 1, i - 1)] += c;
                }
                if i < m {
                    jac[(i, i)] += c;
                }
                if i >= 1 && i < m {
                    jac[(i - 1, i)] -= c;
                    jac[(i, i - 1)] -= c;
                }
            }
        }
        if terms.nonlocal() {
            for j in 0..m {
                for i in (j + 1)..m {
                    let c = 2.0 * h * signed_pow_slope(v[j] - v[i], p, delta) * self.kernel[i - j];
                    jac[(j, j)] += c;
                    jac[(i, i)] += c;
                    jac[(i, j)] -= c;
                    jac[(j, i)] -= c;
                }
                jac[(j, j)] += 2.0 * signed_pow_slope(v[j], p, delta) * self.tail[j];
            }
        }
        jac
    }
}

#[inline]
fn at(v: &[f64], i: usize) -> f64 {
    if i < v.len() {
        v[i]
    } else {
        0.0
    }
}

#[inline]
fn at_prev(v: &[f64], i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        v[i - 1]
    }
}

/// Discrete `∫_Ω |∇u|^p`. Ignores [`Terms`](crate::params::Terms).
pub fn local_energy(u: &GridFunction, params: &Params) -> Result<f64> {
    MixedOperator::new(params, &u.grid)?.local_energy(u)
}

/// Discrete Gagliardo seminorm `[u]^p` including the exterior tail. Ignores
/// [`Terms`](crate::params::Terms).
pub fn nonlocal_energy(u: &GridFunction, params: &Params) -> Result<f64> {
    MixedOperator::new(params, &u.grid)?.nonlocal_energy(u)
}

/// `‖u‖_X^p = local + nonlocal`, restricted to the active [`Terms`](crate::params::Terms).
pub fn x_energy(u: &GridFunction, params: &Params) -> Result<EnergyBreakdown> {
    MixedOperator::new(params, &u.grid)?.energy(u)
}

pub fn pair_a(v: &GridFunction, w: &GridFunction, params: &Params) -> Result<f64> {
    v.same_grid(w)?;
    MixedOperator::new(params, &v.grid)?.pair_a(v, w)
}

pub fn grad_a(v: &GridFunction, params: &Params) -> Result<DualVector> {
    MixedOperator::new(params, &v.grid)?.grad(v)
}

/// `⟨B v, w⟩ = h Σ |v_i|^{q-2} v_i w_i`.
pub fn pair_b(v: &GridFunction, w: &GridFunction, params: &Params) -> Result<f64> {
    v.same_grid(w)?;
    let q = params.q;
    Ok(v.grid.h * v.values.iter().zip(&w.values).map(|(&a, &b)| signed_pow(a, q) * b).sum::<f64>())
}

/// Midpoint-rule `L^q` norm `(h Σ |u_i|^q)^{1/q}`.
pub fn lq_norm(u: &GridFunction, q: f64) -> f64 {
    lq_norm_raw(&u.values, u.grid.h, q)
}

pub(crate) fn lq_norm_raw(u: &[f64], h: f64, q: f64) -> f64 {
    let sum: f64 = u.iter().map(|&v| abs_pow(v, q)).sum();
    (h * sum).powf(1.0 / q)
}
