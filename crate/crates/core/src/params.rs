//! Exponents, the interval mesh and grid functions.
//!
//! A [`GridFunction`] stores values at the `M` interior nodes of a [`Grid`] only. It is
//! understood to vanish at the endpoints and everywhere outside `(a, b)`, which is what
//! makes the nonlocal energy see the exterior through [`tail_weight`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which parts of the mixed operator are active.
///
/// The problem itself always uses [`Terms::Mixed`]; the other two switch one half of the
/// energy off so that closed-form and lower-bound comparisons become available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terms {
    #[default]
    Mixed,
    LocalOnly,
    NonlocalOnly,
}

impl Terms {
    pub fn local(self) -> bool {
        !matches!(self, Terms::NonlocalOnly)
    }

    pub fn nonlocal(self) -> bool {
        !matches!(self, Terms::LocalOnly)
    }
}

/// Admissible exponents `(p, q, s)` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub dim: u32,
    /// Critical Sobolev exponent; `None` stands for `+∞` (the case `p ≥ N`).
    pub p_star: Option<f64>,
    #[serde(default)]
    pub terms: Terms,
}

/// Critical exponent `p* = Np/(N-p)` for `p < N`, `+∞` otherwise.
pub fn critical_exponent(p: f64, dim: u32) -> Option<f64> {
    let n = dim as f64;
    (p < n).then(|| n * p / (n - p))
}

impl Params {
    /// Validates `1 < p < ∞`, `0 < s < 1`, `1 < q < p*` and `N ≥ 1`.
    pub fn new(p: f64, q: f64, s: f64, dim: u32) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q), ("s", s)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if dim == 0 {
            return Err(Error::InvalidParams("dimension N must be at least 1".into()));
        }
        if p <= 1.0 {
            return Err(Error::InvalidParams(format!("p > 1 is required, got p = {p}")));
        }
        if s <= 0.0 || s >= 1.0 {
            return Err(Error::InvalidParams(format!("0 < s < 1 is required, got s = {s}")));
        }
        if q <= 1.0 {
            return Err(Error::InvalidParams(format!("q > 1 is required, got q = {q}")));
        }
        let p_star = critical_exponent(p, dim);
        if let Some(ps) = p_star {
            if q >= ps {
                return Err(Error::InvalidParams(format!(
                    "q < p* is required, got q = {q} >= p* = {ps}"
                )));
            }
        }
        Ok(Params { p, q, s, dim, p_star, terms: Terms::Mixed })
    }

    pub fn with_terms(mut self, terms: Terms) -> Self {
        self.terms = terms;
        self
    }

    /// `p*` as a plain float, `f64::INFINITY` when unbounded.
    pub fn p_star_value(&self) -> f64 {
        self.p_star.unwrap_or(f64::INFINITY)
    }

    /// Order `N + ps` of the kernel singularity `|x - y|^{-(N+ps)}`.
    pub fn kernel_order(&self) -> f64 {
        self.dim as f64 + self.p * self.s
    }

    pub(crate) fn require_1d(&self) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::InvalidParams(format!(
                "only N = 1 is implemented, got N = {}",
                self.dim
            )));
        }
        Ok(())
    }
}

/// Uniform mesh of `(a, b)` with `m` interior nodes `x_i = a + i h`, `i = 1..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("endpoints must be finite, got ({a}, {b})")));
        }
        if a >= b {
            return Err(Error::InvalidGrid(format!("a < b is required, got a = {a}, b = {b}")));
        }
        if m < 2 {
            return Err(Error::InvalidGrid(format!("at least 2 interior nodes required, got {m}")));
        }
        Ok(Grid { a, b, m, h: (b - a) / (m as f64 + 1.0) })
    }

    /// Coordinate of the interior node with zero-based index `i`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.a + (i as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    // Skips the m >= 2 check for hand-computable single-node examples.
    #[cfg(test)]
    pub(crate) fn unchecked(a: f64, b: f64, m: usize) -> Self {
        Grid { a, b, m, h: (b - a) / (m as f64 + 1.0) }
    }
}

/// `T(x) = ∫_{ℝ∖(a,b)} |x - y|^{-(1+ps)} dy = ((x-a)^{-ps} + (b-x)^{-ps}) / (ps)`.
pub fn tail_weight(x: f64, grid: &Grid, params: &Params) -> Result<f64> {
    params.require_1d()?;
    if !(x > grid.a && x < grid.b) {
        return Err(Error::OutsideDomain { x, a: grid.a, b: grid.b });
    }
    Ok(tail_unchecked(x, grid.a, grid.b, params.p * params.s))
}

#[inline]
pub(crate) fn tail_unchecked(x: f64, a: f64, b: f64, ps: f64) -> f64 {
    ((x - a).powf(-ps) + (b - x).powf(-ps)) / ps
}

/// Values at the interior nodes of a grid; zero at the endpoints and outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::LengthMismatch { expected: grid.m, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.m] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction { grid, values: vec![c; grid.m] }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { grid, values: grid.nodes().into_iter().map(f).collect() }
    }

    /// Piecewise linear hat peaking at the midpoint.
    pub fn hat(grid: Grid) -> Self {
        let (mid, half) = (grid.midpoint(), 0.5 * grid.length());
        Self::from_fn(grid, |x| 1.0 - (x - mid).abs() / half)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| t * v).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `self + t * other`; the grids must match.
    pub fn axpy(&self, t: f64, other: &GridFunction) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + t * y).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    }

    pub(crate) fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.values.len() != other.values.len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Unit vector `e_i` on `grid`.
    pub fn basis(grid: Grid, i: usize) -> Self {
        let mut values = vec![0.0; grid.m];
        values[i] = 1.0;
        GridFunction { grid, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_star_rules() {
        let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
        assert_eq!(pr.p_star, None);
        assert!(pr.p_star_value().is_infinite());

        let err = Params::new(2.0, 7.0, 0.5, 3).unwrap_err();
        assert!(err.to_string().contains("p* = 6"), "{err}");
        assert!(Params::new(2.0, 5.9, 0.5, 3).is_ok());

        let err = Params::new(1.0, 2.0, 0.5, 1).unwrap_err();
        assert!(err.to_string().contains("p > 1"), "{err}");
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(Params::new(2.0, 1.0, 0.5, 1).is_err());
        assert!(Params::new(2.0, 2.0, 0.0, 1).is_err());
        assert!(Params::new(2.0, 2.0, 1.0, 1).is_err());
        assert!(Params::new(f64::NAN, 2.0, 0.5, 1).is_err());
        assert!(Params::new(2.0, f64::INFINITY, 0.5, 1).is_err());
        assert!(Params::new(2.0, 2.0, 0.5, 0).is_err());
        // q is unbounded in one dimension
        assert!(Params::new(1.5, 1e6, 0.5, 1).is_ok());
    }

    #[test]
    fn grid_nodes() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        assert_eq!(g.h, 0.25);
        assert_eq!(g.nodes(), vec![0.25, 0.5, 0.75]);

        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 1.0, 5).is_err());

        let g = Grid::new(-1.0, 1.0, 7).unwrap();
        assert_eq!(g.h, 0.25);
        let x = g.nodes();
        for i in 0..7 {
            assert_eq!(x[i], -x[6 - i]);
        }
        assert_eq!(x[3], 0.0);
    }

    #[test]
    fn tail_weight_midpoint_and_domain() {
        let g = Grid::new(0.0, 1.0, 9).unwrap();
        let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
        assert_eq!(tail_weight(0.5, &g, &pr).unwrap(), 4.0);
        assert!(tail_weight(0.0, &g, &pr).is_err());
        assert!(tail_weight(1.0, &g, &pr).is_err());
        assert!(tail_weight(1.5, &g, &pr).is_err());
    }

    #[test]
    fn grid_function_checks() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        assert!(GridFunction::new(g, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(g, vec![1.0, f64::NAN, 0.0]).is_err());
        let u = GridFunction::new(g, vec![1.0, 2.0, 3.0]).unwrap();
        let other = GridFunction::zeros(Grid::new(0.0, 2.0, 3).unwrap());
        assert!(matches!(u.sub(&other), Err(Error::GridMismatch)));
    }
}
