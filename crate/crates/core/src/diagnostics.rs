//! Boundedness, positivity and inequality reports for computed eigenfunctions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{lq_norm, signed_pow, MixedOperator};
use crate::params::{Grid, GridFunction, Params};

pub fn linf_norm(u: &GridFunction) -> f64 {
    u.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Superlevel sets `L(k) = {u > k}` over a ladder of thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub thresholds: Vec<f64>,
    /// `|L(k)| = h · #{i : u_i > k}`.
    pub measures: Vec<f64>,
    /// `∫_{L(k)} (u - k) = h Σ_{u_i > k} (u_i - k)`.
    pub excess_integrals: Vec<f64>,
    /// Fitted `β` in `excess(k) ≤ C k |L(k)|^{1+β}`; `None` with fewer than two usable
    /// thresholds.
    pub decay_exponent: Option<f64>,
    /// Smallest `C` making the bound hold at every usable threshold for the fitted `β`.
    pub decay_constant: Option<f64>,
    pub fit_points: usize,
}

/// 32 geometrically spaced thresholds from `0.01 ‖u‖_∞` to `1.05 ‖u‖_∞`.
pub fn default_thresholds(u: &GridFunction) -> Vec<f64> {
    let top = linf_norm(u);
    if top == 0.0 {
        return vec![0.0];
    }
    let (lo, hi) = (0.01 * top, 1.05 * top);
    let ratio = (hi / lo).powf(1.0 / 31.0);
    (0..32).map(|i| lo * ratio.powi(i)).collect()
}

pub fn level_set_report(u: &GridFunction, thresholds: &[f64]) -> Result<LevelSetReport> {
    if thresholds.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(Error::InvalidArgument("thresholds must be finite and nonnegative".into()));
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("thresholds must be sorted ascending".into()));
    }
    let h = u.grid.h;
    let mut measures = Vec::with_capacity(thresholds.len());
    let mut excess = Vec::with_capacity(thresholds.len());
    for &k in thresholds {
        let (count, sum) = u
            .values
            .iter()
            .filter(|&&v| v > k)
            .fold((0usize, 0.0), |(c, s), &v| (c + 1, s + (v - k)));
        measures.push(h * count as f64);
        excess.push(h * sum);
    }

    // log(excess / k) = log C + (1 + β) log |L(k)|
    let points: Vec<(f64, f64, f64, f64)> = thresholds
        .iter()
        .zip(&measures)
        .zip(&excess)
        .filter(|((k, m), e)| **k > 0.0 && **m > 0.0 && **e > 0.0)
        .map(|((k, m), e)| (m.ln(), (e / k).ln(), *k, *m))
        .collect();
    let (decay_exponent, decay_constant) = if points.len() >= 2 {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let slope = sxy / sxx;
            let constant = points
                .iter()
                .zip(thresholds.iter().zip(&excess).filter(|(k, _)| **k > 0.0))
                .map(|(pt, _)| (pt.1 - slope * pt.0).exp())
                .fold(0.0, f64::max);
            (Some(slope - 1.0), Some(constant))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };

    Ok(LevelSetReport {
        thresholds: thresholds.to_vec(),
        measures,
        excess_integrals: excess,
        decay_exponent,
        decay_constant,
        fit_points: points.len(),
    })
}

/// Minimum of `u` over the nodes lying in `[lo, hi]`, which must sit strictly inside the
/// domain.
pub fn positivity_check(u: &GridFunction, lo: f64, hi: f64) -> Result<f64> {
    let g = &u.grid;
    if !(lo > g.a && hi < g.b && lo <= hi) {
        return Err(Error::NotCompactlyContained { lo, hi, a: g.a, b: g.b });
    }
    (0..g.m)
        .filter(|&i| (lo..=hi).contains(&g.node(i)))
        .map(|i| u.values[i])
        .reduce(f64::min)
        .ok_or_else(|| Error::InvalidArgument(format!("no grid nodes in [{lo}, {hi}]")))
}

/// Central half `[a + L/4, b - L/4]` of the domain.
pub fn central_half(grid: &Grid) -> (f64, f64) {
    let quarter = 0.25 * grid.length();
    (grid.a + quarter, grid.b - quarter)
}

/// Empirical constants of the seminorm domination, the embedding and the algebraic
/// monotonicity inequality over a seeded random corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub seed: u64,
    pub corpus_size: usize,
    /// Corpus members dropped because their energy vanished.
    pub excluded: usize,
    /// `max nonlocal(u) / local(u)`.
    pub seminorm_domination_max: f64,
    /// `max ‖u‖_r / local(u)^{1/p}` with `r = q`.
    pub embedding_max: f64,
    pub embedding_exponent: f64,
    /// `min (ψ_p(a) - ψ_p(b))(a - b) / ((|a| + |b|)^{p-2} |a - b|²)` over random pairs.
    pub algebraic_min: f64,
}

// Sine modes per corpus member; coefficients do not depend on the grid, so the same
// continuous functions are sampled on every mesh.
const MODES: usize = 6;

pub fn inequality_report(
    corpus_size: usize,
    seed: u64,
    params: &Params,
    grid: &Grid,
) -> Result<InequalityReport> {
    if corpus_size < 100 {
        return Err(Error::InvalidArgument(format!("corpus size must be at least 100, got {corpus_size}")));
    }
    let op = MixedOperator::new(params, grid)?;
    let p = params.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut excluded = 0;
    let mut domination: f64 = 0.0;
    let mut embedding: f64 = 0.0;
    for _ in 0..corpus_size {
        let coeffs: Vec<f64> = (1..=MODES).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
        let u = GridFunction::from_fn(*grid, |x| {
            let t = std::f64::consts::PI * (x - grid.a) / grid.length();
            coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * t).sin()).sum()
        });
        let local = op.local_energy_raw(&u.values);
        if local == 0.0 || u.is_zero() {
            excluded += 1;
            continue;
        }
        domination = domination.max(op.nonlocal_energy_raw(&u.values) / local);
        embedding = embedding.max(lq_norm(&u, params.q) / local.powf(1.0 / p));
    }

    let mut algebraic = f64::INFINITY;
    for _ in 0..corpus_size {
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        if a == b {
            continue;
        }
        let lhs = (signed_pow(a, p) - signed_pow(b, p)) * (a - b);
        let rhs = (a.abs() + b.abs()).powf(p - 2.0) * (a - b) * (a - b);
        algebraic = algebraic.min(lhs / rhs);
    }

    Ok(InequalityReport {
        seed,
        corpus_size,
        excluded,
        seminorm_domination_max: domination,
        embedding_max: embedding,
        embedding_exponent: params.q,
        algebraic_min: algebraic,
    })
}
