#![allow(dead_code)]

use pq_eigen::{Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_fn(grid: Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::new(grid, (0..grid.m).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_positive(grid: Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::new(grid, (0..grid.m).map(|_| rng.gen_range(0.1..1.0)).collect()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Stiffness matrix of the `p = 2` energy assembled entry by entry: `E(u) = uᵀ S u`.
pub fn stiffness(g: Grid, s: f64) -> Vec<Vec<f64>> {
    let m = g.m;
    let h = g.h;
    let x = g.nodes();
    let mut k = vec![vec![0.0; m]; m];
    for i in 0..m {
        k[i][i] = 2.0 / h;
        if i + 1 < m {
            k[i][i + 1] = -1.0 / h;
            k[i + 1][i] = -1.0 / h;
        }
        let tail = ((x[i] - g.a).powf(-2.0 * s) + (g.b - x[i]).powf(-2.0 * s)) / (2.0 * s);
        k[i][i] += 2.0 * h * tail;
        for j in 0..m {
            if j != i {
                let kij = 2.0 * h * h * (x[i] - x[j]).abs().powf(-(1.0 + 2.0 * s));
                k[i][i] += kij;
                k[i][j] -= kij;
            }
        }
    }
    k
}

/// Sup-norm distance after scaling both to unit sup norm with a positive node sum.
pub fn shape_distance(u: &GridFunction, v: &GridFunction) -> f64 {
    let unit = |w: &GridFunction| {
        let top = w.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let sign = if w.values.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        w.scaled(sign / top)
    };
    unit(u).max_abs_diff(&unit(v)).unwrap()
}
