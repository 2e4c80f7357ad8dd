use pq_eigen::diagnostics::{central_half, default_thresholds};
use pq_eigen::{
    inequality_report, inverse_iteration, level_set_report, linf_norm, positivity_check, Grid,
    GridFunction, Params,
};
use proptest::prelude::*;

mod common;
use common::rel;

fn eigenfunction(params: &Params, m: usize) -> GridFunction {
    let g = Grid::new(0.0, 1.0, m).unwrap();
    inverse_iteration(params, &GridFunction::constant(g, 1.0), 1e-8, 500).unwrap().w
}

#[test]
fn constant_function_level_sets() {
    let g = Grid::new(0.0, 2.0, 9).unwrap();
    let c = 1.5;
    let u = GridFunction::constant(g, c);
    let ks = [0.0, 0.5, 1.0, 1.5, 2.0];
    let rep = level_set_report(&u, &ks).unwrap();
    for (i, &k) in ks.iter().enumerate() {
        if k >= c {
            assert_eq!(rep.measures[i], 0.0);
            assert_eq!(rep.excess_integrals[i], 0.0);
        } else {
            assert!((rep.measures[i] - g.h * 9.0).abs() <= 1e-15);
            assert!((rep.excess_integrals[i] - g.h * 9.0 * (c - k)).abs() <= 1e-14);
        }
    }
}

#[test]
fn eigenfunction_is_bounded_with_superlinear_level_set_decay() {
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    let w = eigenfunction(&pr, 200);
    let ks = default_thresholds(&w);
    let rep = level_set_report(&w, &ks).unwrap();
    let top = linf_norm(&w);
    for (k, m) in ks.iter().zip(&rep.measures) {
        if *k >= top {
            assert_eq!(*m, 0.0);
        }
    }
    let beta = rep.decay_exponent.unwrap();
    assert!(beta > 0.0, "β = {beta}");
    let c = rep.decay_constant.unwrap();
    for ((k, m), e) in ks.iter().zip(&rep.measures).zip(&rep.excess_integrals) {
        if *m > 0.0 {
            assert!(*e <= c * k * m.powf(1.0 + beta) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn sup_norm_and_interior_minimum_are_stable_under_refinement() {
    for (p, q) in [(2.0, 2.0), (1.5, 2.5), (3.0, 1.5)] {
        let pr = Params::new(p, q, 0.5, 1).unwrap();
        let coarse = eigenfunction(&pr, 100);
        let fine = eigenfunction(&pr, 200);
        assert!(rel(linf_norm(&coarse), linf_norm(&fine)) <= 0.05);
        let (lo, hi) = central_half(&coarse.grid);
        let a = positivity_check(&coarse, lo, hi).unwrap();
        let b = positivity_check(&fine, lo, hi).unwrap();
        assert!(a > 0.0 && b > 0.0);
        assert!(rel(a, b) <= 0.05, "p={p} q={q}: {a} vs {b}");
    }
}

#[test]
fn inequality_report_is_deterministic() {
    let pr = Params::new(2.5, 2.0, 0.4, 1).unwrap();
    let g = Grid::new(0.0, 1.0, 40).unwrap();
    let a = inequality_report(200, 42, &pr, &g).unwrap();
    let b = inequality_report(200, 42, &pr, &g).unwrap();
    assert_eq!(a, b);
    let c = inequality_report(200, 43, &pr, &g).unwrap();
    assert_ne!(a, c);
    assert!(a.seminorm_domination_max.is_finite() && a.embedding_max.is_finite());
    assert!(a.algebraic_min >= 0.0);
}

#[test]
fn algebraic_ratio_is_one_for_quadratic_power() {
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    let g = Grid::new(0.0, 1.0, 20).unwrap();
    let rep = inequality_report(1000, 7, &pr, &g).unwrap();
    assert!((rep.algebraic_min - 1.0).abs() <= 1e-12);
    assert_eq!(rep.excluded, 0);
}

#[test]
fn inequality_constants_drift_little_under_refinement() {
    for p in [1.5, 2.0, 3.0] {
        let pr = Params::new(p, 2.0, 0.5, 1).unwrap();
        let reports: Vec<_> = [25, 50, 100, 200]
            .iter()
            .map(|&m| inequality_report(200, 11, &pr, &Grid::new(0.0, 1.0, m).unwrap()).unwrap())
            .collect();
        let (coarse, fine) = (&reports[2], &reports[3]);
        assert!(rel(coarse.seminorm_domination_max, fine.seminorm_domination_max) <= 0.10, "p={p}");
        assert!(rel(coarse.embedding_max, fine.embedding_max) <= 0.10, "p={p}");
    }
}

proptest! {
    #[test]
    fn level_sets_shrink(values in prop::collection::vec(-5.0..5.0f64, 3..40), mut ks in prop::collection::vec(0.0..6.0f64, 1..20)) {
        ks.sort_by(f64::total_cmp);
        let g = Grid::new(0.0, 1.0, values.len()).unwrap();
        let u = GridFunction::new(g, values).unwrap();
        let rep = level_set_report(&u, &ks).unwrap();
        prop_assert!(rep.measures.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(rep.excess_integrals.windows(2).all(|w| w[1] <= w[0]));
        let top = linf_norm(&u);
        for (k, m) in ks.iter().zip(&rep.measures) {
            if *k >= top {
                prop_assert_eq!(*m, 0.0);
            }
        }
    }

    #[test]
    fn linf_is_absolutely_homogeneous(values in prop::collection::vec(-5.0..5.0f64, 2..30), t in -10.0..10.0f64) {
        let g = Grid::new(0.0, 1.0, values.len()).unwrap();
        let u = GridFunction::new(g, values).unwrap();
        prop_assert!((linf_norm(&u.scaled(t)) - t.abs() * linf_norm(&u)).abs() <= 1e-15 * linf_norm(&u) * t.abs().max(1.0));
    }
}
