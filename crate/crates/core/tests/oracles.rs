use pq_eigen::oracles::{p2_matrix, symmetric_eigen};
use pq_eigen::{
    coordinate_search_min, dense_p2_eigen, inverse_iteration, lq_norm, projected_gradient_min,
    rayleigh_quotient, Error, Grid, GridFunction, OracleMethod, Params, Terms,
};

mod common;
use common::{random_positive, rel, rng, shape_distance};

const TOL: f64 = 1e-8;

#[test]
fn dense_local_only_matches_closed_form() {
    let g = Grid::new(0.0, 1.0, 80).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap().with_terms(Terms::LocalOnly);
    let res = dense_p2_eigen(&g, &pr).unwrap();
    let exact = 2.0 / (g.h * g.h) * (1.0 - (std::f64::consts::PI * g.h).cos());
    assert!(rel(res.lambda, exact) <= 1e-10, "{} vs {exact}", res.lambda);
    assert_eq!(res.method, OracleMethod::DenseP2);
    assert!((lq_norm(&res.minimizer, 2.0) - 1.0).abs() <= 1e-12);
}

#[test]
fn dense_matrix_is_exactly_symmetric() {
    let g = Grid::new(0.0, 1.0, 50).unwrap();
    let pr = Params::new(2.0, 2.0, 0.3, 1).unwrap();
    let m = p2_matrix(&g, &pr).unwrap();
    for i in 0..g.m {
        for j in 0..g.m {
            assert_eq!(m[(i, j)], m[(j, i)]);
        }
    }
}

#[test]
fn jacobi_reconstructs_the_matrix() {
    let g = Grid::new(0.0, 1.0, 25).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    let m = p2_matrix(&g, &pr).unwrap();
    let (values, vectors) = symmetric_eigen(&m).unwrap();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for k in 0..g.m {
        let v = vectors.column(k);
        let mv = &m * v;
        for i in 0..g.m {
            assert!((mv[i] - values[k] * v[i]).abs() <= 1e-11 * scale);
        }
    }
}

#[test]
fn dense_mixed_dominates_local_only() {
    let g = Grid::new(0.0, 1.0, 100).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    let mixed = dense_p2_eigen(&g, &pr).unwrap().lambda;
    let local = dense_p2_eigen(&g, &pr.with_terms(Terms::LocalOnly)).unwrap().lambda;
    assert!(mixed >= local);
}

#[test]
fn dense_rejects_nonquadratic() {
    let g = Grid::new(0.0, 1.0, 10).unwrap();
    for (p, q) in [(3.0, 2.0), (2.0, 1.5)] {
        let pr = Params::new(p, q, 0.5, 1).unwrap();
        assert!(matches!(dense_p2_eigen(&g, &pr), Err(Error::NotQuadratic { .. })));
    }
}

#[test]
fn coordinate_search_matches_dense_on_three_nodes() {
    let g = Grid::new(0.0, 1.0, 3).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    let cs = coordinate_search_min(&pr, &g).unwrap();
    let dense = dense_p2_eigen(&g, &pr).unwrap();
    assert!(rel(cs.lambda, dense.lambda) <= 1e-8);
    assert!(shape_distance(&cs.minimizer, &dense.minimizer) <= 1e-6);
}

#[test]
fn coordinate_search_matches_iteration_on_five_nodes() {
    let g = Grid::new(0.0, 1.0, 5).unwrap();
    let pr = Params::new(3.0, 2.0, 0.5, 1).unwrap();
    let cs = coordinate_search_min(&pr, &g).unwrap();
    let pair = inverse_iteration(&pr, &GridFunction::hat(g), TOL, 500).unwrap();
    assert!(rel(cs.lambda, pair.lambda) <= 1e-5, "{} vs {}", cs.lambda, pair.lambda);
    // no sign change
    let first = cs.minimizer.values[0].signum();
    assert!(cs.minimizer.values.iter().all(|v| v.signum() == first && *v != 0.0));
}

#[test]
fn coordinate_search_rejects_large_grids() {
    let g = Grid::new(0.0, 1.0, 7).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    assert!(matches!(coordinate_search_min(&pr, &g), Err(Error::TooManyNodes(7))));
}

#[test]
fn projected_gradient_matches_dense() {
    let g = Grid::new(0.0, 1.0, 60).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    let pg = projected_gradient_min(&pr, &g, 3).unwrap();
    let dense = dense_p2_eigen(&g, &pr).unwrap();
    assert!(rel(pg.lambda, dense.lambda) <= 1e-6);
    assert_eq!(pg.method, OracleMethod::ProjectedGradient);
    assert!((lq_norm(&pg.minimizer, 2.0) - 1.0).abs() <= 1e-12);
}

#[test]
fn projected_gradient_never_exceeds_its_starts() {
    let g = Grid::new(0.0, 1.0, 30).unwrap();
    let mut r = rng(61);
    for (p, q) in [(1.5, 2.0), (2.5, 1.5), (3.0, 2.5)] {
        let pr = Params::new(p, q, 0.5, 1).unwrap();
        let pg = projected_gradient_min(&pr, &g, 4).unwrap();
        let starts = [GridFunction::constant(g, 1.0), GridFunction::hat(g), random_positive(g, &mut r)];
        for s in &starts {
            assert!(pg.lambda <= rayleigh_quotient(s, &pr).unwrap());
        }
    }
}

#[test]
fn projected_gradient_matches_iteration() {
    let g = Grid::new(0.0, 1.0, 50).unwrap();
    let pr = Params::new(2.5, 1.5, 0.5, 1).unwrap();
    let pg = projected_gradient_min(&pr, &g, 3).unwrap();
    let pair = inverse_iteration(&pr, &GridFunction::hat(g), TOL, 500).unwrap();
    assert!(rel(pg.lambda, pair.lambda) <= 1e-4);
}

#[test]
fn oracle_and_iteration_estimate_the_same_infimum() {
    for m in [30, 100] {
        let g = Grid::new(0.0, 1.0, m).unwrap();
        for p in [1.5, 2.0, 3.0] {
            for q in [1.5, 2.0, 2.5] {
                let pr = Params::new(p, q, 0.5, 1).unwrap();
                let pg = projected_gradient_min(&pr, &g, 2).unwrap();
                let pair = inverse_iteration(&pr, &GridFunction::hat(g), TOL, 500).unwrap();
                assert!((pair.lambda - pg.lambda).abs() <= 10.0 * TOL, "M={m} p={p} q={q}");
                assert!(shape_distance(&pair.w, &pg.minimizer) <= 1e-4, "M={m} p={p} q={q}");
            }
        }
    }
}

#[test]
fn zero_restarts_rejected() {
    let g = Grid::new(0.0, 1.0, 10).unwrap();
    let pr = Params::new(2.0, 2.0, 0.5, 1).unwrap();
    assert!(projected_gradient_min(&pr, &g, 0).is_err());
}
