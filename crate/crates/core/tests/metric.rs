mod common;

use common::{close, random_metric, random_points};
use pencil_core::metric::{
    canonical_partner, christoffel, compatibility_check, constant_curvature_residual,
    extract_canonical_f, pencil_combination, pencil_eigenvalues, riemann_components,
};
use pencil_core::{
    re, Coordinates, DiagonalMetric, Error, FiniteDifference, FrameFamily, Grid, Scalar,
    ScalarField, Univariate,
};
use std::f64::consts::PI;

fn sphere_metric(r: f64) -> DiagonalMetric {
    FrameFamily::Sphere { radius: r }.build().unwrap().to_metric()
}

fn sphere_grid() -> Grid {
    Grid::tensor_box(&[0.6, -1.0], &[2.2, 1.0], 5).unwrap()
}

/// Independent curvature oracle: the general expression
/// g^i (∂_i Γ^j_il − ∂_l Γ^j_ii + Σ Γ^j_si Γ^s_il − Σ Γ^j_sl Γ^s_ii)
/// with every Christoffel symbol and its derivative taken by finite
/// differences of the metric.
fn oracle_r(metric: &DiagonalMetric, u: &Coordinates, i: usize, j: usize, l: usize) -> Scalar {
    let n = metric.dim();
    let gamma = |v: &[Scalar], a: usize, b: usize, c: usize| -> Scalar {
        christoffel(metric, &Coordinates(v.to_vec())).unwrap().get(a, b, c)
    };
    let h = 1e-4;
    let d = |k: usize, a: usize, b: usize, c: usize| -> Scalar {
        let mut p = u.0.clone();
        let mut m = u.0.clone();
        p[k] += h;
        m[k] -= h;
        (gamma(&p, a, b, c) - gamma(&m, a, b, c)) / (2.0 * h)
    };
    let x = u.as_slice();
    let mut v = d(i, j, i, l) - d(l, j, i, i);
    for s in 0..n {
        v += gamma(x, j, s, i) * gamma(x, s, i, l) - gamma(x, j, s, l) * gamma(x, s, i, i);
    }
    metric.g[i].eval(x).unwrap() * v
}

#[test]
fn christoffel_of_constant_metric_vanishes() {
    let g = DiagonalMetric::euclidean(3);
    let c = christoffel(&g, &Coordinates::real(&[0.1, 0.2, 0.3])).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(c.get(i, j, k), re(0.0));
            }
        }
    }
}

#[test]
fn christoffel_sphere_value() {
    let g = sphere_metric(1.0);
    let c = christoffel(&g, &Coordinates::real(&[PI / 4.0, 0.3])).unwrap();
    // Γ²_{21} = cot u¹
    assert!(close(c.get(1, 1, 0), re(1.0), 1e-7));
    assert!(close(c.get(1, 0, 1), re(1.0), 1e-7));
}

#[test]
fn christoffel_exponential_entry() {
    let g = DiagonalMetric::new(vec![
        ScalarField::new(|u| u[1].exp()),
        ScalarField::constant(re(1.0)),
    ])
    .unwrap();
    for p in random_points(3, &[-1.0, -1.0], &[1.0, 1.0], 5) {
        let c = christoffel(&g, &p).unwrap();
        assert!(close(c.get(0, 0, 1), re(-0.5), 1e-8));
    }
}

#[test]
fn christoffel_distinct_indices_are_exactly_zero() {
    let g = random_metric(11, 4);
    for p in random_points(5, &[-1.0; 4], &[1.0; 4], 5) {
        let c = christoffel(&g, &p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    if i != j && j != k && i != k {
                        assert_eq!(c.get(i, j, k), re(0.0));
                    }
                }
            }
        }
    }
}

#[test]
fn christoffel_rejects_degenerate_and_mismatched() {
    let g = DiagonalMetric::constant(&[1.0, 0.0]);
    assert!(matches!(
        christoffel(&g, &Coordinates::real(&[0.0, 0.0])),
        Err(Error::DegenerateMetric { component: 1, .. })
    ));
    let g = DiagonalMetric::euclidean(2);
    assert!(matches!(
        christoffel(&g, &Coordinates::real(&[0.0, 0.0, 0.0])),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn closed_form_curvature_matches_general_expression() {
    for seed in [1u64, 2, 3] {
        let g = random_metric(seed, 3);
        for p in random_points(seed + 100, &[-1.0; 3], &[1.0; 3], 3) {
            let c = riemann_components(&g, &p).unwrap();
            for ((i, j, l), v) in c.iter() {
                let o = oracle_r(&g, &p, i, j, l);
                assert!(
                    (v - o).norm() < 1e-5 * (1.0 + o.norm()),
                    "seed {seed} ({i},{j},{l}): {v} vs {o}"
                );
            }
        }
    }
}

#[test]
fn curvature_pair_symmetries() {
    let g = random_metric(21, 3);
    for p in random_points(22, &[-1.0; 3], &[1.0; 3], 4) {
        let c = riemann_components(&g, &p).unwrap();
        let gv: Vec<Scalar> = g.g.iter().map(|f| f.eval(p.as_slice()).unwrap()).collect();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let a = c.get(i, j, j).unwrap();
                let b = c.get(j, i, i).unwrap();
                assert!((a - b).norm() < 1e-6, "sectional symmetry {i}{j}");
                for l in 0..3 {
                    if l == i || l == j {
                        continue;
                    }
                    let x = gv[l] * c.get(i, j, l).unwrap();
                    let y = gv[j] * c.get(i, l, j).unwrap();
                    assert!((x - y).norm() < 1e-6, "pair symmetry {i}{j}{l}: {x} {y}");
                }
            }
        }
        assert!(c.get(0, 0, 1).is_none());
        assert!(c.get(0, 1, 0).is_none());
    }
}

#[test]
fn sphere_curvature_components() {
    for r in [1.0, 2.0] {
        let g = sphere_metric(r);
        for p in random_points(7, &[0.3, -1.0], &[2.8, 1.0], 10) {
            let c = riemann_components(&g, &p).unwrap();
            assert!(close(c.get(0, 1, 1).unwrap(), re(-1.0 / (r * r)), 1e-6));
            assert!(close(c.get(1, 0, 0).unwrap(), re(-1.0 / (r * r)), 1e-6));
        }
    }
}

#[test]
fn hyperbolic_curvature_is_constant() {
    // contravariant g^i = (u¹ + u²)²
    let g = DiagonalMetric::new(vec![
        ScalarField::new(|u| (u[0] + u[1]) * (u[0] + u[1])),
        ScalarField::new(|u| (u[0] + u[1]) * (u[0] + u[1])),
    ])
    .unwrap();
    let pts = random_points(9, &[0.5, 0.5], &[2.0, 2.0], 10);
    let vals: Vec<Scalar> = pts
        .iter()
        .map(|p| riemann_components(&g, p).unwrap().get(0, 1, 1).unwrap())
        .collect();
    for v in &vals {
        assert!(close(*v, vals[0], 1e-6));
        assert!(close(*v, re(2.0), 1e-6));
    }
    let frame = FrameFamily::Hyperbolic.build().unwrap().to_metric();
    let grid = Grid::tensor_box(&[0.5, 0.5], &[2.0, 2.0], 5).unwrap();
    assert!(constant_curvature_residual(&frame, re(-2.0), &grid, 1e-6).unwrap().passed());
}

#[test]
fn constant_curvature_certification() {
    let grid = sphere_grid();
    for r in [1.0, 2.0] {
        let rep = constant_curvature_residual(&sphere_metric(r), re(1.0 / (r * r)), &grid, 1e-6).unwrap();
        assert!(rep.passed(), "{}", rep.summary());
    }
    let rep = constant_curvature_residual(&sphere_metric(1.0), re(0.0), &grid, 1e-6).unwrap();
    assert!(!rep.passed());
    assert!((rep.family("R^ij_ij + K").unwrap().max - 1.0).abs() < 1e-6);

    let e = DiagonalMetric::euclidean(3);
    let g3 = Grid::tensor_box(&[0.0; 3], &[1.0; 3], 5).unwrap();
    assert_eq!(constant_curvature_residual(&e, re(0.0), &g3, 1e-12).unwrap().max(), 0.0);
    let sph = FrameFamily::SphericalR3.build().unwrap().to_metric();
    let g3 = Grid::tensor_box(&[1.0, 0.6, -1.0], &[2.0, 2.2, 1.0], 5).unwrap();
    let rep = constant_curvature_residual(&sph, re(0.0), &g3, 1e-6).unwrap();
    assert!(rep.passed(), "{}", rep.summary());
}

#[test]
fn constant_curvature_reports_degenerate_point() {
    let g = DiagonalMetric::new(vec![ScalarField::new(|u| u[0]), ScalarField::constant(re(1.0))]).unwrap();
    let grid = Grid::tensor_box(&[-1.0, 0.0], &[1.0, 1.0], 3).unwrap();
    match constant_curvature_residual(&g, re(0.0), &grid, 1e-6) {
        Err(Error::DegenerateMetric { component, point }) => {
            assert_eq!(component, 0);
            assert!(point.starts_with("(0,"), "{point}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn fd_convergence_is_second_order() {
    let grid = sphere_grid();
    let res = |h: f64| {
        let g = sphere_metric(1.0).with_fd(FiniteDifference::second(h));
        constant_curvature_residual(&g, re(1.0), &grid, 1.0).unwrap().max()
    };
    let (a, b) = (res(2e-3), res(1e-3));
    assert!(a / b >= 3.0, "{a} {b}");
}

#[test]
fn pencil_combination_cases() {
    let grid = Grid::tensor_box(&[0.5, 0.5], &[1.0, 1.0], 3).unwrap();
    let e = DiagonalMetric::euclidean(2);
    let half = pencil_combination(&e, &e, re(0.5), re(0.5), &grid).unwrap();
    for p in grid.points() {
        for g in &half.g {
            assert_eq!(g.eval(p.as_slice()).unwrap(), re(1.0));
        }
    }
    let d = DiagonalMetric::constant(&[2.0, 3.0]);
    assert!(matches!(
        pencil_combination(&d, &e, re(1.0), re(-2.0), &grid),
        Err(Error::DegenerateMetric { component: 0, .. })
    ));
    // g₁ = c·g₂ on the sphere: curvature of the combination is λ₁K₁ + λ₂K₂
    let g2 = sphere_metric(1.0);
    let c = 3.0;
    let g1 = canonical_partner(&g2, &[Univariate::constant(c), Univariate::constant(c)]).unwrap();
    let sg = sphere_grid();
    for (l1, l2) in [(1.0, 0.0), (0.5, 2.0), (2.0, -1.0)] {
        let comb = pencil_combination(&g1, &g2, re(l1), re(l2), &sg).unwrap();
        let k = l1 * c + l2;
        let rep = constant_curvature_residual(&comb, re(k), &sg, 1e-6 * k.abs().max(1.0)).unwrap();
        assert!(rep.passed(), "{}", rep.summary());
    }
    // the sphere plus a flat metric in the same coordinates is not of constant curvature
    let comb = pencil_combination(&g2, &e, re(1.0), re(1.0), &sg).unwrap();
    assert!(!constant_curvature_residual(&comb, re(1.0), &sg, 1e-6).unwrap().passed());
}

#[test]
fn compatibility_cases() {
    let grid = Grid::tensor_box(&[1.0, 1.0], &[2.0, 2.0], 5).unwrap();
    let lambdas = [(re(1.0), re(1.0)), (re(2.0), re(0.5)), (re(0.3), re(1.7))];
    let g2 = random_metric(4, 2);
    let g1 = canonical_partner(&g2, &[Univariate::constant(2.5), Univariate::constant(2.5)]).unwrap();
    let rep = compatibility_check(&g1, &g2, &lambdas, &grid, 1e-6).unwrap();
    assert!(rep.passed(), "{}", rep.summary());

    let e = DiagonalMetric::euclidean(2);
    let canon = canonical_partner(&e, &[Univariate::identity(), Univariate::identity()]).unwrap();
    let rep = compatibility_check(&canon, &e, &lambdas, &grid, 1e-6).unwrap();
    assert!(rep.passed(), "{}", rep.summary());

    let swapped = DiagonalMetric::new(vec![ScalarField::new(|u| u[1]), ScalarField::new(|u| u[0])]).unwrap();
    let rep = compatibility_check(&swapped, &e, &lambdas, &grid, 1e-6).unwrap();
    assert!(!rep.passed());
    assert!(rep.families.iter().any(|f| f.name.starts_with("gamma") && !f.pass));
}

#[test]
fn compatibility_skips_degenerate_combinations() {
    let grid = Grid::tensor_box(&[-1.0, 1.0], &[1.0, 2.0], 3).unwrap();
    let e = DiagonalMetric::euclidean(2);
    let canon = canonical_partner(&e, &[Univariate::identity(), Univariate::identity()]).unwrap();
    // λ₁u¹ + λ₂ vanishes at u¹ = 0
    let rep = compatibility_check(&canon, &e, &[(re(1.0), re(0.0))], &grid, 1e-6).unwrap();
    let f = &rep.families[0];
    assert!(f.note.as_ref().unwrap().contains("3 degenerate points skipped"));
}

#[test]
fn pencil_eigenvalue_cases() {
    let e = DiagonalMetric::euclidean(2);
    let d = DiagonalMetric::constant(&[2.0, 3.0]);
    let p = Coordinates::real(&[0.0, 0.0]);
    let ev = pencil_eigenvalues(&d, &e, &p).unwrap();
    assert_eq!(ev.values, vec![re(2.0), re(3.0)]);
    assert!(ev.nonsingular);
    let ev = pencil_eigenvalues(&e, &e, &p).unwrap();
    assert_eq!(ev.values, vec![re(1.0), re(1.0)]);
    assert!(!ev.nonsingular);
    let g2 = random_metric(8, 2);
    let g1 = canonical_partner(&g2, &[Univariate::identity(), Univariate::affine(1.0, 5.0)]).unwrap();
    let ev = pencil_eigenvalues(&g1, &g2, &Coordinates::real(&[1.0, 1.0])).unwrap();
    assert!(close(ev.values[0], re(1.0), 1e-14));
    assert!(close(ev.values[1], re(6.0), 1e-14));
    assert!(ev.nonsingular);
    let degenerate = DiagonalMetric::constant(&[1.0, 0.0]);
    assert!(pencil_eigenvalues(&e, &degenerate, &p).is_err());
}

#[test]
fn canonical_extraction_cases() {
    let grid = Grid::tensor_box(&[1.0, 1.0], &[2.0, 2.0], 5).unwrap();
    let g2 = random_metric(12, 2);
    let g1 = canonical_partner(&g2, &[Univariate::identity(), Univariate::affine(1.0, 5.0)]).unwrap();
    let ex = extract_canonical_f(&g1, &g2, &grid, 1e-12).unwrap();
    assert!(ex.report.passed(), "{}", ex.report.summary());
    for (x, v) in &ex.samples[0] {
        assert!(close(*v, re(*x), 1e-13));
    }

    let g1 = DiagonalMetric::new(vec![
        ScalarField::new(|u| u[0] + 0.1 * u[1]),
        ScalarField::new(|u| u[1]),
    ])
    .unwrap();
    let e = DiagonalMetric::euclidean(2);
    let ex = extract_canonical_f(&g1, &e, &grid, 1e-6).unwrap();
    assert!(!ex.report.passed());
    assert!((ex.report.max() - 0.1).abs() < 1e-12);

    let c = DiagonalMetric::constant(&[3.0, 4.0]);
    let ex = extract_canonical_f(&c, &e, &grid, 1e-12).unwrap();
    assert_eq!(ex.report.max(), 0.0);
    assert!(ex.samples[1].iter().all(|(_, v)| *v == re(4.0)));
}
