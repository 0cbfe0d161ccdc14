use pencil_core::quadrature::gauss_chebyshev;
use pencil_core::special::{
    classify_pair, darboux_mean_value, darboux_mean_value_jet, darboux_separated, general_solution_f2,
    general_solution_f3, mean_value_solution, residual_darboux, residual_f1, residual_f2, residual_f3, to_tr,
    to_u, Bivariate, ReductionType, SeparatedBranch,
};
use pencil_core::{re, Error, Mode, Scalar, Univariate};
use proptest::prelude::*;

fn box_samples(t: (f64, f64), r: (f64, f64), n: usize) -> Vec<(Scalar, Scalar)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let x = t.0 + (t.1 - t.0) * a as f64 / (n - 1) as f64;
            let y = r.0 + (r.1 - r.0) * b as f64 / (n - 1) as f64;
            out.push((re(x), re(y)));
        }
    }
    out
}

#[test]
fn classification_of_pairs() {
    let xs: Vec<Scalar> = (0..8).map(|k| re(0.5 + 0.2 * k as f64)).collect();
    let id = Univariate::identity();
    let c1 = Univariate::constant(1.0);
    let c2 = Univariate::constant(2.0);
    assert_eq!(classify_pair(&id, &Univariate::exp(1.0, 0.5), &xs).unwrap(), ReductionType::F1);
    assert_eq!(classify_pair(&c1, &id, &xs).unwrap(), ReductionType::F2);
    assert_eq!(classify_pair(&id, &c2, &xs).unwrap(), ReductionType::F2);
    assert_eq!(classify_pair(&c1, &c2, &xs).unwrap(), ReductionType::F3);
    assert!(matches!(classify_pair(&c1, &c1, &xs), Err(Error::InvalidConstants(_))));
    // A polynomial that happens to be constant.
    let flat = Univariate::polynomial(&[3.0, 0.0]);
    assert_eq!(classify_pair(&flat, &id, &xs).unwrap(), ReductionType::F2);
    // Not monotone on the interval.
    let bump = Univariate::polynomial(&[0.0, -2.0, 1.0]);
    assert!(classify_pair(&bump, &id, &xs).is_err());
}

#[test]
fn general_solutions_satisfy_their_equations() {
    let g = Univariate::sin(1.0, 1.3, 0.2);
    let h = Univariate::exp(0.7, -0.4);
    let samples = box_samples((-1.0, 2.0), (0.5, 3.0), 6);
    let f2 = general_solution_f2(g.clone(), h.clone(), Mode::Real);
    assert!(residual_f2(&f2, &samples, 1e-12).unwrap().passed());
    let f3 = general_solution_f3(g.clone(), h.clone());
    assert!(residual_f3(&f3, &samples, 1e-12).unwrap().passed());
    // The same functions checked through difference jets.
    assert!(residual_f2(&f2.numerical(), &samples, 1e-7).unwrap().passed());
    assert!(residual_f3(&f3.numerical(), &samples, 1e-7).unwrap().passed());
    // A generic function fails all three.
    let bad = Bivariate::new(|a, b| (a * b).sin() + a * a * b);
    let off: Vec<(Scalar, Scalar)> = samples.iter().map(|&(a, b)| (a, b + 3.5)).collect();
    assert!(!residual_f1(&bad, &off, 1e-6).unwrap().passed());
    assert!(!residual_f2(&bad, &samples, 1e-6).unwrap().passed());
    assert!(!residual_f3(&bad, &samples, 1e-6).unwrap().passed());
}

#[test]
fn f2_solution_respects_the_mode() {
    let f2 = general_solution_f2(Univariate::identity(), Univariate::constant(0.0), Mode::Real);
    assert!(matches!(f2.eval(re(1.0), re(-1.0)), Err(Error::InvalidSign { index: 1, .. })));
    let c = general_solution_f2(Univariate::identity(), Univariate::constant(0.0), Mode::Complex);
    let v = c.eval(re(1.0), re(-4.0)).unwrap();
    assert!((v - Scalar::new(0.0, -0.5)).norm() < 1e-15);
    assert!(c.eval(re(1.0), re(0.0)).is_err());
}

#[test]
fn f1_residual_needs_distinct_arguments() {
    let f = Bivariate::new(|a, b| a + b);
    assert!(matches!(
        residual_f1(&f, &[(re(1.0), re(1.0))], 1e-8),
        Err(Error::EigenvalueCollision { .. })
    ));
}

#[test]
fn mean_value_of_polynomials_is_exact() {
    let psi = Univariate::polynomial(&[0.0, 0.0, 1.0]);
    let f = mean_value_solution(psi.clone(), 64);
    for (t, r) in box_samples((-2.0, 2.0), (0.0, 3.0), 7) {
        let v = f.eval(t, r).unwrap();
        assert!((v - (t * t + r * r / 2.0)).norm() <= 1e-10);
    }
    // Constant ψ gives a constant.
    let one = mean_value_solution(Univariate::constant(1.0), 8);
    assert!((one.eval(re(0.3), re(5.0)).unwrap() - 1.0).norm() < 1e-14);
    // M nodes integrate monomials of degree up to 2M − 1.
    let m = 4;
    let nodes = gauss_chebyshev(m);
    for k in 0..2 * m {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        let p = Univariate::polynomial(&coeffs);
        let v = darboux_mean_value_jet(&p, re(0.0), re(1.0), &nodes).v;
        // (1/π)∫x^k/√(1−x²) = (k−1)!!/k!! for even k, 0 for odd k.
        let exact = if k % 2 == 1 {
            0.0
        } else {
            (1..=k / 2).map(|j| (2 * j - 1) as f64 / (2 * j) as f64).product()
        };
        assert!((v.re - exact).abs() < 1e-14, "degree {k}: {v} vs {exact}");
    }
}

#[test]
fn mean_value_solves_the_darboux_equation() {
    let f = mean_value_solution(Univariate::sin(1.0, 1.0, 0.0), 64);
    let samples = box_samples((0.0, 1.0), (0.1, 2.0), 8);
    let rep = residual_darboux(&f, &samples, 1e-8).unwrap();
    assert!(rep.passed(), "{}", rep.summary());
    for k in 0..10 {
        let t = re(-1.0 + 0.3 * k as f64);
        let j = f.jet(t, re(0.0)).unwrap();
        assert!((j.v - t.sin()).norm() <= 1e-12);
        assert!(j.db.norm() <= 1e-12);
    }
}

#[test]
fn mean_value_convergence_estimate() {
    let psi = Univariate::gaussian(1.0, 0.0, 0.3);
    let (v, est) = darboux_mean_value(&psi, re(0.1), re(0.5), 64, 1e-8).unwrap();
    assert!(est < 1e-8);
    assert!(v.re > 0.0);
    // A narrow bump at large radius needs more nodes than 4.
    assert!(darboux_mean_value(&psi, re(0.1), re(3.0), 4, 1e-8).is_err());
    assert!(darboux_mean_value(&psi, re(0.0), re(1.0), 0, 1.0).is_err());
}

#[test]
fn darboux_residual_examples() {
    let samples = box_samples((-1.0, 1.0), (0.2, 2.0), 5);
    let ok = Bivariate::new(|t, r| t * t + r * r / 2.0);
    assert!(residual_darboux(&ok, &samples, 1e-8).unwrap().passed());
    let lin = Bivariate::new(|t, _| t);
    assert!(residual_darboux(&lin, &samples, 1e-8).unwrap().passed());
    let r = Bivariate::new(|_, r| r);
    let rep = residual_darboux(&r, &samples, 1e-3).unwrap();
    assert!((rep.max() - 5.0).abs() < 1e-8, "max {}", rep.max());
    assert!(residual_darboux(&ok, &[(re(0.0), re(0.0))], 1.0).is_err());
}

#[test]
fn separated_solutions() {
    let samples = box_samples((-1.0, 1.0), (0.1, 3.0), 7);
    for (a, branch) in [(-1.0, SeparatedBranch::Regular), (1.0, SeparatedBranch::Modified), (-2.5, SeparatedBranch::Regular)] {
        let sol = darboux_separated(a, branch).unwrap().with_s_coeffs(re(1.0), re(0.4));
        let rep = residual_darboux(&sol.as_bivariate(), &samples, 1e-8).unwrap();
        assert!(rep.passed(), "a = {a}: {}", rep.summary());
        let (rs, rr) = sol.ode_residuals(&[-1.0, 0.0, 0.7], &[0.2, 0.45, 0.55, 1.0, 2.5]).unwrap();
        assert!(rs < 1e-8 && rr < 1e-8, "a = {a}: {rs} {rr}");
        let (r0, dr0) = sol.r_profile(0.0).unwrap();
        assert_eq!((r0, dr0), (1.0, 0.0));
    }
    // Past the series radius the profile comes from the ODE continuation.
    let far = darboux_separated(-16.0, SeparatedBranch::Regular).unwrap();
    assert!(far.series_radius < 2.5);
    let rep = residual_darboux(&far.as_bivariate(), &box_samples((-0.5, 0.5), (2.5, 4.0), 5), 1e-8).unwrap();
    assert!(rep.passed(), "{}", rep.summary());
    // a > 0 grows monotonically.
    let m = darboux_separated(1.0, SeparatedBranch::Modified).unwrap();
    let vals: Vec<f64> = (0..20).map(|k| m.r_profile(0.2 * k as f64).unwrap().0).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    // a = 0: S linear, R constant.
    let z = darboux_separated(0.0, SeparatedBranch::Regular).unwrap().with_s_coeffs(re(2.0), re(3.0));
    assert_eq!(z.eval(re(1.5), re(0.7)).unwrap(), re(6.5));
    // Branch and sign must agree.
    assert!(darboux_separated(1.0, SeparatedBranch::Regular).is_err());
    assert!(darboux_separated(-1.0, SeparatedBranch::Modified).is_err());
    assert!(darboux_separated(f64::NAN, SeparatedBranch::Regular).is_err());
    assert!(m.r_profile(-1.0).is_err());
}

#[test]
fn pullbacks_exchange_the_two_normal_forms() {
    let samples_u: Vec<(Scalar, Scalar)> = box_samples((0.5, 2.0), (-2.0, -0.5), 5);
    let f = to_u(&mean_value_solution(Univariate::sin(1.0, 1.0, 0.3), 64));
    assert!(residual_f1(&f, &samples_u, 1e-9).unwrap().passed());
    // The same through difference jets.
    assert!(residual_f1(&f.numerical(), &samples_u, 1e-6).unwrap().passed());
    // Linear t pulls back to (u¹ + u²)/2.
    let t = to_u(&Bivariate::new(|t, _| t));
    assert!((t.eval(re(1.0), re(3.0)).unwrap() - 2.0).norm() < 1e-15);
    assert!(residual_f1(&t, &samples_u, 1e-9).unwrap().passed());
    // Round trip.
    let g = Bivariate::new(|a, b| a * a * b + b.exp());
    let back = to_tr(&to_u(&g));
    let v = back.eval(re(0.3), re(0.8)).unwrap();
    assert!((v - g.eval(re(0.3), re(0.8)).unwrap()).norm() < 1e-14);
}

proptest! {
    #[test]
    fn mean_value_initial_conditions(t in -3.0f64..3.0, freq in 0.2f64..2.0, phase in 0.0f64..3.0) {
        let psi = Univariate::sin(1.0, freq, phase);
        let f = mean_value_solution(psi.clone(), 64);
        let j = f.jet(re(t), re(0.0)).unwrap();
        prop_assert!((j.v - psi.value(re(t))).norm() < 1e-12);
        prop_assert!(j.db.norm() < 1e-12);
    }

    #[test]
    fn pullback_preserves_values(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = general_solution_f3(Univariate::sin(1.0, 1.0, 0.0), Univariate::exp(1.0, 0.3));
        let tr = to_tr(&g);
        let lhs = tr.eval(re(0.5 * (a + b)), re(0.5 * (a - b))).unwrap();
        prop_assert!((lhs - g.eval(re(a), re(b)).unwrap()).norm() < 1e-12);
    }
}
