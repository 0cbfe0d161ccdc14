#![allow(dead_code)]

use pencil_core::{re, Coordinates, DiagonalMetric, Scalar, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(seed: u64, lo: &[f64], hi: &[f64], count: usize) -> Vec<Coordinates> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            Coordinates::real(
                &lo.iter()
                    .zip(hi)
                    .map(|(&a, &b)| r.gen_range(a..b))
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// g^i(u) = c_i·exp(Σ_k a_ik sin(u^k + p_ik)); smooth, nonvanishing.
pub fn random_metric(seed: u64, n: usize) -> DiagonalMetric {
    let mut r = rng(seed);
    let g = (0..n)
        .map(|_| {
            let c: f64 = r.gen_range(0.5..2.0);
            let a: Vec<f64> = (0..n).map(|_| r.gen_range(-0.6..0.6)).collect();
            let p: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..3.0)).collect();
            ScalarField::new(move |u: &[Scalar]| {
                let mut s = re(0.0);
                for k in 0..u.len() {
                    s += a[k] * (u[k] + p[k]).sin();
                }
                c * s.exp()
            })
        })
        .collect();
    DiagonalMetric::new(g).unwrap()
}

pub fn close(a: Scalar, b: Scalar, tol: f64) -> bool {
    (a - b).norm() <= tol
}
