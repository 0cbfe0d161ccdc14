use crate::error::{Error, Result};
use crate::pencil::PencilSpec;
use crate::report::ResidualReport;
use crate::scalar::{re, Coordinates, Scalar};

use super::potential::Potentials;

/// A point (s, s′, u) at which the reduction equations are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSample {
    pub s: f64,
    pub s_prime: f64,
    pub u: Coordinates,
}

/// Residual of the reduction equation for Φ_ij at potential arguments
/// x = s − u^i, y = s′ − u^j:
/// 2Φ_xy (f^i(−x) − f^j(−y)) + Φ_x f^j′(−y) − Φ_y f^i′(−x).
pub fn reduction_expr(potentials: &Potentials, pencil: &PencilSpec, i: usize, j: usize, x: Scalar, y: Scalar) -> Result<Scalar> {
    let p = potentials.get(i, j);
    if p.is_zero() {
        return Ok(re(0.0));
    }
    let jet = p.jet(x, y)?;
    let [fi, dfi, _] = pencil.f[i].jet(-x);
    let [fj, dfj, _] = pencil.f[j].jet(-y);
    Ok(2.0 * jet.xy * (fi - fj) + jet.x * dfj - jet.y * dfi)
}

/// The reduction equations for every nonzero Φ_ij, i ≤ j. The report has
/// one family for the off-diagonal and one for the diagonal potentials.
pub fn reduction_pde_residual(
    potentials: &Potentials,
    pencil: &PencilSpec,
    samples: &[ReductionSample],
    tol: f64,
) -> Result<ResidualReport> {
    let n = potentials.dim();
    pencil.check_dim(n)?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut off = Vec::with_capacity(samples.len());
    let mut diag = Vec::with_capacity(samples.len());
    for smp in samples {
        smp.u.check_dim(n)?;
        let mut o = Vec::new();
        let mut d = Vec::new();
        for (i, j, _) in potentials.entries() {
            let x = re(smp.s) - smp.u.0[i];
            let y = re(smp.s_prime) - smp.u.0[j];
            let r = reduction_expr(potentials, pencil, i, j, x, y)?.norm();
            if i == j {
                d.push(r);
            } else {
                o.push(r);
            }
        }
        off.push(o);
        diag.push(d);
    }
    let points = samples.iter().map(|s| s.u.clone()).collect();
    let mut rep = ResidualReport::new("reduction equations", format!("{} samples", samples.len()), points, tol);
    rep.add_family("reduction (i<j)", &off);
    rep.add_family("reduction (i=i)", &diag);
    Ok(rep)
}

/// Samples (s, s′, u) over the given points and parameter values.
pub fn samples_on(points: &[Coordinates], params: &[f64]) -> Vec<ReductionSample> {
    let mut out = Vec::new();
    for u in points {
        for &s in params {
            for &sp in params {
                out.push(ReductionSample {
                    s,
                    s_prime: sp,
                    u: u.clone(),
                });
            }
        }
    }
    out
}
