use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Coordinates;

/// Residual statistics of one equation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidual {
    pub name: String,
    /// Max-norm over all points and index tuples.
    pub max: f64,
    /// Root mean square over all points and index tuples.
    pub rms: f64,
    /// Number of scalar residual entries.
    pub count: usize,
    /// Index of the sample point where the max is attained.
    pub worst_point: Option<usize>,
    /// Max over index tuples at each sample point.
    pub per_point: Vec<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub title: String,
    pub grid: String,
    pub tolerance: f64,
    pub points: Vec<Coordinates>,
    pub families: Vec<FamilyResidual>,
}

impl ResidualReport {
    pub fn new(title: &str, grid: String, points: Vec<Coordinates>, tolerance: f64) -> Self {
        ResidualReport {
            title: title.to_string(),
            grid,
            tolerance,
            points,
            families: Vec::new(),
        }
    }

    /// Adds a family from per-point lists of residual entries.
    pub fn add_family(&mut self, name: &str, entries: &[Vec<f64>]) -> &mut FamilyResidual {
        let mut max = 0.0f64;
        let mut sum = 0.0;
        let mut count = 0;
        let mut worst = None;
        let mut finite = true;
        let mut per_point = Vec::with_capacity(entries.len());
        for (p, list) in entries.iter().enumerate() {
            let mut pmax = 0.0f64;
            for &r in list {
                if !r.is_finite() {
                    finite = false;
                    pmax = f64::INFINITY;
                    continue;
                }
                pmax = pmax.max(r);
                sum += r * r;
                count += 1;
            }
            if !list.is_empty() && (worst.is_none() || pmax > max) {
                max = pmax;
                worst = Some(p);
            }
            per_point.push(pmax);
        }
        let rms = if count > 0 { (sum / count as f64).sqrt() } else { 0.0 };
        let note = if count == 0 && finite {
            Some("vacuous: no index tuples".to_string())
        } else {
            None
        };
        self.families.push(FamilyResidual {
            name: name.to_string(),
            max,
            rms,
            count,
            worst_point: worst,
            per_point,
            pass: finite && max <= self.tolerance,
            note,
        });
        self.families.last_mut().unwrap()
    }

    pub fn passed(&self) -> bool {
        self.families.iter().all(|f| f.pass)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyResidual> {
        self.families.iter().find(|f| f.name == name)
    }

    /// Largest max-norm over all families.
    pub fn max(&self) -> f64 {
        self.families.iter().map(|f| f.max).fold(0.0, f64::max)
    }

    /// Re-evaluates verdicts against a new tolerance.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        for f in &mut self.families {
            f.pass = f.max.is_finite() && f.max <= tol;
        }
        self
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.families.extend(other.families);
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} [{}], tol {:.1e}\n", self.title, self.grid, self.tolerance);
        for f in &self.families {
            s.push_str(&format!(
                "  {:<24} max {:.3e}  rms {:.3e}  n={:<5} {}\n",
                f.name,
                f.max,
                f.rms,
                f.count,
                if f.pass { "pass" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Evaluates `f` at every point in parallel. Errors are reported for the
/// first failing point in sample order, so the outcome is deterministic.
pub fn eval_points<T, F>(points: &[Coordinates], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Coordinates) -> Result<T> + Sync + Send,
{
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    let results: Vec<Result<T>> = points.par_iter().map(f).collect();
    results.into_iter().collect()
}
