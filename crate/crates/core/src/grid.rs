use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Coordinates, Scalar};

/// Sample points for residual evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    /// Cartesian product of real axes; the first axis varies slowest.
    Tensor { axes: Vec<Vec<f64>> },
    Scattered { points: Vec<Coordinates> },
}

impl Grid {
    /// `n` equispaced samples per axis on the box [lower, upper].
    pub fn tensor_box(lower: &[f64], upper: &[f64], n: usize) -> Result<Grid> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if n == 0 || lower.is_empty() {
            return Err(Error::EmptySamples);
        }
        let axes = lower
            .iter()
            .zip(upper)
            .map(|(&a, &b)| {
                if n == 1 {
                    vec![0.5 * (a + b)]
                } else {
                    (0..n)
                        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                        .collect()
                }
            })
            .collect();
        Ok(Grid::Tensor { axes })
    }

    /// The default 5^N grid.
    pub fn default_box(lower: &[f64], upper: &[f64]) -> Result<Grid> {
        Grid::tensor_box(lower, upper, 5)
    }

    pub fn scattered(points: Vec<Coordinates>) -> Result<Grid> {
        if points.is_empty() {
            return Err(Error::EmptySamples);
        }
        let n = points[0].dim();
        for p in &points {
            p.check_dim(n)?;
        }
        Ok(Grid::Scattered { points })
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Tensor { axes } => axes.len(),
            Grid::Scattered { points } => points.first().map_or(0, |p| p.dim()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Tensor { axes } => axes.iter().map(|a| a.len()).product(),
            Grid::Scattered { points } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Option<Vec<usize>> {
        match self {
            Grid::Tensor { axes } => Some(axes.iter().map(|a| a.len()).collect()),
            Grid::Scattered { .. } => None,
        }
    }

    pub fn multi_index(&self, mut flat: usize) -> Option<Vec<usize>> {
        let shape = self.shape()?;
        let mut idx = vec![0; shape.len()];
        for k in (0..shape.len()).rev() {
            idx[k] = flat % shape[k];
            flat /= shape[k];
        }
        Some(idx)
    }

    pub fn flat_index(&self, idx: &[usize]) -> Option<usize> {
        let shape = self.shape()?;
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * shape[k] + i;
        }
        Some(flat)
    }

    pub fn points(&self) -> Vec<Coordinates> {
        match self {
            Grid::Scattered { points } => points.clone(),
            Grid::Tensor { axes } => (0..self.len())
                .map(|flat| {
                    let idx = self.multi_index(flat).unwrap();
                    Coordinates(
                        idx.iter()
                            .enumerate()
                            .map(|(k, &i)| re(axes[k][i]))
                            .collect::<Vec<Scalar>>(),
                    )
                })
                .collect(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Grid::Tensor { axes } => {
                let parts: Vec<String> = axes
                    .iter()
                    .map(|a| match (a.first(), a.last()) {
                        (Some(lo), Some(hi)) => format!("[{lo}, {hi}]x{}", a.len()),
                        _ => "[]".to_string(),
                    })
                    .collect();
                format!("tensor {}", parts.join(" * "))
            }
            Grid::Scattered { points } => format!("scattered {} points", points.len()),
        }
    }
}
