//! Finite metric spaces given by an explicit distance matrix.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

static NEXT_METRIC_ID: AtomicU64 = AtomicU64::new(1);

/// Absolute slack allowed when validating symmetry and triangle inequality,
/// scaled by the diameter.
const METRIC_TOL: f64 = 1e-9;

/// A finite metric space: `M` labelled points and an `M×M` distance matrix.
///
/// The matrix is validated on construction: non-negative entries, zero
/// diagonal, symmetry, and the triangle inequality on all triples.
#[derive(Debug, Clone)]
pub struct FiniteMetric {
    id: String,
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    diameter: f64,
    /// Smallest positive pairwise distance; 0.0 for a single point.
    min_distance: f64,
}

impl FiniteMetric {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_id(fresh_metric_id(), labels, dist)
    }

    pub fn with_id(id: String, labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let m = labels.len();
        if m == 0 {
            return Err(Error::InvalidMetric("metric needs at least one point".into()));
        }
        if dist.len() != m || dist.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidMetric(format!(
                "distance matrix must be {m}x{m} to match {m} labels"
            )));
        }
        let mut diameter = 0.0f64;
        for (i, row) in dist.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) = {d} is not a finite non-negative distance"
                    )));
                }
                diameter = diameter.max(d);
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidMetric(format!("d({i},{i}) = {} on diagonal", row[i])));
            }
        }
        let tol = METRIC_TOL * diameter.max(1.0);
        for i in 0..m {
            for j in (i + 1)..m {
                if (dist[i][j] - dist[j][i]).abs() > tol {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric: d({i},{j}) = {} but d({j},{i}) = {}",
                        dist[i][j], dist[j][i]
                    )));
                }
                if dist[i][j] == 0.0 && i != j {
                    return Err(Error::InvalidMetric(format!("distinct points {i},{j} at distance 0")));
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if dist[i][j] > dist[i][k] + dist[k][j] + tol {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails on ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        let mut min_distance = f64::INFINITY;
        for i in 0..m {
            for j in (i + 1)..m {
                min_distance = min_distance.min(dist[i][j]);
            }
        }
        if !min_distance.is_finite() {
            min_distance = 0.0;
        }
        Ok(FiniteMetric { id, labels, dist, diameter, min_distance })
    }

    /// Points `0..m` in Euclidean position, convenient for tests and demos.
    pub fn from_points(coords: &[Vec<f64>]) -> Result<Self> {
        let labels = (0..coords.len()).map(|i| i.to_string()).collect();
        let dist = coords
            .iter()
            .map(|p| {
                coords
                    .iter()
                    .map(|q| {
                        p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                    })
                    .collect()
            })
            .collect();
        Self::new(labels, dist)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn min_positive_distance(&self) -> f64 {
        self.min_distance
    }
}

fn fresh_metric_id() -> String {
    format!("metric-{}", NEXT_METRIC_ID.fetch_add(1, Ordering::Relaxed))
}
