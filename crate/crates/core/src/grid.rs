//! Discrete, ordered sample spaces: evenly spaced grids on an interval,
//! and datasets of grid points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for accepting `(b - a) / gamma` as an integer and for
/// snapping values to grid points.
const GRID_TOL: f64 = 1e-9;

/// An evenly spaced grid `{a, a+γ, …, b−γ, b}` on the interval `[a, b]`.
///
/// The point count is fixed at construction; all later arithmetic is done on
/// indices so that repeated `a + i·γ` round-off cannot drift points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridDomain {
    a: f64,
    b: f64,
    gamma: f64,
    count: usize,
}

/// Wire form: `{a, b, gamma}`; the point count is re-derived on load.
#[derive(Serialize, Deserialize)]
struct RawGrid {
    a: f64,
    b: f64,
    gamma: f64,
}

impl TryFrom<RawGrid> for GridDomain {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        GridDomain::new(raw.a, raw.b, raw.gamma)
    }
}

impl From<GridDomain> for RawGrid {
    fn from(g: GridDomain) -> Self {
        RawGrid { a: g.a, b: g.b, gamma: g.gamma }
    }
}

impl GridDomain {
    pub fn new(a: f64, b: f64, gamma: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && gamma.is_finite()) {
            return Err(Error::param("grid endpoints and step must be finite"));
        }
        if b <= a {
            return Err(Error::param(format!("grid needs b > a, got a={a}, b={b}")));
        }
        if gamma <= 0.0 {
            return Err(Error::param(format!("grid step must be positive, got {gamma}")));
        }
        let steps = (b - a) / gamma;
        let rounded = steps.round();
        if (steps - rounded).abs() > GRID_TOL * steps.max(1.0) {
            return Err(Error::param(format!(
                "(b-a)/gamma = {steps} is not an integer within tolerance"
            )));
        }
        Ok(GridDomain { a, b, gamma, count: rounded as usize + 1 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of grid points, `(b−a)/γ + 1`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The grid point at `index`.
    pub fn point(&self, index: usize) -> f64 {
        debug_assert!(index < self.count);
        if index + 1 == self.count {
            self.b
        } else {
            self.a + index as f64 * self.gamma
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }

    /// Index of `x` if it lies on the grid (within tolerance).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let steps = (x - self.a) / self.gamma;
        let i = steps.round();
        if i < 0.0 || i >= self.count as f64 {
            return None;
        }
        if (steps - i).abs() > GRID_TOL * steps.abs().max(1.0) {
            return None;
        }
        Some(i as usize)
    }

    /// Index of the grid point nearest to `x`, clamped to the domain.
    /// Discretizing by nearest point costs at most γ in 1-Wasserstein.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.a) / self.gamma).round();
        (i.max(0.0) as usize).min(self.count - 1)
    }

    /// Grids compare equal when their `(a, b, γ)` triples match exactly.
    pub fn same_as(&self, other: &GridDomain) -> bool {
        self.a == other.a && self.b == other.b && self.gamma == other.gamma
    }
}

/// A dataset of `n ≥ 1` domain points, stored as indices into the domain.
#[derive(Debug, Clone)]
pub struct Dataset {
    indices: Vec<usize>,
}

impl Dataset {
    /// Build from real values that must already lie on the grid.
    pub fn from_grid_values(domain: &GridDomain, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let indices = values
            .iter()
            .map(|&v| {
                domain.index_of(v).ok_or_else(|| {
                    Error::DomainMismatch(format!("sample {v} is not a grid point"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { indices })
    }

    /// Build from real values, snapping each to the nearest grid point.
    pub fn from_values_rounded(domain: &GridDomain, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset { indices: values.iter().map(|&v| domain.nearest_index(v)).collect() })
    }

    /// Build from point indices valid for a domain with `domain_len` points.
    pub fn from_indices(domain_len: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= domain_len) {
            return Err(Error::DomainMismatch(format!(
                "sample index {bad} out of range for domain of size {domain_len}"
            )));
        }
        Ok(Dataset { indices })
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Per-index sample counts over a domain of `domain_len` points.
    pub fn counts(&self, domain_len: usize) -> Vec<u64> {
        let mut counts = vec![0u64; domain_len];
        for &i in &self.indices {
            counts[i] += 1;
        }
        counts
    }
}
