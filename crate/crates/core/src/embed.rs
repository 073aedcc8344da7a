//! Randomized embeddings of metrics into HSTs.
//!
//! [`build_frt_embedding`] embeds any finite metric: a random permutation
//! fixes center priorities, a random scale `β ∈ [1/2, 1)` fixes the level
//! radii, and points are partitioned level by level by their first center
//! within the shrinking radius. Edge weights are then uniformly inflated so
//! the tree metric dominates the input metric exactly (the binding pair
//! becomes tight). Over the randomness the expected stretch per pair is
//! logarithmic in the number of points.
//!
//! [`grid_embedding`] embeds `[0,1]^d` by a randomly shifted dyadic
//! decomposition down to cells of side at most `α`; any point maps to the
//! leaf of its cell, so the tree is only materialized over occupied cells.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hst::Hst;
use crate::metric::FiniteMetric;
use crate::rng::Rng;

/// Randomized low-distortion embedding of a finite metric into an HST.
/// Leaves biject with the metric's points; `d(u,v) ≤ d_T(u,v)` holds for
/// every pair by construction.
pub fn build_frt_embedding(metric: &FiniteMetric, rng: &mut Rng) -> Result<Hst> {
    let m = metric.len();
    if m == 1 {
        return Hst::from_parts(vec![None], 1.0, vec![0]);
    }
    let diameter = metric.diameter();
    let dmin = metric.min_positive_distance() / diameter;
    let depth = ((1.0 / dmin).log2().ceil() as usize).max(0) + 1;
    let beta = 0.5 + 0.5 * rng.uniform();
    let mut order: Vec<usize> = (0..m).collect();
    rng.shuffle(&mut order);

    struct Cluster {
        node: usize,
        points: Vec<usize>,
    }
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut clusters = vec![Cluster { node: 0, points: (0..m).collect() }];
    for level in 1..=depth {
        let rho = beta * (2.0f64).powi(-(level as i32)) * diameter;
        let mut next = Vec::new();
        for cluster in &clusters {
            let mut remaining = cluster.points.clone();
            for &center in &order {
                if remaining.is_empty() {
                    break;
                }
                let (mine, rest): (Vec<usize>, Vec<usize>) = remaining
                    .into_iter()
                    .partition(|&x| metric.distance(x, center) <= rho);
                remaining = rest;
                if !mine.is_empty() {
                    parent.push(Some(cluster.node));
                    next.push(Cluster { node: parent.len() - 1, points: mine });
                }
            }
            debug_assert!(remaining.is_empty(), "every point is within rho of itself");
        }
        clusters = next;
    }

    let mut leaf_of_point = vec![0usize; m];
    for cluster in &clusters {
        debug_assert_eq!(
            cluster.points.len(),
            1,
            "bottom radius is below half the minimum distance"
        );
        leaf_of_point[cluster.points[0]] = cluster.node;
    }

    // Uniform inflation: with unit root weight, find the worst d/d_T ratio
    // and scale all edges by it, making the dominating property exact.
    let provisional = Hst::from_parts(parent.clone(), 1.0, leaf_of_point.clone())?;
    let mut factor = 0.0f64;
    for u in 0..m {
        for v in (u + 1)..m {
            factor = factor.max(metric.distance(u, v) / provisional.tree_distance(u, v));
        }
    }
    Hst::from_parts(parent, factor, leaf_of_point)
}

/// A randomly shifted dyadic decomposition of `[0,1]^d` with cells of side
/// `2^{−D_T} ≤ α`. Points map to cells; [`GridEmbedding::build_hst`]
/// materializes the tree over the cells occupied by a point set.
#[derive(Debug, Clone)]
pub struct GridEmbedding {
    dim: usize,
    depth: usize,
    shift: Vec<f64>,
}

/// Construct a grid embedding for dimension `d ≥ 1` and granularity
/// `0 < α < 1`.
pub fn grid_embedding(dim: usize, alpha: f64, rng: &mut Rng) -> Result<GridEmbedding> {
    if dim == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("granularity must be in (0,1), got {alpha}")));
    }
    let depth = ((1.0 / alpha).log2().ceil() as usize).max(1);
    let shift = (0..dim).map(|_| rng.uniform()).collect();
    Ok(GridEmbedding { dim, depth, shift })
}

impl GridEmbedding {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tree depth `D_T = ⌈log₂(1/α)⌉`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The dyadic cell of `point` at `level`: one shifted index per
    /// coordinate, cells of side `2^{−level}`.
    pub fn cell(&self, point: &[f64], level: usize) -> Result<Vec<u64>> {
        if point.len() != self.dim {
            return Err(Error::DomainMismatch(format!(
                "point has {} coordinates, embedding expects {}",
                point.len(),
                self.dim
            )));
        }
        if let Some(&x) = point.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::DomainMismatch(format!("coordinate {x} outside [0,1]")));
        }
        let scale = (2.0f64).powi(level as i32);
        Ok(point
            .iter()
            .zip(&self.shift)
            .map(|(&x, &s)| ((x + s) * scale).floor() as u64)
            .collect())
    }

    /// Materialize the HST over the bottom-level cells occupied by
    /// `points`. Returns the tree (leaves = occupied cells, in first-seen
    /// order) and each input point's cell index; points sharing a cell
    /// share a leaf.
    pub fn build_hst(&self, points: &[Vec<f64>]) -> Result<(Hst, Vec<usize>)> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        // Distinct bottom cells, numbered in order of first appearance.
        let mut cell_ids: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut cell_of_point = Vec::with_capacity(points.len());
        let mut cells: Vec<Vec<u64>> = Vec::new();
        for p in points {
            let key = self.cell(p, self.depth)?;
            let next_id = cells.len();
            let id = *cell_ids.entry(key.clone()).or_insert_with(|| {
                cells.push(key);
                next_id
            });
            cell_of_point.push(id);
        }

        // Refine cell groups level by level; a node per occupied cell.
        struct Cluster {
            node: usize,
            members: Vec<usize>,
        }
        let mut parent: Vec<Option<usize>> = vec![None];
        let mut clusters = vec![Cluster { node: 0, members: (0..cells.len()).collect() }];
        for level in 1..=self.depth {
            let drop = self.depth - level;
            let mut next = Vec::new();
            for cluster in &clusters {
                let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
                for &cell in &cluster.members {
                    let key: Vec<u64> = cells[cell].iter().map(|&c| c >> drop).collect();
                    groups.entry(key).or_default().push(cell);
                }
                for (_, members) in groups {
                    parent.push(Some(cluster.node));
                    next.push(Cluster { node: parent.len() - 1, members });
                }
            }
            clusters = next;
        }
        let mut leaf_of_cell = vec![0usize; cells.len()];
        for cluster in &clusters {
            debug_assert_eq!(cluster.members.len(), 1);
            leaf_of_cell[cluster.members[0]] = cluster.node;
        }
        // Root weight √d/2 dominates the diagonal of any separating cell.
        let root_weight = (self.dim as f64).sqrt() / 2.0;
        let tree = Hst::from_parts(parent, root_weight, leaf_of_cell)?;
        Ok((tree, cell_of_point))
    }
}
