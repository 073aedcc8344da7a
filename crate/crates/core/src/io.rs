//! Wire formats: JSON for distributions, metrics, trees and ledgers, and
//! one-value-per-line CSV for sample ingestion.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDistribution, Domain};
use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::hst::Hst;
use crate::metric::FiniteMetric;

/// Wire form of a distribution: its domain by value (grids) or by id
/// (metrics), plus the weight vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionJson {
    pub domain: DomainJson,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainJson {
    Grid { a: f64, b: f64, gamma: f64 },
    Metric { metric_id: String },
}

impl DistributionJson {
    pub fn from_distribution(dist: &DiscreteDistribution) -> Self {
        let domain = match dist.domain() {
            Domain::Grid(g) => DomainJson::Grid { a: g.a(), b: g.b(), gamma: g.gamma() },
            Domain::Metric(m) => DomainJson::Metric { metric_id: m.id().to_string() },
        };
        DistributionJson { domain, weights: dist.weights().to_vec() }
    }

    /// Rebuild a grid-domain distribution. Metric-domain payloads need
    /// [`Self::into_distribution_on`] with the metric supplied.
    pub fn into_distribution(self) -> Result<DiscreteDistribution> {
        match self.domain {
            DomainJson::Grid { a, b, gamma } => {
                let grid = GridDomain::new(a, b, gamma)?;
                DiscreteDistribution::from_checked_weights(Domain::Grid(grid), self.weights)
            }
            DomainJson::Metric { metric_id } => Err(Error::DomainMismatch(format!(
                "distribution references metric '{metric_id}'; load it with its metric file"
            ))),
        }
    }

    pub fn into_distribution_on(self, metric: Arc<FiniteMetric>) -> Result<DiscreteDistribution> {
        match self.domain {
            DomainJson::Metric { metric_id
            } if metric_id == metric.id() => {
                DiscreteDistribution::from_checked_weights(Domain::Metric(metric), self.weights)
            }
            DomainJson::Metric { metric_id } => Err(Error::DomainMismatch(format!(
                "distribution references metric '{metric_id}', got '{}'",
                metric.id()
            ))),
            DomainJson::Grid { .. } => {
                Err(Error::DomainMismatch("distribution has a grid domain".into()))
            }
        }
    }
}

/// Wire form of a finite metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    #[serde(default)]
    pub id: Option<String>,
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

impl MetricJson {
    pub fn from_metric(metric: &FiniteMetric) -> Self {
        MetricJson {
            id: Some(metric.id().to_string()),
            labels: metric.labels().to_vec(),
            dist: metric.matrix().to_vec(),
        }
    }

    pub fn into_metric(self) -> Result<FiniteMetric> {
        match self.id {
            Some(id) => FiniteMetric::with_id(id, self.labels, self.dist),
            None => FiniteMetric::new(self.labels, self.dist),
        }
    }
}

/// Wire form of an HST: parent links (root first, `null` parent), per-node
/// levels, per-level edge weights, and the point→leaf map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HstJson {
    pub parents: Vec<Option<usize>>,
    pub levels: Vec<usize>,
    /// `weights[ℓ−1]` is the edge weight into level ℓ.
    pub weights: Vec<f64>,
    pub leaf_map: Vec<usize>,
}

impl HstJson {
    pub fn from_hst(tree: &Hst) -> Self {
        let parents: Vec<Option<usize>> = (0..tree.node_count()).map(|v| tree.parent(v)).collect();
        let levels = (0..tree.node_count()).map(|v| tree.level(v)).collect();
        let weights = (1..=tree.depth()).map(|l| tree.level_edge_weight(l)).collect();
        let leaf_map = (0..tree.point_count()).map(|p| tree.leaf_of_point(p).unwrap()).collect();
        HstJson { parents, levels, weights, leaf_map }
    }

    pub fn into_hst(self) -> Result<Hst> {
        // Validate the halving weight schedule before rebuilding.
        for (i, pair) in self.weights.windows(2).enumerate() {
            if (pair[1] - pair[0] / 2.0).abs() > 1e-12 * pair[0].abs() {
                return Err(Error::param(format!(
                    "edge weights must halve per level; level {} breaks the ratio",
                    i + 2
                )));
            }
        }
        let root_weight = self.weights.first().copied().unwrap_or(1.0);
        let tree = Hst::from_parts(self.parents, root_weight, self.leaf_map)?;
        if self.levels.len() != tree.node_count()
            || (0..tree.node_count()).any(|v| tree.level(v) != self.levels[v])
        {
            return Err(Error::param("stored levels disagree with parent links"));
        }
        Ok(tree)
    }
}

/// Parse samples from CSV text: one value per line, optional header,
/// blank lines ignored.
pub fn parse_samples_csv(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if lineno == 0 && values.is_empty() => {
                // Header row.
            }
            Err(_) => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected a number, got '{trimmed}'"),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Parse { line: 1, message: "no samples found".into() });
    }
    Ok(values)
}

/// Canonical JSON serialization used by the CLI: pretty, stable field
/// order, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    s.push('\n');
    s
}
