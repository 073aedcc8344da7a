//! Discrete probability distributions over grids and finite metric spaces,
//! with quantiles, restrictions and the standard divergences.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Dataset, GridDomain};
use crate::metric::FiniteMetric;
use crate::rng::Rng;

/// Normalization tolerance: weights must sum to 1 within this before the
/// final renormalization pass.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// The sample space a distribution lives on.
#[derive(Debug, Clone)]
pub enum Domain {
    Grid(GridDomain),
    Metric(Arc<FiniteMetric>),
}

impl Domain {
    pub fn len(&self) -> usize {
        match self {
            Domain::Grid(g) => g.len(),
            Domain::Metric(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, Domain::Grid(_))
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        match (self, other) {
            (Domain::Grid(a), Domain::Grid(b)) => a.same_as(b),
            (Domain::Metric(a), Domain::Metric(b)) => {
                Arc::ptr_eq(a, b) || a.id() == b.id()
            }
            _ => false,
        }
    }
}

/// Non-negative weights over the points of a [`Domain`], summing to one.
///
/// Immutable after construction. On ordered (grid) domains the CDF is
/// available through [`DiscreteDistribution::cdf`].
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    domain: Domain,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validate and renormalize `weights` (which must already sum to 1
    /// within [`NORMALIZATION_TOL`]).
    pub fn new(domain: Domain, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != domain.len() {
            return Err(Error::DomainMismatch(format!(
                "{} weights for a domain of {} points",
                weights.len(),
                domain.len()
            )));
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::param(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param(format!("weights sum to {sum}, expected 1")));
        }
        let weights = if sum == 1.0 {
            weights
        } else {
            weights.into_iter().map(|w| w / sum).collect()
        };
        Ok(DiscreteDistribution { domain, weights })
    }

    /// Validate like [`Self::new`] but keep the weights bit-for-bit (no
    /// renormalizing division), so serialization round-trips exactly.
    pub fn from_checked_weights(domain: Domain, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != domain.len() {
            return Err(Error::DomainMismatch(format!(
                "{} weights for a domain of {} points",
                weights.len(),
                domain.len()
            )));
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::param(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param(format!("weights sum to {sum}, expected 1")));
        }
        Ok(DiscreteDistribution { domain, weights })
    }

    pub fn on_grid(domain: GridDomain, weights: Vec<f64>) -> Result<Self> {
        Self::new(Domain::Grid(domain), weights)
    }

    pub fn on_metric(metric: Arc<FiniteMetric>, weights: Vec<f64>) -> Result<Self> {
        Self::new(Domain::Metric(metric), weights)
    }

    /// All mass on a single point.
    pub fn point_mass(domain: Domain, index: usize) -> Result<Self> {
        if index >= domain.len() {
            return Err(Error::DomainMismatch(format!("point {index} outside domain")));
        }
        let mut weights = vec![0.0; domain.len()];
        weights[index] = 1.0;
        Ok(DiscreteDistribution { domain, weights })
    }

    pub fn uniform(domain: Domain) -> Self {
        let n = domain.len();
        DiscreteDistribution { domain, weights: vec![1.0 / n as f64; n] }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> Result<&GridDomain> {
        match &self.domain {
            Domain::Grid(g) => Ok(g),
            Domain::Metric(_) => Err(Error::DomainMismatch(
                "operation requires an ordered grid domain".into(),
            )),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Indices with positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i)
    }

    /// Cumulative weights `F(x_i) = Σ_{j ≤ i} w_j` (ordered domains only).
    pub fn cdf(&self) -> Result<Vec<f64>> {
        self.grid()?;
        let mut acc = 0.0;
        Ok(self
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect())
    }

    /// The α-quantile: the smallest grid point `t` with `Pr(y ≤ t) ≥ α`.
    /// Requires `α ∈ (0, 1]` and an ordered domain.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        Ok(self.grid()?.point(self.quantile_index(alpha)?))
    }

    /// Index variant of [`Self::quantile`].
    pub fn quantile_index(&self, alpha: f64) -> Result<usize> {
        self.grid()?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("quantile level must be in (0,1], got {alpha}")));
        }
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if acc >= alpha {
                return Ok(i);
            }
        }
        // Round-off can leave the running sum a hair under alpha = 1.
        Ok(self.weights.len() - 1)
    }

    /// The restriction to `[u, v]`: the CDF is clipped to 0 below `u` and to
    /// 1 at `v`, with the clipped tails absorbed as atoms at `u` and `v`.
    /// For `u = v` the result is a point mass at `u`.
    pub fn restrict(&self, u: f64, v: f64) -> Result<DiscreteDistribution> {
        let grid = *self.grid()?;
        let iu = grid
            .index_of(u)
            .ok_or_else(|| Error::DomainMismatch(format!("restriction endpoint {u} off grid")))?;
        let iv = grid
            .index_of(v)
            .ok_or_else(|| Error::DomainMismatch(format!("restriction endpoint {v} off grid")))?;
        self.restrict_indices(iu, iv)
    }

    /// Index variant of [`Self::restrict`].
    pub fn restrict_indices(&self, iu: usize, iv: usize) -> Result<DiscreteDistribution> {
        let grid = *self.grid()?;
        if iu > iv {
            return Err(Error::param(format!(
                "restriction needs u <= v, got indices {iu} > {iv}"
            )));
        }
        let mut weights = vec![0.0; grid.len()];
        if iu == iv {
            weights[iu] = 1.0;
            return DiscreteDistribution::on_grid(grid, weights);
        }
        // Atom at u carries F(u); interior keeps its mass; atom at v carries
        // the upper tail 1 − F(v⁻), so the CDF equals F_P on [u, v).
        let mut head = 0.0;
        for w in &self.weights[..=iu] {
            head += w;
        }
        weights[iu] = head;
        let mut mid = 0.0;
        for i in (iu + 1)..iv {
            weights[i] = self.weights[i];
            mid += self.weights[i];
        }
        weights[iv] = (1.0 - head - mid).max(0.0);
        DiscreteDistribution::on_grid(grid, weights)
    }

    /// Draw `n` indices i.i.d. from this distribution by inverse CDF.
    pub fn sample_indices(&self, n: usize, rng: &mut Rng) -> Vec<usize> {
        let mut cum = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w;
            cum.push(acc);
        }
        let last = self.weights.len() - 1;
        (0..n)
            .map(|_| {
                let u = rng.uniform() * acc;
                match cum.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                    Ok(i) | Err(i) => i.min(last),
                }
            })
            .collect()
    }

    /// Draw an i.i.d. [`Dataset`] of size `n`.
    pub fn sample_dataset(&self, n: usize, rng: &mut Rng) -> Result<Dataset> {
        Dataset::from_indices(self.len(), self.sample_indices(n, rng))
    }
}

/// The uniform distribution over the entries of `data`: point `x` gets
/// weight `count(x) / n`.
pub fn empirical_distribution(data: &Dataset, domain: &Domain) -> Result<DiscreteDistribution> {
    let m = domain.len();
    if let Some(&bad) = data.indices().iter().find(|&&i| i >= m) {
        return Err(Error::DomainMismatch(format!(
            "sample index {bad} outside domain of {m} points"
        )));
    }
    let n = data.n() as f64;
    let weights = data.counts(m).into_iter().map(|c| c as f64 / n).collect();
    DiscreteDistribution::new(domain.clone(), weights)
}

fn check_same_domain(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.domain().same_as(q.domain()) {
        Ok(())
    } else {
        Err(Error::DomainMismatch("divergence needs a common domain".into()))
    }
}

/// The ∞-Rényi divergence `ln sup_x max{P(x)/Q(x), Q(x)/P(x)}`; +∞ when the
/// supports differ.
pub fn d_infinity(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_same_domain(p, q)?;
    let mut max_ratio = 1.0f64;
    for (&wp, &wq) in p.weights().iter().zip(q.weights()) {
        match (wp > 0.0, wq > 0.0) {
            (true, true) => max_ratio = max_ratio.max(wp / wq).max(wq / wp),
            (false, false) => {}
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(max_ratio.ln())
}

/// Total variation distance, `½‖P − Q‖₁`.
pub fn tv(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_same_domain(p, q)?;
    Ok(0.5 * p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// KL divergence `Σ P(x) ln(P(x)/Q(x))`; +∞ unless `supp(P) ⊆ supp(Q)`.
pub fn kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_same_domain(p, q)?;
    let mut sum = 0.0;
    for (&wp, &wq) in p.weights().iter().zip(q.weights()) {
        if wp > 0.0 {
            if wq == 0.0 {
                return Ok(f64::INFINITY);
            }
            sum += wp * (wp / wq).ln();
        }
    }
    Ok(sum.max(0.0))
}

/// Squared Hellinger distance, `½‖√P − √Q‖₂²`.
pub fn hellinger_sq(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_same_domain(p, q)?;
    let sum: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok(0.5 * sum)
}
