//! Private density estimation on an HST: truncate the empirical node
//! masses, privately locate the active nodes level by level, add Laplace
//! noise to the survivors, and project the noisy node function back onto
//! the space of distributions.

use crate::dist::{DiscreteDistribution, Domain};
use crate::dp::{kappa, PrivacyLedger};
use crate::error::{Error, Result};
use crate::grid::Dataset;
use crate::hst::{Hst, NodeFunction};
use crate::rng::Rng;

/// Knobs of the tree estimator.
#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    /// Failure probability budget β.
    pub beta: f64,
    /// δ used inside the κ threshold; 0 keeps the deployment pure-DP.
    pub kappa_delta: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { beta: 0.05, kappa_delta: 0.0 }
    }
}

/// Empirical node masses with extreme values snapped: below
/// `7·ln(n/β)/n` to 0, above `1 − 7·ln(n/β)/n` to 1.
pub fn truncated_empirical(
    data: &Dataset,
    tree: &Hst,
    beta: f64,
) -> Result<NodeFunction> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("beta must be in (0,1), got {beta}")));
    }
    let n = data.n();
    let counts = data.counts(tree.point_count());
    let mut f = tree.node_function_from_counts(&counts, n as u64)?;
    let cut = 7.0 * (n as f64 / beta).ln() / n as f64;
    for v in f.values_mut() {
        if *v < cut {
            *v = 0.0;
        } else if *v > 1.0 - cut {
            *v = 1.0;
        }
    }
    Ok(f)
}

/// Top-down private search for active nodes. A child of a surviving node
/// survives iff its (truncated empirical) mass plus `Lap(1/(εn))` clears
/// `2κ + ln(2/β)/(εn)`. One ε is spent per level, `D_T·ε` total, recorded
/// as a single ledger entry. With `eps = ∞` the test is the exact
/// noiseless threshold (κ and the margin both collapse to 0).
pub fn locate_active_nodes(
    ghat: &NodeFunction,
    tree: &Hst,
    n: usize,
    eps: f64,
    config: &TreeConfig,
    rng: &mut Rng,
    ledger: &mut PrivacyLedger,
) -> Result<Vec<usize>> {
    tree.check_tree(ghat)?;
    if !(eps > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {eps}")));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let kap = kappa(eps, config.kappa_delta, n)?;
    let en = eps * n as f64;
    let threshold = if eps.is_infinite() {
        0.0
    } else {
        2.0 * kap + (2.0 / config.beta).ln() / en
    };
    ledger.record("locate-active-nodes", tree.depth() as f64 * eps, 0.0);

    let mut survivors = vec![tree.root()];
    let mut frontier = vec![tree.root()];
    for _ in 0..tree.depth() {
        let mut next = Vec::new();
        for &node in &frontier {
            for &child in tree.children(node) {
                let noise = if eps.is_infinite() { 0.0 } else { rng.laplace(1.0 / en) };
                if ghat.value(child) + noise > threshold {
                    next.push(child);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        survivors.extend_from_slice(&next);
        frontier = next;
    }
    Ok(survivors)
}

/// Zero out everything outside `active`, add `Lap(1/(εn))` to each active
/// node's value, and force the root back to 1. Spends ε (one entry).
pub fn add_noise_to_active(
    ghat: &NodeFunction,
    active: &[usize],
    tree: &Hst,
    n: usize,
    eps: f64,
    rng: &mut Rng,
    ledger: &mut PrivacyLedger,
) -> Result<NodeFunction> {
    tree.check_tree(ghat)?;
    if !(eps > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {eps}")));
    }
    if let Some(&bad) = active.iter().find(|&&v| v >= tree.node_count()) {
        return Err(Error::TreeMismatch(format!("active node {bad} outside tree")));
    }
    ledger.record("noise-active-nodes", eps, 0.0);
    let mut values = vec![0.0; tree.node_count()];
    let en = eps * n as f64;
    for &node in active {
        let noise = if eps.is_infinite() { 0.0 } else { rng.laplace(1.0 / en) };
        values[node] = ghat.value(node) + noise;
    }
    values[tree.root()] = 1.0;
    NodeFunction::new(tree, values)
}

/// Project a node function with root value 1 onto distribution-induced
/// functions: walk top-down rescaling each node's children to sum to the
/// node's assigned value, splitting equally where the children's raw values
/// sum to zero. Negative inputs are clamped to zero first. The leaf values
/// of the result form the output distribution.
pub fn projection(g: &NodeFunction, tree: &Hst, domain: Domain) -> Result<DiscreteDistribution> {
    tree.check_tree(g)?;
    if (g.value(tree.root()) - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!(
            "projection needs root value 1, got {}",
            g.value(tree.root())
        )));
    }
    let clamped: Vec<f64> = g.values().iter().map(|&v| v.max(0.0)).collect();
    let mut projected = clamped.clone();
    projected[tree.root()] = 1.0;
    // Parents precede children in node order.
    for node in 0..tree.node_count() {
        let children = tree.children(node);
        if children.is_empty() {
            continue;
        }
        let raw_sum: f64 = children.iter().map(|&c| clamped[c]).sum();
        if raw_sum == 0.0 {
            let share = projected[node] / children.len() as f64;
            for &c in children {
                projected[c] = share;
            }
        } else {
            let factor = projected[node] / raw_sum;
            for &c in children {
                projected[c] = factor * clamped[c];
            }
        }
    }
    let f = NodeFunction::new(tree, projected)?;
    tree.leaf_distribution(&f, domain)
}

/// Full pipeline: truncated empirical masses → private active-node search
/// → Laplace noise on the survivors → projection. Ledger total comes to
/// `(D_T + 1)·ε`.
pub fn estimate_tree(
    data: &Dataset,
    tree: &Hst,
    domain: Domain,
    eps: f64,
    config: &TreeConfig,
    rng: &mut Rng,
) -> Result<(DiscreteDistribution, PrivacyLedger)> {
    let mut ledger = PrivacyLedger::new();
    let ghat = truncated_empirical(data, tree, config.beta)?;
    let active = locate_active_nodes(&ghat, tree, data.n(), eps, config, rng, &mut ledger)?;
    let noisy = add_noise_to_active(&ghat, &active, tree, data.n(), eps, rng, &mut ledger)?;
    let out = projection(&noisy, tree, domain)?;
    Ok((out, ledger))
}

/// The three components of the discrete-distribution target rate at `P`:
/// sampling error, the mass of κ-inactive atoms, and the per-active-atom
/// privacy cost.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DiscreteRate {
    pub statistical_term: f64,
    pub inactive_term: f64,
    pub active_term: f64,
}

impl DiscreteRate {
    pub fn total(&self) -> f64 {
        self.statistical_term + self.inactive_term + self.active_term
    }
}

/// Evaluate the discrete target rate for weights `p` (any non-negative
/// vector summing to ≤ 1; levels of a node function qualify):
/// `Σ min{p(1−p), √(p(1−p)/n)}` + `Σ_{p < 2κ} p` + `(|{p ≥ 2κ}| − 1)·κ`,
/// the last floored at zero.
pub fn target_rate_discrete_weights(
    weights: &[f64],
    n: usize,
    eps: f64,
    delta: f64,
) -> Result<DiscreteRate> {
    let kap = kappa(eps, delta, n)?;
    let mut statistical = 0.0;
    let mut inactive = 0.0;
    let mut active_count = 0usize;
    for &p in weights {
        let v = p * (1.0 - p);
        statistical += v.min((v / n as f64).sqrt());
        if p < 2.0 * kap {
            inactive += p;
        } else {
            active_count += 1;
        }
    }
    let active = active_count.saturating_sub(1) as f64 * kap;
    Ok(DiscreteRate { statistical_term: statistical, inactive_term: inactive, active_term: active })
}

/// [`target_rate_discrete_weights`] for a full distribution.
pub fn target_rate_discrete(
    p: &DiscreteDistribution,
    n: usize,
    eps: f64,
    delta: f64,
) -> Result<DiscreteRate> {
    target_rate_discrete_weights(p.weights(), n, eps, delta)
}

/// Per-level discrete rates of a distribution induced on an HST, scaled by
/// the level edge weights, with the level maximum (lower-bound flavour)
/// and the level sum (upper-bound flavour).
#[derive(Debug, Clone, serde::Serialize)]
pub struct TreeRate {
    pub levels: Vec<LevelRate>,
    pub max_over_levels: f64,
    pub sum_over_levels: f64,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LevelRate {
    pub level: usize,
    pub edge_weight: f64,
    pub statistical_term: f64,
    pub inactive_term: f64,
    pub active_term: f64,
    pub scaled_total: f64,
}

/// Evaluate the tree target rate of `P` on `tree`.
pub fn target_rate_tree(
    p: &DiscreteDistribution,
    tree: &Hst,
    n: usize,
    eps: f64,
    delta: f64,
) -> Result<TreeRate> {
    let f = tree.node_function(p)?;
    let mut levels = Vec::with_capacity(tree.depth());
    let mut max_over_levels = 0.0f64;
    let mut sum_over_levels = 0.0f64;
    for level in 1..=tree.depth() {
        let weights: Vec<f64> = tree.nodes_at_level(level).map(|v| f.value(v)).collect();
        let rate = target_rate_discrete_weights(&weights, n, eps, delta)?;
        let r = tree.level_edge_weight(level);
        let scaled = r * rate.total();
        levels.push(LevelRate {
            level,
            edge_weight: r,
            statistical_term: rate.statistical_term,
            inactive_term: rate.inactive_term,
            active_term: rate.active_term,
            scaled_total: scaled,
        });
        max_over_levels = max_over_levels.max(scaled);
        sum_over_levels += scaled;
    }
    Ok(TreeRate { levels, max_over_levels, sum_over_levels })
}
