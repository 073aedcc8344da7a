//! 1-Wasserstein evaluators.
//!
//! Three routes, used to cross-check each other:
//! - [`w1_cdf`]: on an ordered grid, `W(P,Q) = ∫ |F_P − F_Q| dt`, summed
//!   exactly over grid cells.
//! - [`w1_tree`]: on an HST, `Σ_ν r_ν |G_P(ν) − G_Q(ν)|` over non-root
//!   nodes, where `r_ν` is the weight of the edge to ν's parent.
//! - [`w1_exact`]: an exact optimal-transport solver on small finite
//!   metrics (successive shortest paths on the bipartite support graph),
//!   the ground-truth oracle for the other two.

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::hst::{Hst, NodeFunction};
use crate::metric::FiniteMetric;

/// Largest `|supp(P)| · |supp(Q)|` the exact solver accepts.
pub const EXACT_SIZE_LIMIT: usize = 10_000;

/// 1-Wasserstein distance on a shared grid via the CDF-area formula.
pub fn w1_cdf(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    let grid = p.grid()?;
    if !p.domain().same_as(q.domain()) {
        return Err(Error::DomainMismatch("w1_cdf needs a common grid".into()));
    }
    let gamma = grid.gamma();
    let mut fp = 0.0;
    let mut fq = 0.0;
    let mut total = 0.0;
    // Per-cell rectangles; the final point contributes nothing since both
    // CDFs reach 1 there.
    for i in 0..p.len() - 1 {
        fp += p.weight(i);
        fq += q.weight(i);
        total += (fp - fq).abs() * gamma;
    }
    Ok(total)
}

/// Tree Wasserstein distance between two node functions on the same HST:
/// the edge-weighted ℓ₁ distance `Σ_ν r_ν |F(ν) − G(ν)|` over non-root
/// nodes. For distribution-induced functions this equals the transport
/// cost in the tree metric, which [`w1_exact`] confirms.
pub fn w1_tree(tree: &Hst, f: &NodeFunction, g: &NodeFunction) -> Result<f64> {
    tree.check_tree(f)?;
    tree.check_tree(g)?;
    let mut total = 0.0;
    for node in 1..tree.node_count() {
        total += tree.edge_weight(node) * (f.value(node) - g.value(node)).abs();
    }
    Ok(total)
}

/// Exact 1-Wasserstein distance on a finite metric, solved as a
/// transportation problem. Limited to `|supp(P)|·|supp(Q)|` ≤
/// [`EXACT_SIZE_LIMIT`].
pub fn w1_exact(
    metric: &FiniteMetric,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<f64> {
    if p.len() != metric.len() || q.len() != metric.len() {
        return Err(Error::DomainMismatch("distributions must live on the metric".into()));
    }
    let sources: Vec<usize> = p.support().collect();
    let sinks: Vec<usize> = q.support().collect();
    if sources.len() * sinks.len() > EXACT_SIZE_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "{} x {} support exceeds limit {}",
            sources.len(),
            sinks.len(),
            EXACT_SIZE_LIMIT
        )));
    }
    let supply: Vec<f64> = sources.iter().map(|&i| p.weight(i)).collect();
    let demand: Vec<f64> = sinks.iter().map(|&j| q.weight(j)).collect();
    let cost = |si: usize, tj: usize| metric.distance(sources[si], sinks[tj]);
    transport(&supply, &demand, cost)
}

/// Exact transport between point sets on the real line; used when the
/// ground metric is a grid rather than an explicit matrix.
pub fn w1_exact_on_line(
    positions_p: &[f64],
    supply: &[f64],
    positions_q: &[f64],
    demand: &[f64],
) -> Result<f64> {
    if positions_p.len() * positions_q.len() > EXACT_SIZE_LIMIT {
        return Err(Error::InstanceTooLarge("line instance exceeds limit".into()));
    }
    transport(supply, demand, |i, j| (positions_p[i] - positions_q[j]).abs())
}

/// Min-cost transportation by successive shortest paths with potentials.
///
/// Nodes: 0 = super-source, 1..=ns sources, ns+1..=ns+nt sinks,
/// ns+nt+1 = super-sink. All arc costs are non-negative, so Dijkstra with
/// Johnson potentials stays exact throughout.
fn transport(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let ns = supply.len();
    let nt = demand.len();
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    if (total_supply - total_demand).abs() > 1e-6 {
        return Err(Error::param(format!(
            "unbalanced transport: supply {total_supply} vs demand {total_demand}"
        )));
    }
    if ns == 0 || nt == 0 {
        return Ok(0.0);
    }

    let n_nodes = ns + nt + 2;
    let source = 0usize;
    let sink = ns + nt + 1;

    // Arcs stored as (to, cost, capacity); `flow` tracked alongside.
    // `arc_of[v]` lists (arc index, is_forward) pairs incident to v.
    struct Arc {
        to: usize,
        from: usize,
        cost: f64,
        cap: f64,
        flow: f64,
    }
    let mut arcs: Vec<Arc> = Vec::with_capacity(ns + nt + ns * nt);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let push_arc =
        |arcs: &mut Vec<Arc>, out: &mut Vec<Vec<usize>>, from: usize, to: usize, cost: f64, cap: f64| {
            out[from].push(arcs.len());
            out[to].push(arcs.len());
            arcs.push(Arc { to, from, cost, cap, flow: 0.0 });
        };
    for (i, &s) in supply.iter().enumerate() {
        push_arc(&mut arcs, &mut out, source, 1 + i, 0.0, s);
    }
    for (j, &d) in demand.iter().enumerate() {
        push_arc(&mut arcs, &mut out, 1 + ns + j, sink, 0.0, d);
    }
    for i in 0..ns {
        for j in 0..nt {
            let c = cost(i, j);
            if !c.is_finite() || c < 0.0 {
                return Err(Error::param(format!("transport cost {c} must be >= 0")));
            }
            push_arc(&mut arcs, &mut out, 1 + i, 1 + ns + j, c, f64::INFINITY);
        }
    }

    const EPS_FLOW: f64 = 1e-15;
    let mut potential = vec![0.0f64; n_nodes];
    let mut remaining = total_supply.min(total_demand);
    let max_iterations = 4 * (ns + nt) * (ns + nt) + 64;

    for _ in 0..max_iterations {
        if remaining <= EPS_FLOW {
            break;
        }
        // Dijkstra over the residual graph with reduced costs.
        let mut dist = vec![f64::INFINITY; n_nodes];
        let mut prev: Vec<Option<(usize, bool)>> = vec![None; n_nodes];
        let mut done = vec![false; n_nodes];
        dist[source] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n_nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &ai in &out[u] {
                let arc = &arcs[ai];
                if arc.from == u && arc.cap - arc.flow > EPS_FLOW {
                    let rc = arc.cost + potential[u] - potential[arc.to];
                    let nd = dist[u] + rc.max(0.0);
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        prev[arc.to] = Some((ai, true));
                    }
                } else if arc.to == u && arc.flow > EPS_FLOW {
                    let rc = -arc.cost + potential[u] - potential[arc.from];
                    let nd = dist[u] + rc.max(0.0);
                    if nd < dist[arc.from] {
                        dist[arc.from] = nd;
                        prev[arc.from] = Some((ai, false));
                    }
                }
            }
        }
        if !dist[sink].is_finite() {
            break;
        }
        // Cap at the sink distance so reduced costs stay non-negative even
        // for nodes Dijkstra never settled.
        for v in 0..n_nodes {
            potential[v] += dist[v].min(dist[sink]);
        }
        // Bottleneck along the path, then augment.
        let mut bottleneck = remaining;
        let mut v = sink;
        while let Some((ai, forward)) = prev[v] {
            let arc = &arcs[ai];
            bottleneck = bottleneck.min(if forward { arc.cap - arc.flow } else { arc.flow });
            v = if forward { arc.from } else { arc.to };
        }
        if bottleneck <= EPS_FLOW {
            break;
        }
        let mut v = sink;
        while let Some((ai, forward)) = prev[v] {
            if forward {
                arcs[ai].flow += bottleneck;
                v = arcs[ai].from;
            } else {
                arcs[ai].flow -= bottleneck;
                v = arcs[ai].to;
            }
        }
        remaining -= bottleneck;
    }

    if remaining > 1e-9 {
        return Err(Error::param(format!(
            "transport solver failed to route {remaining} mass"
        )));
    }
    Ok(arcs.iter().map(|a| a.cost * a.flow).sum())
}
