//! Hierarchically separated trees.
//!
//! An HST is a rooted tree in which all leaves sit at the same depth `D_T`
//! and every edge between level `ℓ−1` and level `ℓ` has the same weight
//! `r_ℓ`, with the weights halving per level: `r_{ℓ+1} = r_ℓ / 2`. The tree
//! metric on the leaves (sum of edge weights along the connecting path) is
//! what the estimators work with; embeddings that produce such trees live in
//! [`crate::embed`].
//!
//! A distribution on the leaves induces a function on the nodes — each node
//! carries the mass of its leaf subtree — represented by [`NodeFunction`].

use std::sync::atomic::{AtomicU64, Ordering};

use crate::dist::{DiscreteDistribution, Domain};
use crate::error::{Error, Result};

static NEXT_TREE_ID: AtomicU64 = AtomicU64::new(1);

const ROOT: usize = 0;

/// A hierarchically separated tree with leaves mapped to domain points.
#[derive(Debug)]
pub struct Hst {
    id: u64,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
    depth: usize,
    /// Weight of edges into level 1; level ℓ edges weigh `r₁ · 2^{1−ℓ}`.
    root_edge_weight: f64,
    /// Leaf node of each domain point (index = point id).
    leaf_of_point: Vec<usize>,
    /// Domain point of each node, for leaves.
    point_of_node: Vec<Option<usize>>,
}

impl Hst {
    /// Assemble a tree from parent links. `parent[0]` must be `None` (the
    /// root); nodes must be ordered so that parents precede children.
    /// `leaf_of_point[p]` names the leaf node carrying domain point `p`.
    pub fn from_parts(
        parent: Vec<Option<usize>>,
        root_edge_weight: f64,
        leaf_of_point: Vec<usize>,
    ) -> Result<Self> {
        let n = parent.len();
        if n == 0 || parent[0].is_some() {
            return Err(Error::TreeMismatch("node 0 must be the root".into()));
        }
        if !(root_edge_weight > 0.0) || !root_edge_weight.is_finite() {
            return Err(Error::param(format!(
                "root edge weight must be positive, got {root_edge_weight}"
            )));
        }
        let mut children = vec![Vec::new(); n];
        let mut level = vec![0usize; n];
        for (node, &p) in parent.iter().enumerate().skip(1) {
            let p = p.ok_or_else(|| Error::TreeMismatch(format!("node {node} has no parent")))?;
            if p >= node {
                return Err(Error::TreeMismatch("parents must precede children".into()));
            }
            level[node] = level[p] + 1;
            children[p].push(node);
        }
        let depth = level.iter().copied().max().unwrap_or(0);
        for (node, ch) in children.iter().enumerate() {
            if ch.is_empty() && level[node] != depth {
                return Err(Error::TreeMismatch(format!(
                    "leaf {node} at level {} but tree depth is {depth}",
                    level[node]
                )));
            }
        }
        let mut point_of_node = vec![None; n];
        for (point, &leaf) in leaf_of_point.iter().enumerate() {
            if leaf >= n || !children[leaf].is_empty() {
                return Err(Error::TreeMismatch(format!(
                    "point {point} mapped to non-leaf node {leaf}"
                )));
            }
            if point_of_node[leaf].is_some() {
                return Err(Error::TreeMismatch(format!("leaf {leaf} mapped twice")));
            }
            point_of_node[leaf] = Some(point);
        }
        Ok(Hst {
            id: NEXT_TREE_ID.fetch_add(1, Ordering::Relaxed),
            parent,
            children,
            level,
            depth,
            root_edge_weight,
            leaf_of_point,
            point_of_node,
        })
    }

    /// A complete `branching`-ary tree of the given depth; leaves are mapped
    /// to points `0..branching^depth` left to right.
    pub fn balanced(branching: usize, depth: usize, root_edge_weight: f64) -> Result<Self> {
        if branching < 1 {
            return Err(Error::param("branching factor must be at least 1"));
        }
        let mut parent = vec![None];
        let mut frontier = vec![ROOT];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * branching);
            for &node in &frontier {
                for _ in 0..branching {
                    parent.push(Some(node));
                    next.push(parent.len() - 1);
                }
            }
            frontier = next;
        }
        Hst::from_parts(parent, root_edge_weight, frontier)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> usize {
        ROOT
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn level(&self, node: usize) -> usize {
        self.level[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&v| self.is_leaf(v))
    }

    /// Nodes at a given level.
    pub fn nodes_at_level(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&v| self.level[v] == level)
    }

    pub fn leaf_of_point(&self, point: usize) -> Option<usize> {
        self.leaf_of_point.get(point).copied()
    }

    pub fn point_of_leaf(&self, node: usize) -> Option<usize> {
        self.point_of_node[node]
    }

    pub fn point_count(&self) -> usize {
        self.leaf_of_point.len()
    }

    /// Weight `r_ℓ` of the edges into level `ℓ ≥ 1`.
    pub fn level_edge_weight(&self, level: usize) -> f64 {
        debug_assert!(level >= 1 && level <= self.depth);
        self.root_edge_weight * (0.5f64).powi(level as i32 - 1)
    }

    pub fn root_edge_weight(&self) -> f64 {
        self.root_edge_weight
    }

    /// Weight of the edge from `node` to its parent.
    pub fn edge_weight(&self, node: usize) -> f64 {
        self.level_edge_weight(self.level[node])
    }

    /// Tree distance between two domain points: the total edge weight of the
    /// leaf-to-leaf path. Since all leaves share a level, this is twice the
    /// weight of the climb to the lowest common ancestor.
    pub fn tree_distance(&self, point_u: usize, point_v: usize) -> f64 {
        let mut u = self.leaf_of_point[point_u];
        let mut v = self.leaf_of_point[point_v];
        let mut total = 0.0;
        while u != v {
            total += self.edge_weight(u) + self.edge_weight(v);
            u = self.parent[u].expect("leaves share the root");
            v = self.parent[v].expect("leaves share the root");
        }
        total
    }

    /// Induce the node function of a distribution: leaves take the point
    /// weights, internal nodes the sum of their children (so the root is 1).
    pub fn node_function(&self, p: &DiscreteDistribution) -> Result<NodeFunction> {
        if p.len() != self.point_count() {
            return Err(Error::TreeMismatch(format!(
                "distribution over {} points, tree maps {}",
                p.len(),
                self.point_count()
            )));
        }
        let mut values = vec![0.0; self.node_count()];
        for (point, &w) in p.weights().iter().enumerate() {
            values[self.leaf_of_point[point]] = w;
        }
        // Children always follow parents in node order.
        for node in (1..self.node_count()).rev() {
            let parent = self.parent[node].unwrap();
            values[parent] += values[node];
        }
        values[ROOT] = 1.0;
        Ok(NodeFunction { tree_id: self.id, values })
    }

    /// Node function from sample counts at leaves (empirical masses).
    pub fn node_function_from_counts(&self, counts: &[u64], n: u64) -> Result<NodeFunction> {
        if counts.len() != self.point_count() {
            return Err(Error::TreeMismatch("counts do not match tree points".into()));
        }
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut tallies = vec![0u64; self.node_count()];
        for (point, &c) in counts.iter().enumerate() {
            tallies[self.leaf_of_point[point]] = c;
        }
        for node in (1..self.node_count()).rev() {
            tallies[self.parent[node].unwrap()] += tallies[node];
        }
        let values = tallies.into_iter().map(|t| t as f64 / n as f64).collect();
        Ok(NodeFunction { tree_id: self.id, values })
    }

    /// Turn leaf values of a node function into a distribution on the
    /// underlying domain.
    pub fn leaf_distribution(&self, f: &NodeFunction, domain: Domain) -> Result<DiscreteDistribution> {
        self.check_tree(f)?;
        if domain.len() != self.point_count() {
            return Err(Error::DomainMismatch("domain size does not match tree".into()));
        }
        let mut weights = vec![0.0; self.point_count()];
        for (point, &leaf) in self.leaf_of_point.iter().enumerate() {
            weights[point] = f.values[leaf];
        }
        DiscreteDistribution::new(domain, weights)
    }

    pub(crate) fn check_tree(&self, f: &NodeFunction) -> Result<()> {
        if f.tree_id == self.id && f.values.len() == self.node_count() {
            Ok(())
        } else {
            Err(Error::TreeMismatch("node function belongs to a different tree".into()))
        }
    }
}

/// A real value per tree node.
#[derive(Debug, Clone)]
pub struct NodeFunction {
    tree_id: u64,
    values: Vec<f64>,
}

impl NodeFunction {
    pub fn new(tree: &Hst, values: Vec<f64>) -> Result<Self> {
        if values.len() != tree.node_count() {
            return Err(Error::TreeMismatch("one value per node required".into()));
        }
        Ok(NodeFunction { tree_id: tree.id(), values })
    }

    pub fn tree_id(&self) -> u64 {
        self.tree_id
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// The nodes whose value strictly exceeds `alpha`, in node order.
pub fn active_nodes(f: &NodeFunction, alpha: f64) -> Vec<usize> {
    f.values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > alpha)
        .map(|(i, _)| i)
        .collect()
}

/// Active nodes restricted to one level.
pub fn active_nodes_at_level(tree: &Hst, f: &NodeFunction, level: usize, alpha: f64) -> Vec<usize> {
    tree.nodes_at_level(level).filter(|&v| f.value(v) > alpha).collect()
}
