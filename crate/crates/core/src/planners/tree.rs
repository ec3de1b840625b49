//! The search tree shared by all tree-based planners.
//!
//! Nodes live in the augmented space: each carries a state plus the exact
//! cost accumulated from the root. Edges store only the control segment and
//! its integrated cost increment — full state paths are recomputed on demand
//! by replaying the schedule, which is bit-exact because propagation is
//! deterministic.

use crate::error::{Error, Result};
use crate::types::{AugmentedState, ControlSegment};

/// What it took to get from a node's parent to the node.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInfo {
    pub segment: ControlSegment,
    /// Cost integrated along this edge alone.
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub y: AugmentedState,
    pub parent: Option<u32>,
    /// `None` exactly for the root.
    pub edge: Option<EdgeInfo>,
    /// False once the node has been pruned or deleted.
    pub alive: bool,
    /// Number of live children, maintained so leaf status is O(1).
    pub live_children: u32,
}

/// An append-only tree over augmented states with tombstone deletion.
///
/// The central invariant — checked on every insertion and re-checkable at
/// any time — is exact cost bookkeeping: a child's accumulated cost is
/// bit-for-bit equal to its parent's plus the edge increment. Planners rely
/// on this to prune by cost threshold without floating-point edge cases.
#[derive(Debug, Clone)]
pub struct PlanTree {
    nodes: Vec<TreeNode>,
    live: usize,
}

impl PlanTree {
    pub fn new(root: AugmentedState) -> Self {
        Self {
            nodes: vec![TreeNode {
                y: root,
                parent: None,
                edge: None,
                alive: true,
                live_children: 0,
            }],
            live: 1,
        }
    }

    /// Total nodes ever added, dead ones included (ids index this range).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes currently alive.
    pub fn live(&self) -> usize {
        self.live
    }

    pub fn node(&self, id: u32) -> &TreeNode {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Add a child of `parent`. The child's accumulated cost must equal
    /// `parent.c + edge.cost` exactly — callers compute it with that single
    /// addition, so the assertion costs nothing and catches every drift bug.
    pub fn add_child(&mut self, parent: u32, y: AugmentedState, edge: EdgeInfo) -> u32 {
        let p = &self.nodes[parent as usize];
        assert!(p.alive, "cannot extend a dead node");
        assert_eq!(
            y.c.to_bits(),
            (p.y.c + edge.cost).to_bits(),
            "cost bookkeeping must be exact: child.c != parent.c + edge.cost"
        );
        let id = self.nodes.len() as u32;
        self.nodes.push(TreeNode {
            y,
            parent: Some(parent),
            edge: Some(edge),
            alive: true,
            live_children: 0,
        });
        self.nodes[parent as usize].live_children += 1;
        self.live += 1;
        id
    }

    /// Tombstone one node and update its parent's live-child count.
    /// Panics if the node is already dead or still has live children.
    pub fn mark_dead(&mut self, id: u32) {
        let node = &mut self.nodes[id as usize];
        assert!(node.alive, "node {id} is already dead");
        node.alive = false;
        let parent = node.parent;
        self.live -= 1;
        if let Some(p) = parent {
            self.nodes[p as usize].live_children -= 1;
        }
    }

    /// Tombstone every live node with accumulated cost strictly above
    /// `threshold`, appending the removed ids to `removed`.
    ///
    /// Because edge costs are non-negative, cost is monotone along every
    /// path, so the removed set is automatically closed under descendants:
    /// no live node is ever left with a dead ancestor.
    pub fn prune_above(&mut self, threshold: f64, removed: &mut Vec<u32>) {
        for id in 0..self.nodes.len() {
            let node = &mut self.nodes[id];
            if node.alive && node.y.c > threshold {
                node.alive = false;
                self.live -= 1;
                removed.push(id as u32);
                if let Some(p) = node.parent {
                    self.nodes[p as usize].live_children -= 1;
                }
            }
        }
    }

    /// Ids along the root-to-`id` path, root first.
    pub fn path_ids(&self, id: u32) -> Vec<u32> {
        let mut ids = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur as usize].parent {
            ids.push(p);
            cur = p;
        }
        ids.reverse();
        ids
    }

    /// The control schedule reaching `id`, in application order.
    pub fn schedule(&self, id: u32) -> Vec<ControlSegment> {
        let mut segs: Vec<ControlSegment> = Vec::new();
        let mut cur = id;
        while let Some(edge) = &self.nodes[cur as usize].edge {
            segs.push(edge.segment.clone());
            cur = self.nodes[cur as usize].parent.expect("non-root node has a parent");
        }
        segs.reverse();
        segs
    }

    /// Largest accumulated cost over live nodes.
    pub fn max_live_cost(&self) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.alive)
            .map(|n| n.y.c)
            .fold(0.0, f64::max)
    }

    /// Re-verify the structural invariants over the whole tree: every live
    /// non-root node has a live parent, and its accumulated cost equals the
    /// parent's plus the edge increment with zero float error.
    pub fn validate_bookkeeping(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.alive {
                continue;
            }
            match (node.parent, &node.edge) {
                (None, None) => {}
                (Some(p), Some(edge)) => {
                    let parent = &self.nodes[p as usize];
                    if !parent.alive {
                        return Err(Error::Parameter(format!(
                            "live node {i} has dead parent {p}"
                        )));
                    }
                    let expect = parent.y.c + edge.cost;
                    if node.y.c.to_bits() != expect.to_bits() {
                        return Err(Error::Parameter(format!(
                            "cost bookkeeping violated at node {i}: {} != {} + {}",
                            node.y.c, parent.y.c, edge.cost
                        )));
                    }
                    if edge.cost < 0.0 {
                        return Err(Error::Parameter(format!(
                            "negative edge cost at node {i}"
                        )));
                    }
                }
                _ => {
                    return Err(Error::Parameter(format!(
                        "node {i} has inconsistent parent/edge presence"
                    )));
                }
            }
        }
        Ok(())
    }
}
