//! Exploration heuristics for the hybrid planner.
//!
//! On alternate iterations the hybrid planner asks a [`PlnStrategy`] for a
//! node to expand instead of doing nearest-neighbor selection. The strategy
//! sees every node insertion and removal, and draws any randomness it needs
//! from its own dedicated substream — so a strategy that proposes nothing
//! leaves the tree-growth iterations' random sequences completely unchanged.

use rand_chacha::ChaCha8Rng;

use crate::planners::tree::PlanTree;
use crate::types::{AugmentedState, Bounds};

pub trait PlnStrategy {
    /// A node was added to the tree.
    fn register(&mut self, id: u32, y: &AugmentedState);
    /// A node was pruned from the tree.
    fn unregister(&mut self, id: u32, y: &AugmentedState);
    /// Choose a node to expand, or `None` to skip this iteration.
    fn propose(&mut self, tree: &PlanTree, rng: &mut ChaCha8Rng) -> Option<u32>;
}

/// Never proposes anything. Useful to show that the hybrid's tree-growth
/// iterations are exactly the plain planner's iterations.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopPln;

impl PlnStrategy for NoopPln {
    fn register(&mut self, _id: u32, _y: &AugmentedState) {}
    fn unregister(&mut self, _id: u32, _y: &AugmentedState) {}
    fn propose(&mut self, _tree: &PlanTree, _rng: &mut ChaCha8Rng) -> Option<u32> {
        None
    }
}

/// Density-guided exploration: an occupancy grid over the first one or two
/// state coordinates plus the cost coordinate. Each proposal picks the
/// least-occupied non-empty cell (ties to the lowest cell index) and a
/// uniformly random node inside it, pushing expansion toward regions the
/// tree has barely covered.
#[derive(Debug, Clone)]
pub struct GridPln {
    /// Per grid axis: the state coordinate it bins (`None` = cost), with
    /// its value range.
    axes: Vec<(Option<usize>, f64, f64)>,
    bins: usize,
    cells: Vec<Vec<u32>>,
}

impl GridPln {
    /// Grid over the first `min(2, dim)` state axes and the cost axis
    /// (cost range `[0, c_max]`, values beyond clamp into the last bin).
    pub fn new(bounds: &Bounds, c_max: f64, bins: usize) -> Self {
        assert!(bins >= 2, "grid needs at least 2 bins per axis");
        let mut axes = Vec::new();
        for ax in 0..bounds.dim().min(2) {
            axes.push((Some(ax), bounds.min[ax], bounds.max[ax]));
        }
        axes.push((None, 0.0, c_max));
        let cells = vec![Vec::new(); bins.pow(axes.len() as u32)];
        Self { axes, bins, cells }
    }

    fn bin(&self, v: f64, lo: f64, hi: f64) -> usize {
        let t = (v - lo) / (hi - lo);
        let b = (t * self.bins as f64).floor();
        (b.max(0.0) as usize).min(self.bins - 1)
    }

    fn cell_of(&self, y: &AugmentedState) -> usize {
        let mut idx = 0;
        for &(axis, lo, hi) in &self.axes {
            let v = match axis {
                Some(a) => y.x.0[a],
                None => y.c,
            };
            idx = idx * self.bins + self.bin(v, lo, hi);
        }
        idx
    }

    #[cfg(test)]
    fn occupancy(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.len()).collect()
    }
}

impl PlnStrategy for GridPln {
    fn register(&mut self, id: u32, y: &AugmentedState) {
        let cell = self.cell_of(y);
        self.cells[cell].push(id);
    }

    fn unregister(&mut self, id: u32, y: &AugmentedState) {
        let cell = self.cell_of(y);
        if let Some(pos) = self.cells[cell].iter().position(|&v| v == id) {
            self.cells[cell].swap_remove(pos);
        }
    }

    fn propose(&mut self, tree: &PlanTree, rng: &mut ChaCha8Rng) -> Option<u32> {
        use rand::Rng;
        let mut best: Option<(usize, usize)> = None; // (len, cell index)
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            if best.map_or(true, |(len, _)| cell.len() < len) {
                best = Some((cell.len(), i));
            }
        }
        let (_, cell_idx) = best?;
        let cell = &self.cells[cell_idx];
        let id = cell[rng.random_range(0..cell.len())];
        debug_assert!(tree.node(id).alive, "grid holds only live nodes");
        let _ = tree;
        Some(id)
    }
}
