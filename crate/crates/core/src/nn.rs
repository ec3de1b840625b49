//! Nearest-neighbor index over rescaled augmented points.
//!
//! A bucketed kd-tree with incremental insertion, tombstone deletion, and
//! periodic balanced rebuilds. Points are rescaled through a [`MetricMap`]
//! on the way in, and every distance the tree computes uses the same
//! arithmetic as [`linear_scan`](NnIndex::linear_scan), so the two always
//! agree exactly — including on ties, which both break toward the smallest
//! id. Results are therefore independent of tree shape; the shape only
//! affects speed.
//!
//! Split planes are chosen on the widest-spread axis of the points being
//! divided (planner workloads are strongly anisotropic: the cost coordinate
//! grows monotonically while state coordinates mix), and leaves hold a
//! bucket of points that is scanned exactly.

use crate::metric::{scaled_dist2, MetricMap};

const MAX_DIM: usize = 16;

/// Leaf capacity. Exceeding it splits the leaf on its widest axis.
const BUCKET: usize = 128;

/// How many coordinates a query buffer holds without allocating.
type QueryBuf = [f64; MAX_DIM];

#[derive(Debug, Clone)]
enum Node {
    Split { axis: u8, value: f64, left: u32, right: u32 },
    /// Indices into the point arrays, including tombstoned entries (they
    /// are skipped at query time and dropped at rebuild).
    Leaf { items: Vec<u32> },
}

/// kd-tree index over externally-owned ids.
#[derive(Debug, Clone)]
pub struct NnIndex {
    map: MetricMap,
    dim: usize,
    /// Flattened rescaled points, `dim` entries per item; append-only
    /// between rebuilds.
    points: Vec<f64>,
    ids: Vec<u32>,
    costs: Vec<f64>,
    alive: Vec<bool>,
    nodes: Vec<Node>,
    root: i32,
    live: usize,
    dead: usize,
    /// Live count that triggers the next balancing rebuild. Incremental
    /// insertion alone can degenerate badly (planner costs arrive in
    /// near-sorted order), so the tree rebalances every time it doubles.
    next_rebuild: usize,
}

impl NnIndex {
    pub fn new(map: MetricMap) -> Self {
        let dim = map.dim();
        assert!(dim > 0 && dim <= MAX_DIM, "index supports 1..={MAX_DIM} dims, got {dim}");
        Self {
            map,
            dim,
            points: Vec::new(),
            ids: Vec::new(),
            costs: Vec::new(),
            alive: Vec::new(),
            nodes: Vec::new(),
            root: -1,
            live: 0,
            dead: 0,
            next_rebuild: 64,
        }
    }

    pub fn len_live(&self) -> usize {
        self.live
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn map_query<'a>(&self, raw: &[f64], buf: &'a mut QueryBuf) -> &'a [f64] {
        debug_assert_eq!(raw.len(), self.dim);
        for (o, (v, s)) in buf.iter_mut().zip(raw.iter().zip(&self.map.scales)) {
            *o = v * s;
        }
        &buf[..self.dim]
    }

    /// Insert a point (raw, unscaled coordinates) under an external id.
    /// `cost` is the value [`remove_above_cost`](Self::remove_above_cost)
    /// filters on. Ids must arrive in strictly increasing order (they are
    /// tree node indices in practice), which keeps id lookup logarithmic.
    pub fn insert(&mut self, id: u32, raw_point: &[f64], cost: f64) {
        assert!(
            self.ids.last().map_or(true, |&last| last < id),
            "ids must be inserted in increasing order"
        );
        let mut buf: QueryBuf = [0.0; MAX_DIM];
        let mapped = self.map_query(raw_point, &mut buf);
        let idx = self.ids.len() as u32;
        self.points.extend_from_slice(mapped);
        self.ids.push(id);
        self.costs.push(cost);
        self.alive.push(true);
        self.live += 1;

        if self.root < 0 {
            self.nodes.clear();
            self.nodes.push(Node::Leaf { items: vec![idx] });
            self.root = 0;
            return;
        }
        let mut node = self.root as usize;
        loop {
            match &mut self.nodes[node] {
                Node::Split { axis, value, left, right } => {
                    node = if self.points[idx as usize * self.dim + *axis as usize]
                        < *value
                    {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { items } => {
                    items.push(idx);
                    if items.len() > BUCKET {
                        self.split_leaf(node);
                    }
                    break;
                }
            }
        }
        if self.live >= self.next_rebuild {
            self.rebuild();
        }
    }

    /// Spread (max - min) of the leaf's points along every axis.
    fn extent(&self, items: &[u32]) -> ([f64; MAX_DIM], [f64; MAX_DIM]) {
        let mut lo = [f64::INFINITY; MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; MAX_DIM];
        for &i in items {
            let p = self.point(i as usize);
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Pick the widest axis and the index at which a (coord, id)-sorted
    /// item list splits into non-empty `< value` / `>= value` halves.
    /// `None` when every point is identical on every axis.
    fn split_plan(&self, items: &mut [u32]) -> Option<(u8, f64, usize)> {
        let (lo, hi) = self.extent(items);
        let axis = (0..self.dim).max_by(|&a, &b| {
            (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).expect("finite spreads")
        })?;
        if !(hi[axis] - lo[axis] > 0.0) {
            return None;
        }
        items.sort_unstable_by(|&a, &b| {
            let ca = self.point(a as usize)[axis];
            let cb = self.point(b as usize)[axis];
            ca.partial_cmp(&cb).expect("finite coords").then(a.cmp(&b))
        });
        // Aim for the median, but the left half must be strictly below the
        // split value: back up over duplicates of the median coordinate,
        // and if the median equals the minimum, advance past it instead.
        let coord = |i: usize| self.point(items[i] as usize)[axis];
        let mut cut = items.len() / 2;
        let v = coord(cut);
        while cut > 0 && coord(cut - 1) == v {
            cut -= 1;
        }
        if cut == 0 {
            cut = 1;
            while coord(cut) == v {
                cut += 1;
            }
        }
        Some((axis as u8, coord(cut), cut))
    }

    fn split_leaf(&mut self, node: usize) {
        let mut items = match &mut self.nodes[node] {
            Node::Leaf { items } => std::mem::take(items),
            Node::Split { .. } => unreachable!("only leaves split"),
        };
        let Some((axis, value, cut)) = self.split_plan(&mut items) else {
            // All points identical: the leaf stays over-full, which scans
            // exactly like any other bucket.
            self.nodes[node] = Node::Leaf { items };
            return;
        };
        let right_items = items.split_off(cut);
        let left = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { items });
        let right = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { items: right_items });
        self.nodes[node] = Node::Split { axis, value, left, right };
    }

    /// Nearest live point to `raw_point`, as `(id, distance)`. Equidistant
    /// candidates resolve to the smallest id.
    pub fn nearest(&self, raw_point: &[f64]) -> Option<(u32, f64)> {
        if self.live == 0 {
            return None;
        }
        let mut buf: QueryBuf = [0.0; MAX_DIM];
        let q = self.map_query(raw_point, &mut buf);
        let mut best = (f64::INFINITY, u32::MAX);
        self.nearest_rec(self.root as u32, q, &mut best);

        #[cfg(debug_assertions)]
        {
            // Continuous oracle check: affordable only while small.
            if self.live <= 2048 {
                let scan = self.linear_scan(raw_point);
                debug_assert_eq!(
                    scan.map(|(id, d)| (id, d.to_bits())),
                    Some((best.1, best.0.sqrt().to_bits())),
                    "kd nearest disagrees with linear scan"
                );
            }
        }

        Some((best.1, best.0.sqrt()))
    }

    fn nearest_rec(&self, node: u32, q: &[f64], best: &mut (f64, u32)) {
        match &self.nodes[node as usize] {
            Node::Leaf { items } => {
                for &i in items {
                    if !self.alive[i as usize] {
                        continue;
                    }
                    let d2 = scaled_dist2(q, self.point(i as usize));
                    let id = self.ids[i as usize];
                    if d2 < best.0 || (d2 == best.0 && id < best.1) {
                        *best = (d2, id);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[*axis as usize] - *value;
                let (near, far) = if diff < 0.0 { (*left, *right) } else { (*right, *left) };
                self.nearest_rec(near, q, best);
                // The far half-space can still hold an equal-distance point
                // with a smaller id, so recurse on exact equality too.
                if diff * diff <= best.0 {
                    self.nearest_rec(far, q, best);
                }
            }
        }
    }

    /// All live ids within (closed) radius `r` of `raw_point`.
    pub fn within_radius(&self, raw_point: &[f64], r: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.within_radius_into(raw_point, r, &mut out);
        out
    }

    /// Allocation-free variant of [`within_radius`](Self::within_radius):
    /// clears `out` and fills it with the live ids in the ball.
    pub fn within_radius_into(&self, raw_point: &[f64], r: f64, out: &mut Vec<u32>) {
        out.clear();
        if self.live == 0 {
            return;
        }
        let mut buf: QueryBuf = [0.0; MAX_DIM];
        let q = self.map_query(raw_point, &mut buf);
        self.radius_rec(self.root as u32, q, r * r, out);
    }

    fn radius_rec(&self, node: u32, q: &[f64], r2: f64, out: &mut Vec<u32>) {
        match &self.nodes[node as usize] {
            Node::Leaf { items } => {
                for &i in items {
                    if self.alive[i as usize]
                        && scaled_dist2(q, self.point(i as usize)) <= r2
                    {
                        out.push(self.ids[i as usize]);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[*axis as usize] - *value;
                let (near, far) = if diff < 0.0 { (*left, *right) } else { (*right, *left) };
                self.radius_rec(near, q, r2, out);
                if diff * diff <= r2 {
                    self.radius_rec(far, q, r2, out);
                }
            }
        }
    }

    /// Tombstone every live entry with cost strictly above `threshold`.
    /// Returns how many entries were removed.
    pub fn remove_above_cost(&mut self, threshold: f64) -> usize {
        let mut removed = 0;
        for i in 0..self.ids.len() {
            if self.alive[i] && self.costs[i] > threshold {
                self.alive[i] = false;
                removed += 1;
            }
        }
        self.live -= removed;
        self.dead += removed;
        self.maybe_rebuild();
        removed
    }

    /// Tombstone one entry by external id (no-op if absent or already dead).
    pub fn remove(&mut self, id: u32) {
        if let Ok(i) = self.ids.binary_search(&id) {
            if self.alive[i] {
                self.alive[i] = false;
                self.live -= 1;
                self.dead += 1;
                self.maybe_rebuild();
            }
        }
    }

    fn maybe_rebuild(&mut self) {
        if self.dead > self.live {
            self.rebuild();
        }
    }

    /// Drop tombstones and rebuild a balanced tree over the survivors.
    /// Construction is deterministic: widest-axis splits with item order
    /// fixed by (coordinate, id).
    pub fn rebuild(&mut self) {
        let n = self.ids.len();
        let survivors: Vec<usize> = (0..n).filter(|&i| self.alive[i]).collect();

        let mut points = Vec::with_capacity(survivors.len() * self.dim);
        let mut ids = Vec::with_capacity(survivors.len());
        let mut costs = Vec::with_capacity(survivors.len());
        for &i in &survivors {
            points.extend_from_slice(self.point(i));
            ids.push(self.ids[i]);
            costs.push(self.costs[i]);
        }
        let live = survivors.len();
        self.points = points;
        self.ids = ids;
        self.costs = costs;
        self.alive = vec![true; live];
        self.live = live;
        self.dead = 0;
        self.next_rebuild = (live * 2).max(64);

        self.nodes.clear();
        if live == 0 {
            self.root = -1;
            return;
        }
        let mut items: Vec<u32> = (0..live as u32).collect();
        let root = self.build_balanced(&mut items);
        self.root = root as i32;
    }

    fn build_balanced(&mut self, items: &mut [u32]) -> u32 {
        if items.len() <= BUCKET {
            let node = self.nodes.len();
            self.nodes.push(Node::Leaf { items: items.to_vec() });
            return node as u32;
        }
        let Some((axis, value, cut)) = self.split_plan(items) else {
            // Identical points: one over-full leaf.
            let node = self.nodes.len();
            self.nodes.push(Node::Leaf { items: items.to_vec() });
            return node as u32;
        };
        let node = self.nodes.len();
        // Placeholder; the children are built next and then patched in.
        self.nodes.push(Node::Split { axis, value, left: 0, right: 0 });
        let (lo, hi) = items.split_at_mut(cut);
        let left = self.build_balanced(lo);
        let right = self.build_balanced(hi);
        match &mut self.nodes[node] {
            Node::Split { left: l, right: r, .. } => {
                *l = left;
                *r = right;
            }
            Node::Leaf { .. } => unreachable!(),
        }
        node as u32
    }

    /// Reference implementation: exhaustive scan over live entries with the
    /// same rescaled arithmetic as the tree. Public so tests and oracles can
    /// compare against it.
    pub fn linear_scan(&self, raw_point: &[f64]) -> Option<(u32, f64)> {
        let mut buf: QueryBuf = [0.0; MAX_DIM];
        let q = self.map_query(raw_point, &mut buf);
        let mut best = (f64::INFINITY, u32::MAX);
        for i in 0..self.ids.len() {
            if !self.alive[i] {
                continue;
            }
            let d2 = scaled_dist2(q, self.point(i));
            let id = self.ids[i];
            if d2 < best.0 || (d2 == best.0 && id < best.1) {
                best = (d2, id);
            }
        }
        if best.1 == u32::MAX { None } else { Some((best.1, best.0.sqrt())) }
    }

    /// Linear-scan version of [`within_radius`](Self::within_radius),
    /// returned sorted by id.
    pub fn linear_scan_radius(&self, raw_point: &[f64], r: f64) -> Vec<u32> {
        let mut buf: QueryBuf = [0.0; MAX_DIM];
        let q = self.map_query(raw_point, &mut buf);
        let r2 = r * r;
        let mut out: Vec<u32> = (0..self.ids.len())
            .filter(|&i| self.alive[i] && scaled_dist2(q, self.point(i)) <= r2)
            .map(|i| self.ids[i])
            .collect();
        out.sort_unstable();
        out
    }
}
