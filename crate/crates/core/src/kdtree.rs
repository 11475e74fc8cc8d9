//! Static k-d tree over fixed-dimension real points.
//!
//! Ties between equidistant points resolve to the smaller point id, so
//! queries agree with a linear scan that keeps the first minimum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 16;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    /// Point coordinates in tree order.
    coords: Vec<f64>,
    /// Original id of each point in tree order.
    ids: Vec<u32>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    dist2: f64,
    id: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KdTree {
    /// `points` holds `n * dim` coordinates; point `i` gets id `i`.
    pub fn build(dim: usize, points: &[f64]) -> Self {
        assert!(dim > 0 && points.len() % dim == 0);
        let n = points.len() / dim;
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build_rec(dim, points, &mut order, 0, n, &mut nodes);
        }
        let mut coords = Vec::with_capacity(points.len());
        for &id in &order {
            let i = id as usize;
            coords.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        }
        KdTree {
            dim,
            coords,
            ids: order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Nearest point as `(id, squared distance)`.
    pub fn nearest(&self, q: &[f64]) -> Option<(u32, f64)> {
        self.k_nearest(q, 1).first().copied()
    }

    /// Up to `k` nearest points sorted by `(squared distance, id)`.
    pub fn k_nearest(&self, q: &[f64], k: usize) -> Vec<(u32, f64)> {
        assert_eq!(q.len(), self.dim);
        if self.nodes.is_empty() || k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, q, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.id, c.dist2)).collect()
    }

    fn knn_rec(&self, node: usize, q: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let cand = Candidate {
                        dist2: dist2(self.point(slot), q),
                        id: self.ids[slot],
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                let (near, far) = if delta <= 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near, q, k, heap);
                // `<=` keeps equidistant points on the far side eligible for the id tie-break
                if heap.len() < k || delta * delta <= heap.peek().unwrap().dist2 {
                    self.knn_rec(far, q, k, heap);
                }
            }
        }
    }

    /// Ids of all points with squared distance `<= r2`, ascending.
    pub fn within(&self, q: &[f64], r2: f64) -> Vec<u32> {
        assert_eq!(q.len(), self.dim);
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.within_rec(0, q, r2, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn within_rec(&self, node: usize, q: &[f64], r2: f64, out: &mut Vec<u32>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    if dist2(self.point(slot), q) <= r2 {
                        out.push(self.ids[slot]);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                if delta <= 0.0 || delta * delta <= r2 {
                    self.within_rec(left, q, r2, out);
                }
                if delta >= 0.0 || delta * delta <= r2 {
                    self.within_rec(right, q, r2, out);
                }
            }
        }
    }
}

fn build_rec(dim: usize, points: &[f64], order: &mut [u32], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let idx = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return idx;
    }
    // split on the axis of widest spread
    let slice = &order[start..end];
    let mut best_axis = 0;
    let mut best_spread = -1.0;
    for axis in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &id in slice {
            let v = points[id as usize * dim + axis];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best_axis = axis;
        }
    }
    if best_spread <= 0.0 {
        nodes.push(Node::Leaf { start, end });
        return idx;
    }
    let mid = (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid, |a, b| {
        points[*a as usize * dim + best_axis].total_cmp(&points[*b as usize * dim + best_axis])
    });
    let value = points[order[start + mid] as usize * dim + best_axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let left = build_rec(dim, points, order, start, start + mid, nodes);
    let right = build_rec(dim, points, order, start + mid, end, nodes);
    nodes[idx] = Node::Split {
        axis: best_axis,
        value,
        left,
        right,
    };
    idx
}
