//! Exact Euclidean neighbor queries.
//!
//! Queries go through a kd-tree and return exactly what a brute-force scan
//! would, including tie order: equal distances are broken by lower index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::{Result, SdcError};

/// A dense set of `d`-dimensional points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0, "points need at least one dimension");
        assert_eq!(coords.len() % dim, 0, "coordinate count not a multiple of dim");
        Self { dim, coords }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(1, Vec::len);
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    /// One-dimensional points.
    pub fn from_values(values: &[f64]) -> Self {
        Self::new(1, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Euclidean distance. Every distance comparison in the crate goes through
/// this function so that fast paths and oracles agree bit for bit.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// Neighbors of one query point, nearest first, query excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: usize,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

const LEAF_SIZE: usize = 12;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree over a borrowed [`PointSet`].
#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a PointSet,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a PointSet) -> Self {
        let mut tree = Self {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let pts = self.points;
        let dim = pts.dim();
        // Split on the axis of widest spread.
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (a, &c) in pts.point(i).iter().enumerate() {
                lo[a] = lo[a].min(c);
                hi[a] = hi[a].max(c);
            }
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap();
        if hi[axis] - lo[axis] <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts.point(a)[axis].total_cmp(&pts.point(b)[axis])
        });
        let value = pts.point(self.order[mid])[axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest points to point `query` other than itself.
    pub fn k_nearest(&self, query: usize, k: usize) -> Result<NeighborList> {
        if query >= self.len() {
            return Err(SdcError::QueryOutOfRange {
                index: query,
                len: self.len(),
            });
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 {
            self.search(0, self.points.point(query), query, k, &mut heap);
        }
        let mut neighbors = heap.into_vec();
        neighbors.sort();
        Ok(NeighborList { query, neighbors })
    }

    fn search(
        &self,
        node: usize,
        q: &[f64],
        exclude: usize,
        k: usize,
        heap: &mut BinaryHeap<Neighbor>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i == exclude {
                        continue;
                    }
                    let cand = Neighbor {
                        index: i,
                        distance: euclidean(q, self.points.point(i)),
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
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, exclude, k, heap);
                // Points equal to the split value can sit on either side, so
                // only prune when the far slab is strictly out of reach. The
                // slack absorbs rounding in `euclidean`.
                let reach = heap.peek().map_or(f64::INFINITY, |w| w.distance);
                if heap.len() < k || diff.abs() <= reach * (1.0 + 1e-12) {
                    self.search(far, q, exclude, k, heap);
                }
            }
        }
    }
}

/// Distance from each point to its closest other point.
pub fn nn_distances(points: &PointSet) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(SdcError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let tree = KdTree::build(points);
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| tree.k_nearest(i, 1).expect("index in range").neighbors[0].distance)
        .collect())
}

/// The `k` nearest other points to `points[query]`; shorter when fewer than
/// `k` other points exist.
pub fn k_nearest(points: &PointSet, query: usize, k: usize) -> Result<NeighborList> {
    KdTree::build(points).k_nearest(query, k)
}
