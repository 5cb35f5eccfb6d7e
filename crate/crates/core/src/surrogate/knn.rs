//! k-nearest-neighbor regression with neighbor-dispersion interval bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const LEAF_SIZE: usize = 16;

/// Point prediction for one objective with its empirical 90% bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub lo90: f64,
    pub hi90: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.index.cmp(&other.index))
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Euclidean KNN regressor over a k-d tree. Distance ties go to the lower
/// row index, so predictions are fully deterministic.
#[derive(Debug, Clone)]
pub struct KnnSurrogate {
    k: usize,
    dim: usize,
    points: Vec<f64>,
    /// `targets[j][row]`
    targets: Vec<Vec<f64>>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KnnSurrogate {
    /// `points` are rows in feature space; `targets` holds one column per
    /// objective, aligned with `points`.
    pub fn build(points: &[Vec<f64>], targets: Vec<Vec<f64>>, k: usize) -> Result<Self> {
        let rows = points.len();
        if k == 0 {
            return Err(Error::contract("k must be positive"));
        }
        if k > rows {
            return Err(Error::contract(format!("k = {k} exceeds the {rows} training points")));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::contract("training points must share a positive dimension"));
        }
        if targets.is_empty() || targets.iter().any(|t| t.len() != rows) {
            return Err(Error::contract("every target column must have one value per point"));
        }
        if points.iter().flatten().chain(targets.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::contract("training data must be finite"));
        }
        let mut model = Self {
            k,
            dim,
            points: points.iter().flatten().copied().collect(),
            targets,
            order: (0..rows).collect(),
            nodes: Vec::new(),
        };
        model.build_node(0, rows);
        Ok(model)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    fn coord(&self, row: usize, axis: usize) -> f64 {
        self.points[row * self.dim + axis]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = (0..self.dim)
            .map(|a| {
                let (lo, hi) = self.order[start..end].iter().fold((f64::MAX, f64::MIN), |(lo, hi), &r| {
                    let v = self.coord(r, a);
                    (lo.min(v), hi.max(v))
                });
                (a, hi - lo)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(a, _)| a)
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        let (points, dim) = (&self.points, self.dim);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * dim + axis].total_cmp(&points[b * dim + axis])
        });
        let value = self.coord(self.order[mid], axis);
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    fn distance2(&self, row: usize, query: &[f64]) -> f64 {
        let p = &self.points[row * self.dim..(row + 1) * self.dim];
        p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn search(&self, node: usize, query: &[f64], heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &row in &self.order[start..end] {
                    let cand = Candidate { dist2: self.distance2(row, query), index: row };
                    if heap.len() < self.k {
                        heap.push(cand);
                    } else if heap.peek().is_some_and(|worst| cand < *worst) {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, heap);
                // Equal bounds are still explored so index tie-breaks hold.
                if heap.len() < self.k || heap.peek().is_some_and(|w| diff * diff <= w.dist2) {
                    self.search(far, query, heap);
                }
            }
        }
    }

    /// The `k` nearest rows as `(squared distance, row)`, nearest first.
    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<(f64, usize)>> {
        if query.len() != self.dim {
            return Err(Error::contract(format!(
                "query has {} features, model expects {}",
                query.len(),
                self.dim
            )));
        }
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("query must be finite"));
        }
        let mut heap = BinaryHeap::with_capacity(self.k + 1);
        self.search(0, query, &mut heap);
        Ok(heap.into_sorted_vec().into_iter().map(|c| (c.dist2, c.index)).collect())
    }

    pub fn predict(&self, query: &[f64]) -> Result<Vec<Prediction>> {
        let neighbors = self.neighbors(query)?;
        let mut values = Vec::with_capacity(neighbors.len());
        Ok(self
            .targets
            .iter()
            .map(|column| {
                values.clear();
                values.extend(neighbors.iter().map(|&(_, row)| column[row]));
                summarize(&mut values)
            })
            .collect())
    }
}

/// Linear-interpolated percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(values: &mut [f64]) -> Prediction {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(f64::total_cmp);
    // A heavy single outlier can pull the mean outside the percentile band;
    // the band is widened to contain it.
    Prediction {
        mean,
        lo90: percentile(values, 0.05).min(mean),
        hi90: percentile(values, 0.95).max(mean),
    }
}
