//! Exact k-nearest-neighbor queries on a kd-tree.
//!
//! Results are ordered by `(squared distance, index)`, the same order the
//! brute-force scan produces, so the two are interchangeable.

use std::collections::BinaryHeap;

use crate::linalg::{squared_distance, Matrix};

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

pub struct KdTree<'a> {
    x: &'a Matrix,
    order: Vec<usize>,
    root: Node,
}

/// Heap entry ordered by distance, then index, so the heap top is the
/// current worst candidate.
#[derive(PartialEq)]
struct Cand(f64, usize);

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl<'a> KdTree<'a> {
    pub fn new(x: &'a Matrix) -> Self {
        let mut order: Vec<usize> = (0..x.rows()).collect();
        let root = build(x, &mut order, 0);
        KdTree { x, order, root }
    }

    /// The `k` nearest rows to row `i`, excluding `i` itself.
    pub fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let q = self.x.row(i);
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.root, q, i, k, &mut heap);
        heap.into_sorted_vec().into_iter().map(|c| c.1).collect()
    }

    fn search(&self, node: &Node, q: &[f64], skip: usize, k: usize, heap: &mut BinaryHeap<Cand>) {
        match node {
            Node::Leaf { start, end } => {
                for &j in &self.order[*start..*end] {
                    if j == skip {
                        continue;
                    }
                    let c = Cand(squared_distance(q, self.x.row(j)), j);
                    if heap.len() < k {
                        heap.push(c);
                    } else if heap.peek().is_some_and(|w| c < *w) {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[*dim] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, skip, k, heap);
                // Equal bounds are still visited: a tie may carry a lower index.
                let bound = diff * diff;
                if heap.len() < k || heap.peek().is_some_and(|w| bound <= w.0) {
                    self.search(far, q, skip, k, heap);
                }
            }
        }
    }
}

fn build(x: &Matrix, idx: &mut [usize], offset: usize) -> Node {
    let len = idx.len();
    if len <= LEAF_SIZE {
        return Node::Leaf {
            start: offset,
            end: offset + len,
        };
    }
    let dim = (0..x.cols())
        .map(|d| {
            let (lo, hi) = idx
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(x[(i, d)]), hi.max(x[(i, d)]))
                });
            (hi - lo, d)
        })
        .fold(
            (f64::NEG_INFINITY, 0),
            |best, c| if c.0 > best.0 { c } else { best },
        )
        .1;
    let mid = len / 2;
    idx.select_nth_unstable_by(mid, |&a, &b| x[(a, dim)].total_cmp(&x[(b, dim)]));
    let value = x[(idx[mid], dim)];
    // Left holds coordinates <= value, right holds >= value.
    let (l, r) = idx.split_at_mut(mid);
    Node::Split {
        dim,
        value,
        left: Box::new(build(x, l, offset)),
        right: Box::new(build(x, r, offset + mid)),
    }
}
