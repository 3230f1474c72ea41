//! Ward clustering and external validation indices.

mod indices;
mod ward;

pub use indices::{
    adjusted_rand_index, fowlkes_mallows, fowlkes_mallows_checked, homogeneity_completeness,
    v_measure, ContingencyTable, FowlkesMallows, MetricsReport,
};
pub use ward::{ward_cluster, ward_with_trace, Merge};

use std::collections::HashMap;
use std::hash::Hash;

/// Cluster assignment with labels `0..c` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignments: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    /// Relabels arbitrary keys by first occurrence.
    pub fn from_raw<T: Eq + Hash + Clone>(raw: &[T]) -> Self {
        let mut codes: HashMap<T, usize> = HashMap::new();
        let assignments = raw
            .iter()
            .map(|v| {
                let next = codes.len();
                *codes.entry(v.clone()).or_insert(next)
            })
            .collect();
        Partition {
            assignments,
            n_clusters: codes.len(),
        }
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_clusters];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}
