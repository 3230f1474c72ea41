use crate::error::{Error, Result};

use super::Partition;

/// Co-occurrence counts between two partitions of the same points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "partition lengths differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let mut counts = vec![vec![0u64; b.n_clusters()]; a.n_clusters()];
        for (&i, &j) in a.assignments().iter().zip(b.assignments()) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..b.n_clusters())
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        Ok(ContingencyTable {
            counts,
            row_sums,
            col_sums,
            n: a.len() as u64,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().flatten().copied()
    }

    /// Pairs together in both, in `a`, and in `b`.
    fn pair_counts(&self) -> (f64, f64, f64) {
        let both: u64 = self.cells().map(pairs).sum();
        let rows: u64 = self.row_sums.iter().map(|&v| pairs(v)).sum();
        let cols: u64 = self.col_sums.iter().map(|&v| pairs(v)).sum();
        (both as f64, rows as f64, cols as f64)
    }
}

fn pairs(v: u64) -> u64 {
    v * v.saturating_sub(1) / 2
}

/// Adjusted Rand index; 0 when the maximum equals the expected index.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let (index, rows, cols) = t.pair_counts();
    let total = pairs(t.n) as f64;
    if total == 0.0 {
        return Ok(0.0);
    }
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(0.0);
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FowlkesMallows {
    pub value: f64,
    /// Set when no pair is co-clustered in one of the partitions.
    pub degenerate: bool,
}

pub fn fowlkes_mallows_checked(a: &Partition, b: &Partition) -> Result<FowlkesMallows> {
    let t = ContingencyTable::new(a, b)?;
    let (tp, rows, cols) = t.pair_counts();
    let denom = rows * cols;
    if denom == 0.0 {
        return Ok(FowlkesMallows {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(FowlkesMallows {
        value: tp / denom.sqrt(),
        degenerate: false,
    })
}

/// `TP / sqrt((TP + FP)(TP + FN))` over point pairs.
pub fn fowlkes_mallows(a: &Partition, b: &Partition) -> Result<f64> {
    fowlkes_mallows_checked(a, b).map(|f| f.value)
}

fn entropy(sizes: &[u64], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Homogeneity and completeness of clustering `pred` against classes `truth`.
pub fn homogeneity_completeness(truth: &Partition, pred: &Partition) -> Result<(f64, f64)> {
    let t = ContingencyTable::new(truth, pred)?;
    let n = t.n as f64;
    if t.n == 0 {
        return Ok((1.0, 1.0));
    }
    let h_c = entropy(&t.row_sums, n);
    let h_k = entropy(&t.col_sums, n);
    let mut h_c_given_k = 0.0;
    let mut h_k_given_c = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let v = v as f64;
            h_c_given_k -= v / n * (v / t.col_sums[j] as f64).ln();
            h_k_given_c -= v / n * (v / t.row_sums[i] as f64).ln();
        }
    }
    let h = if h_c == 0.0 {
        1.0
    } else {
        1.0 - h_c_given_k / h_c
    };
    let c = if h_k == 0.0 {
        1.0
    } else {
        1.0 - h_k_given_c / h_k
    };
    Ok((h, c))
}

/// Harmonic mean of homogeneity and completeness, natural-log entropies.
pub fn v_measure(truth: &Partition, pred: &Partition) -> Result<f64> {
    let (h, c) = homogeneity_completeness(truth, pred)?;
    if h + c == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * h * c / (h + c))
}

/// The three indices plus the number of clusters in the prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub ari: f64,
    pub fm: f64,
    pub vm: f64,
    pub n_clusters_found: usize,
}

impl MetricsReport {
    pub fn score(truth: &Partition, pred: &Partition) -> Result<Self> {
        Ok(MetricsReport {
            ari: adjusted_rand_index(truth, pred)?,
            fm: fowlkes_mallows(truth, pred)?,
            vm: v_measure(truth, pred)?,
            n_clusters_found: pred.n_clusters(),
        })
    }

    pub fn mean(&self) -> f64 {
        (self.ari + self.fm + self.vm) / 3.0
    }
}
