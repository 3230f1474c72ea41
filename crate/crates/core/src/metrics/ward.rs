use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

use super::Partition;

/// One agglomeration step: clusters `a < b` merged into slot `a`, at Ward
/// cost `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub delta: f64,
}

/// Ward agglomeration down to `n_clusters` groups.
pub fn ward_cluster(points: &Matrix, n_clusters: usize) -> Result<Partition> {
    let (partition, _) = ward_with_trace(points, n_clusters)?;
    Ok(partition)
}

/// Ward clustering that also returns the merge sequence.
///
/// Costs are the Ward increase `|a||b|/(|a|+|b|) * |mu_a - mu_b|^2`,
/// maintained with the Lance-Williams recurrence. Every cluster lives in
/// the slot of its smallest original member; the pair with minimal cost is
/// merged, ties going to the lexicographically smallest `(a, b)`. Each
/// slot caches its nearest higher-indexed partner so a step costs one scan
/// over slots plus the rows whose cache was invalidated.
pub fn ward_with_trace(points: &Matrix, n_clusters: usize) -> Result<(Partition, Vec<Merge>)> {
    let n = points.rows();
    if n_clusters == 0 || n_clusters > n {
        return Err(Error::InvalidInput(format!(
            "n_clusters = {n_clusters} must be in 1..={n}"
        )));
    }
    points.check_finite()?;

    // Condensed upper triangle.
    let idx = |i: usize, j: usize| -> usize {
        debug_assert!(i < j);
        i * n - i * (i + 1) / 2 + (j - i - 1)
    };
    let mut dist = vec![0.0; n * (n.saturating_sub(1)) / 2];
    for i in 0..n {
        for j in (i + 1)..n {
            dist[idx(i, j)] = 0.5 * squared_distance(points.row(i), points.row(j));
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut nn: Vec<(usize, f64)> = vec![(usize::MAX, f64::INFINITY); n];

    let refresh = |a: usize, active: &[bool], dist: &[f64]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for b in (a + 1)..n {
            if active[b] {
                let d = dist[idx(a, b)];
                if d < best.1 {
                    best = (b, d);
                }
            }
        }
        best
    };
    for (a, slot) in nn.iter_mut().enumerate() {
        *slot = refresh(a, &active, &dist);
    }

    let mut merges = Vec::with_capacity(n - n_clusters);
    for _ in 0..(n - n_clusters) {
        let mut a = usize::MAX;
        for s in 0..n {
            if active[s] && nn[s].0 != usize::MAX && (a == usize::MAX || nn[s].1 < nn[a].1) {
                a = s;
            }
        }
        let (b, delta) = nn[a];
        merges.push(Merge { a, b, delta });

        let (na, nb) = (size[a] as f64, size[b] as f64);
        let d_ab = dist[idx(a, b)];
        active[b] = false;
        for k in 0..n {
            if !active[k] || k == a {
                continue;
            }
            let nk = size[k] as f64;
            let d_ka = dist[idx(a.min(k), a.max(k))];
            let d_kb = dist[idx(b.min(k), b.max(k))];
            let updated = ((na + nk) * d_ka + (nb + nk) * d_kb - nk * d_ab) / (na + nb + nk);
            dist[idx(a.min(k), a.max(k))] = updated;
        }
        size[a] += size[b];
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }

        for k in 0..n {
            if !active[k] {
                continue;
            }
            if k == a || nn[k].0 == a || nn[k].0 == b {
                nn[k] = refresh(k, &active, &dist);
            } else if k < a {
                let d = dist[idx(k, a)];
                if d < nn[k].1 || (d == nn[k].1 && a < nn[k].0) {
                    nn[k] = (a, d);
                }
            }
        }
    }
    Ok((Partition::from_raw(&owner), merges))
}
