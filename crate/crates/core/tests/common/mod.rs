//! Independent reference implementations used as test oracles. Each one
//! takes the slow, obvious route so it shares no code path with the crate.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use gtsa_core::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(n: usize, d: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let data = (0..n * d).map(|_| r.random_range(-1.0..1.0)).collect();
    Matrix::from_vec(n, d, data).unwrap()
}

pub fn random_symmetric(n: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = r.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Two noisy concentric circles, outer radius 1 and inner 0.5, evenly
/// spaced angles, labels 0 (outer) and 1 (inner).
pub fn circles(n: usize, noise: f64, seed: u64) -> (Matrix, Vec<usize>) {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, noise).unwrap();
    let half = n / 2;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (c, radius) in [1.0, 0.5].into_iter().enumerate() {
        for i in 0..half {
            let t = 2.0 * std::f64::consts::PI * i as f64 / half as f64;
            rows.push([
                radius * t.cos() + normal.sample(&mut r),
                radius * t.sin() + normal.sample(&mut r),
            ]);
            labels.push(c);
        }
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

pub fn iris_path() -> String {
    format!(
        "{}/tests/fixtures/iris.csv",
        env!("CARGO_MANIFEST_DIR").replace("/cli", "/core")
    )
}

// ---------------------------------------------------------------- eigen

/// Full symmetric eigendecomposition by shifted power iteration with
/// Hotelling deflation, descending eigenvalues, each vector flipped so its
/// largest-magnitude entry is positive.
pub fn eig_oracle(m: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.rows();
    let shift = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m[(i, j)] + if i == j { shift } else { 0.0 })
                .collect()
        })
        .collect();
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    for k in 0..n {
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7 + k * 3) % 11) as f64)
            .collect();
        orthogonalize(&mut v, &vectors);
        let mut lambda = 0.0;
        for _ in 0..200_000 {
            let mut w: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| b[i][j] * v[j]).sum())
                .collect();
            orthogonalize(&mut w, &vectors);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let diff: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = w;
            lambda = norm;
            if diff < 1e-15 {
                break;
            }
        }
        // Rayleigh quotient on the original matrix
        let mv: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)] * v[j]).sum())
            .collect();
        let rq: f64 = mv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let _ = lambda;
        for i in 0..n {
            for j in 0..n {
                b[i][j] -= (rq + shift) * v[i] * v[j];
            }
        }
        let big = v.iter().enumerate().fold(
            0,
            |best, (i, x)| if x.abs() > v[best].abs() { i } else { best },
        );
        if v[big] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        values.push(rq);
        vectors.push(v);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    (
        order.iter().map(|&i| values[i]).collect(),
        order.iter().map(|&i| vectors[i].clone()).collect(),
    )
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
    }
}

/// Symmetric 2x2 eigenpairs in closed form, descending, sign rule applied.
pub fn eig2(a: f64, b: f64, d: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let l = [mid + rad, mid - rad];
    let mut vecs = [[0.0; 2]; 2];
    for (k, &lam) in l.iter().enumerate() {
        let v = if b.abs() > 1e-300 {
            // (A - lam I) v = 0 from either row; take the better-conditioned one
            let r1 = [b, lam - a];
            let r2 = [lam - d, b];
            if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) {
                r1
            } else {
                r2
            }
        } else if (a >= d) == (k == 0) {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        let n = v[0].hypot(v[1]);
        let mut v = [v[0] / n, v[1] / n];
        let big = if v[1].abs() > v[0].abs() { 1 } else { 0 };
        if v[big] < 0.0 {
            v = [-v[0], -v[1]];
        }
        vecs[k] = v;
    }
    (l, vecs)
}

// ---------------------------------------------------------------- graphs

/// All-pairs shortest paths on an undirected weighted edge list.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(i, j, w) in edges {
        d[i][j] = d[i][j].min(w);
        d[j][i] = d[j][i].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// `k` nearest other rows by a full sort on (distance, index).
pub fn knn_oracle(x: &Matrix, i: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..x.rows())
        .filter(|&j| j != i)
        .map(|j| {
            let d: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d, j)
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, j)| j).collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------- transport

/// Minimum of `sum c_ij t_ij` over transport plans with marginals `a`, `b`,
/// by a dense two-phase tableau simplex with Bland's rule.
pub fn transport_lp(a: &[f64], b: &[f64], c: &[Vec<f64>]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let nv = n * m;
    // Drop the last column constraint: it is implied by the others.
    let rows = n + m - 1;
    let mut a_eq = vec![vec![0.0; nv]; rows];
    let mut rhs = vec![0.0; rows];
    for i in 0..n {
        for j in 0..m {
            a_eq[i][i * m + j] = 1.0;
        }
        rhs[i] = a[i];
    }
    for j in 0..m - 1 {
        for i in 0..n {
            a_eq[n + j][i * m + j] = 1.0;
        }
        rhs[n + j] = b[j];
    }
    let cost: Vec<f64> = (0..nv).map(|v| c[v / m][v % m]).collect();
    simplex_eq(&a_eq, &rhs, &cost)
}

/// `min c.x` s.t. `A x = b`, `x >= 0`, `b >= 0`.
fn simplex_eq(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let rows = a.len();
    let nv = c.len();
    let width = nv + rows + 1;
    // Tableau with artificials nv..nv+rows and the rhs in the last column.
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            let mut row = a[r].clone();
            row.extend((0..rows).map(|k| if k == r { 1.0 } else { 0.0 }));
            row.push(b[r]);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (nv..nv + rows).collect();
    let phase1: Vec<f64> = (0..nv + rows)
        .map(|v| if v >= nv { 1.0 } else { 0.0 })
        .collect();
    run_simplex(&mut t, &mut basis, &phase1, nv + rows, width);
    // Drive remaining artificials out of the basis where possible.
    for r in 0..rows {
        if basis[r] >= nv {
            if let Some(col) = (0..nv).find(|&v| t[r][v].abs() > 1e-12) {
                pivot(&mut t, r, col);
                basis[r] = col;
            }
        }
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, rows));
    run_simplex(&mut t, &mut basis, &phase2, nv, width);
    basis
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < nv)
        .map(|(r, &v)| c[v] * t[r][width - 1])
        .sum()
}

fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    allowed: usize,
    width: usize,
) {
    loop {
        // reduced costs c_j - c_B B^-1 A_j
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z: f64 = basis
                .iter()
                .enumerate()
                .map(|(r, &bv)| cost[bv] * t[r][j])
                .sum();
            cost[j] - z < -1e-12
        });
        let Some(j) = entering else { return };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..t.len() {
            if t[r][j] > 1e-12 {
                let ratio = t[r][width - 1] / t[r][j];
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-15 || (ratio <= lratio + 1e-15 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.expect("transport LP is bounded");
        pivot(t, r, j);
        basis[r] = j;
    }
}

fn pivot(t: &mut [Vec<f64>], r: usize, j: usize) {
    let p = t[r][j];
    t[r].iter_mut().for_each(|x| *x /= p);
    let prow = t[r].clone();
    for (k, row) in t.iter_mut().enumerate() {
        if k != r && row[j] != 0.0 {
            let f = row[j];
            row.iter_mut().zip(&prow).for_each(|(x, y)| *x -= f * y);
        }
    }
}

/// `W_p` between point clouds with weights, via [`transport_lp`].
pub fn wasserstein_lp(xs: &Matrix, a: &[f64], ys: &Matrix, b: &[f64], p: f64) -> f64 {
    let c: Vec<Vec<f64>> = xs
        .iter_rows()
        .map(|x| ys.iter_rows().map(|y| euclid(x, y).powf(p)).collect())
        .collect();
    transport_lp(a, b, &c).max(0.0).powf(1.0 / p)
}

/// Equal-size uniform measures: the LP optimum is attained at a
/// permutation, so enumerate them all.
pub fn wasserstein_by_permutations(xs: &Matrix, ys: &Matrix, p: f64) -> f64 {
    let n = xs.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |pm| {
        let c: f64 = (0..n)
            .map(|i| euclid(xs.row(i), ys.row(pm[i])).powf(p))
            .sum();
        best = best.min(c / n as f64);
    });
    best.powf(1.0 / p)
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

pub fn random_weights(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut w: Vec<f64> = w.iter().map(|x| x / s).collect();
    // make the sum exactly representable as 1 within 1e-12
    let rest: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - rest;
    w
}

// ---------------------------------------------------------------- clustering

/// Pair counts over all `i < j`: (together in both, in a, in b, total).
pub fn pair_counts(a: &[usize], b: &[usize]) -> (f64, f64, f64, f64) {
    let (mut both, mut in_a, mut in_b, mut total) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            both += f64::from(u8::from(sa && sb));
            in_a += f64::from(u8::from(sa));
            in_b += f64::from(u8::from(sb));
            total += 1.0;
        }
    }
    (both, in_a, in_b, total)
}

pub fn ari_oracle(a: &[usize], b: &[usize]) -> f64 {
    let (index, sa, sb, total) = pair_counts(a, b);
    if total == 0.0 {
        return 0.0;
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if max == expected {
        0.0
    } else {
        (index - expected) / (max - expected)
    }
}

pub fn fm_oracle(a: &[usize], b: &[usize]) -> f64 {
    let (tp, sa, sb, _) = pair_counts(a, b);
    if sa * sb == 0.0 {
        0.0
    } else {
        tp / (sa * sb).sqrt()
    }
}

fn entropy_of(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    counts.values().map(|&c| -(c / n) * (c / n).ln()).sum()
}

/// `H(X | Y)` straight from the joint distribution.
fn conditional_entropy(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut marg: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *joint.entry((a, b)).or_default() += 1.0;
        *marg.entry(b).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|(&(_, b), &c)| -(c / n) * (c / marg[&b]).ln())
        .sum()
}

pub fn vm_oracle(truth: &[usize], pred: &[usize]) -> f64 {
    let hc = entropy_of(truth);
    let hk = entropy_of(pred);
    let h = if hc == 0.0 {
        1.0
    } else {
        1.0 - conditional_entropy(truth, pred) / hc
    };
    let c = if hk == 0.0 {
        1.0
    } else {
        1.0 - conditional_entropy(pred, truth) / hk
    };
    if h + c == 0.0 {
        0.0
    } else {
        2.0 * h * c / (h + c)
    }
}

/// Ward by recomputing every cluster-pair cost from the members at each
/// step. Cost of merging A and B: `|A||B|/(|A|+|B|) * |c_A - c_B|^2`.
/// Clusters are named by their smallest member; ties go to the
/// lexicographically smallest pair. Returns first-occurrence labels and
/// the merge trace `(a, b, cost)`.
pub fn ward_oracle(x: &Matrix, n_clusters: usize) -> (Vec<usize>, Vec<(usize, usize, f64)>) {
    let n = x.rows();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut trace = Vec::new();
    let centroid = |c: &[usize]| -> Vec<f64> {
        (0..x.cols())
            .map(|d| c.iter().map(|&i| x[(i, d)]).sum::<f64>() / c.len() as f64)
            .collect()
    };
    while clusters.len() > n_clusters {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let d2 = euclid(&centroid(&clusters[a]), &centroid(&clusters[b])).powi(2);
                let cost = na * nb / (na + nb) * d2;
                let (ka, kb) = (clusters[a][0], clusters[b][0]);
                let take = match best {
                    None => true,
                    Some((bc, ba, bb)) => {
                        cost < bc || (cost == bc && (ka, kb) < (clusters[ba][0], clusters[bb][0]))
                    }
                };
                if take {
                    best = Some((cost, a, b));
                }
            }
        }
        let (cost, a, b) = best.unwrap();
        let (ka, kb) = (clusters[a][0], clusters[b][0]);
        trace.push((ka.min(kb), ka.max(kb), cost));
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        clusters.sort_by_key(|c| c[0]);
    }
    let mut owner = vec![0; n];
    for (k, c) in clusters.iter().enumerate() {
        for &i in c {
            owner[i] = k;
        }
    }
    // first-occurrence renumbering
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let labels = owner
        .iter()
        .map(|o| {
            let next = seen.len();
            *seen.entry(*o).or_insert(next)
        })
        .collect();
    (labels, trace)
}

// ---------------------------------------------------------------- geometry

/// Covariance of `pts` about `center`, double loop, divided by `pts.len()`.
pub fn covariance_oracle(pts: &[Vec<f64>], center: &[f64], weights: Option<&[f64]>) -> Matrix {
    let d = center.len();
    let mut c = Matrix::zeros(d, d);
    let mut z = 0.0;
    for (t, p) in pts.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[t]);
        z += w;
        for r in 0..d {
            for s in 0..d {
                c[(r, s)] += w * (p[r] - center[r]) * (p[s] - center[s]);
            }
        }
    }
    for v in 0..d * d {
        c[(v / d, v % d)] /= z;
    }
    c
}
