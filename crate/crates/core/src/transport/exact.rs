//! Network simplex on the bipartite transportation polytope.
//!
//! The basis is a spanning tree over `n` supply and `m` demand nodes with
//! exactly `n + m - 1` basic cells, started from the northwest-corner rule.
//! Each pivot prices cells with node potentials, routes flow around the
//! unique cycle closed by the entering cell and drops one blocking cell.
//! Dantzig pricing is used until a run of degenerate pivots, after which
//! Bland's rule guarantees termination.

use std::collections::VecDeque;

use super::{check_pair, ground_cost, plan_cost, root, DiscreteMeasure, TransportPlan};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest support accepted by the exact solver.
pub const EXACT_SUPPORT_CAP: usize = 64;

/// Exact `W_p` and an optimal plan.
pub fn wasserstein_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<(f64, TransportPlan)> {
    wasserstein_exact_capped(mu, nu, p, EXACT_SUPPORT_CAP)
}

pub fn wasserstein_exact_capped(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    cap: usize,
) -> Result<(f64, TransportPlan)> {
    check_pair(mu, nu, p)?;
    for len in [mu.len(), nu.len()] {
        if len > cap {
            return Err(Error::SupportTooLarge { size: len, cap });
        }
    }
    let c = ground_cost(mu, nu, p);
    let t = solve_transport(mu.weights(), nu.weights(), &c)?;
    let cost = plan_cost(&t, &c);
    Ok((root(cost, p), TransportPlan { t, cost }))
}

struct Basis {
    n: usize,
    m: usize,
    cells: Vec<(usize, usize)>,
}

impl Basis {
    /// Tree adjacency: nodes `0..n` are rows, `n..n+m` columns. Each entry
    /// is `(neighbor, cell index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n + self.m];
        for (idx, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.n + j, idx));
            adj[self.n + j].push((i, idx));
        }
        adj
    }
}

/// Minimizes `<T, C>` subject to row sums `a` and column sums `b`.
pub(crate) fn solve_transport(a: &[f64], b: &[f64], c: &Matrix) -> Result<Matrix> {
    let (n, m) = (a.len(), b.len());
    let mut flow = Matrix::zeros(n, m);
    let mut basic = vec![false; n * m];
    let mut basis = Basis {
        n,
        m,
        cells: Vec::with_capacity(n + m - 1),
    };

    // Northwest corner: n + m - 1 cells forming a staircase tree.
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        flow[(i, j)] = x;
        basic[i * m + j] = true;
        basis.cells.push((i, j));
        ra[i] -= x;
        rb[j] -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    // Rounding in the weights leaves any imbalance on the last cell.
    flow[(n - 1, m - 1)] = flow[(n - 1, m - 1)].max(0.0);

    let scale = c.max_abs().max(1.0);
    let tol = 1e-12 * scale;
    let max_pivots = 50 * (n + m) * (n + m) + 1000;
    let mut degenerate_run = 0usize;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];

    for _ in 0..max_pivots {
        let adj = basis.adjacency();
        potentials(&adj, &basis, c, &mut u, &mut v);

        let bland = degenerate_run > n + m;
        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for r in 0..n {
            for s in 0..m {
                if basic[r * m + s] {
                    continue;
                }
                let reduced = c[(r, s)] - u[r] - v[s];
                if reduced < -tol {
                    if bland {
                        entering = Some((r, s, reduced));
                        break 'scan;
                    }
                    if entering.is_none_or(|e| reduced < e.2) {
                        entering = Some((r, s, reduced));
                    }
                }
            }
        }
        let Some((er, es, _)) = entering else {
            return Ok(flow);
        };

        // Tree path from row er to column es; edges alternate -, +, -, ...
        let path = tree_path(&adj, er, n + es);
        let mut theta = f64::INFINITY;
        let mut leave_pos = usize::MAX;
        for (pos, &cell) in path.iter().enumerate().step_by(2) {
            let (r, s) = basis.cells[cell];
            let f = flow[(r, s)];
            let better = f < theta
                || (f == theta && leave_pos != usize::MAX && (r, s) < basis.cells[path[leave_pos]]);
            if better {
                theta = f;
                leave_pos = pos;
            }
        }
        for (pos, &cell) in path.iter().enumerate() {
            let (r, s) = basis.cells[cell];
            if pos % 2 == 0 {
                flow[(r, s)] -= theta;
            } else {
                flow[(r, s)] += theta;
            }
        }
        flow[(er, es)] = theta;
        let leaving_cell = path[leave_pos];
        let (lr, ls) = basis.cells[leaving_cell];
        flow[(lr, ls)] = 0.0;
        basic[lr * m + ls] = false;
        basic[er * m + es] = true;
        basis.cells[leaving_cell] = (er, es);

        if theta <= tol * 1e-3 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
    }
    Err(Error::NoConvergence(
        "network simplex pivot limit reached".into(),
    ))
}

fn potentials(
    adj: &[Vec<(usize, usize)>],
    basis: &Basis,
    c: &Matrix,
    u: &mut [f64],
    v: &mut [f64],
) {
    let n = basis.n;
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    // The basis tree spans every node; root it at row 0 with u = 0.
    u[0] = 0.0;
    seen[0] = true;
    queue.push_back(0);
    while let Some(node) = queue.pop_front() {
        for &(next, cell) in &adj[node] {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            let (i, j) = basis.cells[cell];
            if next >= n {
                v[j] = c[(i, j)] - u[i];
            } else {
                u[i] = c[(i, j)] - v[j];
            }
            queue.push_back(next);
        }
    }
}

/// Cells on the tree path from node `from` to node `to`, in order.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(node) = queue.pop_front() {
        if node == to {
            break;
        }
        for &(next, cell) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, cell));
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = to;
    while let Some((prev, cell)) = parent[node] {
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn m1(points: &[f64], w: &[f64]) -> DiscreteMeasure {
        let rows: Vec<[f64; 1]> = points.iter().map(|&v| [v]).collect();
        DiscreteMeasure::new(Matrix::from_rows(&rows).unwrap(), w.to_vec()).unwrap()
    }

    #[test]
    fn single_atom_pair() {
        let (d, plan) = wasserstein_exact(&m1(&[0.0], &[1.0]), &m1(&[1.0], &[1.0]), 1.0).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(plan.t.as_slice(), &[1.0]);
    }

    #[test]
    fn identical_measures() {
        let mu = m1(&[0.0, 2.0, 3.5], &[0.2, 0.5, 0.3]);
        let (d, _) = wasserstein_exact(&mu, &mu, 2.0).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn forced_plan() {
        let mu = m1(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = m1(&[0.5], &[1.0]);
        let (d, plan) = wasserstein_exact(&mu, &nu, 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(plan.t.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn support_cap() {
        let pts: Vec<f64> = (0..5).map(f64::from).collect();
        let mu = m1(&pts, &[0.2; 5]);
        assert_eq!(
            wasserstein_exact_capped(&mu, &mu, 1.0, 4).unwrap_err(),
            Error::SupportTooLarge { size: 5, cap: 4 }
        );
    }

    #[test]
    fn crossing_is_uncrossed() {
        // 2x2 assignment where northwest corner starts on the wrong diagonal
        let mu = m1(&[0.0, 10.0], &[0.5, 0.5]);
        let nu = m1(&[10.0, 0.0], &[0.5, 0.5]);
        let (d, plan) = wasserstein_exact(&mu, &nu, 2.0).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(plan.t.as_slice(), &[0.0, 0.5, 0.5, 0.0]);
    }
}
