use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::KnnGraph;
use crate::linalg::{dot, Matrix, SymOperator};

/// Per-point orthonormal tangent frames, each `D x p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasisSet {
    pub bases: Vec<Matrix>,
}

impl LocalBasisSet {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn p(&self) -> usize {
        self.bases.first().map_or(0, Matrix::cols)
    }

    pub fn basis(&self, i: usize) -> &Matrix {
        &self.bases[i]
    }
}

/// `|tr(U_i^T U_j)|`, the absolute Frobenius inner product of two frames.
pub fn subspace_affinity(u_i: &Matrix, u_j: &Matrix) -> Result<f64> {
    if u_i.rows() != u_j.rows() || u_i.cols() != u_j.cols() {
        return Err(Error::InvalidInput(format!(
            "frames of shape {}x{} and {}x{}",
            u_i.rows(),
            u_i.cols(),
            u_j.rows(),
            u_j.cols()
        )));
    }
    // Row-major storage: the trace is the plain dot product of the buffers.
    Ok(dot(u_i.as_slice(), u_j.as_slice()).abs())
}

/// Geodesic distances handed to [`alignment_matrix`].
#[derive(Debug, Clone, Copy)]
pub enum Geodesics<'a> {
    /// All pairs, `n x n`.
    Dense(&'a Matrix),
    /// Per edge, aligned with [`KnnGraph::neighbors`].
    Edges(&'a [Vec<f64>]),
}

/// Symmetric edge-sparse matrix in compressed rows, columns sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_start[i]..self.row_start[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(t) => self.vals[r.start + t],
            Err(_) => 0.0,
        }
    }
}

/// Global alignment operator
/// `A_ij = |tr(U_i^T U_j)| / (1 + d_G(i, j))`.
#[derive(Debug, Clone, PartialEq)]
pub enum AlignmentMatrix {
    Dense(Matrix),
    /// Graph edges and the diagonal only.
    Sparse(SparseSym),
}

impl AlignmentMatrix {
    pub fn n(&self) -> usize {
        match self {
            AlignmentMatrix::Dense(m) => m.rows(),
            AlignmentMatrix::Sparse(s) => s.n,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, AlignmentMatrix::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            AlignmentMatrix::Dense(m) => m[(i, j)],
            AlignmentMatrix::Sparse(s) => s.get(i, j),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            AlignmentMatrix::Dense(m) => m.clone(),
            AlignmentMatrix::Sparse(s) => {
                let mut m = Matrix::zeros(s.n, s.n);
                for i in 0..s.n {
                    for (j, v) in s.row(i) {
                        m[(i, j)] = v;
                    }
                }
                m
            }
        }
    }

    /// Text dump: `n` on the first line, then `i j value` for each stored
    /// nonzero entry in row order.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.n();
        writeln!(out, "{n}")?;
        match self {
            AlignmentMatrix::Dense(m) => {
                for i in 0..n {
                    for j in 0..n {
                        if m[(i, j)] != 0.0 {
                            writeln!(out, "{i} {j} {}", m[(i, j)])?;
                        }
                    }
                }
            }
            AlignmentMatrix::Sparse(s) => {
                for i in 0..n {
                    for (j, v) in s.row(i).filter(|&(_, v)| v != 0.0) {
                        writeln!(out, "{i} {j} {v}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl SymOperator for AlignmentMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            AlignmentMatrix::Dense(m) => m.apply(x, y),
            AlignmentMatrix::Sparse(s) => {
                y.par_iter_mut().enumerate().for_each(|(i, yi)| {
                    *yi = s.row(i).map(|(j, v)| v * x[j]).sum();
                });
            }
        }
    }

    fn frobenius_norm(&self) -> f64 {
        match self {
            AlignmentMatrix::Dense(m) => m.frobenius_norm(),
            AlignmentMatrix::Sparse(s) => s.vals.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

/// Treatment of pairs with no connecting path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unreachable {
    Error,
    /// `1 / (1 + inf) = 0`: frames in different components do not couple.
    Decouple,
}

fn entry(
    bases: &LocalBasisSet,
    i: usize,
    j: usize,
    d: f64,
    unreachable: Unreachable,
) -> Result<f64> {
    if d == f64::INFINITY && unreachable == Unreachable::Decouple {
        return Ok(0.0);
    }
    if !d.is_finite() {
        return Err(Error::Unreachable { from: i, target: j });
    }
    Ok(subspace_affinity(&bases.bases[i], &bases.bases[j])? / (1.0 + d))
}

/// Builds the alignment matrix. The upper triangle is computed and
/// mirrored, so the result is exactly symmetric. Infinite geodesics are
/// an error.
pub fn alignment_matrix(
    bases: &LocalBasisSet,
    geodesics: Geodesics<'_>,
    graph: &KnnGraph,
) -> Result<AlignmentMatrix> {
    alignment_matrix_with(bases, geodesics, graph, Unreachable::Error)
}

pub fn alignment_matrix_with(
    bases: &LocalBasisSet,
    geodesics: Geodesics<'_>,
    graph: &KnnGraph,
    unreachable: Unreachable,
) -> Result<AlignmentMatrix> {
    let n = bases.len();
    match geodesics {
        Geodesics::Dense(d) => {
            if d.rows() != n || d.cols() != n {
                return Err(Error::InvalidInput(format!(
                    "geodesic matrix is {}x{}, expected {n}x{n}",
                    d.rows(),
                    d.cols()
                )));
            }
            let upper: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    (i..n)
                        .map(|j| entry(bases, i, j, d[(i, j)], unreachable))
                        .collect()
                })
                .collect::<Result<_>>()?;
            let mut a = Matrix::zeros(n, n);
            for (i, row) in upper.iter().enumerate() {
                for (t, &v) in row.iter().enumerate() {
                    a[(i, i + t)] = v;
                    a[(i + t, i)] = v;
                }
            }
            Ok(AlignmentMatrix::Dense(a))
        }
        Geodesics::Edges(d) => {
            if graph.n() != n || d.len() != n {
                return Err(Error::InvalidInput(format!(
                    "graph has {} nodes and {} geodesic rows for {n} bases",
                    graph.n(),
                    d.len()
                )));
            }
            // Upper values keyed by (i, j), i < j, in neighbor order.
            let upper: Vec<Vec<(usize, f64)>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut row = vec![(i, entry(bases, i, i, 0.0, unreachable)?)];
                    for (t, &(j, _)) in graph.neighbors(i).iter().enumerate() {
                        if j > i {
                            row.push((j, entry(bases, i, j, d[i][t], unreachable)?));
                        }
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for (i, row) in upper.into_iter().enumerate() {
                for (j, v) in row {
                    rows[i].push((j, v));
                    if j != i {
                        rows[j].push((i, v));
                    }
                }
            }
            let mut row_start = Vec::with_capacity(n + 1);
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            row_start.push(0);
            for mut r in rows {
                r.sort_by_key(|&(j, _)| j);
                for (j, v) in r {
                    cols.push(j);
                    vals.push(v);
                }
                row_start.push(cols.len());
            }
            Ok(AlignmentMatrix::Sparse(SparseSym {
                n,
                row_start,
                cols,
                vals,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(dim, idx.len());
        for (c, &r) in idx.iter().enumerate() {
            m[(r, c)] = 1.0;
        }
        m
    }

    #[test]
    fn affinity_cases() {
        let u = e(4, &[0, 1]);
        assert_eq!(subspace_affinity(&u, &u).unwrap(), 2.0);
        assert_eq!(subspace_affinity(&u, &e(4, &[2, 3])).unwrap(), 0.0);
        let mut flipped = u.clone();
        flipped.set_col(1, &[0.0, -1.0, 0.0, 0.0]);
        // tr = 1 - 1: one flipped column cancels the other
        assert_eq!(subspace_affinity(&u, &flipped).unwrap(), 0.0);
        assert!(subspace_affinity(&u, &e(3, &[0, 1])).is_err());
    }

    #[test]
    fn single_point_and_duplicate_pair() {
        let g = KnnGraph::from_edges(1, &[]).unwrap();
        let bases = LocalBasisSet {
            bases: vec![e(3, &[0, 1])],
        };
        let d = Matrix::zeros(1, 1);
        let a = alignment_matrix(&bases, Geodesics::Dense(&d), &g).unwrap();
        assert_eq!(a.to_dense().as_slice(), &[2.0]);

        let g = KnnGraph::from_edges(2, &[(0, 1, 0.0)]).unwrap();
        let bases = LocalBasisSet {
            bases: vec![e(3, &[0, 1]), e(3, &[0, 1])],
        };
        let d = Matrix::zeros(2, 2);
        let a = alignment_matrix(&bases, Geodesics::Dense(&d), &g).unwrap();
        assert_eq!(a.to_dense().as_slice(), &[2.0; 4]);
        let edges = vec![vec![0.0], vec![0.0]];
        let s = alignment_matrix(&bases, Geodesics::Edges(&edges), &g).unwrap();
        assert_eq!(s.to_dense(), a.to_dense());
    }

    #[test]
    fn infinite_geodesic_is_unreachable() {
        let g = KnnGraph::from_edges(2, &[]).unwrap();
        let bases = LocalBasisSet {
            bases: vec![e(2, &[0]), e(2, &[0])],
        };
        let mut d = Matrix::zeros(2, 2);
        d[(0, 1)] = f64::INFINITY;
        d[(1, 0)] = f64::INFINITY;
        assert_eq!(
            alignment_matrix(&bases, Geodesics::Dense(&d), &g).unwrap_err(),
            Error::Unreachable { from: 0, target: 1 }
        );
        let a =
            alignment_matrix_with(&bases, Geodesics::Dense(&d), &g, Unreachable::Decouple).unwrap();
        assert_eq!(a.to_dense().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let g = KnnGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let bases = LocalBasisSet {
            bases: vec![e(2, &[0]), e(2, &[0]), e(2, &[1])],
        };
        let edges = vec![vec![1.0], vec![1.0, 2.0], vec![2.0]];
        let s = alignment_matrix(&bases, Geodesics::Edges(&edges), &g).unwrap();
        let dense = s.to_dense();
        let x = [0.3, -1.0, 2.0];
        let (mut y1, mut y2) = ([0.0; 3], [0.0; 3]);
        s.apply(&x, &mut y1);
        dense.apply(&x, &mut y2);
        assert_eq!(y1, y2);
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "3\n0 0 1\n0 1 0.5\n1 0 0.5\n1 1 1\n2 2 1\n"
        );
    }
}
