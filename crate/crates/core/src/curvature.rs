//! Per-point mean curvature from a local quadratic frame.
//!
//! For each point the neighborhood covariance `C` (centered at the
//! neighborhood mean) is diagonalized; Hadamard squares and pairwise
//! products of the top-`d` eigenvectors form `H`, the second fundamental
//! form is approximated by `II = H H^T`, the shape operator by
//! `S = -II C` (the metric is taken as `C^-1`, so no inversion is needed)
//! and the scalar curvature is `K = tr(S)`.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{build_knn, KnnGraph};
use crate::linalg::{covariance_of, sym_eig, DataMatrix, Matrix, JACOBI_MAX_DIM};

/// Per-point mean curvature estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub k: Vec<f64>,
    /// Intrinsic dimension used for the quadratic features.
    pub intrinsic_dim: usize,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Writes `index,K` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,K")?;
        for (i, v) in self.k.iter().enumerate() {
            writeln!(out, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Everything computed at one point, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEstimate {
    /// Local covariance, `D x D`.
    pub c: Matrix,
    /// Local frame, eigenvectors of `c` by decreasing eigenvalue.
    pub u: Matrix,
    /// Quadratic features, `D x d(d+1)/2`.
    pub h: Matrix,
    pub ii: Matrix,
    pub s: Matrix,
}

impl ShapeEstimate {
    pub fn mean_curvature(&self) -> f64 {
        self.s.trace()
    }
}

/// Quadratic feature matrix from the leading `d` columns of `frame`:
/// first the squares `w_j o w_j` for `j = 1..d`, then the products
/// `w_j o w_l` for `j < l` in lexicographic order.
pub fn quadratic_features(frame: &Matrix, d: usize) -> Result<Matrix> {
    let big_d = frame.rows();
    if d == 0 || d > big_d {
        return Err(Error::InvalidDimension(format!(
            "intrinsic dimension {d} must be in 1..={big_d}"
        )));
    }
    if d > frame.cols() {
        return Err(Error::InvalidDimension(format!(
            "frame has {} columns, {d} needed",
            frame.cols()
        )));
    }
    let mut pairs = Vec::with_capacity(d * (d + 1) / 2);
    pairs.extend((0..d).map(|j| (j, j)));
    for j in 0..d {
        for l in (j + 1)..d {
            pairs.push((j, l));
        }
    }
    let mut h = Matrix::zeros(big_d, pairs.len());
    for (c, &(j, l)) in pairs.iter().enumerate() {
        for r in 0..big_d {
            h[(r, c)] = frame[(r, j)] * frame[(r, l)];
        }
    }
    Ok(h)
}

/// `II = H H^T` and `S = -II C`.
pub fn shape_operator(c: &Matrix, h: &Matrix) -> Result<(Matrix, Matrix)> {
    if !c.is_square() || c.rows() != h.rows() {
        return Err(Error::InvalidInput(format!(
            "covariance is {}x{}, features are {}x{}",
            c.rows(),
            c.cols(),
            h.rows(),
            h.cols()
        )));
    }
    let ii = h.matmul(&h.transpose())?;
    let s = ii.matmul(c)?.scale(-1.0);
    Ok((ii, s))
}

/// Covariance of `points` about their own mean. Differences are taken
/// relative to `anchor` before averaging, so the result depends only on
/// the displacement vectors.
pub fn local_covariance(points: &[&[f64]], anchor: &[f64]) -> Result<Matrix> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty neighborhood".into()));
    }
    let dim = anchor.len();
    let diffs: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(anchor).map(|(a, b)| a - b).collect())
        .collect();
    let m = diffs.len() as f64;
    let mean: Vec<f64> = (0..dim)
        .map(|c| diffs.iter().map(|v| v[c]).sum::<f64>() / m)
        .collect();
    let refs: Vec<&[f64]> = diffs.iter().map(Vec::as_slice).collect();
    covariance_of(&refs, &mean)
}

/// Frame of `c`: all eigenvectors when small enough for the dense solver,
/// otherwise the leading `d`.
pub fn local_frame(c: &Matrix, d: usize) -> Result<Matrix> {
    let dim = c.rows();
    let want = if dim <= JACOBI_MAX_DIM { dim } else { d };
    Ok(sym_eig(c, want)?.eigenvectors)
}

/// Shape estimate for a given covariance and frame.
pub fn shape_from_frame(c: Matrix, frame: Matrix, d: usize) -> Result<ShapeEstimate> {
    let h = quadratic_features(&frame, d)?;
    let (ii, s) = shape_operator(&c, &h)?;
    Ok(ShapeEstimate {
        c,
        u: frame,
        h,
        ii,
        s,
    })
}

/// Shape estimate for one neighborhood.
pub fn shape_estimate(points: &[&[f64]], anchor: &[f64], d: usize) -> Result<ShapeEstimate> {
    if d == 0 || d > anchor.len() {
        return Err(Error::InvalidDimension(format!(
            "intrinsic dimension {d} must be in 1..={}",
            anchor.len()
        )));
    }
    let c = local_covariance(points, anchor)?;
    let frame = local_frame(&c, d)?;
    shape_from_frame(c, frame, d)
}

/// Options for [`mean_curvatures_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureOptions {
    pub k: usize,
    pub intrinsic_dim: usize,
    /// Count the point itself as a member of its own neighborhood.
    pub include_self: bool,
}

/// Mean curvature at every point from its `k` nearest neighbors.
pub fn mean_curvatures(x: &DataMatrix, k: usize, d: usize) -> Result<CurvatureField> {
    mean_curvatures_with(
        x,
        CurvatureOptions {
            k,
            intrinsic_dim: d,
            include_self: false,
        },
    )
}

pub fn mean_curvatures_with(x: &DataMatrix, opts: CurvatureOptions) -> Result<CurvatureField> {
    x.check_data()?;
    let g = build_knn(x, opts.k)?;
    curvatures_on_graph(x, &g, opts.intrinsic_dim, opts.include_self)
}

/// Mean curvature using the directed neighbor lists of an existing graph.
pub fn curvatures_on_graph(
    x: &DataMatrix,
    g: &KnnGraph,
    d: usize,
    include_self: bool,
) -> Result<CurvatureField> {
    if d == 0 || d > x.cols() {
        return Err(Error::InvalidDimension(format!(
            "intrinsic dimension {d} must be in 1..={}",
            x.cols()
        )));
    }
    let k: Result<Vec<f64>> = (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let mut pts: Vec<&[f64]> = Vec::with_capacity(g.knn(i).len() + 1);
            if include_self {
                pts.push(x.row(i));
            }
            pts.extend(g.knn(i).iter().map(|&j| x.row(j)));
            Ok(shape_estimate(&pts, x.row(i), d)?.mean_curvature())
        })
        .collect();
    Ok(CurvatureField {
        k: k?,
        intrinsic_dim: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi_eigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn squares_of_a_basis_vector() {
        let u = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let h = quadratic_features(&u, 1).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 1));
        assert_eq!(h.col(0), vec![1.0, 0.0]);
        let h = quadratic_features(&u, 2).unwrap();
        assert_eq!(h.cols(), 3);
        assert_eq!(h.col(0), vec![1.0, 0.0]);
        assert_eq!(h.col(1), vec![0.0, 1.0]);
        assert_eq!(h.col(2), vec![0.0, 0.0]);
        assert!(matches!(
            quadratic_features(&u, 3),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn zero_features_and_identity_metric() {
        let c = Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let (ii, s) = shape_operator(&c, &Matrix::zeros(2, 3)).unwrap();
        assert!(ii.as_slice().iter().all(|&v| v == 0.0));
        assert!(s.as_slice().iter().all(|&v| v == 0.0));

        let h = Matrix::from_rows(&[[0.3, -1.0, 0.2], [0.7, 0.1, 2.0]]).unwrap();
        let (_, s) = shape_operator(&Matrix::identity(2), &h).unwrap();
        let fro2: f64 = h.as_slice().iter().map(|v| v * v).sum();
        assert!((s.trace() + fro2).abs() < 1e-14);
        assert!(shape_operator(&Matrix::identity(3), &h).is_err());
    }

    #[test]
    fn identical_points_have_zero_curvature() {
        let x = Matrix::from_rows(&[[1.5, -2.0, 4.0]; 8]).unwrap();
        let f = mean_curvatures(&x, 3, 2).unwrap();
        assert!(f.k.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ii_is_psd_and_frame_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let est = shape_estimate(&refs, &pts[0], 3).unwrap();
        let eig = jacobi_eigen(&est.ii).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10));
        let g = est.u.transpose().matmul(&est.u).unwrap();
        assert!(g.sub(&Matrix::identity(4)).max_abs() < 1e-10);
    }

    #[test]
    fn csv_export() {
        let f = CurvatureField {
            k: vec![-0.5, 0.0],
            intrinsic_dim: 1,
        };
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,K\n0,-0.5\n1,0\n");
    }

    #[test]
    fn self_inclusion_changes_neighborhood() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.1], [2.0, 0.5], [3.0, 1.4], [4.0, 2.9]])
            .unwrap();
        let a = mean_curvatures(&x, 2, 1).unwrap();
        let b = mean_curvatures_with(
            &x,
            CurvatureOptions {
                k: 2,
                intrinsic_dim: 1,
                include_self: true,
            },
        )
        .unwrap();
        assert_ne!(a, b);
    }
}
