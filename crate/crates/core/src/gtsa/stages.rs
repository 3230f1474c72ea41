use rayon::prelude::*;

use super::alignment::{AlignmentMatrix, LocalBasisSet};
use super::config::{GtsaConfig, OtBackend, WeightForm};
use crate::curvature::CurvatureField;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::KnnGraph;
use crate::linalg::{
    covariance, fix_sign, lanczos_top_k, sym_eig, weighted_covariance_at, DataMatrix, Matrix,
    JACOBI_MAX_DIM,
};
use crate::transport::{
    local_measure, sinkhorn, sliced_wasserstein, wasserstein_exact, SinkhornOptions,
};

/// `w_ij = exp(-|K_j| / tau)` for each `j` in `neighborhood`: the weight
/// follows the neighbor's curvature, not the center's.
pub fn curvature_weights(k: &CurvatureField, neighborhood: &[usize], tau: f64) -> Vec<f64> {
    neighborhood
        .iter()
        .map(|&j| (-k.k[j].abs() / tau).exp())
        .collect()
}

/// Transport distances and the derived weights for every graph edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    /// `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
    pub weights: Vec<f64>,
    /// Kernel bandwidth; `None` for the literal form.
    pub sigma: Option<f64>,
}

impl EdgeWeights {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).ok().map(|t| self.weights[t])
    }

    /// Weights over each point's directed neighbor list.
    pub fn per_neighbor(&self, g: &KnnGraph) -> Vec<Vec<f64>> {
        (0..g.n())
            .map(|i| {
                g.knn(i)
                    .iter()
                    .map(|&j| self.get(i, j).expect("knn pairs are graph edges"))
                    .collect()
            })
            .collect()
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// `W_p` between the uniform measures on the two endpoints' neighbor
/// lists for every edge of `g`, turned into weights by `cfg.weight_form`.
///
/// In kernel form `sigma` is the median edge distance. If that median is
/// zero the smallest positive distance is used, and if every distance is
/// zero all weights are 1.
pub fn wasserstein_weights(x: &DataMatrix, g: &KnnGraph, cfg: &GtsaConfig) -> Result<EdgeWeights> {
    let edges: Vec<(usize, usize)> = g.edges().into_iter().map(|(i, j, _)| (i, j)).collect();
    let measures = (0..g.n())
        .map(|i| local_measure(x, g.knn(i)))
        .collect::<Result<Vec<_>>>()?;
    let p = cfg.ot_order;
    let distances: Vec<f64> = edges
        .par_iter()
        .enumerate()
        .map(|(t, &(i, j))| {
            let (mu, nu) = (&measures[i], &measures[j]);
            let d = match cfg.ot_backend {
                OtBackend::Exact => wasserstein_exact(mu, nu, p).map(|r| r.0),
                OtBackend::Sinkhorn => {
                    let opts = SinkhornOptions {
                        epsilon: cfg.sinkhorn_epsilon,
                        max_iters: cfg.sinkhorn_max_iters,
                        mode: cfg.sinkhorn_mode,
                        ..Default::default()
                    };
                    sinkhorn(mu, nu, p, &opts).map(|r| r.distance)
                }
                OtBackend::Sliced => {
                    let seed = cfg.seed.wrapping_add(t as u64);
                    sliced_wasserstein(mu, nu, p, cfg.sliced_projections, seed)
                }
            };
            d.map_err(|e| Error::Edge {
                i,
                j,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let (weights, sigma) = match cfg.weight_form {
        WeightForm::Literal => (distances.clone(), None),
        WeightForm::Kernel => {
            let mut sigma = median(&distances);
            if sigma <= 0.0 {
                sigma = distances
                    .iter()
                    .copied()
                    .filter(|&d| d > 0.0)
                    .fold(f64::INFINITY, f64::min);
            }
            let w = if sigma.is_finite() {
                distances.iter().map(|d| (-d / sigma).exp()).collect()
            } else {
                vec![1.0; distances.len()]
            };
            (w, sigma.is_finite().then_some(sigma))
        }
    };
    Ok(EdgeWeights {
        edges,
        distances,
        weights,
        sigma,
    })
}

/// Stage 1: top-`p` eigenvectors of the weighted covariance centered at
/// each point, over its directed neighbor list.
pub fn local_tangent_bases(
    x: &DataMatrix,
    g: &KnnGraph,
    weights: &[Vec<f64>],
    p: usize,
) -> Result<LocalBasisSet> {
    if p == 0 || p > x.cols() {
        return Err(Error::InvalidDimension(format!(
            "p = {p} must be in 1..={}",
            x.cols()
        )));
    }
    if weights.len() != x.rows() || g.n() != x.rows() {
        return Err(Error::InvalidInput(format!(
            "{} weight rows and {} graph nodes for {} points",
            weights.len(),
            g.n(),
            x.rows()
        )));
    }
    let bases = (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let nbrs: Vec<&[f64]> = g.knn(i).iter().map(|&j| x.row(j)).collect();
            let c = weighted_covariance_at(x.row(i), &nbrs, &weights[i]).map_err(|e| match e {
                Error::DegenerateWeights => Error::DegenerateNeighborhood(i),
                other => other,
            })?;
            let eig = if c.rows() <= JACOBI_MAX_DIM {
                sym_eig(&c, p)?
            } else {
                lanczos_top_k(&c, p)?
            };
            Ok(eig.eigenvectors)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalBasisSet { bases })
}

/// Top-`p` principal directions of the whole point set.
pub fn global_frame(x: &DataMatrix, p: usize) -> Result<Matrix> {
    let n = x.rows() as f64;
    let mut mean = vec![0.0; x.cols()];
    for r in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let c = covariance(x, &mean)?;
    let eig = if c.rows() <= JACOBI_MAX_DIM {
        sym_eig(&c, p)?
    } else {
        lanczos_top_k(&c, p)?
    };
    Ok(eig.eigenvectors)
}

/// Puts every frame in a sign-canonical form: each column gets the
/// eigensolver sign convention, then, with a `reference` frame, the last
/// column is negated when `det(reference^T U_i) < 0`. The result depends
/// only on the spanned directions, not on the input column signs.
///
/// The trace `tr(U_i^T U_j)` is unchanged by negating both frames but not
/// by negating a single column, so frames on smoothly varying tangent
/// spaces need a consistent orientation to be comparable.
pub fn orient_frames(bases: &mut LocalBasisSet, reference: Option<&Matrix>) -> Result<()> {
    for u in &mut bases.bases {
        for c in 0..u.cols() {
            let mut col = u.col(c);
            fix_sign(&mut col);
            u.set_col(c, &col);
        }
        if let Some(g) = reference {
            if g.rows() != u.rows() || g.cols() != u.cols() {
                return Err(Error::InvalidInput(format!(
                    "reference frame is {}x{}, local frames are {}x{}",
                    g.rows(),
                    g.cols(),
                    u.rows(),
                    u.cols()
                )));
            }
            if g.transpose().matmul(u)?.determinant()? < 0.0 {
                let last = u.cols() - 1;
                let col: Vec<f64> = u.col(last).iter().map(|v| -v).collect();
                u.set_col(last, &col);
            }
        }
    }
    Ok(())
}

/// Stage 3: top-`p` eigenvectors of the alignment matrix as coordinates,
/// optionally scaled by `sqrt(max(lambda, 0))`.
pub fn spectral_embedding(
    a: &AlignmentMatrix,
    p: usize,
    scale_by_eigenvalues: bool,
) -> Result<Embedding> {
    if p == 0 || p > a.n() {
        return Err(Error::InvalidDimension(format!(
            "p = {p} must be in 1..={}",
            a.n()
        )));
    }
    let eig = match a {
        AlignmentMatrix::Dense(m) => sym_eig(m, p)?,
        AlignmentMatrix::Sparse(_) if a.n() <= JACOBI_MAX_DIM => sym_eig(&a.to_dense(), p)?,
        AlignmentMatrix::Sparse(_) => lanczos_top_k(a, p)?,
    };
    let mut y = eig.eigenvectors;
    if scale_by_eigenvalues {
        for (c, &l) in eig.eigenvalues.iter().enumerate() {
            let s = l.max(0.0).sqrt();
            let col: Vec<f64> = y.col(c).iter().map(|v| v * s).collect();
            y.set_col(c, &col);
        }
    }
    Ok(Embedding {
        y,
        eigenvalues: eig.eigenvalues,
    })
}
