//! Linear PCA and RBF kernel PCA, the reference embeddings.

use rayon::prelude::*;

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::linalg::{covariance, squared_distance, sym_eig, DataMatrix, Matrix};

/// Fitted principal component model.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `D x p`, orthonormal columns.
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn transform(&self, x: &DataMatrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::InvalidInput(format!(
                "model expects {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let mut centered = x.clone();
        for i in 0..x.rows() {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&self.mean) {
                *v -= m;
            }
        }
        centered.matmul(&self.components)
    }

    pub fn inverse_transform(&self, y: &Matrix) -> Result<Matrix> {
        let mut x = y.matmul(&self.components.transpose())?;
        for i in 0..x.rows() {
            for (v, m) in x.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(x)
    }
}

/// Classical PCA with population covariance.
pub fn pca_embed(x: &DataMatrix, p: usize) -> Result<(PcaModel, Matrix)> {
    x.check_data()?;
    let (n, d) = (x.rows(), x.cols());
    if p == 0 || p > n.min(d) {
        return Err(Error::InvalidDimension(format!(
            "PCA dimension {p} must be in 1..={}",
            n.min(d)
        )));
    }
    let mean: Vec<f64> = (0..d)
        .map(|c| (0..n).map(|i| x[(i, c)]).sum::<f64>() / n as f64)
        .collect();
    let cov = covariance(x, &mean)?;
    let eig = sym_eig(&cov, p)?;
    let model = PcaModel {
        mean,
        components: eig.eigenvectors,
        explained_variance: eig.eigenvalues,
    };
    let y = model.transform(x)?;
    Ok((model, y))
}

/// Same as [`pca_embed`], packaged as an [`Embedding`].
pub fn pca_embedding(x: &DataMatrix, p: usize) -> Result<Embedding> {
    let (model, y) = pca_embed(x, p)?;
    Ok(Embedding {
        y,
        eigenvalues: model.explained_variance,
    })
}

/// `1 / (D * var(X))`, the variance taken over all entries.
pub fn default_gamma(x: &DataMatrix) -> f64 {
    let vals = x.as_slice();
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0 / x.cols() as f64
    }
}

/// Uncentered RBF Gram matrix `exp(-gamma * |x_i - x_j|^2)`.
pub fn rbf_kernel(x: &DataMatrix, gamma: f64) -> Matrix {
    let n = x.rows();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| (-gamma * squared_distance(x.row(i), x.row(j))).exp())
                .collect()
        })
        .collect();
    let mut k = Matrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    k
}

/// Double centering `K - 1K/n - K1/n + 1K1/n^2`.
pub fn center_kernel(k: &Matrix) -> Matrix {
    let n = k.rows();
    let nf = n as f64;
    let row_means: Vec<f64> = k.iter_rows().map(|r| r.iter().sum::<f64>() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // K is symmetric so column means equal row means.
            c[(i, j)] = k[(i, j)] - row_means[i] - row_means[j] + grand;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// RBF kernel PCA. Columns of the embedding are `alpha_j * sqrt(lambda_j)`.
pub fn kernel_pca_rbf(x: &DataMatrix, p: usize, gamma: f64) -> Result<Embedding> {
    x.check_data()?;
    let n = x.rows();
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "gamma = {gamma} must be positive"
        )));
    }
    if p == 0 || p >= n {
        return Err(Error::InvalidDimension(format!(
            "kernel PCA dimension {p} must be in 1..{n}"
        )));
    }
    let kc = center_kernel(&rbf_kernel(x, gamma));
    if kc.max_abs() <= 1e-12 {
        return Err(Error::DegenerateKernel);
    }
    let eig = sym_eig(&kc, p)?;
    if eig.eigenvalues.iter().all(|&l| l <= 1e-12) {
        return Err(Error::DegenerateKernel);
    }
    let mut y = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        for i in 0..n {
            y[(i, j)] *= s;
        }
    }
    Ok(Embedding {
        y,
        eigenvalues: eig.eigenvalues,
    })
}
