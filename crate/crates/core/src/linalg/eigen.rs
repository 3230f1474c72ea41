//! Symmetric eigensolvers.
//!
//! Small problems (dimension <= [`JACOBI_MAX_DIM`]) go through cyclic Jacobi
//! rotations and return a full decomposition. Larger problems use Lanczos
//! with full reorthogonalization, which only touches the operator through
//! matrix-vector products and so also serves edge-sparse operators.
//!
//! Every returned eigenvector is normalized and sign-fixed: its entry of
//! largest magnitude is positive, with ties going to the lowest index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{dot, norm, Matrix};
use crate::error::{Error, Result};

/// Dimension up to which the dense Jacobi solver is used.
pub const JACOBI_MAX_DIM: usize = 64;

const SYMMETRY_RTOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;
const LANCZOS_SEED: u64 = 0x5eed_1a2c_205d;

/// Top eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigResult {
    pub eigenvalues: Vec<f64>,
    /// `dim x k`, one eigenvector per column.
    pub eigenvectors: Matrix,
}

impl SymEigResult {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.col(j)
    }
}

/// A symmetric linear operator reachable through products `y = M x`.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn frobenius_norm(&self) -> f64;
}

impl SymOperator for Matrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(self.iter_rows()) {
            *yi = dot(row, x);
        }
    }

    fn frobenius_norm(&self) -> f64 {
        Matrix::frobenius_norm(self)
    }
}

/// Validates `m` and returns its top-`k` eigenpairs.
pub fn sym_eig(m: &Matrix, k: usize) -> Result<SymEigResult> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    m.check_finite()?;
    let n = m.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let (dev, row, col) = m.asymmetry();
    if dev > SYMMETRY_RTOL * m.max_abs() {
        return Err(Error::SymmetryViolation {
            row,
            col,
            deviation: dev,
        });
    }
    if n <= JACOBI_MAX_DIM {
        let full = jacobi_eigen(m)?;
        Ok(truncate(full, k))
    } else {
        lanczos_top_k(m, k)
    }
}

/// Full decomposition via cyclic Jacobi sweeps.
pub fn jacobi_eigen(m: &Matrix) -> Result<SymEigResult> {
    let n = m.rows();
    let mut a = m.clone();
    // Symmetrize exactly so rotations see one value per pair.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(finish(vec![0.0; n], v));
    }

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Skip rotations that cannot change the diagonal in floating point.
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Jacobi sweeps exhausted on a {n}x{n} matrix"
        )));
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok(finish(values, v))
}

/// Top-`k` eigenpairs of any symmetric operator via Lanczos with full
/// reorthogonalization. The Krylov basis is restarted with a fresh random
/// direction on breakdown, so the iteration can always run to the full
/// dimension, at which point the Ritz pairs are exact.
pub fn lanczos_top_k<O: SymOperator + ?Sized>(op: &O, k: usize) -> Result<SymEigResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs of an operator of dimension {n}"
        )));
    }
    let norm_f = op.frobenius_norm();
    let tol = 1e-10 * (1.0 + norm_f);
    let breakdown = 1e-13 * (1.0 + norm_f);
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let first = fresh_direction(&mut rng, n, &basis)
        .ok_or_else(|| Error::NoConvergence("could not draw a starting vector".into()))?;
    basis.push(first);

    let min_steps = n.min((2 * k + 10).max(20));
    let mut w = vec![0.0; n];
    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        let m = basis.len();

        let check = m == n || (m >= min_steps && (m - min_steps).is_multiple_of(10));
        if check {
            if let Some(res) = ritz_pairs(op, &basis, &alpha, &beta, k, tol, b, m == n)? {
                return Ok(res);
            }
        }
        if m == n {
            return Err(Error::NoConvergence(format!(
                "Lanczos reached full dimension {n} without meeting the residual bound"
            )));
        }

        if b > breakdown {
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        } else {
            beta.push(0.0);
            match fresh_direction(&mut rng, n, &basis) {
                Some(q) => basis.push(q),
                None => {
                    // Invariant subspace of full dimension: nothing left to add.
                    return ritz_pairs(op, &basis, &alpha, &beta, k, f64::INFINITY, 0.0, true)?
                        .ok_or_else(|| Error::NoConvergence("empty Krylov space".into()));
                }
            }
        }
    }
}

/// Ritz pairs from the current tridiagonal projection; `None` if the
/// top-k residuals are not yet below `tol`.
#[allow(clippy::too_many_arguments)]
fn ritz_pairs<O: SymOperator + ?Sized>(
    op: &O,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    k: usize,
    tol: f64,
    last_beta: f64,
    exhausted: bool,
) -> Result<Option<SymEigResult>> {
    let m = alpha.len();
    let n = op.dim();
    if m < k {
        return Ok(None);
    }
    let mut d = alpha.to_vec();
    let mut e = vec![0.0; m];
    e[..m - 1].copy_from_slice(&beta[..m - 1]);
    let mut z = Matrix::identity(m);
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));

    if !exhausted {
        let bound_ok = order[..k]
            .iter()
            .all(|&c| (last_beta * z[(m - 1, c)]).abs() <= tol);
        if !bound_ok {
            return Ok(None);
        }
    }

    let mut vectors = Matrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    let mut ax = vec![0.0; n];
    for (out_col, &c) in order[..k].iter().enumerate() {
        let mut y = vec![0.0; n];
        for (l, q) in basis.iter().enumerate().take(m) {
            let s = z[(l, c)];
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += s * qi;
            }
        }
        let ny = norm(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        op.apply(&y, &mut ax);
        let theta = dot(&y, &ax);
        if !exhausted {
            let r: f64 = ax
                .iter()
                .zip(&y)
                .map(|(a, yi)| (a - theta * yi).powi(2))
                .sum::<f64>()
                .sqrt();
            if r > tol * 10.0 {
                return Ok(None);
            }
        }
        values.push(theta);
        vectors.set_col(out_col, &y);
    }
    Ok(Some(finish(values, vectors)))
}

fn fresh_direction(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for q in basis {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// Implicit QL on a symmetric tridiagonal matrix. `d` holds the diagonal,
/// `e[i]` the entry coupling `i` and `i + 1` (last entry ignored). On return
/// `d` holds eigenvalues and the columns of `z` the rotated basis.
pub(crate) fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut Matrix) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::NoConvergence(
                    "tridiagonal QL iteration limit reached".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in 0..z.rows() {
                    let zf = z[(row, i + 1)];
                    let zi = z[(row, i)];
                    z[(row, i + 1)] = s * zi + c * zf;
                    z[(row, i)] = c * zi - s * zf;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sorts descending (stable on ties), normalizes and applies the sign rule.
fn finish(values: Vec<f64>, vectors: Matrix) -> SymEigResult {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut out_vecs = Matrix::zeros(vectors.rows(), n);
    let mut out_vals = Vec::with_capacity(n);
    for (c, &src) in order.iter().enumerate() {
        out_vals.push(values[src]);
        out_vecs.set_col(c, &vectors.col(src));
    }
    finish_partial(out_vals, out_vecs)
}

fn finish_partial(values: Vec<f64>, mut vectors: Matrix) -> SymEigResult {
    for c in 0..vectors.cols() {
        let mut v = vectors.col(c);
        let nv = norm(&v);
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
        }
        fix_sign(&mut v);
        vectors.set_col(c, &v);
    }
    SymEigResult {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn truncate(full: SymEigResult, k: usize) -> SymEigResult {
    SymEigResult {
        eigenvalues: full.eigenvalues[..k].to_vec(),
        eigenvectors: full.eigenvectors.leading_cols(k),
    }
}
