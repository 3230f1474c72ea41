use super::matrix::Matrix;
use crate::error::{Error, Result};

/// `(1/m) * sum_j (x_j - center)(x_j - center)^T` over the rows of `points`.
pub fn covariance(points: &Matrix, center: &[f64]) -> Result<Matrix> {
    let rows: Vec<&[f64]> = points.iter_rows().collect();
    covariance_of(&rows, center)
}

/// Same as [`covariance`] over borrowed point slices.
pub fn covariance_of(points: &[&[f64]], center: &[f64]) -> Result<Matrix> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "covariance of an empty point set".into(),
        ));
    }
    let w = vec![1.0; points.len()];
    accumulate(points, center, &w)
}

/// Weighted second-moment matrix centered at `x_i`:
/// `(1/Z) * sum_j w_j (x_j - x_i)(x_j - x_i)^T`, `Z = sum_j w_j`.
///
/// The center is the query point itself, not the neighborhood mean.
pub fn weighted_covariance_at(
    x_i: &[f64],
    neighbors: &[&[f64]],
    weights: &[f64],
) -> Result<Matrix> {
    if neighbors.is_empty() {
        return Err(Error::InvalidInput(
            "weighted covariance needs at least one neighbor".into(),
        ));
    }
    if neighbors.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} neighbors but {} weights",
            neighbors.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "weight {w} is not a finite nonnegative number"
        )));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    accumulate(neighbors, x_i, weights)
}

fn accumulate(points: &[&[f64]], center: &[f64], weights: &[f64]) -> Result<Matrix> {
    let d = center.len();
    if let Some((j, p)) = points.iter().enumerate().find(|(_, p)| p.len() != d) {
        return Err(Error::InvalidInput(format!(
            "point {j} has dimension {}, center has {d}",
            p.len()
        )));
    }
    let z: f64 = weights.iter().sum();
    let mut c = Matrix::zeros(d, d);
    let mut diff = vec![0.0; d];
    for (p, &w) in points.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (t, (a, b)) in diff.iter_mut().zip(p.iter().zip(center)) {
            *t = a - b;
        }
        for r in 0..d {
            let wr = w * diff[r];
            if wr == 0.0 {
                continue;
            }
            for s in r..d {
                c[(r, s)] += wr * diff[s];
            }
        }
    }
    for r in 0..d {
        for s in r..d {
            let v = c[(r, s)] / z;
            c[(r, s)] = v;
            c[(s, r)] = v;
        }
    }
    Ok(c)
}
