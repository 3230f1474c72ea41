use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_pair, root, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::linalg::dot;

/// `W_p` on the real line for measures whose support has one column.
pub fn wasserstein_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_pair(mu, nu, p)?;
    if mu.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "1-D transport needs one-dimensional supports, got {}",
            mu.dim()
        )));
    }
    Ok(wasserstein_1d_raw(
        mu.support().as_slice(),
        mu.weights(),
        nu.support().as_slice(),
        nu.weights(),
        p,
    ))
}

/// Quantile coupling: both CDFs are walked in sorted order and each slab of
/// common mass pays `|x - y|^p`.
pub fn wasserstein_1d_raw(xs: &[f64], a: &[f64], ys: &[f64], b: &[f64], p: f64) -> f64 {
    let sorted = |pts: &[f64], w: &[f64]| {
        let mut v: Vec<(f64, f64)> = pts.iter().copied().zip(w.iter().copied()).collect();
        v.sort_by(|l, r| l.0.total_cmp(&r.0));
        v
    };
    let left = sorted(xs, a);
    let right = sorted(ys, b);
    let cum = |v: &[(f64, f64)]| {
        let mut acc = 0.0;
        v.iter()
            .map(|&(_, w)| {
                acc += w;
                acc
            })
            .collect::<Vec<f64>>()
    };
    let (fa, fb) = (cum(&left), cum(&right));
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut cost = 0.0;
    while i < left.len() && j < right.len() {
        let next = fa[i].min(fb[j]);
        let mass = next - prev;
        if mass > 0.0 {
            let d = (left[i].0 - right[j].0).abs();
            let dp = if p == 1.0 {
                d
            } else if p == 2.0 {
                d * d
            } else {
                d.powf(p)
            };
            cost += mass * dp;
            prev = next;
        }
        if fa[i] <= next {
            i += 1;
        }
        if fb[j] <= next {
            j += 1;
        }
    }
    root(cost, p)
}

/// Mean over `num_projections` random unit directions of the 1-D `W_p`
/// between the projected measures.
pub fn sliced_wasserstein(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    num_projections: usize,
    seed: u64,
) -> Result<f64> {
    check_pair(mu, nu, p)?;
    if num_projections == 0 {
        return Err(Error::InvalidInput("need at least one projection".into()));
    }
    let dim = mu.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..num_projections {
        let theta = loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = dot(&v, &v).sqrt();
            if n > 1e-12 {
                break v.into_iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        };
        let px: Vec<f64> = mu.support().iter_rows().map(|r| dot(r, &theta)).collect();
        let py: Vec<f64> = nu.support().iter_rows().map(|r| dot(r, &theta)).collect();
        total += wasserstein_1d_raw(&px, mu.weights(), &py, nu.weights(), p);
    }
    Ok(total / num_projections as f64)
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
    fn diracs() {
        assert_eq!(
            wasserstein_1d(&m1(&[0.0], &[1.0]), &m1(&[-3.5], &[1.0]), 2.0).unwrap(),
            3.5
        );
    }

    #[test]
    fn monotone_matching() {
        let d = wasserstein_1d(
            &m1(&[1.0, 0.0], &[0.5, 0.5]),
            &m1(&[2.0, 3.0], &[0.5, 0.5]),
            1.0,
        )
        .unwrap();
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unequal_atoms() {
        // 0 -> 0.5 for half, 1 -> 0.5 for the rest
        let d = wasserstein_1d(&m1(&[0.0, 1.0], &[0.5, 0.5]), &m1(&[0.5], &[1.0]), 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        // zero-weight atoms contribute nothing
        let d = wasserstein_1d(&m1(&[0.0, 9.0], &[1.0, 0.0]), &m1(&[1.0], &[1.0]), 1.0).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sliced_identity_and_dimension_one() {
        let mu = m1(&[0.0, 0.4, 2.0], &[0.2, 0.3, 0.5]);
        let nu = m1(&[1.0, -1.0], &[0.5, 0.5]);
        assert_eq!(sliced_wasserstein(&mu, &mu, 2.0, 17, 3).unwrap(), 0.0);
        let exact = wasserstein_1d(&mu, &nu, 2.0).unwrap();
        for l in [1, 5, 40] {
            let s = sliced_wasserstein(&mu, &nu, 2.0, l, 11).unwrap();
            assert!((s - exact).abs() <= 1e-12 * (1.0 + exact));
        }
    }
}
