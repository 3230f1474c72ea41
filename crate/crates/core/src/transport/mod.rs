//! Wasserstein distances between discrete measures with a Euclidean
//! ground metric.
//!
//! * [`wasserstein_exact`]: network simplex on the transportation LP, for
//!   supports up to [`EXACT_SUPPORT_CAP`] atoms.
//! * [`sinkhorn`]: entropic regularization, switching to log-domain
//!   updates for small `epsilon`.
//! * [`wasserstein_1d`] and [`sliced_wasserstein`]: quantile coupling on
//!   the line and its average over random projections.

mod exact;
mod oned;
mod sinkhorn;

pub use exact::{wasserstein_exact, wasserstein_exact_capped, EXACT_SUPPORT_CAP};
pub use oned::{sliced_wasserstein, wasserstein_1d, wasserstein_1d_raw};
pub use sinkhorn::{sinkhorn, SinkhornMode, SinkhornOptions, SinkhornResult};

use crate::error::{Error, Result};
use crate::linalg::{distance, DataMatrix, Matrix};

/// Weighted point cloud `sum_i a_i delta_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Matrix,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates `weights`: one per atom, nonnegative, summing to one
    /// within `1e-12`.
    pub fn new(support: Matrix, weights: Vec<f64>) -> Result<Self> {
        if support.rows() == 0 {
            return Err(Error::InvalidInput(
                "measure needs at least one atom".into(),
            ));
        }
        if support.rows() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                support.rows(),
                weights.len()
            )));
        }
        support.check_finite()?;
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(DiscreteMeasure { support, weights })
    }

    pub fn uniform(support: Matrix) -> Result<Self> {
        let m = support.rows();
        if m == 0 {
            return Err(Error::InvalidInput(
                "measure needs at least one atom".into(),
            ));
        }
        DiscreteMeasure::new(support, vec![1.0 / m as f64; m])
    }

    pub fn support(&self) -> &Matrix {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support.cols()
    }

    /// Same weights, support mapped through `f`.
    pub fn map_support(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self.support.iter_rows().map(f).collect();
        Ok(DiscreteMeasure {
            support: Matrix::from_rows(&rows)?,
            weights: self.weights.clone(),
        })
    }
}

/// Uniform measure on the listed rows of `x`; repeated points stay
/// separate atoms.
pub fn local_measure(x: &DataMatrix, neighborhood: &[usize]) -> Result<DiscreteMeasure> {
    if neighborhood.is_empty() {
        return Err(Error::InvalidInput("empty neighborhood".into()));
    }
    if let Some(&bad) = neighborhood.iter().find(|&&i| i >= x.rows()) {
        return Err(Error::InvalidInput(format!("row {bad} out of range")));
    }
    DiscreteMeasure::uniform(x.select_rows(neighborhood))
}

/// Coupling between two measures and its transport cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub t: Matrix,
    /// `sum_ij T_ij d_ij^p`.
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.t.iter_rows().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.t.cols())
            .map(|j| (0..self.t.rows()).map(|i| self.t[(i, j)]).sum())
            .collect()
    }
}

pub(crate) fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::InvalidInput(format!(
            "measures live in dimensions {} and {}",
            mu.dim(),
            nu.dim()
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("order p = {p} must be >= 1")));
    }
    Ok(())
}

/// `d(x_i, y_j)^p` for all atom pairs.
pub(crate) fn ground_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Matrix {
    let mut c = Matrix::zeros(mu.len(), nu.len());
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            let d = distance(mu.support.row(i), nu.support.row(j));
            c[(i, j)] = if p == 1.0 {
                d
            } else if p == 2.0 {
                d * d
            } else {
                d.powf(p)
            };
        }
    }
    c
}

pub(crate) fn plan_cost(t: &Matrix, c: &Matrix) -> f64 {
    t.as_slice()
        .iter()
        .zip(c.as_slice())
        .map(|(a, b)| a * b)
        .sum()
}

pub(crate) fn root(cost: f64, p: f64) -> f64 {
    let cost = cost.max(0.0);
    if p == 1.0 {
        cost
    } else if p == 2.0 {
        cost.sqrt()
    } else {
        cost.powf(1.0 / p)
    }
}
