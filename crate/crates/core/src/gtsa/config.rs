use crate::error::{Error, Result};
use crate::transport::SinkhornMode;

/// Curvature weight temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    Fixed(f64),
    /// Chosen by [`super::select_tau`] on a labeled split.
    Auto,
}

/// Source of the Stage 1 neighbor weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    #[default]
    Curvature,
    Wasserstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OtBackend {
    #[default]
    Exact,
    Sinkhorn,
    Sliced,
}

/// How a transport distance becomes a neighbor weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightForm {
    /// `exp(-W / sigma)` with `sigma` the median edge distance: similar
    /// neighborhoods get large weights.
    #[default]
    Kernel,
    /// The distance itself, `w = W`.
    Literal,
}

/// Storage of the alignment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sparsity {
    /// Dense up to [`DENSE_AUTO_LIMIT`] points, edges-only above.
    #[default]
    Auto,
    Dense,
    EdgesOnly,
}

/// Sign handling of the local frames before they are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameOrientation {
    /// Each frame gets the orientation of the global principal frame `G`:
    /// its last column is negated when `det(G^T U_i) < 0`.
    #[default]
    Global,
    /// Columns exactly as the eigensolver's sign convention leaves them.
    Eigensolver,
}

/// Handling of a disconnected neighbor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Pairs in different components get zero alignment, the limit of
    /// `1 / (1 + d_G)` as `d_G` grows without bound.
    #[default]
    Separate,
    /// Join components with their shortest Euclidean edges first.
    Bridge,
}

pub const DENSE_AUTO_LIMIT: usize = 2000;

pub const DEFAULT_TAU_CANDIDATES: [f64; 5] = [0.5, 1.0, 5.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct GtsaConfig {
    /// Neighbors per point.
    pub k: usize,
    /// Embedding dimension, also the local tangent dimension.
    pub p: usize,
    /// Frame size for the curvature features; `None` means `p`.
    pub d_intrinsic: Option<usize>,
    pub tau: Tau,
    pub mode: WeightMode,
    pub tau_candidates: Vec<f64>,
    pub labeled_fraction: f64,
    pub seed: u64,
    pub ot_backend: OtBackend,
    pub weight_form: WeightForm,
    /// Transport order `p` of `W_p`.
    pub ot_order: f64,
    pub sinkhorn_epsilon: f64,
    pub sinkhorn_max_iters: usize,
    pub sinkhorn_mode: SinkhornMode,
    pub sliced_projections: usize,
    pub sparsity: Sparsity,
    pub orientation: FrameOrientation,
    pub connectivity: Connectivity,
    /// Multiply embedding columns by `sqrt(eigenvalue)`.
    pub scale_by_eigenvalues: bool,
}

impl Default for GtsaConfig {
    fn default() -> Self {
        GtsaConfig {
            k: 10,
            p: 2,
            d_intrinsic: None,
            tau: Tau::Fixed(1.0),
            mode: WeightMode::Curvature,
            tau_candidates: DEFAULT_TAU_CANDIDATES.to_vec(),
            labeled_fraction: 0.2,
            seed: 0,
            ot_backend: OtBackend::Exact,
            weight_form: WeightForm::Kernel,
            ot_order: 2.0,
            sinkhorn_epsilon: 0.05,
            sinkhorn_max_iters: 10_000,
            sinkhorn_mode: SinkhornMode::Auto,
            sliced_projections: 64,
            sparsity: Sparsity::Auto,
            orientation: FrameOrientation::Global,
            connectivity: Connectivity::Separate,
            scale_by_eigenvalues: false,
        }
    }
}

impl GtsaConfig {
    pub fn intrinsic_dim(&self) -> usize {
        self.d_intrinsic.unwrap_or(self.p)
    }

    /// Checks the settings that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidDimension("p must be at least 1".into()));
        }
        if self.intrinsic_dim() == 0 {
            return Err(Error::InvalidDimension(
                "d_intrinsic must be at least 1".into(),
            ));
        }
        if let Tau::Fixed(t) = self.tau {
            check_tau(t)?;
        }
        if self.tau_candidates.is_empty() {
            return Err(Error::InvalidInput("tau_candidates is empty".into()));
        }
        for &t in &self.tau_candidates {
            check_tau(t)?;
        }
        if !(self.labeled_fraction > 0.0 && self.labeled_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "labeled_fraction = {} must lie in (0, 1)",
                self.labeled_fraction
            )));
        }
        if !(self.ot_order >= 1.0 && self.ot_order.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ot_order = {} must be >= 1",
                self.ot_order
            )));
        }
        if !(self.sinkhorn_epsilon > 0.0 && self.sinkhorn_epsilon.is_finite()) {
            return Err(Error::InvalidInput(
                "sinkhorn_epsilon must be positive".into(),
            ));
        }
        if self.sliced_projections == 0 {
            return Err(Error::InvalidInput(
                "sliced_projections must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Checks the settings against a data shape.
    pub fn validate_for(&self, n: usize, dim: usize) -> Result<()> {
        self.validate()?;
        if self.k >= n {
            return Err(Error::InvalidK { k: self.k, n });
        }
        if self.p > dim || self.p > n {
            return Err(Error::InvalidDimension(format!(
                "p = {} must not exceed D = {dim} or n = {n}",
                self.p
            )));
        }
        if self.intrinsic_dim() > dim {
            return Err(Error::InvalidDimension(format!(
                "d_intrinsic = {} exceeds D = {dim}",
                self.intrinsic_dim()
            )));
        }
        Ok(())
    }

    /// Dense storage for this many points?
    pub fn dense_for(&self, n: usize) -> bool {
        match self.sparsity {
            Sparsity::Dense => true,
            Sparsity::EdgesOnly => false,
            Sparsity::Auto => n <= DENSE_AUTO_LIMIT,
        }
    }
}

fn check_tau(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "tau = {t} must be positive and finite"
        )))
    }
}
