//! Geodesic tangent space aggregation.
//!
//! Stage 1 estimates a `p`-dimensional tangent frame at every point from a
//! weighted covariance centered at the point, with neighbor weights derived
//! from curvature (`exp(-|K_j| / tau)`) or from transport distances between
//! local neighborhoods. Stage 2 couples every pair of frames through
//! `|tr(U_i^T U_j)| / (1 + d_G(i, j))`, with `d_G` the shortest-path length
//! on the k-nearest-neighbor graph. Stage 3 embeds the points with the top
//! eigenvectors of that matrix.

mod alignment;
mod config;
mod stages;

pub use alignment::{
    alignment_matrix, alignment_matrix_with, subspace_affinity, AlignmentMatrix, Geodesics,
    LocalBasisSet, SparseSym, Unreachable,
};
pub use config::{
    Connectivity, FrameOrientation, GtsaConfig, OtBackend, Sparsity, Tau, WeightForm, WeightMode,
    DEFAULT_TAU_CANDIDATES, DENSE_AUTO_LIMIT,
};
pub use stages::{
    curvature_weights, global_frame, local_tangent_bases, orient_frames, spectral_embedding,
    wasserstein_weights, EdgeWeights,
};

use std::time::{Duration, Instant};

use crate::curvature::{curvatures_on_graph, CurvatureField};
use crate::dataset::{stratified_indices, LabeledDataset};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{
    build_knn, ensure_connected, geodesic_all_pairs_partial, geodesic_on_edges, KnnGraph,
};
use crate::linalg::DataMatrix;
use crate::metrics::{ward_cluster, MetricsReport, Partition};

/// Everything one pipeline run produced, in stage order.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    /// Directed kNN lists, plus bridges under [`Connectivity::Bridge`].
    pub graph: KnnGraph,
    pub curvature: Option<CurvatureField>,
    pub edge_weights: Option<EdgeWeights>,
    /// Stage 1 weights aligned with each point's neighbor list.
    pub neighbor_weights: Vec<Vec<f64>>,
    pub bases: LocalBasisSet,
    pub alignment: AlignmentMatrix,
    pub embedding: Embedding,
    pub timings: Vec<(&'static str, Duration)>,
}

fn timed<T>(
    timings: &mut Vec<(&'static str, Duration)>,
    stage: &'static str,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    timings.push((stage, start.elapsed()));
    Ok(out)
}

/// Runs all stages on `x` with a fixed `tau` (ignored in transport mode).
pub fn run_pipeline(x: &DataMatrix, cfg: &GtsaConfig, tau: f64) -> Result<PipelineRun> {
    x.check_data()?;
    cfg.validate_for(x.rows(), x.cols())?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tau = {tau} must be positive and finite"
        )));
    }
    let mut timings = Vec::new();
    let knn = timed(&mut timings, "graph", || build_knn(x, cfg.k))?;

    let (curvature, edge_weights, neighbor_weights) = match cfg.mode {
        WeightMode::Curvature => {
            let field = timed(&mut timings, "curvature", || {
                curvatures_on_graph(x, &knn, cfg.intrinsic_dim(), false)
            })?;
            let w = timed(&mut timings, "weights", || {
                Ok((0..x.rows())
                    .map(|i| curvature_weights(&field, knn.knn(i), tau))
                    .collect::<Vec<_>>())
            })?;
            (Some(field), None, w)
        }
        WeightMode::Wasserstein => {
            let ew = timed(&mut timings, "weights", || {
                wasserstein_weights(x, &knn, cfg)
            })?;
            let w = ew.per_neighbor(&knn);
            (None, Some(ew), w)
        }
    };

    let bases = timed(&mut timings, "tangent", || {
        let mut bases = local_tangent_bases(x, &knn, &neighbor_weights, cfg.p)?;
        if cfg.orientation == FrameOrientation::Global {
            let g = global_frame(x, cfg.p)?;
            orient_frames(&mut bases, Some(&g))?;
        }
        Ok(bases)
    })?;
    let (graph, unreachable) = match cfg.connectivity {
        Connectivity::Bridge => (
            timed(&mut timings, "connect", || ensure_connected(&knn, x))?,
            Unreachable::Error,
        ),
        Connectivity::Separate => (knn, Unreachable::Decouple),
    };
    let alignment = if cfg.dense_for(x.rows()) {
        let d = timed(&mut timings, "geodesic", || {
            Ok(geodesic_all_pairs_partial(&graph))
        })?;
        timed(&mut timings, "alignment", || {
            alignment_matrix_with(&bases, Geodesics::Dense(&d), &graph, unreachable)
        })?
    } else {
        let d = timed(&mut timings, "geodesic", || geodesic_on_edges(&graph))?;
        timed(&mut timings, "alignment", || {
            alignment_matrix_with(&bases, Geodesics::Edges(&d), &graph, unreachable)
        })?
    };
    let embedding = timed(&mut timings, "spectral", || {
        spectral_embedding(&alignment, cfg.p, cfg.scale_by_eigenvalues)
    })?;
    Ok(PipelineRun {
        graph,
        curvature,
        edge_weights,
        neighbor_weights,
        bases,
        alignment,
        embedding,
        timings,
    })
}

/// Score of one candidate temperature on the labeled split.
#[derive(Debug, Clone, PartialEq)]
pub struct TauScore {
    pub tau: f64,
    /// `None` when the pipeline failed at this temperature.
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSelection {
    pub tau: f64,
    pub scores: Vec<TauScore>,
    /// Rows of the input dataset used for selection, sorted.
    pub labeled_rows: Vec<usize>,
}

/// Best mean of ARI, FM and VM; ties go to the smaller temperature.
/// Failed candidates are skipped.
pub fn best_tau(scores: &[TauScore]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for s in scores {
        let Some(m) = s.metrics else { continue };
        let v = m.mean();
        let better = match best {
            None => true,
            Some((bt, bv)) => v > bv || (v == bv && s.tau < bt),
        };
        if better {
            best = Some((s.tau, v));
        }
    }
    best.map(|b| b.0)
}

/// Picks `tau` on a stratified labeled split.
///
/// For each candidate the pipeline embeds the split in two dimensions,
/// Ward clusters it into `class_count` groups and scores the result against
/// the labels. A candidate whose run fails is recorded with its error and
/// skipped; if every candidate fails the first error is returned.
pub fn select_tau(ds: &LabeledDataset, cfg: &GtsaConfig) -> Result<TauSelection> {
    cfg.validate()?;
    let labels = ds.require_labels()?;
    let rows = stratified_indices(labels, cfg.labeled_fraction, cfg.seed)?;
    if rows.len() < cfg.k + 1 {
        return Err(Error::InsufficientSubset {
            got: rows.len(),
            k: cfg.k,
        });
    }
    let subset = ds.subset(&rows);
    let truth = Partition::from_raw(subset.labels.as_deref().expect("subset keeps labels"));
    let n_clusters = truth.n_clusters().max(1);
    let inner = GtsaConfig {
        p: 2.min(subset.dim()),
        d_intrinsic: cfg.d_intrinsic.map(|d| d.min(subset.dim())),
        ..cfg.clone()
    };

    let mut first_err = None;
    let mut scores = Vec::with_capacity(cfg.tau_candidates.len());
    for &tau in &cfg.tau_candidates {
        let scored = run_pipeline(&subset.x, &inner, tau)
            .and_then(|run| ward_cluster(&run.embedding.y, n_clusters))
            .and_then(|pred| MetricsReport::score(&truth, &pred));
        match scored {
            Ok(m) => scores.push(TauScore {
                tau,
                metrics: Some(m),
                error: None,
            }),
            Err(e) => {
                scores.push(TauScore {
                    tau,
                    metrics: None,
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    match best_tau(&scores) {
        Some(tau) => Ok(TauSelection {
            tau,
            scores,
            labeled_rows: rows,
        }),
        None => Err(first_err.expect("no score implies an error")),
    }
}

/// Result of [`fit`].
#[derive(Debug, Clone)]
pub struct GtsaFit {
    pub embedding: Embedding,
    /// Rows of the input dataset that were embedded, in order.
    pub rows: Vec<usize>,
    /// Temperature used, `None` in transport mode.
    pub tau: Option<f64>,
    pub selection: Option<TauSelection>,
    pub run: PipelineRun,
}

impl GtsaFit {
    pub fn bridge_count(&self) -> usize {
        self.run.graph.bridges().len()
    }
}

/// Full method. With `Tau::Auto` in curvature mode the temperature is
/// chosen on a labeled split and the final embedding covers the other rows.
pub fn fit(ds: &LabeledDataset, cfg: &GtsaConfig) -> Result<GtsaFit> {
    cfg.validate()?;
    let mut selection_time = None;
    let (tau, selection) = match (cfg.mode, cfg.tau) {
        (WeightMode::Wasserstein, _) => (None, None),
        (WeightMode::Curvature, Tau::Fixed(t)) => (Some(t), None),
        (WeightMode::Curvature, Tau::Auto) => {
            let mut t = Vec::new();
            let sel = timed(&mut t, "select_tau", || select_tau(ds, cfg))?;
            selection_time = t.pop();
            (Some(sel.tau), Some(sel))
        }
    };
    let rows: Vec<usize> = match &selection {
        Some(sel) => {
            let mut taken = vec![false; ds.n()];
            for &r in &sel.labeled_rows {
                taken[r] = true;
            }
            (0..ds.n()).filter(|&r| !taken[r]).collect()
        }
        None => (0..ds.n()).collect(),
    };
    let x = if rows.len() == ds.n() {
        ds.x.clone()
    } else {
        ds.x.select_rows(&rows)
    };
    let mut run = run_pipeline(&x, cfg, tau.unwrap_or(1.0))?;
    if let Some(t) = selection_time {
        run.timings.insert(0, t);
    }
    Ok(GtsaFit {
        embedding: run.embedding.clone(),
        rows,
        tau,
        selection,
        run,
    })
}
