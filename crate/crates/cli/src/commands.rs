//! The `run`, `compare`, `plot` and `score` commands.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

use gtsa_core::baselines::{default_gamma, kernel_pca_rbf, pca_embedding};
use gtsa_core::dataset::{load_csv, preprocess, LabeledDataset};
use gtsa_core::embedding::{
    parse_embedding_csv, parse_partition_csv, write_embedding_csv, Embedding, PartitionFile,
};
use gtsa_core::gtsa::{fit, TauSelection};
use gtsa_core::metrics::{ward_cluster, MetricsReport, Partition};

use crate::config::{Method, RunConfig};
use crate::error::CliError;
use crate::report::{metrics_json, num, opt_num, round_floats, to_text};
use crate::svg::scatter_svg;

/// Stage name and wall time.
pub type Timings = Vec<(&'static str, Duration)>;

fn timed<T>(
    timings: &mut Timings,
    stage: &'static str,
    f: impl FnOnce() -> Result<T, CliError>,
) -> Result<T, CliError> {
    let start = Instant::now();
    let out = f()?;
    timings.push((stage, start.elapsed()));
    Ok(out)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn timings_json(t: &[(&'static str, Duration)]) -> Value {
    Value::Array(
        t.iter()
            .map(|(s, d)| json!({"stage": s, "ms": num(ms(*d))}))
            .collect(),
    )
}

/// Errors from inside the pipeline keep the library's stage name.
fn core_err(stage: &'static str, e: gtsa_core::Error) -> CliError {
    match e {
        gtsa_core::Error::Stage { stage, source } => CliError::from_core(stage, *source),
        other => CliError::from_core(stage, other),
    }
}

/// Preprocessed data plus the original row index of every row.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub raw: LabeledDataset,
    pub ds: LabeledDataset,
    pub rows: Vec<usize>,
}

impl Prepared {
    /// Text label of an original row.
    pub fn label_name(&self, original_row: usize) -> Option<String> {
        let code = self.raw.labels.as_ref()?[original_row];
        Some(
            self.raw
                .class_names
                .as_ref()
                .and_then(|n| n.get(code).cloned())
                .unwrap_or_else(|| code.to_string()),
        )
    }
}

pub fn ingest(cfg: &RunConfig) -> Result<LabeledDataset, CliError> {
    load_csv(&cfg.dataset.source, cfg.dataset.label_column().as_ref())
        .map_err(|e| core_err("ingest", e))
}

pub fn prepare(raw: LabeledDataset, cfg: &RunConfig) -> Result<Prepared, CliError> {
    let (ds, rows) =
        preprocess(&raw, &cfg.preprocess_config()).map_err(|e| core_err("preprocess", e))?;
    Ok(Prepared { raw, ds, rows })
}

/// One method's embedding over a subset of the prepared rows.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    /// Original row indices, one per embedding row.
    pub rows: Vec<usize>,
    pub labels: Option<Vec<usize>>,
    pub embedding: Embedding,
    pub tau: Option<f64>,
    pub selection: Option<TauSelection>,
    pub bridges: usize,
    pub stages: Timings,
}

pub fn embed(method: Method, prep: &Prepared, cfg: &RunConfig) -> Result<MethodRun, CliError> {
    let ds = &prep.ds;
    let all: Vec<usize> = (0..ds.n()).collect();
    let (local_rows, embedding, tau, selection, bridges, stages) = match method {
        Method::Pca => {
            let e = pca_embedding(&ds.x, cfg.p).map_err(|e| core_err("pca", e))?;
            (all, e, None, None, 0, Vec::new())
        }
        Method::Kpca => {
            let gamma = cfg.kpca.gamma.unwrap_or_else(|| default_gamma(&ds.x));
            let e = kernel_pca_rbf(&ds.x, cfg.p, gamma).map_err(|e| core_err("kpca", e))?;
            (all, e, None, None, 0, Vec::new())
        }
        Method::GtsaCurvature | Method::GtsaWasserstein => {
            let gcfg = cfg.gtsa_config(method)?;
            let f = fit(ds, &gcfg).map_err(|e| core_err("gtsa", e))?;
            let bridges = f.bridge_count();
            (
                f.rows,
                f.embedding,
                f.tau,
                f.selection,
                bridges,
                f.run.timings,
            )
        }
    };
    Ok(MethodRun {
        method,
        rows: local_rows.iter().map(|&r| prep.rows[r]).collect(),
        labels: ds
            .labels
            .as_ref()
            .map(|l| local_rows.iter().map(|&r| l[r]).collect()),
        embedding,
        tau,
        selection,
        bridges,
        stages,
    })
}

/// Ward partition into `n_clusters`, or the class count when unset.
pub fn cluster(
    run: &MethodRun,
    prep: &Prepared,
    cfg: &RunConfig,
) -> Result<Option<Partition>, CliError> {
    let Some(c) = cfg.n_clusters.or(prep.raw.class_count) else {
        return Ok(None);
    };
    ward_cluster(&run.embedding.y, c)
        .map(Some)
        .map_err(|e| core_err("cluster", e))
}

pub fn score(
    run: &MethodRun,
    clusters: Option<&Partition>,
) -> Result<Option<MetricsReport>, CliError> {
    match (&run.labels, clusters) {
        (Some(l), Some(c)) => MetricsReport::score(&Partition::from_raw(l), c)
            .map(Some)
            .map_err(|e| core_err("metrics", e)),
        _ => Ok(None),
    }
}

fn write_file(path: &Path, content: &[u8]) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::io("write", format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io("write", format!("cannot create {}: {e}", dir.display())))
}

fn selection_json(sel: &TauSelection) -> Value {
    let scores: Vec<Value> = sel
        .scores
        .iter()
        .map(|s| {
            json!({
                "tau": num(s.tau),
                "metrics": s.metrics.as_ref().map(|m| metrics_json(Some(m))),
                "mean": opt_num(s.metrics.as_ref().map(MetricsReport::mean)),
                "error": s.error,
            })
        })
        .collect();
    json!({
        "tau": num(sel.tau),
        "labeled_rows": sel.labeled_rows.len(),
        "scores": scores,
    })
}

/// Files written by [`run`], plus the report that went into `report.json`.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: Value,
    pub metrics: Option<MetricsReport>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let mut t = Timings::new();
    let raw = timed(&mut t, "ingest", || ingest(cfg))?;
    let prep = timed(&mut t, "preprocess", || prepare(raw, cfg))?;
    let run = timed(&mut t, "embed", || embed(cfg.method, &prep, cfg))?;
    let clusters = timed(&mut t, "cluster", || cluster(&run, &prep, cfg))?;
    let metrics = timed(&mut t, "metrics", || score(&run, clusters.as_ref()))?;

    let dir = cfg.output.clone();
    timed(&mut t, "write", || {
        create_dir(&dir)?;
        let names: Option<Vec<String>> = run.rows.iter().map(|&r| prep.label_name(r)).collect();
        let mut buf = Vec::new();
        write_embedding_csv(&mut buf, &run.rows, &run.embedding.y, names.as_deref())
            .map_err(|e| core_err("write", e))?;
        write_file(&dir.join("embedding.csv"), &buf)?;
        write_file(
            &dir.join("metrics.json"),
            to_text(&metrics_json(metrics.as_ref())).as_bytes(),
        )?;
        if run.embedding.dim() == 2 {
            let colors: Option<Vec<String>> = match &clusters {
                Some(c) => Some(c.assignments().iter().map(|a| a.to_string()).collect()),
                None => names.clone(),
            };
            let svg = scatter_svg(&run.embedding.y, colors.as_deref())?;
            write_file(&dir.join("scatter.svg"), svg.as_bytes())?;
        }
        Ok(())
    })?;

    let mut config = serde_json::to_value(cfg).expect("config serializes");
    round_floats(&mut config);
    let mut metrics_by_method = Map::new();
    metrics_by_method.insert(cfg.method.name().into(), metrics_json(metrics.as_ref()));
    let report = json!({
        "config": config,
        "method": cfg.method.name(),
        "metrics": metrics_by_method,
        "n_embedded": run.rows.len(),
        "bridges": run.bridges,
        "tau": opt_num(run.tau),
        "tau_selection": run.selection.as_ref().map(selection_json),
        "stages": timings_json(&t),
        "method_stages": timings_json(&run.stages),
        "scatter": run.embedding.dim() == 2,
        "total_ms": num(ms(start.elapsed())),
    });
    write_file(&dir.join("report.json"), to_text(&report).as_bytes())?;
    Ok(RunOutcome {
        dir,
        report,
        metrics,
    })
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub n: usize,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<Row>,
}

const COLUMNS: [&str; 3] = ["ari", "fm", "vm"];

fn column(m: &MetricsReport, c: usize) -> f64 {
    [m.ari, m.fm, m.vm][c]
}

impl Comparison {
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// Whether row `r` attains the column maximum (ties all count).
    pub fn is_best(&self, r: usize, c: usize) -> bool {
        let Some(m) = &self.rows[r].metrics else {
            return false;
        };
        let best = self
            .rows
            .iter()
            .filter_map(|row| row.metrics.as_ref())
            .map(|m| column(m, c))
            .fold(f64::NEG_INFINITY, f64::max);
        column(m, c) == best
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut s = format!(
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>6}\n",
            "method", "ari", "fm", "vm", "n"
        );
        for (i, row) in self.rows.iter().enumerate() {
            match &row.metrics {
                Some(m) => {
                    let cells: Vec<String> = (0..3)
                        .map(|c| {
                            let mark = if self.is_best(i, c) { "*" } else { " " };
                            format!("{:>8.4}{mark}", column(m, c))
                        })
                        .collect();
                    s.push_str(&format!(
                        "{:<width$}  {}  {}  {}  {:>6}\n",
                        row.name, cells[0], cells[1], cells[2], row.n
                    ));
                }
                None => s.push_str(&format!(
                    "{:<width$}  failed: {}\n",
                    row.name,
                    row.error.as_deref().unwrap_or("no labels to score against")
                )),
            }
        }
        s.push_str("* best in column\n");
        s
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let best: Vec<&str> = (0..3)
                    .filter(|&c| self.is_best(i, c))
                    .map(|c| COLUMNS[c])
                    .collect();
                json!({
                    "method": r.name,
                    "n": r.n,
                    "metrics": metrics_json(r.metrics.as_ref()),
                    "best": best,
                    "error": r.error,
                })
            })
            .collect();
        json!({ "rows": rows })
    }
}

/// Scores an external partition against the dataset labels. Partition
/// indices refer to rows of the input file.
pub fn score_external(part: &PartitionFile, raw: &LabeledDataset) -> Result<Row, CliError> {
    let labels = raw.require_labels().map_err(|e| core_err("external", e))?;
    let mut truth = Vec::with_capacity(part.index.len());
    for &i in &part.index {
        let l = labels.get(i).ok_or_else(|| {
            CliError::io(
                "external",
                format!(
                    "partition index {i} is outside the dataset ({} rows)",
                    labels.len()
                ),
            )
        })?;
        truth.push(*l);
    }
    let m = MetricsReport::score(
        &Partition::from_raw(&truth),
        &Partition::from_raw(&part.codes()),
    )
    .map_err(|e| core_err("external", e))?;
    Ok(Row {
        name: "external".into(),
        n: part.index.len(),
        metrics: Some(m),
        error: None,
    })
}

fn read_partition(path: &str, stage: &'static str) -> Result<PartitionFile, CliError> {
    let f = fs::File::open(path)
        .map_err(|e| CliError::io(stage, format!("cannot open {path}: {e}")))?;
    parse_partition_csv(f).map_err(|e| core_err(stage, e))
}

/// Runs every configured method on one shared preprocessed dataset.
/// Member failures become annotated rows; the table is always produced.
pub fn compare(cfg: &RunConfig) -> Result<Comparison, CliError> {
    let raw = ingest(cfg)?;
    let prep = prepare(raw, cfg)?;
    let methods = if cfg.compare.methods.is_empty() {
        vec![cfg.method]
    } else {
        cfg.compare.methods.clone()
    };
    let mut rows = Vec::new();
    for m in methods {
        let outcome = embed(m, &prep, cfg).and_then(|run| {
            let clusters = cluster(&run, &prep, cfg)?;
            let metrics = score(&run, clusters.as_ref())?;
            Ok((run.rows.len(), metrics))
        });
        rows.push(match outcome {
            Ok((n, metrics)) => Row {
                name: m.name().into(),
                n,
                metrics,
                error: None,
            },
            Err(e) => Row {
                name: m.name().into(),
                n: 0,
                metrics: None,
                error: Some(e.to_string()),
            },
        });
    }
    if let Some(path) = &cfg.compare.external {
        let row = read_partition(path, "external").and_then(|p| score_external(&p, &prep.raw));
        rows.push(row.unwrap_or_else(|e| Row {
            name: "external".into(),
            n: 0,
            metrics: None,
            error: Some(e.to_string()),
        }));
    }
    let table = Comparison { rows };
    create_dir(&cfg.output)?;
    write_file(
        &cfg.output.join("comparison.txt"),
        table.to_text().as_bytes(),
    )?;
    write_file(
        &cfg.output.join("comparison.json"),
        to_text(&table.to_json()).as_bytes(),
    )?;
    Ok(table)
}

/// Scatter plot of an embedding file. Labels come from `labels` (a
/// partition CSV) when given, else from the embedding's label column.
pub fn plot(embedding: &Path, labels: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let f = fs::File::open(embedding)
        .map_err(|e| CliError::io("plot", format!("cannot open {}: {e}", embedding.display())))?;
    let table = parse_embedding_csv(f).map_err(|e| core_err("plot", e))?;
    let names = match labels {
        Some(path) => {
            let part = read_partition(&path.to_string_lossy(), "plot")?;
            let by_index: HashMap<usize, &String> =
                part.index.iter().copied().zip(&part.labels).collect();
            let names = table
                .index
                .iter()
                .map(|i| {
                    by_index.get(i).map(|s| (*s).clone()).ok_or_else(|| {
                        CliError::io("plot", format!("no label for embedding row {i}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(names)
        }
        None => table.labels.clone(),
    };
    let svg = scatter_svg(&table.y, names.as_deref())?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_file(out, svg.as_bytes())
}

/// Scores a clustering file against a label file, both `index,label`,
/// over the clustering's indices.
pub fn score_files(partition: &Path, labels: &Path) -> Result<MetricsReport, CliError> {
    let pred = read_partition(&partition.to_string_lossy(), "score")?;
    let truth = read_partition(&labels.to_string_lossy(), "score")?;
    let by_index: HashMap<usize, &String> =
        truth.index.iter().copied().zip(&truth.labels).collect();
    let t: Vec<&String> = pred
        .index
        .iter()
        .map(|i| {
            by_index
                .get(i)
                .copied()
                .ok_or_else(|| CliError::io("score", format!("no true label for index {i}")))
        })
        .collect::<Result<_, _>>()?;
    MetricsReport::score(&Partition::from_raw(&t), &Partition::from_raw(&pred.labels))
        .map_err(|e| core_err("score", e))
}
