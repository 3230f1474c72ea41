//! Tabular dataset ingestion and the preprocessing chain
//! standardize -> stratified subsample -> PCA pre-reduction.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::pca_embed;
use crate::error::{Error, Result};
use crate::linalg::{DataMatrix, Matrix};

/// Feature matrix plus optional integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DataMatrix,
    pub labels: Option<Vec<usize>>,
    pub feature_names: Option<Vec<String>>,
    pub class_count: Option<usize>,
    /// Original class names in code order, when the labels came from text.
    pub class_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn unlabeled(x: DataMatrix) -> Self {
        LabeledDataset {
            x,
            labels: None,
            feature_names: None,
            class_count: None,
            class_names: None,
        }
    }

    /// Attaches labels, which must already be codes in `0..C`.
    pub fn with_labels(x: DataMatrix, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} rows",
                labels.len(),
                x.rows()
            )));
        }
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        Ok(LabeledDataset {
            x,
            labels: Some(labels),
            feature_names: None,
            class_count: Some(class_count),
            class_names: None,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn require_labels(&self) -> Result<&[usize]> {
        self.labels.as_deref().ok_or(Error::MissingLabels)
    }

    /// Restricts to the given rows, keeping label codes and class count.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select_rows(rows),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
            feature_names: self.feature_names.clone(),
            class_count: self.class_count,
            class_names: self.class_names.clone(),
        }
    }
}

/// Preprocessing knobs, applied in the order standardize -> subsample -> pre-reduce.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub standardize: bool,
    pub pre_pca_threshold: usize,
    pub pre_pca_dim: usize,
    pub subsample_fraction: f64,
    pub seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            standardize: true,
            pre_pca_threshold: 50,
            pre_pca_dim: 50,
            subsample_fraction: 1.0,
            seed: 0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pre_pca_dim > self.pre_pca_threshold || self.pre_pca_dim == 0 {
            return Err(Error::InvalidInput(format!(
                "pre_pca_dim = {} must be in 1..={}",
                self.pre_pca_dim, self.pre_pca_threshold
            )));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "subsample_fraction = {} must be in (0, 1]",
                self.subsample_fraction
            )));
        }
        Ok(())
    }
}

/// Which column (if any) holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

/// Loads a CSV file or an `http(s)://` URL.
pub fn load_csv(source: &str, label: Option<&LabelColumn>) -> Result<LabeledDataset> {
    if source.starts_with("http://") || source.starts_with("https://") {
        let tmp = download(source)?;
        let f = std::fs::File::open(tmp.path())?;
        return parse_csv(f, label);
    }
    let f =
        std::fs::File::open(Path::new(source)).map_err(|e| Error::Io(format!("{source}: {e}")))?;
    parse_csv(f, label)
}

fn download(url: &str) -> Result<tempfile::NamedTempFile> {
    let mut resp = ureq::get(url)
        .call()
        .map_err(|e| Error::Io(format!("GET {url}: {e}")))?;
    let mut tmp = tempfile::NamedTempFile::new()?;
    let mut body = resp.body_mut().as_reader();
    std::io::copy(&mut body, &mut tmp)?;
    tmp.flush()?;
    Ok(tmp)
}

/// Parses comma-separated text with a header row. Feature cells must be
/// finite decimal numbers; the label column, if any, is factor-encoded in
/// first-appearance order.
///
/// Rows and columns in errors are 1-based, with the header as row 1.
pub fn parse_csv<R: Read>(reader: R, label: Option<&LabelColumn>) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(e, 1))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "missing header row".into(),
        });
    }
    let label_idx = match label {
        None => None,
        Some(LabelColumn::Index(i)) if *i < headers.len() => Some(*i),
        Some(LabelColumn::Index(i)) => {
            return Err(Error::Parse {
                row: 1,
                column: i + 1,
                message: format!(
                    "label column index {i} out of range ({} columns)",
                    headers.len()
                ),
            })
        }
        Some(LabelColumn::Name(name)) => Some(headers.iter().position(|h| h == name).ok_or_else(
            || Error::Parse {
                row: 1,
                column: 0,
                message: format!("label column '{name}' not found in header"),
            },
        )?),
    };
    let width = headers.len();
    let d = width - usize::from(label_idx.is_some());
    if d == 0 {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "no feature columns".into(),
        });
    }

    let mut values = Vec::new();
    let mut codes = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    let mut rows = 0usize;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e, r + 2))?;
        let row = rec.position().map_or(r + 2, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} cells, found {}", rec.len()),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if Some(c) == label_idx {
                let next = names.len();
                let code = *lookup.entry(cell.to_string()).or_insert_with(|| {
                    names.push(cell.to_string());
                    next
                });
                codes.push(code);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: c + 1,
                message: format!("'{cell}' in column '{}' is not a number", headers[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("non-finite value '{cell}' in column '{}'", headers[c]),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse {
            row: 2,
            column: 1,
            message: "no data rows".into(),
        });
    }
    let x = Matrix::from_vec(rows, d, values)?;
    let feature_names = headers
        .iter()
        .enumerate()
        .filter(|(c, _)| Some(*c) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let (labels, class_count, class_names) = match label_idx {
        Some(_) => (Some(codes), Some(names.len()), Some(names)),
        None => (None, None, None),
    };
    Ok(LabeledDataset {
        x,
        labels,
        feature_names: Some(feature_names),
        class_count,
        class_names,
    })
}

fn csv_err(e: csv::Error, row: usize) -> Error {
    let row = e.position().map_or(row, |p| p.line() as usize);
    Error::Parse {
        row,
        column: 0,
        message: e.to_string(),
    }
}

/// Writes the dataset in the same dialect `parse_csv` reads. Labels, when
/// present, go in a trailing `label` column using the original class names.
pub fn write_csv<W: Write>(ds: &LabeledDataset, mut out: W) -> Result<()> {
    let names: Vec<String> = match &ds.feature_names {
        Some(n) if n.len() == ds.dim() => n.clone(),
        _ => (1..=ds.dim()).map(|j| format!("x{j}")).collect(),
    };
    let mut header = names.join(",");
    if ds.labels.is_some() {
        header.push_str(",label");
    }
    writeln!(out, "{header}")?;
    for i in 0..ds.n() {
        let mut line =
            ds.x.row(i)
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",");
        if let Some(l) = &ds.labels {
            line.push(',');
            match &ds.class_names {
                Some(cn) if l[i] < cn.len() => line.push_str(&cn[l[i]]),
                _ => line.push_str(&l[i].to_string()),
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_csv(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Centers every column and scales it to unit population standard
/// deviation. Constant columns are centered and left at zero.
pub fn standardize(x: &DataMatrix) -> Result<DataMatrix> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = x.cols();
    let mut out = x.clone();
    for c in 0..d {
        let mean = (0..n).map(|i| x[(i, c)]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (x[(i, c)] - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        let div = if sd > 0.0 { sd } else { 1.0 };
        for i in 0..n {
            out[(i, c)] = (x[(i, c)] - mean) / div;
        }
    }
    Ok(out)
}

/// Row indices kept by a class-stratified subsample, in original order.
///
/// Each class keeps `round_half_up(fraction * n_c)` members (at least one),
/// picked by a seeded shuffle of its members.
pub fn stratified_indices(labels: &[usize], fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "subsample fraction {fraction} must be in (0, 1]"
        )));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for m in members.iter_mut().filter(|m| !m.is_empty()) {
        let target = ((fraction * m.len() as f64 + 0.5).floor() as usize).clamp(1, m.len());
        m.shuffle(&mut rng);
        keep.extend_from_slice(&m[..target]);
    }
    keep.sort_unstable();
    Ok(keep)
}

pub fn stratified_subsample(
    ds: &LabeledDataset,
    fraction: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    let labels = ds.require_labels()?;
    let keep = stratified_indices(labels, fraction, seed)?;
    Ok(ds.subset(&keep))
}

/// Projects onto the top `pre_pca_dim` principal components when the
/// dimension exceeds `pre_pca_threshold`; otherwise returns the input.
pub fn pre_reduce(ds: &LabeledDataset, cfg: &PreprocessConfig) -> Result<LabeledDataset> {
    cfg.validate()?;
    if ds.dim() <= cfg.pre_pca_threshold {
        return Ok(ds.clone());
    }
    let (_, y) = pca_embed(&ds.x, cfg.pre_pca_dim.min(ds.n()))?;
    Ok(LabeledDataset {
        x: y,
        feature_names: Some(
            (1..=cfg.pre_pca_dim.min(ds.n()))
                .map(|j| format!("pc{j}"))
                .collect(),
        ),
        ..ds.clone()
    })
}

/// Runs the full preprocessing chain. Rows surviving subsampling are
/// reported alongside, as indices into the input.
pub fn preprocess(
    ds: &LabeledDataset,
    cfg: &PreprocessConfig,
) -> Result<(LabeledDataset, Vec<usize>)> {
    cfg.validate()?;
    let mut cur = ds.clone();
    if cfg.standardize {
        cur.x = standardize(&cur.x)?;
    }
    let rows = if cfg.subsample_fraction < 1.0 {
        let keep = stratified_indices(cur.require_labels()?, cfg.subsample_fraction, cfg.seed)?;
        cur = cur.subset(&keep);
        keep
    } else {
        (0..cur.n()).collect()
    };
    Ok((pre_reduce(&cur, cfg)?, rows))
}
