//! Run configuration: a TOML file plus `--key value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gtsa_core::dataset::{LabelColumn, PreprocessConfig};
use gtsa_core::gtsa::{
    Connectivity, FrameOrientation, GtsaConfig, OtBackend, Sparsity, Tau, WeightForm, WeightMode,
};
use gtsa_core::transport::SinkhornMode;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GtsaCurvature,
    GtsaWasserstein,
    Pca,
    Kpca,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::GtsaCurvature => "gtsa-curvature",
            Method::GtsaWasserstein => "gtsa-wasserstein",
            Method::Pca => "pca",
            Method::Kpca => "kpca",
        }
    }
}

/// Label column by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelSpec {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// File path or `http(s)://` URL.
    pub source: String,
    pub label: Option<LabelSpec>,
}

impl DatasetSection {
    pub fn label_column(&self) -> Option<LabelColumn> {
        self.label.as_ref().map(|l| match l {
            LabelSpec::Index(i) => LabelColumn::Index(*i),
            LabelSpec::Name(n) => LabelColumn::Name(n.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    pub standardize: bool,
    pub pre_pca_threshold: usize,
    pub pre_pca_dim: usize,
    pub subsample_fraction: f64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        let d = PreprocessConfig::default();
        PreprocessSection {
            standardize: d.standardize,
            pre_pca_threshold: d.pre_pca_threshold,
            pre_pca_dim: d.pre_pca_dim,
            subsample_fraction: d.subsample_fraction,
        }
    }
}

/// `tau = 1.5` or `tau = "auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GtsaSection {
    pub k: usize,
    pub d_intrinsic: Option<usize>,
    pub tau: TauSpec,
    pub tau_candidates: Vec<f64>,
    pub labeled_fraction: f64,
    pub ot_backend: String,
    pub weight_form: String,
    pub ot_order: f64,
    pub sinkhorn_epsilon: f64,
    pub sinkhorn_max_iters: usize,
    pub sinkhorn_mode: String,
    pub sliced_projections: usize,
    pub sparsity: String,
    pub orientation: String,
    pub connectivity: String,
    pub scale_by_eigenvalues: bool,
}

impl Default for GtsaSection {
    fn default() -> Self {
        let d = GtsaConfig::default();
        GtsaSection {
            k: d.k,
            d_intrinsic: d.d_intrinsic,
            tau: match d.tau {
                Tau::Fixed(t) => TauSpec::Value(t),
                Tau::Auto => TauSpec::Keyword("auto".into()),
            },
            tau_candidates: d.tau_candidates,
            labeled_fraction: d.labeled_fraction,
            ot_backend: "exact".into(),
            weight_form: "kernel".into(),
            ot_order: d.ot_order,
            sinkhorn_epsilon: d.sinkhorn_epsilon,
            sinkhorn_max_iters: d.sinkhorn_max_iters,
            sinkhorn_mode: "auto".into(),
            sliced_projections: d.sliced_projections,
            sparsity: "auto".into(),
            orientation: "global".into(),
            connectivity: "separate".into(),
            scale_by_eigenvalues: d.scale_by_eigenvalues,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KpcaSection {
    /// RBF width; `None` means `1 / (D * var(X))`.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub methods: Vec<Method>,
    /// Partition CSV (`index,label`) produced elsewhere, scored as an
    /// extra row.
    pub external: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Embedding dimension for every method.
    #[serde(default = "default_p")]
    pub p: usize,
    /// Ward cluster count; defaults to the number of classes.
    #[serde(default)]
    pub n_clusters: Option<usize>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub gtsa: GtsaSection,
    #[serde(default)]
    pub kpca: KpcaSection,
    #[serde(default)]
    pub compare: CompareSection,
}

fn default_method() -> Method {
    Method::GtsaCurvature
}

fn default_p() -> usize {
    2
}

fn default_output() -> PathBuf {
    PathBuf::from("gtsa-out")
}

fn keyword<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    options
        .iter()
        .find(|(name, _)| *name == value)
        .map(|&(_, v)| v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::config(format!(
                "gtsa.{key} = \"{value}\" is not one of {}",
                names.join(", ")
            ))
        })
}

impl RunConfig {
    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            standardize: self.preprocess.standardize,
            pre_pca_threshold: self.preprocess.pre_pca_threshold,
            pre_pca_dim: self.preprocess.pre_pca_dim,
            subsample_fraction: self.preprocess.subsample_fraction,
            seed: self.seed,
        }
    }

    pub fn gtsa_config(&self, method: Method) -> Result<GtsaConfig, CliError> {
        let g = &self.gtsa;
        let tau = match &g.tau {
            TauSpec::Value(t) => Tau::Fixed(*t),
            TauSpec::Keyword(s) if s == "auto" => Tau::Auto,
            TauSpec::Keyword(s) => {
                return Err(CliError::config(format!(
                    "gtsa.tau = \"{s}\" must be a number or \"auto\""
                )))
            }
        };
        let cfg = GtsaConfig {
            k: g.k,
            p: self.p,
            d_intrinsic: g.d_intrinsic,
            tau,
            mode: match method {
                Method::GtsaWasserstein => WeightMode::Wasserstein,
                _ => WeightMode::Curvature,
            },
            tau_candidates: g.tau_candidates.clone(),
            labeled_fraction: g.labeled_fraction,
            seed: self.seed,
            ot_backend: keyword(
                "ot_backend",
                &g.ot_backend,
                &[
                    ("exact", OtBackend::Exact),
                    ("sinkhorn", OtBackend::Sinkhorn),
                    ("sliced", OtBackend::Sliced),
                ],
            )?,
            weight_form: keyword(
                "weight_form",
                &g.weight_form,
                &[
                    ("kernel", WeightForm::Kernel),
                    ("literal", WeightForm::Literal),
                ],
            )?,
            ot_order: g.ot_order,
            sinkhorn_epsilon: g.sinkhorn_epsilon,
            sinkhorn_max_iters: g.sinkhorn_max_iters,
            sinkhorn_mode: keyword(
                "sinkhorn_mode",
                &g.sinkhorn_mode,
                &[
                    ("auto", SinkhornMode::Auto),
                    ("scaling", SinkhornMode::Scaling),
                    ("log", SinkhornMode::Log),
                ],
            )?,
            sliced_projections: g.sliced_projections,
            sparsity: keyword(
                "sparsity",
                &g.sparsity,
                &[
                    ("auto", Sparsity::Auto),
                    ("dense", Sparsity::Dense),
                    ("edges-only", Sparsity::EdgesOnly),
                ],
            )?,
            orientation: keyword(
                "orientation",
                &g.orientation,
                &[
                    ("global", FrameOrientation::Global),
                    ("eigensolver", FrameOrientation::Eigensolver),
                ],
            )?,
            connectivity: keyword(
                "connectivity",
                &g.connectivity,
                &[
                    ("separate", Connectivity::Separate),
                    ("bridge", Connectivity::Bridge),
                ],
            )?,
            scale_by_eigenvalues: g.scale_by_eigenvalues,
        };
        cfg.validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }

    /// Checks everything that can be checked before touching the data.
    pub fn validate(&self) -> Result<(), CliError> {
        self.preprocess_config()
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        let methods: Vec<Method> = std::iter::once(self.method)
            .chain(self.compare.methods.iter().copied())
            .collect();
        for m in methods {
            if matches!(m, Method::GtsaCurvature | Method::GtsaWasserstein) {
                self.gtsa_config(m)?;
            }
        }
        if self.p == 0 {
            return Err(CliError::config("p must be at least 1"));
        }
        if self.n_clusters == Some(0) {
            return Err(CliError::config("n_clusters must be at least 1"));
        }
        if let Some(g) = self.kpca.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(CliError::config(format!(
                    "kpca.gamma = {g} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a table")
    }
}

/// Parses `text` as TOML, applies `overrides`, and deserializes.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::config(format!("invalid TOML: {e}")))?;
    for (key, value) in parse_overrides(overrides)? {
        set_dotted(&mut table, &key, value)?;
    }
    let cfg: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

/// Pairs `--key value` and `--key=value` into `(key, value)`.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, toml::Value)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(CliError::config(format!(
                "unexpected argument '{arg}'; overrides take the form --key value"
            )));
        };
        let (key, raw) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::config(format!("--{flag} needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(CliError::config(format!("malformed key '--{key}'")));
        }
        out.push((key.replace('-', "_"), parse_value(&raw)));
    }
    Ok(out)
}

/// A TOML literal when `raw` parses as one, otherwise a plain string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut cur = table;
    for part in parts {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("'{part}' in --{key} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
