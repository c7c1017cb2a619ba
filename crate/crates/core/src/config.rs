//! Run and pipeline configuration files (TOML) and their translation into
//! domain objects: taxonomy, catalog, models, and generation specs.
//!
//! One run configuration drives the whole loop. Relative paths inside a
//! config are resolved against the config file's directory, so a run
//! directory can be moved wholesale.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::augment::{
    AugmentError, FilterThresholds, GenerationSpec, Pipeline, Step, DEFAULT_FILL,
};
use crate::catalog::{ingest_manifest, Catalog, CatalogError, ClassId, ClassTaxonomy, Split};
use crate::classifier::{
    train_reference, Model, ModelError, PredictionLog, Provider, ReferenceClassifier,
};
use crate::raster::{load_png, RasterError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Which splits a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitChoice {
    Tr,
    #[default]
    Te,
    Both,
}

impl SplitChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tr" => Some(SplitChoice::Tr),
            "te" => Some(SplitChoice::Te),
            "both" => Some(SplitChoice::Both),
            _ => None,
        }
    }

    pub fn splits(&self) -> Vec<Split> {
        match self {
            SplitChoice::Tr => vec![Split::Tr],
            SplitChoice::Te => vec![Split::Te],
            SplitChoice::Both => vec![Split::Tr, Split::Te],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomySection {
    pub classes: Option<Vec<String>>,
    pub scs: Option<Vec<String>>,
    #[serde(default)]
    pub label_maps: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDecl {
    pub id: String,
    pub manifest: PathBuf,
    #[serde(default = "default_country")]
    pub country: String,
}

fn default_country() -> String {
    "XX".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Log,
    Reference,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDecl {
    pub id: String,
    pub provider: ProviderKind,
    /// Prediction log path (log provider).
    pub log: Option<PathBuf>,
    /// Training dataset association; defines the class set when `classes`
    /// is absent and anchors the own-domain table.
    pub train_dataset: Option<String>,
    /// Explicit class set override.
    pub classes: Option<Vec<String>>,
    /// Reference provider: load the model from here if the file exists,
    /// otherwise train and save to it.
    pub model_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    #[serde(default = "default_dataset_id")]
    pub dataset_id: String,
    pub canonical_dir: PathBuf,
    pub per_class_count: u32,
    /// Pipeline config file path.
    pub pipeline: PathBuf,
    /// Classes to generate; defaults to the taxonomy's SCS.
    pub classes: Option<Vec<String>>,
    #[serde(default)]
    pub filter: FilterThresholds,
}

fn default_dataset_id() -> String {
    "synth".into()
}

fn default_gallery_limit() -> usize {
    20
}

/// Top-level run configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub split: SplitChoice,
    /// Cap on exported false positives per confusion pair.
    #[serde(default = "default_gallery_limit")]
    pub gallery_limit: usize,
    pub taxonomy: Option<TaxonomySection>,
    #[serde(default)]
    pub datasets: Vec<DatasetDecl>,
    #[serde(default)]
    pub models: Vec<ModelDecl>,
    pub generation: Option<GenerationSection>,
    /// Directory where the config file lives; all relative paths in the
    /// config resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        config.base_dir = path
            .parent()
            .map(Path::to_owned)
            .unwrap_or_else(|| PathBuf::from("."));
        let mut seen = std::collections::BTreeSet::new();
        for m in &config.models {
            if !seen.insert(&m.id) {
                return Err(ConfigError::Invalid(format!("duplicate model id {}", m.id)));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for d in &config.datasets {
            if !seen.insert(&d.id) {
                return Err(ConfigError::Invalid(format!(
                    "duplicate dataset id {}",
                    d.id
                )));
            }
        }
        Ok(config)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_owned()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Builds the taxonomy: explicit classes/SCS when configured, the
    /// built-in 12-class set otherwise.
    pub fn build_taxonomy(&self) -> Result<ClassTaxonomy, ConfigError> {
        let mut taxonomy = match &self.taxonomy {
            None => ClassTaxonomy::default_scs(),
            Some(section) => {
                let classes: Vec<ClassId> = match &section.classes {
                    Some(names) => names
                        .iter()
                        .map(ClassId::new)
                        .collect::<Result<_, _>>()?,
                    None => crate::catalog::DEFAULT_CLASSES
                        .iter()
                        .map(|c| ClassId::new(*c))
                        .collect::<Result<_, _>>()?,
                };
                let scs: Vec<ClassId> = match &section.scs {
                    Some(names) => names
                        .iter()
                        .map(ClassId::new)
                        .collect::<Result<_, _>>()?,
                    None => classes.clone(),
                };
                ClassTaxonomy::new(classes, scs)?
            }
        };
        if let Some(section) = &self.taxonomy {
            for (dataset, map) in &section.label_maps {
                let mut converted = BTreeMap::new();
                for (local, canonical) in map {
                    converted.insert(local.clone(), ClassId::new(canonical)?);
                }
                taxonomy.set_label_map(dataset, converted);
            }
        }
        Ok(taxonomy)
    }

    /// Ingests every declared dataset manifest into a catalog.
    pub fn build_catalog(&self, taxonomy: &ClassTaxonomy) -> Result<Catalog, ConfigError> {
        let mut datasets = Vec::new();
        for decl in &self.datasets {
            let manifest_path = self.resolve(&decl.manifest);
            datasets.push(ingest_manifest(
                &manifest_path,
                &decl.id,
                &decl.country,
                taxonomy,
            )?);
        }
        Ok(Catalog::new(taxonomy.clone(), datasets)?)
    }

    /// Materializes every declared model against the catalog: logs are
    /// loaded and validated, reference classifiers are trained (or loaded
    /// from `model_path` when it exists).
    pub fn build_models(&self, catalog: &Catalog) -> Result<Vec<Model>, ConfigError> {
        let mut models = Vec::new();
        for decl in &self.models {
            models.push(self.build_model(decl, catalog)?);
        }
        Ok(models)
    }

    fn declared_classes(
        &self,
        decl: &ModelDecl,
        catalog: &Catalog,
    ) -> Result<std::collections::BTreeSet<ClassId>, ConfigError> {
        if let Some(names) = &decl.classes {
            return Ok(names
                .iter()
                .map(ClassId::new)
                .collect::<Result<_, _>>()?);
        }
        if let Some(dataset_id) = &decl.train_dataset {
            return Ok(catalog.dataset(dataset_id)?.declared_classes().clone());
        }
        Err(ConfigError::Invalid(format!(
            "model {}: needs either classes or train_dataset to define its class set",
            decl.id
        )))
    }

    fn build_model(&self, decl: &ModelDecl, catalog: &Catalog) -> Result<Model, ConfigError> {
        match decl.provider {
            ProviderKind::Log => {
                let log_path = decl.log.as_ref().ok_or_else(|| {
                    ConfigError::Invalid(format!("model {}: log provider needs a log path", decl.id))
                })?;
                let (_, log) = PredictionLog::load(&self.resolve(log_path))?;
                let classes = self.declared_classes(decl, catalog)?;
                Ok(Model::new(
                    decl.id.clone(),
                    classes,
                    decl.train_dataset.clone(),
                    Provider::Log(log),
                )?)
            }
            ProviderKind::Reference => {
                let dataset_id = decl.train_dataset.as_ref().ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "model {}: reference provider needs train_dataset",
                        decl.id
                    ))
                })?;
                let model_path = decl.model_path.as_ref().map(|p| self.resolve(p));
                let reference = match &model_path {
                    Some(path) if path.is_file() => ReferenceClassifier::load(path)?,
                    _ => {
                        let trained = train_reference(catalog.dataset(dataset_id)?)?;
                        if let Some(path) = &model_path {
                            trained.save(path)?;
                        }
                        trained
                    }
                };
                Ok(Model::from_reference(
                    decl.id.clone(),
                    Some(dataset_id.clone()),
                    reference,
                )?)
            }
        }
    }

    /// Builds the generation spec: loads the pipeline config file and the
    /// background pool it references.
    pub fn build_generation(
        &self,
        taxonomy: &ClassTaxonomy,
    ) -> Result<GenerationSpec, ConfigError> {
        let section = self
            .generation
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("config has no [generation] section".into()))?;
        let canonical_dir = self.resolve(&section.canonical_dir);
        if !canonical_dir.is_dir() {
            return Err(ConfigError::Invalid(format!(
                "canonical_dir {} does not exist",
                canonical_dir.display()
            )));
        }
        let pipeline_path = self.resolve(&section.pipeline);
        let pipeline = load_pipeline_config(&pipeline_path, self.master_seed)?;
        let classes = match &section.classes {
            Some(names) => names.clone(),
            None => taxonomy.scs().iter().map(|c| c.as_str().to_owned()).collect(),
        };
        Ok(GenerationSpec {
            dataset_id: section.dataset_id.clone(),
            classes,
            canonical_dir,
            per_class_count: section.per_class_count,
            pipeline,
            filter: section.filter,
        })
    }
}

/// Pipeline configuration file: ordered steps plus the shared fill color and
/// optional background pool directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_fill")]
    pub fill: [u8; 3],
    pub backgrounds_dir: Option<PathBuf>,
    #[serde(default)]
    pub steps: Vec<Step>,
}

fn default_fill() -> [u8; 3] {
    DEFAULT_FILL
}

/// Loads and validates a pipeline config, resolving `backgrounds_dir`
/// relative to the config file and loading every PNG in it.
pub fn load_pipeline_config(path: &Path, master_seed: u64) -> Result<Pipeline, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    let config: PipelineConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let base = path.parent().map(Path::to_owned).unwrap_or_default();
    let mut backgrounds = Vec::new();
    if let Some(dir) = &config.backgrounds_dir {
        let dir = if dir.is_absolute() {
            dir.clone()
        } else {
            base.join(dir)
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|source| ConfigError::Read {
                path: dir.clone(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "png"))
            .collect();
        paths.sort();
        for p in paths {
            backgrounds.push(load_png(&p)?);
        }
    }
    let pipeline = Pipeline {
        steps: config.steps,
        master_seed,
        fill: config.fill,
        backgrounds,
    };
    pipeline.validate()?;
    Ok(pipeline)
}

/// A single finding from config/catalog validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// Per-dataset, per-class, per-split sample counts for coverage diagnostics.
pub fn class_coverage(catalog: &Catalog) -> BTreeMap<(String, String, Split), usize> {
    let mut counts = BTreeMap::new();
    for dataset in catalog.datasets() {
        for sample in dataset.samples() {
            *counts
                .entry((
                    dataset.id.clone(),
                    sample.class.as_str().to_owned(),
                    sample.split,
                ))
                .or_insert(0) += 1;
        }
    }
    counts
}

/// Validates a run config end to end without producing artifacts: datasets
/// ingest cleanly, models resolve, pipeline parameters are in domain, and
/// every SCS class has test coverage somewhere. Warnings do not fail a run.
pub fn validate_run(config: &RunConfig) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut error = |message: String| {
        findings.push(Finding {
            severity: Severity::Error,
            message,
        })
    };

    let taxonomy = match config.build_taxonomy() {
        Ok(t) => t,
        Err(e) => {
            error(format!("taxonomy: {e}"));
            return findings;
        }
    };
    let catalog = match config.build_catalog(&taxonomy) {
        Ok(c) => c,
        Err(e) => {
            error(format!("catalog: {e}"));
            return findings;
        }
    };
    if let Err(e) = config.build_models(&catalog) {
        error(format!("models: {e}"));
    }
    if config.generation.is_some() {
        if let Err(e) = config.build_generation(&taxonomy) {
            error(format!("generation: {e}"));
        }
    }

    let coverage = class_coverage(&catalog);
    for dataset in catalog.datasets() {
        for class in catalog.scs() {
            let te = coverage
                .get(&(dataset.id.clone(), class.as_str().to_owned(), Split::Te))
                .copied()
                .unwrap_or(0);
            if dataset.declared_classes().contains(class) && te == 0 {
                findings.push(Finding {
                    severity: Severity::Warning,
                    message: format!(
                        "dataset {}: class {} has no TE samples",
                        dataset.id, class
                    ),
                });
            }
        }
    }
    findings
}
