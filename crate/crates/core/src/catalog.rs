//! Dataset catalog: canonical class taxonomy, manifest ingest, and the
//! class-intersection comparison sets that make cross-domain scoring fair.
//!
//! Heterogeneous datasets arrive as CSV manifests whose local labels are
//! mapped onto canonical class ids through a per-dataset label map. Two
//! models are only ever compared on the classes all parties share:
//! [`common_classes`] is the triple intersection of both training class sets
//! with the selected-classes subset, and [`comparison_set_k`] slices one
//! dataset's split down to those classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("dataset {dataset}: unmapped labels {labels:?}")]
    UnmappedLabel {
        dataset: String,
        labels: Vec<String>,
    },
    #[error("dataset {dataset}: missing image files {paths:?}")]
    MissingImage {
        dataset: String,
        paths: Vec<PathBuf>,
    },
    #[error("duplicate sample id {id}")]
    DuplicateSampleId { id: String },
    #[error("class id must be a nonempty token, got {0:?}")]
    InvalidClassId(String),
    #[error("SCS contains classes outside the taxonomy: {0:?}")]
    ScsNotSubset(Vec<String>),
    #[error("unknown dataset id {0}")]
    UnknownDataset(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Canonical class identifier. Case-sensitive exact-match token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(String);

impl ClassId {
    pub fn new(token: impl Into<String>) -> Result<Self, CatalogError> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(CatalogError::InvalidClassId(token));
        }
        Ok(Self(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    Tr,
    Te,
}

impl Split {
    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "TR" | "tr" => Some(Split::Tr),
            "TE" | "te" => Some(Split::Te),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Tr => "TR",
            Split::Te => "TE",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A labeled image reference within one dataset and split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    /// Resolved path (relative manifest paths are anchored at the manifest's
    /// directory during ingest).
    pub path: PathBuf,
    pub class: ClassId,
    pub dataset: String,
    pub split: Split,
}

/// Canonical classes, the selected-classes subset, and per-dataset label maps.
#[derive(Debug, Clone)]
pub struct ClassTaxonomy {
    classes: BTreeSet<ClassId>,
    scs: BTreeSet<ClassId>,
    label_maps: BTreeMap<String, BTreeMap<String, ClassId>>,
}

/// Default class universe: nine speed-limit steps plus three high-contrast
/// shapes. A starting point, not an authority; replace it wholesale from
/// configuration when working with real datasets.
pub const DEFAULT_CLASSES: [&str; 12] = [
    "speed-20",
    "speed-30",
    "speed-50",
    "speed-60",
    "speed-70",
    "speed-80",
    "speed-90",
    "speed-100",
    "speed-120",
    "no-entry",
    "stop",
    "yield",
];

impl ClassTaxonomy {
    /// Builds a taxonomy; `scs` must be a subset of `classes`.
    pub fn new(
        classes: impl IntoIterator<Item = ClassId>,
        scs: impl IntoIterator<Item = ClassId>,
    ) -> Result<Self, CatalogError> {
        let classes: BTreeSet<ClassId> = classes.into_iter().collect();
        let scs: BTreeSet<ClassId> = scs.into_iter().collect();
        let stray: Vec<String> = scs
            .difference(&classes)
            .map(|c| c.as_str().to_owned())
            .collect();
        if !stray.is_empty() {
            return Err(CatalogError::ScsNotSubset(stray));
        }
        Ok(Self {
            classes,
            scs,
            label_maps: BTreeMap::new(),
        })
    }

    /// The built-in 12-class taxonomy with the SCS equal to all classes.
    pub fn default_scs() -> Self {
        let classes: Vec<ClassId> = DEFAULT_CLASSES
            .iter()
            .map(|c| ClassId::new(*c).expect("default ids are valid"))
            .collect();
        Self::new(classes.clone(), classes).expect("default SCS is a subset")
    }

    pub fn classes(&self) -> &BTreeSet<ClassId> {
        &self.classes
    }

    pub fn scs(&self) -> &BTreeSet<ClassId> {
        &self.scs
    }

    /// Installs the local-label map for one dataset.
    pub fn set_label_map(&mut self, dataset: impl Into<String>, map: BTreeMap<String, ClassId>) {
        self.label_maps.insert(dataset.into(), map);
    }

    /// Maps a dataset-local label to a canonical class. Datasets without a
    /// declared map must already use canonical ids as labels.
    pub fn map_label(&self, dataset: &str, local: &str) -> Option<ClassId> {
        match self.label_maps.get(dataset) {
            Some(map) => map.get(local).cloned(),
            None => {
                let candidate = ClassId(local.to_owned());
                self.classes.contains(&candidate).then_some(candidate)
            }
        }
    }
}

/// One ingested dataset: samples plus the class set they declare (C_k).
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub id: String,
    /// ISO 3166-1 alpha-2, or "XX" for synthetic.
    pub country: String,
    samples: Vec<Sample>,
    declared: BTreeSet<ClassId>,
}

impl DatasetManifest {
    /// Builds a manifest from already-validated samples. The declared class
    /// set is always derived from the samples.
    pub fn from_samples(
        id: impl Into<String>,
        country: impl Into<String>,
        samples: Vec<Sample>,
    ) -> Result<Self, CatalogError> {
        let id = id.into();
        let mut seen = BTreeSet::new();
        for s in &samples {
            if !seen.insert(s.id.clone()) {
                return Err(CatalogError::DuplicateSampleId { id: s.id.clone() });
            }
        }
        let declared = samples.iter().map(|s| s.class.clone()).collect();
        Ok(Self {
            id,
            country: country.into(),
            samples,
            declared,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// The dataset's class set (distinct classes among its samples).
    pub fn declared_classes(&self) -> &BTreeSet<ClassId> {
        &self.declared
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }
}

/// Parses and validates a `sample_id,path,label,split` CSV manifest. Labels
/// are mapped to canonical classes; relative image paths are resolved
/// against the manifest's directory and checked for existence.
pub fn ingest_manifest(
    path: &Path,
    dataset_id: &str,
    country: &str,
    taxonomy: &ClassTaxonomy,
) -> Result<DatasetManifest, CatalogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CatalogError::Parse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CatalogError::Parse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?
        .clone();
    let expected = ["sample_id", "path", "label", "split"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CatalogError::Parse {
            path: path.to_owned(),
            reason: format!("header must be {}", expected.join(",")),
        });
    }

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut samples = Vec::new();
    let mut unmapped = BTreeSet::new();
    let mut missing = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CatalogError::Parse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        let field = |i: usize| record.get(i).unwrap_or("").to_owned();
        let (sample_id, rel_path, label, split) = (field(0), field(1), field(2), field(3));
        if sample_id.is_empty() {
            return Err(CatalogError::Parse {
                path: path.to_owned(),
                reason: format!("row {}: empty sample_id", line + 2),
            });
        }
        let split = Split::parse(&split).ok_or_else(|| CatalogError::Parse {
            path: path.to_owned(),
            reason: format!("row {}: split must be TR or TE, got {split:?}", line + 2),
        })?;
        let class = match taxonomy.map_label(dataset_id, &label) {
            Some(class) => class,
            None => {
                unmapped.insert(label);
                continue;
            }
        };
        let resolved = if Path::new(&rel_path).is_absolute() {
            PathBuf::from(&rel_path)
        } else {
            base.join(&rel_path)
        };
        if !resolved.is_file() {
            missing.push(resolved.clone());
        }
        samples.push(Sample {
            id: sample_id,
            path: resolved,
            class,
            dataset: dataset_id.to_owned(),
            split,
        });
    }
    if !unmapped.is_empty() {
        return Err(CatalogError::UnmappedLabel {
            dataset: dataset_id.to_owned(),
            labels: unmapped.into_iter().collect(),
        });
    }
    if !missing.is_empty() {
        return Err(CatalogError::MissingImage {
            dataset: dataset_id.to_owned(),
            paths: missing,
        });
    }
    if samples.is_empty() {
        return Err(CatalogError::Parse {
            path: path.to_owned(),
            reason: "manifest has no rows".into(),
        });
    }
    DatasetManifest::from_samples(dataset_id, country, samples)
}

/// All ingested datasets plus the taxonomy, immutable once built.
#[derive(Debug, Clone)]
pub struct Catalog {
    taxonomy: ClassTaxonomy,
    datasets: Vec<DatasetManifest>,
}

impl Catalog {
    /// Validates cross-dataset sample-id uniqueness and freezes the catalog.
    pub fn new(
        taxonomy: ClassTaxonomy,
        datasets: Vec<DatasetManifest>,
    ) -> Result<Self, CatalogError> {
        let mut seen = BTreeSet::new();
        for d in &datasets {
            for s in d.samples() {
                if !seen.insert(s.id.clone()) {
                    return Err(CatalogError::DuplicateSampleId { id: s.id.clone() });
                }
            }
        }
        Ok(Self { taxonomy, datasets })
    }

    pub fn taxonomy(&self) -> &ClassTaxonomy {
        &self.taxonomy
    }

    pub fn scs(&self) -> &BTreeSet<ClassId> {
        self.taxonomy.scs()
    }

    /// Datasets in catalog (declaration) order.
    pub fn datasets(&self) -> &[DatasetManifest] {
        &self.datasets
    }

    pub fn dataset(&self, id: &str) -> Result<&DatasetManifest, CatalogError> {
        self.datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| CatalogError::UnknownDataset(id.to_owned()))
    }

    pub fn find_sample(&self, sample_id: &str) -> Option<&Sample> {
        self.datasets
            .iter()
            .flat_map(|d| d.samples())
            .find(|s| s.id == sample_id)
    }
}

/// The classes involved in comparing two models: the intersection of both
/// training class sets and the SCS.
pub fn common_classes(
    c_i: &BTreeSet<ClassId>,
    c_j: &BTreeSet<ClassId>,
    scs: &BTreeSet<ClassId>,
) -> BTreeSet<ClassId> {
    c_i.intersection(c_j)
        .filter(|c| scs.contains(*c))
        .cloned()
        .collect()
}

/// Samples of one dataset's split whose class lies in the comparison class
/// set, ordered by sample id.
pub fn comparison_set_k<'a>(
    classes: &BTreeSet<ClassId>,
    dataset: &'a DatasetManifest,
    split: Split,
) -> Vec<&'a Sample> {
    let mut out: Vec<&Sample> = dataset
        .split(split)
        .filter(|s| classes.contains(&s.class))
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Union of the per-dataset comparison sets, in catalog order. Samples keep
/// their dataset-of-origin tag for per-dataset aggregation.
pub fn comparison_set_union<'a>(
    classes: &BTreeSet<ClassId>,
    catalog: &'a Catalog,
    split: Split,
) -> Vec<&'a Sample> {
    catalog
        .datasets()
        .iter()
        .flat_map(|d| comparison_set_k(classes, d, split))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn class(s: &str) -> ClassId {
        ClassId::new(s).unwrap()
    }

    fn set(names: &[&str]) -> BTreeSet<ClassId> {
        names.iter().map(|n| class(n)).collect()
    }

    fn mem_sample(id: &str, cls: &str, dataset: &str, split: Split) -> Sample {
        Sample {
            id: id.into(),
            path: PathBuf::from(format!("{id}.png")),
            class: class(cls),
            dataset: dataset.into(),
            split,
        }
    }

    #[test]
    fn common_classes_is_triple_intersection() {
        let out = common_classes(
            &set(&["A", "B", "C"]),
            &set(&["B", "C", "D"]),
            &set(&["B", "C", "E"]),
        );
        assert_eq!(out, set(&["B", "C"]));
        // Idempotent when all three sets coincide.
        let s = set(&["A", "B"]);
        assert_eq!(common_classes(&s, &s, &s), s);
        // Disjoint class sets intersect to nothing.
        assert!(common_classes(&set(&["A"]), &set(&["B"]), &set(&["A", "B"])).is_empty());
    }

    #[test]
    fn common_classes_commutative_and_monotone_in_scs() {
        let a = set(&["A", "B", "C", "D"]);
        let b = set(&["B", "C", "E"]);
        let scs_big = set(&["A", "B", "C", "E"]);
        let scs_small = set(&["B"]);
        assert_eq!(
            common_classes(&a, &b, &scs_big),
            common_classes(&b, &a, &scs_big)
        );
        assert!(common_classes(&a, &b, &scs_small).is_subset(&common_classes(&a, &b, &scs_big)));
    }

    #[test]
    fn comparison_set_k_filters_and_sorts() {
        let samples = vec![
            mem_sample("s3", "B", "d1", Split::Te),
            mem_sample("s1", "B", "d1", Split::Te),
            mem_sample("s2", "A", "d1", Split::Te),
            mem_sample("s4", "B", "d1", Split::Tr),
        ];
        let d = DatasetManifest::from_samples("d1", "XX", samples).unwrap();
        let slice = comparison_set_k(&set(&["B"]), &d, Split::Te);
        let ids: Vec<&str> = slice.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["s1", "s3"]);
        assert!(comparison_set_k(&BTreeSet::new(), &d, Split::Te).is_empty());
        // TR request against a class that only has TE samples.
        assert_eq!(comparison_set_k(&set(&["A"]), &d, Split::Tr).len(), 0);
    }

    #[test]
    fn union_concatenates_per_dataset_slices() {
        let d1 = DatasetManifest::from_samples(
            "d1",
            "XX",
            (0..3)
                .map(|i| mem_sample(&format!("a{i}"), "B", "d1", Split::Te))
                .collect(),
        )
        .unwrap();
        let d2 = DatasetManifest::from_samples(
            "d2",
            "XX",
            (0..4)
                .map(|i| mem_sample(&format!("b{i}"), "B", "d2", Split::Te))
                .collect(),
        )
        .unwrap();
        let taxonomy = ClassTaxonomy::new(set(&["B"]), set(&["B"])).unwrap();
        let catalog = Catalog::new(taxonomy, vec![d1, d2]).unwrap();
        let union = comparison_set_union(&set(&["B"]), &catalog, Split::Te);
        assert_eq!(union.len(), 7);
        let per_dataset: usize = catalog
            .datasets()
            .iter()
            .map(|d| comparison_set_k(&set(&["B"]), d, Split::Te).len())
            .sum();
        assert_eq!(per_dataset, union.len());
        // Catalog order: all of d1 before d2.
        assert!(union[..3].iter().all(|s| s.dataset == "d1"));
        assert!(union[3..].iter().all(|s| s.dataset == "d2"));
    }

    #[test]
    fn declared_classes_match_samples() {
        let d = DatasetManifest::from_samples(
            "d",
            "XX",
            vec![
                mem_sample("x1", "speed-50", "d", Split::Tr),
                mem_sample("x2", "speed-50", "d", Split::Te),
                mem_sample("x3", "speed-50", "d", Split::Tr),
            ],
        )
        .unwrap();
        assert_eq!(d.declared_classes(), &set(&["speed-50"]));
    }

    #[test]
    fn scs_must_be_subset() {
        assert!(matches!(
            ClassTaxonomy::new(set(&["A"]), set(&["A", "B"])),
            Err(CatalogError::ScsNotSubset(_))
        ));
    }

    fn write_manifest(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, body).unwrap();
        path
    }

    fn touch_png(dir: &Path, name: &str) {
        let r = crate::raster::Raster::new(2, 2, [100, 100, 100]).unwrap();
        crate::raster::save_png(&r, &dir.join(name)).unwrap();
    }

    #[test]
    fn ingest_maps_local_labels() {
        let dir = tempfile::tempdir().unwrap();
        touch_png(dir.path(), "img1.png");
        let path = write_manifest(
            dir.path(),
            "m.csv",
            "sample_id,path,label,split\ns1,img1.png,SL50,TE\n",
        );
        let mut taxonomy = ClassTaxonomy::default_scs();
        taxonomy.set_label_map(
            "gtsrb",
            BTreeMap::from([("SL50".to_owned(), class("speed-50"))]),
        );
        let d = ingest_manifest(&path, "gtsrb", "DE", &taxonomy).unwrap();
        assert_eq!(d.samples()[0].class, class("speed-50"));
        assert_eq!(d.declared_classes(), &set(&["speed-50"]));
    }

    #[test]
    fn ingest_rejects_unmapped_labels() {
        let dir = tempfile::tempdir().unwrap();
        touch_png(dir.path(), "img1.png");
        let path = write_manifest(
            dir.path(),
            "m.csv",
            "sample_id,path,label,split\ns1,img1.png,mystery,TE\n",
        );
        let taxonomy = ClassTaxonomy::default_scs();
        match ingest_manifest(&path, "d", "XX", &taxonomy) {
            Err(CatalogError::UnmappedLabel { labels, .. }) => {
                assert_eq!(labels, vec!["mystery".to_owned()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_manifest(dir.path(), "m.csv", "sample_id,path,label,split\n");
        assert!(matches!(
            ingest_manifest(&path, "d", "XX", &ClassTaxonomy::default_scs()),
            Err(CatalogError::Parse { .. })
        ));
    }

    #[test]
    fn ingest_reports_missing_images() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_manifest(
            dir.path(),
            "m.csv",
            "sample_id,path,label,split\ns1,gone.png,stop,TE\n",
        );
        assert!(matches!(
            ingest_manifest(&path, "d", "XX", &ClassTaxonomy::default_scs()),
            Err(CatalogError::MissingImage { .. })
        ));
    }

    #[test]
    fn ingest_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        touch_png(dir.path(), "img1.png");
        touch_png(dir.path(), "img2.png");
        let path = write_manifest(
            dir.path(),
            "m.csv",
            "sample_id,path,label,split\ns1,img1.png,stop,TR\ns2,img2.png,yield,TE\n",
        );
        let taxonomy = ClassTaxonomy::default_scs();
        let a = ingest_manifest(&path, "d", "XX", &taxonomy).unwrap();
        let b = ingest_manifest(&path, "d", "XX", &taxonomy).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_eq!(a.declared_classes(), b.declared_classes());
    }

    #[test]
    fn duplicate_ids_rejected_across_datasets() {
        let d1 = DatasetManifest::from_samples(
            "d1",
            "XX",
            vec![mem_sample("dup", "stop", "d1", Split::Te)],
        )
        .unwrap();
        let d2 = DatasetManifest::from_samples(
            "d2",
            "XX",
            vec![mem_sample("dup", "stop", "d2", Split::Te)],
        )
        .unwrap();
        assert!(matches!(
            Catalog::new(ClassTaxonomy::default_scs(), vec![d1, d2]),
            Err(CatalogError::DuplicateSampleId { .. })
        ));
    }
}
