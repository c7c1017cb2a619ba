//! Classifier adapters: closed-set inference behind a uniform interface.
//!
//! Two providers satisfy the contract. A [`PredictionLog`] replays the
//! per-sample outputs of an externally trained network; a
//! [`ReferenceClassifier`] is a deliberately simple nearest-centroid model
//! over 24x24 normalized grayscale features, good enough for desk-scale
//! end-to-end runs where training a network would be overkill.
//!
//! Whatever the provider, a model's prediction always lands in its declared
//! class set, and scoring a sample list produces per-class true/false
//! positive counts whose totals add up to the list length.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalog::{ClassId, DatasetManifest, Sample, Split};
use crate::raster::{load_png, Raster, RasterError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model {model}: no prediction for sample {sample_id}")]
    UnknownSample { model: String, sample_id: String },
    #[error("model {model}: prediction {class} for sample {sample_id} is outside the class set")]
    PredictionOutsideClassSet {
        model: String,
        sample_id: String,
        class: String,
    },
    #[error("classes without training samples: {0:?}")]
    EmptyClass(Vec<String>),
    #[error("model file {path}: {reason}")]
    Persist { path: PathBuf, reason: String },
    #[error("prediction log {path}: {reason}")]
    LogFormat { path: PathBuf, reason: String },
    #[error("model has an empty class set")]
    EmptyClassSet,
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Side length of the reference classifier's feature patch.
pub const FEATURE_SIDE: u32 = 24;
/// Feature dimension: 24 x 24 grayscale values.
pub const FEATURE_DIM: usize = (FEATURE_SIDE * FEATURE_SIDE) as usize;

const MODEL_MAGIC: &str = "signbench-centroids v1";

/// Preprocessing shared by training and inference: resize to 24x24,
/// grayscale, percentile histogram stretch.
pub fn feature_vector(r: &Raster) -> Vec<f32> {
    let small = r
        .resize_bilinear(FEATURE_SIDE, FEATURE_SIDE)
        .expect("feature side is nonzero");
    let mut gray = Raster::new(FEATURE_SIDE, FEATURE_SIDE, [0, 0, 0]).expect("nonzero");
    for y in 0..FEATURE_SIDE {
        for x in 0..FEATURE_SIDE {
            let l = small.luma(x, y).round().clamp(0.0, 255.0) as u8;
            gray.set(x, y, [l, l, l]);
        }
    }
    let normalized = crate::augment::apply_histogram_normalize(&gray);
    let mut out = Vec::with_capacity(FEATURE_DIM);
    for y in 0..FEATURE_SIDE {
        for x in 0..FEATURE_SIDE {
            out.push(normalized.get(x, y)[0] as f32);
        }
    }
    out
}

/// Nearest-centroid classifier: one mean feature vector per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceClassifier {
    centroids: BTreeMap<ClassId, Vec<f32>>,
}

impl ReferenceClassifier {
    pub fn classes(&self) -> BTreeSet<ClassId> {
        self.centroids.keys().cloned().collect()
    }

    pub fn centroid(&self, class: &ClassId) -> Option<&[f32]> {
        self.centroids.get(class).map(Vec::as_slice)
    }

    /// Builds a classifier from per-class centroids (each of length 576).
    pub fn from_centroids(centroids: BTreeMap<ClassId, Vec<f32>>) -> Result<Self, ModelError> {
        if centroids.is_empty() {
            return Err(ModelError::EmptyClassSet);
        }
        for v in centroids.values() {
            assert_eq!(v.len(), FEATURE_DIM, "centroid dimension");
        }
        Ok(Self { centroids })
    }

    /// Classifies by minimum Euclidean distance; ties break toward the
    /// lexicographically smaller class id.
    pub fn classify(&self, r: &Raster) -> ClassId {
        let feature = feature_vector(r);
        let mut best: Option<(&ClassId, f64)> = None;
        for (class, centroid) in &self.centroids {
            let dist: f64 = feature
                .iter()
                .zip(centroid)
                .map(|(a, b)| {
                    let d = (*a - *b) as f64;
                    d * d
                })
                .sum();
            // Strict < keeps the earliest (smallest) class id on ties.
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((class, dist));
            }
        }
        best.expect("class set is nonempty").0.clone()
    }

    /// Text serialization with a magic header; floats are written with
    /// Rust's shortest round-trip formatting so load(save(m)) == m.
    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let mut out = String::from(MODEL_MAGIC);
        out.push('\n');
        for (class, centroid) in &self.centroids {
            out.push_str(class.as_str());
            for v in centroid {
                out.push(' ');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_MAGIC) {
            return Err(ModelError::Persist {
                path: path.to_owned(),
                reason: format!("missing magic header {MODEL_MAGIC:?}"),
            });
        }
        let mut centroids = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let class = ClassId::new(parts.next().unwrap_or("")).map_err(|e| {
                ModelError::Persist {
                    path: path.to_owned(),
                    reason: format!("line {}: {e}", i + 2),
                }
            })?;
            let values: Result<Vec<f32>, _> = parts.map(str::parse::<f32>).collect();
            let values = values.map_err(|e| ModelError::Persist {
                path: path.to_owned(),
                reason: format!("line {}: {e}", i + 2),
            })?;
            if values.len() != FEATURE_DIM {
                return Err(ModelError::Persist {
                    path: path.to_owned(),
                    reason: format!(
                        "line {}: expected {FEATURE_DIM} values, got {}",
                        i + 2,
                        values.len()
                    ),
                });
            }
            centroids.insert(class, values);
        }
        Self::from_centroids(centroids)
    }
}

/// Trains the reference classifier on a dataset's TR split: one centroid per
/// declared class, the mean of the preprocessed training features.
pub fn train_reference(dataset: &DatasetManifest) -> Result<ReferenceClassifier, ModelError> {
    let mut sums: BTreeMap<ClassId, (Vec<f64>, u64)> = dataset
        .declared_classes()
        .iter()
        .map(|c| (c.clone(), (vec![0.0; FEATURE_DIM], 0)))
        .collect();
    for sample in dataset.split(Split::Tr) {
        let raster = load_png(&sample.path)?;
        let feature = feature_vector(&raster);
        let (sum, count) = sums.get_mut(&sample.class).expect("class is declared");
        for (acc, v) in sum.iter_mut().zip(&feature) {
            *acc += *v as f64;
        }
        *count += 1;
    }
    let empty: Vec<String> = sums
        .iter()
        .filter(|(_, (_, count))| *count == 0)
        .map(|(c, _)| c.as_str().to_owned())
        .collect();
    if !empty.is_empty() {
        return Err(ModelError::EmptyClass(empty));
    }
    let centroids = sums
        .into_iter()
        .map(|(class, (sum, count))| {
            (
                class,
                sum.into_iter().map(|v| (v / count as f64) as f32).collect(),
            )
        })
        .collect();
    ReferenceClassifier::from_centroids(centroids)
}

/// Externally produced predictions, keyed by sample id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionLog {
    entries: BTreeMap<String, ClassId>,
}

impl PredictionLog {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, ClassId)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, sample_id: &str) -> Option<&ClassId> {
        self.entries.get(sample_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn predictions(&self) -> impl Iterator<Item = (&String, &ClassId)> {
        self.entries.iter()
    }

    /// Parses a `sample_id,predicted_label` CSV. A `# model: <id>` comment
    /// line before the header names the model; returns it when present.
    pub fn load(path: &Path) -> Result<(Option<String>, Self), ModelError> {
        let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut model_id = None;
        let mut entries = BTreeMap::new();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(id) = comment.trim().strip_prefix("model:") {
                    model_id = Some(id.trim().to_owned());
                }
                continue;
            }
            if !saw_header {
                if line != "sample_id,predicted_label" {
                    return Err(ModelError::LogFormat {
                        path: path.to_owned(),
                        reason: format!("line {}: expected header sample_id,predicted_label", i + 1),
                    });
                }
                saw_header = true;
                continue;
            }
            let (sample_id, label) = line.split_once(',').ok_or_else(|| ModelError::LogFormat {
                path: path.to_owned(),
                reason: format!("line {}: expected two comma-separated fields", i + 1),
            })?;
            let class = ClassId::new(label.trim()).map_err(|e| ModelError::LogFormat {
                path: path.to_owned(),
                reason: format!("line {}: {e}", i + 1),
            })?;
            if entries
                .insert(sample_id.trim().to_owned(), class)
                .is_some()
            {
                return Err(ModelError::LogFormat {
                    path: path.to_owned(),
                    reason: format!("line {}: duplicate sample id {sample_id}", i + 1),
                });
            }
        }
        if !saw_header {
            return Err(ModelError::LogFormat {
                path: path.to_owned(),
                reason: "missing header row".into(),
            });
        }
        Ok((model_id, Self { entries }))
    }
}

#[derive(Debug, Clone)]
pub enum Provider {
    Log(PredictionLog),
    Reference(ReferenceClassifier),
}

/// A trained model: identifier, closed class set C_i, optional training
/// dataset association, and the provider that answers queries.
#[derive(Debug, Clone)]
pub struct Model {
    pub id: String,
    classes: BTreeSet<ClassId>,
    /// Dataset the model was trained on, when known; required for the
    /// own-domain table.
    pub train_dataset: Option<String>,
    provider: Provider,
}

impl Model {
    /// Wraps a provider, checking the closed-set invariant: every class a
    /// log predicts (or a reference model knows) must be in `classes`.
    pub fn new(
        id: impl Into<String>,
        classes: BTreeSet<ClassId>,
        train_dataset: Option<String>,
        provider: Provider,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        if classes.is_empty() {
            return Err(ModelError::EmptyClassSet);
        }
        match &provider {
            Provider::Log(log) => {
                for (sample_id, class) in log.predictions() {
                    if !classes.contains(class) {
                        return Err(ModelError::PredictionOutsideClassSet {
                            model: id,
                            sample_id: sample_id.clone(),
                            class: class.as_str().to_owned(),
                        });
                    }
                }
            }
            Provider::Reference(reference) => {
                if reference.classes() != classes {
                    return Err(ModelError::EmptyClassSet);
                }
            }
        }
        Ok(Self {
            id,
            classes,
            train_dataset,
            provider,
        })
    }

    pub fn from_reference(
        id: impl Into<String>,
        train_dataset: Option<String>,
        reference: ReferenceClassifier,
    ) -> Result<Self, ModelError> {
        let classes = reference.classes();
        Self::new(id, classes, train_dataset, Provider::Reference(reference))
    }

    /// The model's class set C_i.
    pub fn classes(&self) -> &BTreeSet<ClassId> {
        &self.classes
    }

    /// Closed-set prediction for one sample.
    pub fn predict(&self, sample: &Sample) -> Result<ClassId, ModelError> {
        match &self.provider {
            Provider::Log(log) => log.get(&sample.id).cloned().ok_or_else(|| {
                ModelError::UnknownSample {
                    model: self.id.clone(),
                    sample_id: sample.id.clone(),
                }
            }),
            Provider::Reference(reference) => {
                let raster = load_png(&sample.path)?;
                Ok(reference.classify(&raster))
            }
        }
    }
}

/// Per-class true/false positive counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
}

/// A sample the model got wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Misclassification {
    pub sample_id: String,
    pub dataset: String,
    pub true_class: ClassId,
    pub predicted: ClassId,
}

/// Outcome of scoring a sample list with one model.
#[derive(Debug, Clone, Default)]
pub struct ScoreOutcome {
    /// Counts keyed by class: TP for correctly predicted samples of the
    /// class, FP for samples of other classes predicted as it.
    pub counts: BTreeMap<ClassId, ClassCounts>,
    /// Misclassified samples in scoring order.
    pub misclassified: Vec<Misclassification>,
    /// Sample ids actually scored, in scoring order (fairness audit trail).
    pub scored_ids: Vec<String>,
}

impl ScoreOutcome {
    pub fn total_tp(&self) -> u64 {
        self.counts.values().map(|c| c.tp).sum()
    }

    pub fn total_fp(&self) -> u64 {
        self.counts.values().map(|c| c.fp).sum()
    }
}

/// Scores every sample: a correct prediction increments TP of the true
/// class, a wrong one increments FP of the predicted class. The counts sum
/// to the number of samples.
pub fn infer_and_score(samples: &[&Sample], model: &Model) -> Result<ScoreOutcome, ModelError> {
    let mut outcome = ScoreOutcome::default();
    for sample in samples {
        let predicted = model.predict(sample)?;
        outcome.scored_ids.push(sample.id.clone());
        if predicted == sample.class {
            outcome.counts.entry(predicted).or_default().tp += 1;
        } else {
            outcome.counts.entry(predicted.clone()).or_default().fp += 1;
            outcome.counts.entry(sample.class.clone()).or_default();
            outcome.misclassified.push(Misclassification {
                sample_id: sample.id.clone(),
                dataset: sample.dataset.clone(),
                true_class: sample.class.clone(),
                predicted,
            });
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::save_png;
    use std::path::PathBuf;

    fn class(s: &str) -> ClassId {
        ClassId::new(s).unwrap()
    }

    fn sample(id: &str, cls: &str, path: PathBuf) -> Sample {
        Sample {
            id: id.into(),
            path,
            class: class(cls),
            dataset: "d".into(),
            split: Split::Te,
        }
    }

    fn tr_sample(id: &str, cls: &str, path: PathBuf) -> Sample {
        Sample {
            split: Split::Tr,
            ..sample(id, cls, path)
        }
    }

    fn log_model(id: &str, classes: &[&str], entries: &[(&str, &str)]) -> Model {
        let log = PredictionLog::from_entries(
            entries
                .iter()
                .map(|(s, c)| (s.to_string(), class(c)))
                .collect::<Vec<_>>(),
        );
        Model::new(
            id,
            classes.iter().map(|c| class(c)).collect(),
            None,
            Provider::Log(log),
        )
        .unwrap()
    }

    fn shape_raster(kind: u8) -> Raster {
        let mut r = Raster::new(32, 32, [230, 230, 230]).unwrap();
        for y in 0..32u32 {
            for x in 0..32u32 {
                let ink = match kind {
                    0 => (8..24).contains(&x) && (14..18).contains(&y),
                    1 => (14..18).contains(&x) && (8..24).contains(&y),
                    _ => x.abs_diff(y) < 3,
                };
                if ink {
                    r.set(x, y, [25, 25, 25]);
                }
            }
        }
        r
    }

    fn training_fixture(dir: &Path, copies: u32) -> DatasetManifest {
        let mut samples = Vec::new();
        for (kind, cls) in [(0u8, "h-bar"), (1, "v-bar"), (2, "diag")] {
            for i in 0..copies {
                let path = dir.join(format!("{cls}-{i}.png"));
                save_png(&shape_raster(kind), &path).unwrap();
                samples.push(Sample {
                    id: format!("{cls}-{i}"),
                    path,
                    class: class(cls),
                    dataset: "train".into(),
                    split: Split::Tr,
                });
            }
        }
        DatasetManifest::from_samples("train", "XX", samples).unwrap()
    }

    #[test]
    fn single_sample_centroid_equals_feature() {
        let dir = tempfile::tempdir().unwrap();
        let d = training_fixture(dir.path(), 1);
        let model = train_reference(&d).unwrap();
        let expected = feature_vector(&shape_raster(0));
        assert_eq!(model.centroid(&class("h-bar")).unwrap(), &expected[..]);
    }

    #[test]
    fn duplicated_samples_leave_centroid_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let single = train_reference(&training_fixture(dir.path(), 1)).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let tripled = train_reference(&training_fixture(dir2.path(), 3)).unwrap();
        for cls in ["h-bar", "v-bar", "diag"] {
            let a = single.centroid(&class(cls)).unwrap();
            let b = tripled.centroid(&class(cls)).unwrap();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn two_sample_centroid_is_elementwise_average() {
        let dir = tempfile::tempdir().unwrap();
        let mut variant = shape_raster(0);
        variant.set(0, 0, [0, 0, 0]);
        let p1 = dir.path().join("a.png");
        let p2 = dir.path().join("b.png");
        save_png(&shape_raster(0), &p1).unwrap();
        save_png(&variant, &p2).unwrap();
        let d = DatasetManifest::from_samples(
            "train",
            "XX",
            vec![tr_sample("a", "h-bar", p1), tr_sample("b", "h-bar", p2)],
        )
        .unwrap();
        let model = train_reference(&d).unwrap();
        let f1 = feature_vector(&shape_raster(0));
        let f2 = feature_vector(&variant);
        let centroid = model.centroid(&class("h-bar")).unwrap();
        for ((a, b), c) in f1.iter().zip(&f2).zip(centroid) {
            assert!(((a + b) / 2.0 - c).abs() < 1e-4);
        }
    }

    #[test]
    fn training_sample_classifies_to_own_class() {
        let dir = tempfile::tempdir().unwrap();
        let d = training_fixture(dir.path(), 1);
        let model = train_reference(&d).unwrap();
        assert_eq!(model.classify(&shape_raster(0)), class("h-bar"));
        assert_eq!(model.classify(&shape_raster(1)), class("v-bar"));
        assert_eq!(model.classify(&shape_raster(2)), class("diag"));
    }

    #[test]
    fn equidistant_tie_breaks_lexicographically() {
        let centroids = BTreeMap::from([
            (class("alpha"), vec![10.0f32; FEATURE_DIM]),
            (class("beta"), vec![10.0f32; FEATURE_DIM]),
        ]);
        let model = ReferenceClassifier::from_centroids(centroids).unwrap();
        // Constant input image: histogram normalization leaves it constant,
        // both centroids are equidistant.
        let r = Raster::new(32, 32, [10, 10, 10]).unwrap();
        assert_eq!(model.classify(&r), class("alpha"));
    }

    #[test]
    fn empty_training_class_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        save_png(&shape_raster(0), &p).unwrap();
        let d = DatasetManifest::from_samples(
            "train",
            "XX",
            vec![
                tr_sample("tr1", "v-bar", p.clone()),
                sample("te1", "h-bar", p),
            ],
        )
        .unwrap();
        match train_reference(&d) {
            Err(ModelError::EmptyClass(classes)) => assert_eq!(classes, vec!["h-bar".to_owned()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn model_save_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let d = training_fixture(dir.path(), 1);
        let model = train_reference(&d).unwrap();
        let path = dir.path().join("model.txt");
        model.save(&path).unwrap();
        assert_eq!(ReferenceClassifier::load(&path).unwrap(), model);
    }

    #[test]
    fn model_load_rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "not a model\n").unwrap();
        assert!(matches!(
            ReferenceClassifier::load(&path),
            Err(ModelError::Persist { .. })
        ));
    }

    #[test]
    fn log_lookup_and_unknown_sample() {
        let model = log_model("m", &["speed-50", "stop"], &[("s1", "speed-50")]);
        let s1 = sample("s1", "speed-50", PathBuf::from("unused.png"));
        assert_eq!(model.predict(&s1).unwrap(), class("speed-50"));
        let ghost = sample("ghost", "stop", PathBuf::from("unused.png"));
        assert!(matches!(
            model.predict(&ghost),
            Err(ModelError::UnknownSample { .. })
        ));
    }

    #[test]
    fn log_predictions_must_lie_in_class_set() {
        let log = PredictionLog::from_entries(vec![("s1".to_owned(), class("mystery"))]);
        let err = Model::new(
            "m",
            [class("stop")].into_iter().collect(),
            None,
            Provider::Log(log),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::PredictionOutsideClassSet { .. }));
    }

    #[test]
    fn log_file_parses_comment_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("preds.csv");
        fs::write(
            &path,
            "# model: alexnet-gtsrb\nsample_id,predicted_label\ns1,speed-50\ns2,stop\n",
        )
        .unwrap();
        let (id, log) = PredictionLog::load(&path).unwrap();
        assert_eq!(id.as_deref(), Some("alexnet-gtsrb"));
        assert_eq!(log.len(), 2);
        assert_eq!(log.get("s2"), Some(&class("stop")));
    }

    #[test]
    fn perfect_log_scores_all_tp() {
        let model = log_model(
            "m",
            &["a", "b"],
            &[("s1", "a"), ("s2", "a"), ("s3", "b")],
        );
        let samples = [
            sample("s1", "a", PathBuf::new()),
            sample("s2", "a", PathBuf::new()),
            sample("s3", "b", PathBuf::new()),
        ];
        let refs: Vec<&Sample> = samples.iter().collect();
        let outcome = infer_and_score(&refs, &model).unwrap();
        assert_eq!(outcome.counts[&class("a")], ClassCounts { tp: 2, fp: 0 });
        assert_eq!(outcome.counts[&class("b")], ClassCounts { tp: 1, fp: 0 });
        assert!(outcome.misclassified.is_empty());
    }

    #[test]
    fn all_predicted_as_one_class_hand_count() {
        // 2-class slice {A: 3, B: 2}, everything predicted A.
        let model = log_model(
            "m",
            &["A", "B"],
            &[("a1", "A"), ("a2", "A"), ("a3", "A"), ("b1", "A"), ("b2", "A")],
        );
        let samples = [
            sample("a1", "A", PathBuf::new()),
            sample("a2", "A", PathBuf::new()),
            sample("a3", "A", PathBuf::new()),
            sample("b1", "B", PathBuf::new()),
            sample("b2", "B", PathBuf::new()),
        ];
        let refs: Vec<&Sample> = samples.iter().collect();
        let outcome = infer_and_score(&refs, &model).unwrap();
        assert_eq!(outcome.counts[&class("A")], ClassCounts { tp: 3, fp: 2 });
        assert_eq!(outcome.counts[&class("B")], ClassCounts { tp: 0, fp: 0 });
        assert_eq!(outcome.total_tp() + outcome.total_fp(), 5);
        assert_eq!(outcome.misclassified.len(), 2);
    }

    #[test]
    fn empty_slice_scores_zero() {
        let model = log_model("m", &["a"], &[]);
        let outcome = infer_and_score(&[], &model).unwrap();
        assert!(outcome.counts.is_empty());
        assert_eq!(outcome.total_tp() + outcome.total_fp(), 0);
    }
}
