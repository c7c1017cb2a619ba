//! Cross-domain evaluation: data tables, pairwise geometric-mean precision,
//! the model-vs-model matrix, and the signs-vs-model / own-domain views.
//!
//! The core rules:
//!
//! * Two models are compared only on the classes they share with the SCS,
//!   and both are scored on the *identical* sample slices.
//! * Per-dataset precision is micro-aggregated (summed TP over slice size,
//!   which equals accuracy in closed-set classification); the pair aggregate
//!   is the geometric mean over the datasets that actually contributed
//!   samples. Empty slices are excluded from the product, not counted as 0
//!   or 1. A genuine 0 precision annihilates the mean and is reported as is.
//! * Undefined and zero are distinct everywhere: a cell with no evidence
//!   stays undefined end to end.
//!
//! The matrix cell convention: the winner's cell carries its aggregate
//! precision (positive), the loser's cell carries the signed difference
//! (negative); ties carry the common value on both sides.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::catalog::{
    common_classes, comparison_set_k, Catalog, CatalogError, ClassId, Sample, Split,
};
use crate::classifier::{infer_and_score, ClassCounts, Misclassification, Model, ModelError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no class is shared by all models and the SCS")]
    EmptyGlobalIntersection,
    #[error("model {model}: no test split available{}", dataset.as_ref().map(|d| format!(" (dataset {d})")).unwrap_or_default())]
    MissingTestSplit {
        model: String,
        dataset: Option<String>,
    },
    #[error("need at least two models, got {0}")]
    NotEnoughModels(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// One (model, dataset, split, class) cell: counts plus the derived
/// precision, which is undefined (`None`) when no sample was predicted as
/// this class and none of its samples were scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataCell {
    pub tp: u64,
    pub fp: u64,
    pub precision: Option<f64>,
}

impl DataCell {
    fn from_counts(counts: ClassCounts) -> Self {
        let denom = counts.tp + counts.fp;
        Self {
            tp: counts.tp,
            fp: counts.fp,
            precision: (denom > 0).then(|| counts.tp as f64 / denom as f64),
        }
    }
}

/// Scores for one model on one dataset slice: per-class cells plus the
/// misclassified samples behind the FP counts.
#[derive(Debug, Clone, Default)]
pub struct Block {
    pub cells: BTreeMap<ClassId, DataCell>,
    pub misclassified: Vec<Misclassification>,
}

/// Per (model, dataset, split) blocks of per-class TP/FP/precision.
#[derive(Debug, Clone, Default)]
pub struct DataTable {
    blocks: BTreeMap<(String, String, Split), Block>,
}

impl DataTable {
    pub fn block(&self, model: &str, dataset: &str, split: Split) -> Option<&Block> {
        self.blocks
            .get(&(model.to_owned(), dataset.to_owned(), split))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(String, String, Split), &Block)> {
        self.blocks.iter()
    }

    pub fn models(&self) -> BTreeSet<&str> {
        self.blocks.keys().map(|(m, _, _)| m.as_str()).collect()
    }

    /// Total false positives recorded for a model across all its blocks.
    pub fn total_fp(&self, model: &str) -> u64 {
        self.blocks
            .iter()
            .filter(|((m, _, _), _)| m == model)
            .flat_map(|(_, b)| b.cells.values())
            .map(|c| c.fp)
            .sum()
    }
}

/// Scores every model against every dataset and split: block (i, j) holds
/// model i's per-class counts on dataset j's samples restricted to
/// `common_classes(C_i, C_j, SCS)`. Empty slices leave all cells undefined.
pub fn generate_data_tables(
    models: &[Model],
    catalog: &Catalog,
    splits: &[Split],
) -> Result<DataTable, EvalError> {
    let mut table = DataTable::default();
    for model in models {
        for dataset in catalog.datasets() {
            let classes = common_classes(model.classes(), dataset.declared_classes(), catalog.scs());
            for &split in splits {
                let slice = comparison_set_k(&classes, dataset, split);
                let outcome = infer_and_score(&slice, model)?;
                let mut block = Block {
                    // Every intersection class gets a row, scored or not.
                    cells: classes
                        .iter()
                        .map(|c| {
                            (
                                c.clone(),
                                DataCell {
                                    tp: 0,
                                    fp: 0,
                                    precision: None,
                                },
                            )
                        })
                        .collect(),
                    misclassified: outcome.misclassified.clone(),
                };
                for (class, counts) in &outcome.counts {
                    block
                        .cells
                        .insert(class.clone(), DataCell::from_counts(*counts));
                }
                table
                    .blocks
                    .insert((model.id.clone(), dataset.id.clone(), split), block);
            }
        }
    }
    Ok(table)
}

/// Geometric mean of already-positive-or-zero values.
fn geometric_mean(values: &[f64]) -> f64 {
    let product: f64 = values.iter().product();
    product.powf(1.0 / values.len() as f64)
}

/// One dataset's contribution to a pairwise comparison.
#[derive(Debug, Clone)]
pub struct DatasetPrecision {
    pub dataset: String,
    pub samples: usize,
    pub p_i: f64,
    pub p_j: f64,
    /// Sample ids scored for each model, in scoring order; the fairness
    /// audit compares these multisets.
    pub scored_i: Vec<String>,
    pub scored_j: Vec<String>,
}

/// Pairwise precision of two models over the identical comparison slices.
#[derive(Debug, Clone)]
pub struct PairPrecision {
    pub model_i: String,
    pub model_j: String,
    /// Datasets with nonempty slices, in catalog order.
    pub per_dataset: Vec<DatasetPrecision>,
    /// Geometric means over the included datasets; `None` when no dataset
    /// contributed (the pair is incomparable).
    pub aggregate_i: Option<f64>,
    pub aggregate_j: Option<f64>,
}

/// Scores both models on every dataset's class-intersection slice and
/// aggregates per-dataset precisions with the geometric mean. The self-pair
/// (i == j) is legal and yields equal aggregates.
pub fn compute_pair_precision(
    model_i: &Model,
    model_j: &Model,
    catalog: &Catalog,
    split: Split,
) -> Result<PairPrecision, EvalError> {
    let classes = common_classes(model_i.classes(), model_j.classes(), catalog.scs());
    let mut per_dataset = Vec::new();
    for dataset in catalog.datasets() {
        let slice = comparison_set_k(&classes, dataset, split);
        if slice.is_empty() {
            continue;
        }
        let outcome_i = infer_and_score(&slice, model_i)?;
        let outcome_j = infer_and_score(&slice, model_j)?;
        let total = slice.len() as f64;
        per_dataset.push(DatasetPrecision {
            dataset: dataset.id.clone(),
            samples: slice.len(),
            p_i: outcome_i.total_tp() as f64 / total,
            p_j: outcome_j.total_tp() as f64 / total,
            scored_i: outcome_i.scored_ids,
            scored_j: outcome_j.scored_ids,
        });
    }
    let (aggregate_i, aggregate_j) = if per_dataset.is_empty() {
        (None, None)
    } else {
        let ps_i: Vec<f64> = per_dataset.iter().map(|d| d.p_i).collect();
        let ps_j: Vec<f64> = per_dataset.iter().map(|d| d.p_j).collect();
        (Some(geometric_mean(&ps_i)), Some(geometric_mean(&ps_j)))
    };
    Ok(PairPrecision {
        model_i: model_i.id.clone(),
        model_j: model_j.id.clone(),
        per_dataset,
        aggregate_i,
        aggregate_j,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixCell {
    /// Winner's precision (positive) or loser's signed deficit (negative);
    /// ties carry the common precision on both sides.
    Value(f64),
    /// No dataset contributed evidence for this pair.
    Incomparable,
}

impl MatrixCell {
    pub fn value(&self) -> Option<f64> {
        match self {
            MatrixCell::Value(v) => Some(*v),
            MatrixCell::Incomparable => None,
        }
    }
}

/// Square pairwise comparison matrix over model ids (sorted).
#[derive(Debug, Clone)]
pub struct ModelMatrix {
    pub model_ids: Vec<String>,
    cells: Vec<MatrixCell>,
}

impl ModelMatrix {
    pub fn cell(&self, i: usize, j: usize) -> MatrixCell {
        self.cells[i * self.model_ids.len() + j]
    }

    pub fn size(&self) -> usize {
        self.model_ids.len()
    }
}

/// Fills the matrix with Eq-style winner/loser cells from pairwise
/// precisions. The diagonal is the model's self-pair precision.
pub fn generate_model_matrix(
    models: &[Model],
    catalog: &Catalog,
    split: Split,
) -> Result<ModelMatrix, EvalError> {
    if models.len() < 2 {
        return Err(EvalError::NotEnoughModels(models.len()));
    }
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&a, &b| models[a].id.cmp(&models[b].id));
    let n = models.len();
    let mut cells = vec![MatrixCell::Incomparable; n * n];
    for a in 0..n {
        for b in a..n {
            let pair = compute_pair_precision(&models[order[a]], &models[order[b]], catalog, split)?;
            match (pair.aggregate_i, pair.aggregate_j) {
                (Some(p_i), Some(p_j)) => {
                    let (cell_ij, cell_ji) = if p_i >= p_j {
                        let ji = if p_j >= p_i { p_j } else { p_j - p_i };
                        (p_i, ji)
                    } else {
                        (p_i - p_j, p_j)
                    };
                    cells[a * n + b] = MatrixCell::Value(cell_ij);
                    cells[b * n + a] = MatrixCell::Value(cell_ji);
                }
                _ => {
                    cells[a * n + b] = MatrixCell::Incomparable;
                    cells[b * n + a] = MatrixCell::Incomparable;
                }
            }
        }
    }
    Ok(ModelMatrix {
        model_ids: order.iter().map(|&i| models[i].id.clone()).collect(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
}

impl MeanKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeanKind::Arithmetic => "arithmetic",
            MeanKind::Geometric => "geometric",
        }
    }

    fn combine(&self, values: &[f64]) -> f64 {
        match self {
            MeanKind::Arithmetic => values.iter().sum::<f64>() / values.len() as f64,
            MeanKind::Geometric => geometric_mean(values),
        }
    }
}

fn mean_of_defined(mean: MeanKind, values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| mean.combine(&defined))
}

/// Classes x models table of per-class precision aggregated across datasets,
/// with row/column marginals under the same mean.
#[derive(Debug, Clone)]
pub struct SignsVsModelTable {
    pub mean: MeanKind,
    pub split: Split,
    pub classes: Vec<ClassId>,
    pub model_ids: Vec<String>,
    /// Row-major `classes x model_ids`; undefined cells are `None`.
    pub cells: Vec<Option<f64>>,
    /// Class difficulty across models.
    pub row_marginals: Vec<Option<f64>>,
    /// Model quality across classes.
    pub col_marginals: Vec<Option<f64>>,
}

impl SignsVsModelTable {
    pub fn cell(&self, class_idx: usize, model_idx: usize) -> Option<f64> {
        self.cells[class_idx * self.model_ids.len() + model_idx]
    }
}

/// Scores every model on the union of per-dataset slices over the *global*
/// common classes (the intersection of all models' class sets with the SCS)
/// and aggregates per-class precision across datasets with the chosen mean.
pub fn signs_vs_model(
    models: &[Model],
    catalog: &Catalog,
    split: Split,
    mean: MeanKind,
) -> Result<SignsVsModelTable, EvalError> {
    let mut global: BTreeSet<ClassId> = catalog.scs().clone();
    for model in models {
        global = global.intersection(model.classes()).cloned().collect();
    }
    if global.is_empty() {
        return Err(EvalError::EmptyGlobalIntersection);
    }
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&a, &b| models[a].id.cmp(&models[b].id));
    let classes: Vec<ClassId> = global.iter().cloned().collect();

    // per_dataset[class][model] -> per-dataset precision values
    let mut values: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for (m_idx, &m) in order.iter().enumerate() {
        let model = &models[m];
        for dataset in catalog.datasets() {
            let slice = comparison_set_k(&global, dataset, split);
            if slice.is_empty() {
                continue;
            }
            let outcome = infer_and_score(&slice, model)?;
            for (c_idx, class) in classes.iter().enumerate() {
                if let Some(counts) = outcome.counts.get(class) {
                    let denom = counts.tp + counts.fp;
                    if denom > 0 {
                        values
                            .entry((c_idx, m_idx))
                            .or_default()
                            .push(counts.tp as f64 / denom as f64);
                    }
                }
            }
        }
    }

    let n_models = order.len();
    let cells: Vec<Option<f64>> = (0..classes.len())
        .flat_map(|c| (0..n_models).map(move |m| (c, m)))
        .map(|(c, m)| {
            values
                .get(&(c, m))
                .map(|per_dataset| mean.combine(per_dataset))
        })
        .collect();
    let row_marginals = (0..classes.len())
        .map(|c| mean_of_defined(mean, (0..n_models).map(|m| cells[c * n_models + m])))
        .collect();
    let col_marginals = (0..n_models)
        .map(|m| mean_of_defined(mean, (0..classes.len()).map(|c| cells[c * n_models + m])))
        .collect();
    Ok(SignsVsModelTable {
        mean,
        split,
        classes,
        model_ids: order.iter().map(|&i| models[i].id.clone()).collect(),
        cells,
        row_marginals,
        col_marginals,
    })
}

/// Per-model per-class precision on the model's own test split, with a
/// geometric-mean summary per model.
#[derive(Debug, Clone)]
pub struct OwnDomainTable {
    pub classes: Vec<ClassId>,
    pub model_ids: Vec<String>,
    /// Row-major `classes x model_ids`.
    pub cells: Vec<Option<f64>>,
    /// Geometric mean of a model's defined per-class precisions.
    pub summaries: Vec<Option<f64>>,
}

impl OwnDomainTable {
    pub fn cell(&self, class_idx: usize, model_idx: usize) -> Option<f64> {
        self.cells[class_idx * self.model_ids.len() + model_idx]
    }
}

/// Scores each model on the TE split of its own training dataset, restricted
/// to `C_i` intersected with the SCS. Models must declare a training dataset
/// with a nonempty TE split; an empty class intersection is not an error and
/// yields an undefined row.
pub fn own_domain_table(models: &[Model], catalog: &Catalog) -> Result<OwnDomainTable, EvalError> {
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&a, &b| models[a].id.cmp(&models[b].id));

    let mut class_union: BTreeSet<ClassId> = BTreeSet::new();
    let mut per_model: Vec<BTreeMap<ClassId, DataCell>> = Vec::new();
    for &m in &order {
        let model = &models[m];
        let dataset_id =
            model
                .train_dataset
                .as_deref()
                .ok_or_else(|| EvalError::MissingTestSplit {
                    model: model.id.clone(),
                    dataset: None,
                })?;
        let dataset = catalog.dataset(dataset_id)?;
        if dataset.split(Split::Te).next().is_none() {
            return Err(EvalError::MissingTestSplit {
                model: model.id.clone(),
                dataset: Some(dataset_id.to_owned()),
            });
        }
        let classes = common_classes(model.classes(), model.classes(), catalog.scs());
        class_union.extend(classes.iter().cloned());
        let slice = comparison_set_k(&classes, dataset, Split::Te);
        let outcome = infer_and_score(&slice, model)?;
        let mut row: BTreeMap<ClassId, DataCell> = classes
            .iter()
            .map(|c| {
                (
                    c.clone(),
                    DataCell {
                        tp: 0,
                        fp: 0,
                        precision: None,
                    },
                )
            })
            .collect();
        for (class, counts) in &outcome.counts {
            row.insert(class.clone(), DataCell::from_counts(*counts));
        }
        per_model.push(row);
    }

    let classes: Vec<ClassId> = class_union.into_iter().collect();
    let n_models = order.len();
    let mut cells = vec![None; classes.len() * n_models];
    for (m_idx, row) in per_model.iter().enumerate() {
        for (c_idx, class) in classes.iter().enumerate() {
            cells[c_idx * n_models + m_idx] = row.get(class).and_then(|cell| cell.precision);
        }
    }
    let summaries = (0..n_models)
        .map(|m| {
            mean_of_defined(
                MeanKind::Geometric,
                (0..classes.len()).map(|c| cells[c * n_models + m]),
            )
        })
        .collect();
    Ok(OwnDomainTable {
        classes,
        model_ids: order.iter().map(|&i| models[i].id.clone()).collect(),
        cells,
        summaries,
    })
}
