//! Report rendering: CSV/JSON table emission, heatmap PNGs, and the
//! false-positive gallery that closes the error-guided iteration loop.
//!
//! All emitters are deterministic: rows and columns are ordered
//! lexicographically by id, numbers carry six decimal places, and undefined
//! cells stay distinguishable from zeros (empty CSV field, JSON `null`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::eval::{DataTable, MatrixCell, ModelMatrix, OwnDomainTable, SignsVsModelTable};
use crate::raster::{save_png, Raster, RasterError};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("table is empty")]
    EmptyTable,
    #[error("heatmap cell size {0} is below the 8 px minimum")]
    CellTooSmall(u32),
    #[error("heatmap ramp stops must be pairwise distinct")]
    RampStopsNotDistinct,
    #[error("model {0} does not appear in the data table")]
    UnknownModel(String),
    #[error("sample {0} is not in the catalog")]
    UnknownSample(String),
    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// A 2-D table of optional values with optional marginals: the common shape
/// every evaluation table reduces to for emission and heatmap rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableView {
    /// Header label for the row-id column.
    pub row_label: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// Row-major `rows x cols`; `None` is an undefined cell.
    pub cells: Vec<Option<f64>>,
    #[serde(default)]
    pub row_marginals: Option<Vec<Option<f64>>>,
    #[serde(default)]
    pub col_marginals: Option<Vec<Option<f64>>>,
}

impl TableView {
    pub fn cell(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.cols.len() + col]
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.rows.is_empty() || self.cols.is_empty() {
            return Err(ReportError::EmptyTable);
        }
        assert_eq!(self.cells.len(), self.rows.len() * self.cols.len());
        Ok(())
    }
}

impl ModelMatrix {
    pub fn to_view(&self) -> TableView {
        let n = self.size();
        let cells = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| match self.cell(i, j) {
                MatrixCell::Value(v) => Some(v),
                MatrixCell::Incomparable => None,
            })
            .collect();
        TableView {
            row_label: "model".into(),
            rows: self.model_ids.clone(),
            cols: self.model_ids.clone(),
            cells,
            row_marginals: None,
            col_marginals: None,
        }
    }
}

impl SignsVsModelTable {
    pub fn to_view(&self) -> TableView {
        TableView {
            row_label: "class".into(),
            rows: self.classes.iter().map(|c| c.as_str().to_owned()).collect(),
            cols: self.model_ids.clone(),
            cells: self.cells.clone(),
            row_marginals: Some(self.row_marginals.clone()),
            col_marginals: Some(self.col_marginals.clone()),
        }
    }
}

impl OwnDomainTable {
    pub fn to_view(&self) -> TableView {
        TableView {
            row_label: "class".into(),
            rows: self.classes.iter().map(|c| c.as_str().to_owned()).collect(),
            cols: self.model_ids.clone(),
            cells: self.cells.clone(),
            row_marginals: None,
            col_marginals: Some(self.summaries.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.6}", v),
        None => String::new(),
    }
}

const MARGINAL_LABEL: &str = "(marginal)";

/// Serializes a table view. CSV: header row, one line per row id, marginals
/// (when present) as a trailing column/row labeled `(marginal)`. JSON: the
/// view object with cells as a nested array, `null` for undefined.
pub fn emit_table(view: &TableView, format: TableFormat, path: &Path) -> Result<(), ReportError> {
    view.validate()?;
    let bytes = match format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str(&view.row_label);
            for col in &view.cols {
                out.push(',');
                out.push_str(col);
            }
            if view.row_marginals.is_some() {
                out.push(',');
                out.push_str(MARGINAL_LABEL);
            }
            out.push('\n');
            for (r, row) in view.rows.iter().enumerate() {
                out.push_str(row);
                for c in 0..view.cols.len() {
                    out.push(',');
                    out.push_str(&fmt_cell(view.cell(r, c)));
                }
                if let Some(marginals) = &view.row_marginals {
                    out.push(',');
                    out.push_str(&fmt_cell(marginals[r]));
                }
                out.push('\n');
            }
            if let Some(marginals) = &view.col_marginals {
                out.push_str(MARGINAL_LABEL);
                for v in marginals {
                    out.push(',');
                    out.push_str(&fmt_cell(*v));
                }
                if view.row_marginals.is_some() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.into_bytes()
        }
        TableFormat::Json => {
            let rounded = TableView {
                row_label: view.row_label.clone(),
                rows: view.rows.clone(),
                cols: view.cols.clone(),
                cells: view.cells.iter().map(|c| c.map(round6)).collect(),
                row_marginals: view
                    .row_marginals
                    .as_ref()
                    .map(|m| m.iter().map(|c| c.map(round6)).collect()),
                col_marginals: view
                    .col_marginals
                    .as_ref()
                    .map(|m| m.iter().map(|c| c.map(round6)).collect()),
            };
            let mut bytes = serde_json::to_vec_pretty(&rounded).expect("table serializes");
            bytes.push(b'\n');
            bytes
        }
    };
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses a table previously written by [`emit_table`] with
/// [`TableFormat::Csv`].
pub fn read_table_csv(path: &Path) -> Result<TableView, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })?;
    let parse_err = |reason: String| ReportError::Parse {
        path: path.to_owned(),
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty file".into()))?;
    let mut header_fields = header.split(',');
    let row_label = header_fields
        .next()
        .ok_or_else(|| parse_err("empty header".into()))?
        .to_owned();
    let mut cols: Vec<String> = header_fields.map(str::to_owned).collect();
    let has_row_marginals = cols.last().is_some_and(|c| c == MARGINAL_LABEL);
    if has_row_marginals {
        cols.pop();
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut row_marginals = has_row_marginals.then(Vec::new);
    let mut col_marginals = None;
    let parse_value = |field: &str| -> Result<Option<f64>, ReportError> {
        if field.is_empty() {
            Ok(None)
        } else {
            field
                .parse::<f64>()
                .map(Some)
                .map_err(|e| parse_err(format!("bad number {field:?}: {e}")))
        }
    };
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or("").to_owned();
        let values: Vec<&str> = fields.collect();
        if id == MARGINAL_LABEL {
            let mut marginals = Vec::new();
            for v in values.iter().take(cols.len()) {
                marginals.push(parse_value(v)?);
            }
            col_marginals = Some(marginals);
            continue;
        }
        if values.len() < cols.len() {
            return Err(parse_err(format!("row {id} has too few fields")));
        }
        for v in &values[..cols.len()] {
            cells.push(parse_value(v)?);
        }
        if let Some(m) = row_marginals.as_mut() {
            let field = values
                .get(cols.len())
                .ok_or_else(|| parse_err(format!("row {id} is missing its marginal")))?;
            m.push(parse_value(field)?);
        }
        rows.push(id);
    }
    Ok(TableView {
        row_label,
        rows,
        cols,
        cells,
        row_marginals,
        col_marginals,
    })
}

pub fn read_table_json(path: &Path) -> Result<TableView, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ReportError::Parse {
        path: path.to_owned(),
        reason: e.to_string(),
    })
}

/// Long-form data table emission: one record per
/// (model, dataset, split, class).
pub fn emit_data_table(
    table: &DataTable,
    format: TableFormat,
    path: &Path,
) -> Result<(), ReportError> {
    #[derive(Serialize)]
    struct Record<'a> {
        model: &'a str,
        dataset: &'a str,
        split: &'a str,
        class: &'a str,
        tp: u64,
        fp: u64,
        precision: Option<f64>,
    }
    let records: Vec<Record> = table
        .blocks()
        .flat_map(|((model, dataset, split), block)| {
            block.cells.iter().map(move |(class, cell)| Record {
                model,
                dataset,
                split: split.as_str(),
                class: class.as_str(),
                tp: cell.tp,
                fp: cell.fp,
                precision: cell.precision.map(round6),
            })
        })
        .collect();
    let bytes = match format {
        TableFormat::Csv => {
            let mut out = String::from("model,dataset,split,class,tp,fp,precision\n");
            for r in &records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.model,
                    r.dataset,
                    r.split,
                    r.class,
                    r.tp,
                    r.fp,
                    fmt_cell(r.precision)
                ));
            }
            out.into_bytes()
        }
        TableFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(&records).expect("records serialize");
            bytes.push(b'\n');
            bytes
        }
    };
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeAxis {
    PerColumn,
    PerRow,
    Global,
}

/// Heatmap rendering parameters: normalization axis, a 3-stop color ramp,
/// cell size, and the color for undefined cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeatmapSpec {
    pub normalize: NormalizeAxis,
    pub low: [u8; 3],
    pub mid: [u8; 3],
    pub high: [u8; 3],
    pub undefined: [u8; 3],
    pub cell_size: u32,
}

impl Default for HeatmapSpec {
    fn default() -> Self {
        Self {
            normalize: NormalizeAxis::PerColumn,
            low: [139, 0, 0],
            mid: [255, 255, 0],
            high: [0, 100, 0],
            undefined: [200, 200, 200],
            cell_size: 24,
        }
    }
}

const GRID_COLOR: [u8; 3] = [0, 0, 0];

fn lerp_color(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (a[c] as f64 + (b[c] as f64 - a[c] as f64) * t).round() as u8;
    }
    out
}

/// Maps a normalized position in [0, 1] through the 3-stop ramp.
fn ramp_color(spec: &HeatmapSpec, t: f64) -> [u8; 3] {
    if t <= 0.5 {
        lerp_color(spec.low, spec.mid, t * 2.0)
    } else {
        lerp_color(spec.mid, spec.high, (t - 0.5) * 2.0)
    }
}

fn axis_bounds(values: impl Iterator<Item = Option<f64>>) -> Option<(f64, f64)> {
    let defined: Vec<f64> = values.flatten().collect();
    let min = defined.iter().copied().reduce(f64::min)?;
    let max = defined.iter().copied().reduce(f64::max)?;
    Some((min, max))
}

/// Renders one colored cell per table cell with 1-px gridlines. Image
/// dimensions are exactly `cols*cell + cols + 1` by `rows*cell + rows + 1`.
/// The normalization axis maps its min to the low stop and max to the high
/// stop; constant axes (and single-value axes) map to the mid stop.
pub fn render_heatmap(
    view: &TableView,
    spec: &HeatmapSpec,
    path: &Path,
) -> Result<(), ReportError> {
    view.validate()?;
    if spec.cell_size < 8 {
        return Err(ReportError::CellTooSmall(spec.cell_size));
    }
    if spec.low == spec.mid || spec.mid == spec.high || spec.low == spec.high {
        return Err(ReportError::RampStopsNotDistinct);
    }
    let rows = view.rows.len();
    let cols = view.cols.len();
    let cell = spec.cell_size;
    let width = cols as u32 * cell + cols as u32 + 1;
    let height = rows as u32 * cell + rows as u32 + 1;
    let mut img = Raster::new(width, height, GRID_COLOR)?;

    let global = axis_bounds(view.cells.iter().copied());
    for r in 0..rows {
        for c in 0..cols {
            let color = match view.cell(r, c) {
                None => spec.undefined,
                Some(v) => {
                    let bounds = match spec.normalize {
                        NormalizeAxis::PerColumn => {
                            axis_bounds((0..rows).map(|rr| view.cell(rr, c)))
                        }
                        NormalizeAxis::PerRow => axis_bounds((0..cols).map(|cc| view.cell(r, cc))),
                        NormalizeAxis::Global => global,
                    }
                    .expect("axis with a defined cell has bounds");
                    let t = if bounds.1 > bounds.0 {
                        (v - bounds.0) / (bounds.1 - bounds.0)
                    } else {
                        0.5
                    };
                    ramp_color(spec, t)
                }
            };
            let x0 = c as u32 * (cell + 1) + 1;
            let y0 = r as u32 * (cell + 1) + 1;
            for y in y0..y0 + cell {
                for x in x0..x0 + cell {
                    img.set(x, y, color);
                }
            }
        }
    }
    save_png(&img, path)?;
    Ok(())
}

/// Per-confusion-pair export counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GalleryPair {
    pub true_class: String,
    pub predicted: String,
    /// All misclassifications of this pair in the table.
    pub total: u64,
    /// Files actually copied (capped at the per-cell limit).
    pub exported: u64,
}

#[derive(Debug, Clone, Default)]
pub struct GallerySummary {
    pub pairs: Vec<GalleryPair>,
}

impl GallerySummary {
    pub fn total_misclassified(&self) -> u64 {
        self.pairs.iter().map(|p| p.total).sum()
    }
}

/// Copies a model's misclassified samples into
/// `out_dir/<true>__as__<predicted>/<sample_id>.png` (at most `limit` per
/// pair, first by sample id) and writes `index.csv` listing the exported
/// files. The uncapped per-pair totals reconcile with the data table's FP
/// counts.
pub fn export_false_positives(
    table: &DataTable,
    catalog: &Catalog,
    model_id: &str,
    out_dir: &Path,
    limit: usize,
) -> Result<GallerySummary, ReportError> {
    if !table.models().contains(model_id) {
        return Err(ReportError::UnknownModel(model_id.to_owned()));
    }
    let mut by_pair: BTreeMap<(String, String), Vec<&crate::classifier::Misclassification>> =
        BTreeMap::new();
    for ((model, _, _), block) in table.blocks() {
        if model != model_id {
            continue;
        }
        for miss in &block.misclassified {
            by_pair
                .entry((
                    miss.true_class.as_str().to_owned(),
                    miss.predicted.as_str().to_owned(),
                ))
                .or_default()
                .push(miss);
        }
    }
    fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let mut summary = GallerySummary::default();
    let mut index = String::from("sample_id,true,predicted,dataset\n");
    for ((true_class, predicted), mut misses) in by_pair {
        misses.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
        let dir = out_dir.join(format!("{true_class}__as__{predicted}"));
        fs::create_dir_all(&dir).map_err(|source| ReportError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut exported = 0u64;
        for miss in misses.iter().take(limit) {
            let sample = catalog
                .find_sample(&miss.sample_id)
                .ok_or_else(|| ReportError::UnknownSample(miss.sample_id.clone()))?;
            let dest = dir.join(format!("{}.png", miss.sample_id));
            fs::copy(&sample.path, &dest).map_err(|source| ReportError::Io {
                path: dest.clone(),
                source,
            })?;
            index.push_str(&format!(
                "{},{},{},{}\n",
                miss.sample_id, true_class, predicted, miss.dataset
            ));
            exported += 1;
        }
        summary.pairs.push(GalleryPair {
            true_class,
            predicted,
            total: misses.len() as u64,
            exported,
        });
    }
    let index_path = out_dir.join("index.csv");
    fs::write(&index_path, index).map_err(|source| ReportError::Io {
        path: index_path,
        source,
    })?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::load_png;

    fn small_view() -> TableView {
        TableView {
            row_label: "model".into(),
            rows: vec!["m1".into(), "m2".into()],
            cols: vec!["m1".into(), "m2".into()],
            cells: vec![Some(0.9), Some(-0.123456789), None, Some(0.5)],
            row_marginals: None,
            col_marginals: None,
        }
    }

    #[test]
    fn csv_round_trip_preserves_values_and_undefined() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let view = small_view();
        emit_table(&view, TableFormat::Csv, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches(",,").count() + text.matches(",\n").count(), 1);
        let back = read_table_csv(&path).unwrap();
        assert_eq!(back.rows, view.rows);
        assert_eq!(back.cols, view.cols);
        for (a, b) in back.cells.iter().zip(&view.cells) {
            match (a, b) {
                (None, None) => {}
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-6),
                other => panic!("mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_values_and_undefined() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let mut view = small_view();
        view.row_marginals = Some(vec![Some(0.25), None]);
        view.col_marginals = Some(vec![None, Some(1.0)]);
        emit_table(&view, TableFormat::Json, &path).unwrap();
        let back = read_table_json(&path).unwrap();
        assert_eq!(back.rows, view.rows);
        assert_eq!(back.row_marginals, view.row_marginals);
        for (a, b) in back.cells.iter().zip(&view.cells) {
            match (a, b) {
                (None, None) => {}
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-6),
                other => panic!("mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn emission_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        emit_table(&small_view(), TableFormat::Csv, &a).unwrap();
        emit_table(&small_view(), TableFormat::Csv, &b).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn marginals_round_trip_in_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut view = small_view();
        view.row_label = "class".into();
        view.row_marginals = Some(vec![Some(0.7), Some(0.3)]);
        view.col_marginals = Some(vec![Some(0.1), None]);
        emit_table(&view, TableFormat::Csv, &path).unwrap();
        let back = read_table_csv(&path).unwrap();
        assert_eq!(back.row_marginals, view.row_marginals);
        assert_eq!(back.col_marginals, view.col_marginals);
    }

    #[test]
    fn heatmap_dimensions_are_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.png");
        let view = TableView {
            row_label: "class".into(),
            rows: (0..3).map(|i| format!("r{i}")).collect(),
            cols: (0..5).map(|i| format!("c{i}")).collect(),
            cells: (0..15).map(|i| Some(i as f64 / 14.0)).collect(),
            row_marginals: None,
            col_marginals: None,
        };
        let spec = HeatmapSpec {
            cell_size: 10,
            ..HeatmapSpec::default()
        };
        render_heatmap(&view, &spec, &path).unwrap();
        let img = load_png(&path).unwrap();
        assert_eq!(img.width(), 5 * 10 + 5 + 1);
        assert_eq!(img.height(), 3 * 10 + 3 + 1);
    }

    #[test]
    fn heatmap_single_cell_is_mid_stop() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.png");
        let view = TableView {
            row_label: "x".into(),
            rows: vec!["r".into()],
            cols: vec!["c".into()],
            cells: vec![Some(0.42)],
            row_marginals: None,
            col_marginals: None,
        };
        let spec = HeatmapSpec::default();
        render_heatmap(&view, &spec, &path).unwrap();
        let img = load_png(&path).unwrap();
        assert_eq!(img.get(5, 5), spec.mid);
    }

    #[test]
    fn heatmap_endpoints_hit_low_and_high_stops() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("col.png");
        let view = TableView {
            row_label: "x".into(),
            rows: vec!["r0".into(), "r1".into()],
            cols: vec!["c".into()],
            cells: vec![Some(0.0), Some(1.0)],
            row_marginals: None,
            col_marginals: None,
        };
        let spec = HeatmapSpec {
            normalize: NormalizeAxis::PerColumn,
            cell_size: 8,
            ..HeatmapSpec::default()
        };
        render_heatmap(&view, &spec, &path).unwrap();
        let img = load_png(&path).unwrap();
        // Cell centers: row 0 at y in [1, 9), row 1 at y in [10, 18).
        assert_eq!(img.get(4, 4), spec.low);
        assert_eq!(img.get(4, 13), spec.high);
    }

    #[test]
    fn heatmap_colors_match_ramp_oracle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramp.png");
        let values = [0.1, 0.45, 0.6, 0.2, 0.9, 0.35, 0.5, 0.05, 0.75];
        let view = TableView {
            row_label: "x".into(),
            rows: (0..3).map(|i| format!("r{i}")).collect(),
            cols: (0..3).map(|i| format!("c{i}")).collect(),
            cells: values.iter().map(|v| Some(*v)).collect(),
            row_marginals: None,
            col_marginals: None,
        };
        let spec = HeatmapSpec {
            normalize: NormalizeAxis::Global,
            cell_size: 8,
            ..HeatmapSpec::default()
        };
        render_heatmap(&view, &spec, &path).unwrap();
        let img = load_png(&path).unwrap();
        let (min, max) = (0.05, 0.9);
        for r in 0..3u32 {
            for c in 0..3u32 {
                let v = values[(r * 3 + c) as usize];
                let expected = ramp_color(&spec, (v - min) / (max - min));
                let got = img.get(c * 9 + 4, r * 9 + 4);
                assert_eq!(got, expected, "cell ({r},{c})");
            }
        }
    }

    #[test]
    fn heatmap_undefined_cells_use_undefined_color() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.png");
        let view = TableView {
            row_label: "x".into(),
            rows: vec!["r0".into(), "r1".into()],
            cols: vec!["c".into()],
            cells: vec![None, Some(0.5)],
            row_marginals: None,
            col_marginals: None,
        };
        let spec = HeatmapSpec {
            cell_size: 8,
            ..HeatmapSpec::default()
        };
        render_heatmap(&view, &spec, &path).unwrap();
        let img = load_png(&path).unwrap();
        assert_eq!(img.get(4, 4), spec.undefined);
        // The only defined cell in the column is a constant axis -> mid.
        assert_eq!(img.get(4, 13), spec.mid);
    }

    #[test]
    fn heatmap_rejects_tiny_cells_and_degenerate_ramps() {
        let view = small_view();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let spec = HeatmapSpec {
            cell_size: 4,
            ..HeatmapSpec::default()
        };
        assert!(matches!(
            render_heatmap(&view, &spec, &path),
            Err(ReportError::CellTooSmall(4))
        ));
        let spec = HeatmapSpec {
            low: [0, 0, 0],
            mid: [0, 0, 0],
            ..HeatmapSpec::default()
        };
        assert!(matches!(
            render_heatmap(&view, &spec, &path),
            Err(ReportError::RampStopsNotDistinct)
        ));
    }
}
