//! Dataset generation: canonical images in, augmented PNG tree + manifest out.
//!
//! Every output slot `(class, index)` owns the seed
//! `derive(master, "{dataset}/{class}/{index}")`, so any single sample can be
//! regenerated in isolation and parallel generation is byte-identical to
//! serial. Samples rejected by the quality filter are regenerated with an
//! incremented attempt sub-seed, up to [`RETRY_BUDGET`] retries per slot.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::filter::{quality_filter, FilterThresholds, Verdict};
use super::{apply_pipeline, AugmentError, Pipeline};
use crate::raster::{load_png_with_mask, save_png, AlphaMask, Raster, RasterError};
use crate::rng::RandomSource;

/// Retries allowed per output slot after the initial attempt.
pub const RETRY_BUDGET: u32 = 20;

#[derive(Debug, Clone)]
pub struct GenerationSpec {
    /// Dataset id recorded in sample ids and used in seed derivation.
    pub dataset_id: String,
    /// Classes to generate; each needs at least one canonical image.
    pub classes: Vec<String>,
    /// Directory holding `<class>/*.png` or `<class>.png` canonicals.
    pub canonical_dir: PathBuf,
    pub per_class_count: u32,
    pub pipeline: Pipeline,
    pub filter: FilterThresholds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassStats {
    pub class: String,
    pub accepted: u32,
    /// Filter rejections absorbed by retries.
    pub rejected: u32,
}

#[derive(Debug, Clone)]
pub struct GenerationOutcome {
    pub manifest_path: PathBuf,
    pub stats: Vec<ClassStats>,
}

struct Canonical {
    raster: Raster,
    mask: Option<AlphaMask>,
}

fn load_canonicals(spec: &GenerationSpec) -> Result<Vec<(String, Vec<Canonical>)>, AugmentError> {
    let mut missing = Vec::new();
    let mut loaded = Vec::new();
    for class in &spec.classes {
        let mut paths: Vec<PathBuf> = Vec::new();
        let class_dir = spec.canonical_dir.join(class);
        if class_dir.is_dir() {
            for entry in fs::read_dir(&class_dir).map_err(|source| RasterError::Io {
                path: class_dir.clone(),
                source,
            })? {
                let path = entry
                    .map_err(|source| RasterError::Io {
                        path: class_dir.clone(),
                        source,
                    })?
                    .path();
                if path.extension().is_some_and(|e| e == "png") {
                    paths.push(path);
                }
            }
            paths.sort();
        } else {
            let flat = spec.canonical_dir.join(format!("{class}.png"));
            if flat.is_file() {
                paths.push(flat);
            }
        }
        if paths.is_empty() {
            missing.push(class.clone());
            continue;
        }
        let mut canonicals = Vec::with_capacity(paths.len());
        for path in paths {
            let (raster, mask) = load_png_with_mask(&path)?;
            canonicals.push(Canonical { raster, mask });
        }
        loaded.push((class.clone(), canonicals));
    }
    if !missing.is_empty() {
        return Err(AugmentError::InsufficientCanonicals(missing));
    }
    Ok(loaded)
}

struct SlotResult {
    class_idx: usize,
    index: u32,
    rejects: u32,
}

/// Generates `per_class_count` accepted samples per class under
/// `out_dir/<class>/<index>.png` and writes `out_dir/manifest.csv`
/// (`sample_id,path,label,split`, split `TR`). Fully reproducible from the
/// pipeline's master seed; parallel over output slots.
pub fn generate_dataset(
    spec: &GenerationSpec,
    out_dir: &Path,
) -> Result<GenerationOutcome, AugmentError> {
    spec.pipeline.validate()?;
    if spec.per_class_count == 0 {
        return Err(AugmentError::InvalidPipeline(
            "per_class_count must be at least 1".into(),
        ));
    }
    let canonicals = load_canonicals(spec)?;
    for (class, _) in &canonicals {
        fs::create_dir_all(out_dir.join(class)).map_err(|source| RasterError::Io {
            path: out_dir.join(class),
            source,
        })?;
    }

    let master = RandomSource::from_seed(spec.pipeline.master_seed);
    let slots: Vec<(usize, u32)> = (0..canonicals.len())
        .flat_map(|c| (0..spec.per_class_count).map(move |i| (c, i)))
        .collect();

    let results: Vec<Result<SlotResult, AugmentError>> = slots
        .par_iter()
        .map(|&(class_idx, index)| {
            let (class, sources) = &canonicals[class_idx];
            let source = &sources[index as usize % sources.len()];
            let slot_rng = master.derive(&format!("{}/{}/{}", spec.dataset_id, class, index));
            let mut last_reason = String::new();
            let mut rejects = 0;
            for attempt in 0..=RETRY_BUDGET {
                let rng = slot_rng.derive(&attempt.to_string());
                let out =
                    apply_pipeline(&source.raster, source.mask.as_ref(), &spec.pipeline, &rng)?;
                match quality_filter(&out, &spec.filter, spec.pipeline.fill) {
                    Verdict::Accept => {
                        let path = out_dir.join(class).join(format!("{index:05}.png"));
                        save_png(&out, &path)?;
                        return Ok(SlotResult {
                            class_idx,
                            index,
                            rejects,
                        });
                    }
                    Verdict::Reject(reason) => {
                        rejects += 1;
                        last_reason = reason.to_string();
                    }
                }
            }
            Err(AugmentError::RetryExhausted {
                class: class.clone(),
                index,
                attempts: RETRY_BUDGET + 1,
                reason: last_reason,
            })
        })
        .collect();

    let mut stats: Vec<ClassStats> = canonicals
        .iter()
        .map(|(class, _)| ClassStats {
            class: class.clone(),
            accepted: 0,
            rejected: 0,
        })
        .collect();
    for result in results {
        let slot = result?;
        stats[slot.class_idx].accepted += 1;
        stats[slot.class_idx].rejected += slot.rejects;
        let _ = slot.index;
    }

    let manifest_path = out_dir.join("manifest.csv");
    let mut manifest = String::from("sample_id,path,label,split\n");
    for (class, _) in &canonicals {
        for index in 0..spec.per_class_count {
            manifest.push_str(&format!(
                "{dataset}-{class}-{index:05},{class}/{index:05}.png,{class},TR\n",
                dataset = spec.dataset_id,
            ));
        }
    }
    let mut file = fs::File::create(&manifest_path).map_err(|source| RasterError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    file.write_all(manifest.as_bytes())
        .map_err(|source| RasterError::Io {
            path: manifest_path.clone(),
            source,
        })?;

    Ok(GenerationOutcome {
        manifest_path,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{Step, StepParams};
    use crate::raster::load_png;

    fn write_canonical(dir: &Path, class: &str) {
        let mut r = Raster::new(24, 24, [235, 235, 235]).unwrap();
        for y in 5..19 {
            for x in 5..19 {
                r.set(x, y, [30, 30, 140]);
            }
        }
        fs::create_dir_all(dir.join(class)).unwrap();
        save_png(&r, &dir.join(class).join("canon.png")).unwrap();
    }

    fn spec(canonical_dir: &Path, classes: &[&str], count: u32, seed: u64) -> GenerationSpec {
        GenerationSpec {
            dataset_id: "synth".into(),
            classes: classes.iter().map(|s| s.to_string()).collect(),
            canonical_dir: canonical_dir.to_owned(),
            per_class_count: count,
            pipeline: Pipeline::empty(seed),
            filter: FilterThresholds::default(),
        }
    }

    #[test]
    fn empty_pipeline_reproduces_canonicals() {
        let dir = tempfile::tempdir().unwrap();
        let canon = dir.path().join("canon");
        write_canonical(&canon, "stop");
        let out = dir.path().join("out");
        let outcome = generate_dataset(&spec(&canon, &["stop"], 1, 0), &out).unwrap();
        assert_eq!(outcome.stats[0].accepted, 1);
        let generated = load_png(&out.join("stop/00000.png")).unwrap();
        let original = load_png(&canon.join("stop/canon.png")).unwrap();
        assert_eq!(generated, original);
    }

    #[test]
    fn generation_is_reproducible_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let canon = dir.path().join("canon");
        for class in ["stop", "yield"] {
            write_canonical(&canon, class);
        }
        let mut sp = spec(&canon, &["stop", "yield"], 4, 99);
        sp.pipeline.steps = vec![
            Step {
                probability: 1.0,
                params: StepParams::Rotation {
                    angle_deg: [-10.0, 10.0],
                },
            },
            Step {
                probability: 0.8,
                params: StepParams::Noise { sigma: [1.0, 6.0] },
            },
        ];
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        generate_dataset(&sp, &out_a).unwrap();
        generate_dataset(&sp, &out_b).unwrap();
        for class in ["stop", "yield"] {
            for i in 0..4 {
                let pa = fs::read(out_a.join(format!("{class}/{i:05}.png"))).unwrap();
                let pb = fs::read(out_b.join(format!("{class}/{i:05}.png"))).unwrap();
                assert_eq!(pa, pb, "{class}/{i}");
            }
        }
        assert_eq!(
            fs::read(out_a.join("manifest.csv")).unwrap(),
            fs::read(out_b.join("manifest.csv")).unwrap()
        );
    }

    #[test]
    fn manifest_row_count_matches_and_files_decode() {
        let dir = tempfile::tempdir().unwrap();
        let canon = dir.path().join("canon");
        for class in ["a", "b", "c"] {
            write_canonical(&canon, class);
        }
        let out = dir.path().join("out");
        let sp = spec(&canon, &["a", "b", "c"], 5, 3);
        let outcome = generate_dataset(&sp, &out).unwrap();
        let manifest = fs::read_to_string(outcome.manifest_path).unwrap();
        assert_eq!(manifest.lines().count(), 1 + 15);
        for line in manifest.lines().skip(1) {
            let path = line.split(',').nth(1).unwrap();
            load_png(&out.join(path)).unwrap();
        }
    }

    #[test]
    fn missing_canonicals_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let canon = dir.path().join("canon");
        write_canonical(&canon, "stop");
        let out = dir.path().join("out");
        let err = generate_dataset(&spec(&canon, &["stop", "ghost"], 1, 0), &out).unwrap_err();
        match err {
            AugmentError::InsufficientCanonicals(classes) => {
                assert_eq!(classes, vec!["ghost".to_string()]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn hopeless_filter_exhausts_retries() {
        let dir = tempfile::tempdir().unwrap();
        let canon = dir.path().join("canon");
        write_canonical(&canon, "stop");
        let out = dir.path().join("out");
        let mut sp = spec(&canon, &["stop"], 1, 0);
        // No pipeline randomness and an impossible mean requirement: every
        // attempt produces the same rejected image.
        sp.filter.min_mean_luma = 300.0;
        let err = generate_dataset(&sp, &out).unwrap_err();
        match err {
            AugmentError::RetryExhausted {
                class, attempts, ..
            } => {
                assert_eq!(class, "stop");
                assert_eq!(attempts, RETRY_BUDGET + 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
