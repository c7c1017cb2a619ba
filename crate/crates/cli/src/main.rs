//! Batch entry point: `validate`, `generate`, and `evaluate` subcommands
//! driven by one run configuration file.
//!
//! Logs go to stderr; machine-readable results go to files and stdout. Every
//! command is deterministic given (config, seed): repeated runs produce
//! byte-identical artifacts regardless of `--threads`.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 generation error,
//! 4 evaluation error, 5 i/o error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use signbench_core::augment::generate_dataset;
use signbench_core::config::{validate_run, RunConfig, Severity, SplitChoice};
use signbench_core::eval::{
    generate_data_tables, generate_model_matrix, own_domain_table, signs_vs_model, MatrixCell,
    MeanKind, ModelMatrix,
};
use signbench_core::report::{
    emit_data_table, emit_table, export_false_positives, render_heatmap, HeatmapSpec,
    NormalizeAxis, TableFormat,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_GENERATION: u8 = 3;
const EXIT_EVALUATION: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(name = "signbench", version, about = "Synthetic sign dataset generation and cross-domain model comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core). N=1 and N=k produce identical bytes.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Split selection: tr, te, or both; overrides the config.
    #[arg(long, value_parser = parse_split)]
    split: Option<SplitChoice>,
}

fn parse_split(s: &str) -> Result<SplitChoice, String> {
    SplitChoice::parse(s).ok_or_else(|| format!("expected tr, te, or both, got {s:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Check manifests, label maps, class coverage, and pipeline domains.
    Validate(CommonArgs),
    /// Generate the synthetic dataset declared in [generation].
    Generate(CommonArgs),
    /// Score all models, write tables, heatmaps, and FP galleries.
    Evaluate(CommonArgs),
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let (common, run): (&CommonArgs, fn(&RunConfig) -> Result<(), Failure>) = match &cli.command {
        Command::Validate(args) => (args, cmd_validate),
        Command::Generate(args) => (args, cmd_generate),
        Command::Evaluate(args) => (args, cmd_evaluate),
    };
    let mut config = match RunConfig::load(&common.config) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(split) = common.split {
        config.split = split;
    }

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match pool.install(|| run(&config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn output_dir(config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| Failure::new(EXIT_CONFIG, "no output directory (config output_dir or --out)"))?;
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn cmd_validate(config: &RunConfig) -> Result<(), Failure> {
    let findings = validate_run(config);
    let mut errors = 0;
    for finding in &findings {
        match finding.severity {
            Severity::Error => {
                errors += 1;
                println!("error: {}", finding.message);
            }
            Severity::Warning => println!("warning: {}", finding.message),
        }
    }

    // Coverage report (per dataset, class, split), independent of findings.
    if let Ok(taxonomy) = config.build_taxonomy() {
        if let Ok(catalog) = config.build_catalog(&taxonomy) {
            let coverage = signbench_core::config::class_coverage(&catalog);
            if !coverage.is_empty() {
                println!("coverage (dataset, class, split, samples):");
                for ((dataset, class, split), count) in &coverage {
                    println!("  {dataset},{class},{split},{count}");
                }
            }
        }
    }
    if errors > 0 {
        Err(Failure::new(
            EXIT_CONFIG,
            format!("{errors} validation error(s)"),
        ))
    } else {
        println!("ok: configuration is clean");
        Ok(())
    }
}

fn cmd_generate(config: &RunConfig) -> Result<(), Failure> {
    let taxonomy = config
        .build_taxonomy()
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let spec = config
        .build_generation(&taxonomy)
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let out = output_dir(config)?;
    let dataset_dir = out.join(&spec.dataset_id);
    std::fs::create_dir_all(&dataset_dir)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dataset_dir.display())))?;
    let outcome = generate_dataset(&spec, &dataset_dir)
        .map_err(|e| Failure::new(EXIT_GENERATION, e.to_string()))?;
    println!("class,accepted,rejected");
    for stat in &outcome.stats {
        println!("{},{},{}", stat.class, stat.accepted, stat.rejected);
    }
    eprintln!(
        "wrote {} classes to {} (manifest {})",
        outcome.stats.len(),
        dataset_dir.display(),
        outcome.manifest_path.display()
    );
    Ok(())
}

fn format_matrix(matrix: &ModelMatrix) -> String {
    let ids = &matrix.model_ids;
    let name_w = ids.iter().map(String::len).max().unwrap_or(5).max(5);
    let cell_w = 8;
    let mut out = String::new();
    out.push_str(&format!("{:name_w$}", ""));
    for id in ids {
        out.push_str(&format!(" {id:>cell_w$}"));
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(&format!("{id:name_w$}"));
        for j in 0..ids.len() {
            match matrix.cell(i, j) {
                MatrixCell::Value(v) => out.push_str(&format!(" {v:>+cell_w$.4}")),
                MatrixCell::Incomparable => out.push_str(&format!(" {:>cell_w$}", "n/a")),
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_evaluate(config: &RunConfig) -> Result<(), Failure> {
    let taxonomy = config
        .build_taxonomy()
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let catalog = config
        .build_catalog(&taxonomy)
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let models = config
        .build_models(&catalog)
        .map_err(|e| Failure::new(EXIT_EVALUATION, e.to_string()))?;
    if models.is_empty() {
        return Err(Failure::new(EXIT_CONFIG, "no models declared"));
    }
    let out = output_dir(config)?;
    let splits = config.split.splits();
    let eval_err = |e: signbench_core::eval::EvalError| Failure::new(EXIT_EVALUATION, e.to_string());
    let report_err = |e: signbench_core::report::ReportError| Failure::new(EXIT_IO, e.to_string());

    let table = generate_data_tables(&models, &catalog, &splits).map_err(eval_err)?;
    emit_data_table(&table, TableFormat::Csv, &out.join("data_table.csv")).map_err(report_err)?;
    emit_data_table(&table, TableFormat::Json, &out.join("data_table.json")).map_err(report_err)?;

    for split in &splits {
        let tag = split.as_str().to_lowercase();
        if models.len() >= 2 {
            let matrix = generate_model_matrix(&models, &catalog, *split).map_err(eval_err)?;
            let view = matrix.to_view();
            emit_table(&view, TableFormat::Csv, &out.join(format!("model_matrix_{tag}.csv")))
                .map_err(report_err)?;
            emit_table(&view, TableFormat::Json, &out.join(format!("model_matrix_{tag}.json")))
                .map_err(report_err)?;
            let spec = HeatmapSpec {
                normalize: NormalizeAxis::Global,
                ..HeatmapSpec::default()
            };
            render_heatmap(&view, &spec, &out.join(format!("model_matrix_{tag}.png")))
                .map_err(report_err)?;
            println!("model-vs-model matrix ({tag}):");
            print!("{}", format_matrix(&matrix));
        } else {
            log::warn!("model matrix needs at least two models; skipping");
        }

        for mean in [MeanKind::Arithmetic, MeanKind::Geometric] {
            let signs = signs_vs_model(&models, &catalog, *split, mean).map_err(eval_err)?;
            let view = signs.to_view();
            let stem = format!("signs_vs_model_{}_{tag}", mean.as_str());
            emit_table(&view, TableFormat::Csv, &out.join(format!("{stem}.csv")))
                .map_err(report_err)?;
            emit_table(&view, TableFormat::Json, &out.join(format!("{stem}.json")))
                .map_err(report_err)?;
            let spec = HeatmapSpec {
                normalize: NormalizeAxis::PerRow,
                ..HeatmapSpec::default()
            };
            render_heatmap(&view, &spec, &out.join(format!("{stem}.png"))).map_err(report_err)?;
        }
    }

    // Own-domain table: only models that declare a training dataset with a
    // TE split qualify; others are skipped with a note.
    let own_candidates: Vec<_> = models
        .iter()
        .filter(|m| m.train_dataset.is_some())
        .cloned()
        .collect();
    if own_candidates.len() < models.len() {
        log::warn!(
            "own-domain table: skipping {} model(s) without a training dataset",
            models.len() - own_candidates.len()
        );
    }
    if !own_candidates.is_empty() {
        let own = own_domain_table(&own_candidates, &catalog).map_err(eval_err)?;
        let view = own.to_view();
        emit_table(&view, TableFormat::Csv, &out.join("own_domain.csv")).map_err(report_err)?;
        emit_table(&view, TableFormat::Json, &out.join("own_domain.json")).map_err(report_err)?;
        let spec = HeatmapSpec {
            normalize: NormalizeAxis::PerColumn,
            ..HeatmapSpec::default()
        };
        render_heatmap(&view, &spec, &out.join("own_domain.png")).map_err(report_err)?;
    }

    for model in &models {
        let gallery_dir = out.join("fp_gallery").join(&model.id);
        export_false_positives(&table, &catalog, &model.id, &gallery_dir, config.gallery_limit)
            .map_err(report_err)?;
    }
    eprintln!("evaluation artifacts written to {}", out.display());
    Ok(())
}
