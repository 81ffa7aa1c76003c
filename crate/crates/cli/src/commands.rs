//! Subcommand wiring: argument parsing, pipeline invocation, artifact
//! emission (predictions, reports, manifests), and exit-code mapping.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use selfscreen_core::data::{
    dataset_stats, load_dataset, save_dataset, Dataset, DatasetFormat,
};
use selfscreen_core::embed::{
    load_embeddings, save_embeddings, EmbeddingProvider, HashEmbedder,
};
use selfscreen_core::error::EvalError;
use selfscreen_core::eval::{
    run_loso, save_predictions, sensitivity_sweep, zero_shot_eval, DEFAULT_SWEEP_HIDDEN,
};
use selfscreen_core::ffnn::{self, load_model, save_model, TrainConfig, TrainExample, Variant};
use selfscreen_core::manifest::{bytes_digest, file_digest, RunManifest};
use selfscreen_core::report::{write_report, ReportFormat, ReportRow};
use selfscreen_gateway::zeroshot::load_verdicts;
use selfscreen_gateway::{
    batch_describe, parse_zeroshot_output, HttpConfig, HttpVlmProvider, MockVlmProvider,
    RemoteEmbeddingProvider, VlmProvider,
};

use crate::pipeline::{screen_description, screen_image};
use crate::service::{serve_blocking, AppState};

/// Exit codes: 0 success, 1 validation error, 2 runtime/transport error.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "selfscreen",
    about = "Selfie-based depression-anxiety screening pipeline",
    version
)]
pub struct Cli {
    /// Seed governing all randomness in the invoked command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for output artifacts (reports, predictions, manifests).
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Default,
    Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedProviderArg {
    Hash,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a raw dataset file and write the canonical form.
    Ingest(IngestArgs),
    /// Generate facial-expression descriptions for every sample image.
    Describe(DescribeArgs),
    /// Embed sample descriptions into 384-d vectors.
    Embed(EmbedArgs),
    /// Leave-one-subject-out evaluation of a classifier head.
    Eval(EvalArgs),
    /// Hidden-layer-size sensitivity sweep with the alternative head.
    Sweep(SweepArgs),
    /// Score zero-shot class verdicts against the dataset labels.
    Zeroshot(ZeroshotArgs),
    /// Run the HTTP screening service.
    Serve(ServeArgs),
    /// One end-to-end screening prediction, printed as JSON.
    ScreenOnce(ScreenOnceArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DescribeArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// VLM model name requested from the endpoint.
    #[arg(long, default_value = "gpt-4o")]
    pub model: String,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Offline fixture file (digest -> text); replaces the HTTP endpoint.
    #[arg(long)]
    pub mock_fixtures: Option<PathBuf>,
    /// Also write a copy of the dataset with descriptions filled in.
    #[arg(long)]
    pub merged_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = EmbedProviderArg::Hash)]
    pub provider: EmbedProviderArg,
    /// Embedding model name (remote provider only).
    #[arg(long, default_value = "all-MiniLM-L6-v2")]
    pub model: String,
    /// Skip L2 normalization of remote vectors.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Default)]
    pub variant: VariantArg,
    /// Hidden units (alternative variant only).
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Csv)]
    pub report_format: ReportFormatArg,
    /// Model name recorded in the report rows.
    #[arg(long, default_value = "vlm-descriptions")]
    pub model_label: String,
    /// Additionally train on the full dataset and save the deployable model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub learning_rate: f64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Comma-separated hidden-layer sizes.
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Csv)]
    pub report_format: ReportFormatArg,
    #[arg(long, default_value = "vlm-descriptions")]
    pub model_label: String,
}

#[derive(Args, Debug)]
pub struct ZeroshotArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Verdict records ({sample_id, raw_text, parsed, label} per line).
    #[arg(long)]
    pub verdicts: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Csv)]
    pub report_format: ReportFormatArg,
    #[arg(long, default_value = "zero-shot")]
    pub model_label: String,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long, value_enum, default_value_t = EmbedProviderArg::Hash)]
    pub embed_provider: EmbedProviderArg,
    #[arg(long, default_value = "all-MiniLM-L6-v2")]
    pub embed_model: String,
    /// VLM model for image requests; without it (or fixtures) the service
    /// accepts description input only.
    #[arg(long)]
    pub vlm_model: Option<String>,
    #[arg(long)]
    pub mock_fixtures: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScreenOnceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Description text (mutually exclusive with --image).
    #[arg(long)]
    pub description: Option<String>,
    /// Selfie image path (mutually exclusive with --description).
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EmbedProviderArg::Hash)]
    pub embed_provider: EmbedProviderArg,
    #[arg(long, default_value = "all-MiniLM-L6-v2")]
    pub embed_model: String,
    #[arg(long, default_value = "gpt-4o")]
    pub vlm_model: String,
    #[arg(long)]
    pub mock_fixtures: Option<PathBuf>,
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes, not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(ref args) => cmd_ingest(&cli, args),
        Command::Describe(ref args) => cmd_describe(&cli, args),
        Command::Embed(ref args) => cmd_embed(&cli, args),
        Command::Eval(ref args) => cmd_eval(&cli, args),
        Command::Sweep(ref args) => cmd_sweep(&cli, args),
        Command::Zeroshot(ref args) => cmd_zeroshot(&cli, args),
        Command::Serve(ref args) => cmd_serve(args),
        Command::ScreenOnce(ref args) => cmd_screen_once(args),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(runtime)
}

fn write_manifest(
    cli: &Cli,
    command: &str,
    config: serde_json::Value,
    dataset_path: Option<&Path>,
    providers: Vec<String>,
) -> Result<(), CliError> {
    let digest = match dataset_path {
        Some(path) => Some(file_digest(path).map_err(runtime)?),
        None => None,
    };
    let manifest = RunManifest::new(command, config, cli.seed, digest, providers);
    manifest
        .write(&cli.out_dir.join(format!("{command}_manifest.json")))
        .map_err(runtime)
}

fn load_canonical_dataset(path: &Path) -> Result<Dataset, CliError> {
    load_dataset(path, DatasetFormat::Jsonl).map_err(validation)
}

fn cmd_ingest(cli: &Cli, args: &IngestArgs) -> Result<(), CliError> {
    let format = match args.format {
        FormatArg::Jsonl => DatasetFormat::Jsonl,
        FormatArg::Csv => DatasetFormat::Csv,
    };
    let dataset = load_dataset(&args.input, format).map_err(validation)?;
    let stats = dataset_stats(&dataset).map_err(validation)?;
    save_dataset(&dataset, &args.out).map_err(runtime)?;
    ensure_out_dir(&cli.out_dir)?;
    write_manifest(
        cli,
        "ingest",
        serde_json::json!({
            "input": args.input.display().to_string(),
            "out": args.out.display().to_string(),
        }),
        Some(&args.input),
        vec![],
    )?;
    println!("{}", serde_json::to_string_pretty(&stats).expect("stats"));
    Ok(())
}

fn make_vlm_provider(
    model: &str,
    mock_fixtures: Option<&Path>,
) -> Result<Box<dyn VlmProvider>, CliError> {
    match mock_fixtures {
        Some(path) => Ok(Box::new(
            MockVlmProvider::from_fixture_file(path, model).map_err(validation)?,
        )),
        None => {
            let config = HttpConfig::from_env(model).map_err(validation)?;
            Ok(Box::new(HttpVlmProvider::new(config).map_err(runtime)?))
        }
    }
}

fn cmd_describe(cli: &Cli, args: &DescribeArgs) -> Result<(), CliError> {
    if args.concurrency == 0 {
        return Err(CliError::Validation("concurrency must be >= 1".into()));
    }
    let dataset = load_canonical_dataset(&args.dataset)?;
    let provider = make_vlm_provider(&args.model, args.mock_fixtures.as_deref())?;
    let outcome = batch_describe(&dataset, provider.as_ref(), args.concurrency, &args.out)
        .map_err(runtime)?;
    if let Some(merged_out) = &args.merged_out {
        let by_id: BTreeMap<&str, &str> = outcome
            .descriptions
            .iter()
            .map(|d| (d.sample_id.as_str(), d.text.as_str()))
            .collect();
        let mut samples = dataset.samples().to_vec();
        for sample in &mut samples {
            if let Some(text) = by_id.get(sample.sample_id.as_str()) {
                sample.description = Some(text.to_string());
            }
        }
        let merged =
            Dataset::new(samples, Some(args.model.clone())).map_err(runtime)?;
        save_dataset(&merged, merged_out).map_err(runtime)?;
    }
    ensure_out_dir(&cli.out_dir)?;
    write_manifest(
        cli,
        "describe",
        serde_json::json!({
            "dataset": args.dataset.display().to_string(),
            "out": args.out.display().to_string(),
            "model": args.model,
            "concurrency": args.concurrency,
        }),
        Some(&args.dataset),
        vec![provider.name()],
    )?;
    println!(
        "described {} samples ({} resumed, {} failed)",
        outcome.descriptions.len(),
        outcome.resumed,
        outcome.failures.len()
    );
    if !outcome.failures.is_empty() {
        for (sample_id, message) in &outcome.failures {
            eprintln!("failed {sample_id}: {message}");
        }
        return Err(CliError::Runtime(format!(
            "{} samples failed to describe",
            outcome.failures.len()
        )));
    }
    Ok(())
}

fn make_embedder(
    provider: EmbedProviderArg,
    model: &str,
    normalize: bool,
) -> Result<Box<dyn EmbeddingProvider + Send + Sync>, CliError> {
    match provider {
        EmbedProviderArg::Hash => Ok(Box::new(HashEmbedder::default())),
        EmbedProviderArg::Remote => {
            let config = HttpConfig::from_env(model).map_err(validation)?;
            Ok(Box::new(
                RemoteEmbeddingProvider::new(config, normalize).map_err(runtime)?,
            ))
        }
    }
}

fn cmd_embed(cli: &Cli, args: &EmbedArgs) -> Result<(), CliError> {
    let dataset = load_canonical_dataset(&args.dataset)?;
    let embedder = make_embedder(args.provider, &args.model, !args.no_normalize)?;
    let mut embeddings = Vec::with_capacity(dataset.len());
    for sample in dataset.samples() {
        let text = sample.description.as_deref().ok_or_else(|| {
            CliError::Validation(format!(
                "sample {} has no description; run describe first",
                sample.sample_id
            ))
        })?;
        embeddings.push(
            embedder
                .embed(&sample.sample_id, text)
                .map_err(runtime)?,
        );
    }
    save_embeddings(&embeddings, &args.out).map_err(runtime)?;
    ensure_out_dir(&cli.out_dir)?;
    write_manifest(
        cli,
        "embed",
        serde_json::json!({
            "dataset": args.dataset.display().to_string(),
            "out": args.out.display().to_string(),
            "normalize": !args.no_normalize,
        }),
        Some(&args.dataset),
        vec![embedder.name().to_string()],
    )?;
    println!("embedded {} samples", embeddings.len());
    Ok(())
}

fn variant_from_args(variant: VariantArg, hidden: usize) -> Result<Variant, CliError> {
    match variant {
        VariantArg::Default => Ok(Variant::Default),
        VariantArg::Alternative => {
            if hidden == 0 {
                return Err(CliError::Validation("hidden must be >= 1".into()));
            }
            Ok(Variant::Alternative { hidden })
        }
    }
}

fn report_format(arg: ReportFormatArg) -> (ReportFormat, &'static str) {
    match arg {
        ReportFormatArg::Csv => (ReportFormat::Csv, "csv"),
        ReportFormatArg::Json => (ReportFormat::Json, "json"),
    }
}

fn train_config(cli: &Cli, epochs: usize, learning_rate: f64) -> TrainConfig {
    TrainConfig {
        seed: cli.seed,
        epochs,
        learning_rate,
        ..TrainConfig::default()
    }
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<(), CliError> {
    let dataset = load_canonical_dataset(&args.dataset)?;
    let embeddings = load_embeddings(&args.embeddings).map_err(validation)?;
    let variant = variant_from_args(args.variant, args.hidden)?;
    let cfg = train_config(cli, args.epochs, args.learning_rate);
    cfg.validate().map_err(validation)?;
    let outcome = run_loso(&dataset, &embeddings, &cfg, variant).map_err(runtime)?;

    ensure_out_dir(&cli.out_dir)?;
    save_predictions(&outcome.predictions, &cli.out_dir.join("predictions.jsonl"))
        .map_err(runtime)?;
    let (format, ext) = report_format(args.report_format);
    let variant_name = match variant {
        Variant::Default => "default".to_string(),
        Variant::Alternative { hidden } => format!("alternative(h={hidden})"),
    };
    let row = ReportRow::new(
        &args.model_label,
        "loso",
        &variant_name,
        match variant {
            Variant::Default => None,
            Variant::Alternative { hidden } => Some(hidden),
        },
        &outcome.metrics,
        outcome.folds_skipped,
    );
    write_report(&[row], &cli.out_dir.join(format!("report.{ext}")), format)
        .map_err(runtime)?;

    if let Some(model_out) = &args.model_out {
        let examples: Vec<TrainExample> = dataset
            .samples()
            .iter()
            .map(|s| (embeddings[&s.sample_id].clone(), s.label))
            .collect();
        let subjects: Vec<String> = dataset
            .samples()
            .iter()
            .map(|s| s.subject_id.clone())
            .collect();
        let report =
            ffnn::train(&examples, variant, &cfg, Some(&subjects)).map_err(runtime)?;
        let config_digest =
            bytes_digest(serde_json::to_string(&cfg).expect("config").as_bytes());
        save_model(&report.params, model_out, cli.seed, &config_digest)
            .map_err(runtime)?;
    }

    write_manifest(
        cli,
        "eval",
        serde_json::json!({
            "dataset": args.dataset.display().to_string(),
            "embeddings": args.embeddings.display().to_string(),
            "variant": variant_name,
            "train": cfg,
        }),
        Some(&args.dataset),
        vec!["precomputed-embeddings".to_string()],
    )?;
    println!(
        "folds pooled: {} predictions, {} folds skipped; report in {}",
        outcome.predictions.len(),
        outcome.folds_skipped,
        cli.out_dir.display()
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<(), CliError> {
    let dataset = load_canonical_dataset(&args.dataset)?;
    let embeddings = load_embeddings(&args.embeddings).map_err(validation)?;
    let h_values: Vec<usize> = if args.h.is_empty() {
        DEFAULT_SWEEP_HIDDEN.to_vec()
    } else {
        args.h.clone()
    };
    if h_values.iter().any(|&h| h == 0) {
        return Err(CliError::Validation("hidden sizes must be >= 1".into()));
    }
    let cfg = train_config(cli, 15, 1e-4);
    let outcome =
        sensitivity_sweep(&dataset, &embeddings, &cfg, &h_values).map_err(runtime)?;
    ensure_out_dir(&cli.out_dir)?;
    let rows: Vec<ReportRow> = outcome
        .results
        .iter()
        .map(|r| {
            ReportRow::new(
                &args.model_label,
                "loso",
                &format!("alternative(h={})", r.hidden),
                Some(r.hidden),
                &r.metrics,
                r.folds_skipped,
            )
        })
        .collect();
    let (format, ext) = report_format(args.report_format);
    write_report(
        &rows,
        &cli.out_dir.join(format!("sweep_report.{ext}")),
        format,
    )
    .map_err(runtime)?;
    write_manifest(
        cli,
        "sweep",
        serde_json::json!({
            "dataset": args.dataset.display().to_string(),
            "embeddings": args.embeddings.display().to_string(),
            "h": h_values,
            "train": cfg,
        }),
        Some(&args.dataset),
        vec!["precomputed-embeddings".to_string()],
    )?;
    for (h, message) in &outcome.failures {
        eprintln!("h={h} failed: {message}");
    }
    println!(
        "sweep complete: {} of {} sizes evaluated",
        outcome.results.len(),
        h_values.len()
    );
    if !outcome.failures.is_empty() {
        return Err(CliError::Runtime(format!(
            "{} sweep configurations failed",
            outcome.failures.len()
        )));
    }
    Ok(())
}

fn cmd_zeroshot(cli: &Cli, args: &ZeroshotArgs) -> Result<(), CliError> {
    let dataset = load_canonical_dataset(&args.dataset)?;
    let records = load_verdicts(&args.verdicts).map_err(validation)?;
    // Re-derive every label from the raw completion so a hand-edited file
    // cannot smuggle in a label its text does not support.
    let mut verdicts = Vec::with_capacity(records.len());
    for record in &records {
        let reparsed = parse_zeroshot_output(&record.raw_text).map_err(|e| {
            CliError::Validation(format!("sample {}: {e}", record.sample_id))
        })?;
        if reparsed.label != record.label {
            return Err(CliError::Validation(format!(
                "sample {}: stored label {} disagrees with raw text",
                record.sample_id, record.label
            )));
        }
        verdicts.push((record.sample_id.clone(), record.label));
    }
    let outcome = zero_shot_eval(&verdicts, &dataset).map_err(validation)?;
    ensure_out_dir(&cli.out_dir)?;
    let row = ReportRow::new(
        &args.model_label,
        "zero-shot",
        "prompt",
        None,
        &outcome.metrics,
        0,
    );
    let (format, ext) = report_format(args.report_format);
    write_report(
        &[row],
        &cli.out_dir.join(format!("zeroshot_report.{ext}")),
        format,
    )
    .map_err(runtime)?;
    write_manifest(
        cli,
        "zeroshot",
        serde_json::json!({
            "dataset": args.dataset.display().to_string(),
            "verdicts": args.verdicts.display().to_string(),
        }),
        Some(&args.dataset),
        vec![],
    )?;
    println!(
        "zero-shot scored over {} verdicts (degenerate 0/1 scores: AUC is not rank-based)",
        verdicts.len()
    );
    Ok(())
}

fn model_version_of(path: &Path) -> Result<String, CliError> {
    let digest = file_digest(path).map_err(|e: EvalError| validation(e))?;
    Ok(digest[..12].to_string())
}

fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let params = load_model(&args.model).map_err(validation)?;
    let model_version = model_version_of(&args.model)?;
    let embedder = make_embedder(args.embed_provider, &args.embed_model, true)?;
    let vlm = match (&args.vlm_model, &args.mock_fixtures) {
        (None, None) => None,
        (model, fixtures) => Some(make_vlm_provider(
            model.as_deref().unwrap_or("gpt-4o"),
            fixtures.as_deref(),
        )?),
    };
    let state = Arc::new(AppState {
        params,
        model_version,
        embedder,
        vlm,
    });
    serve_blocking(state, &args.bind).map_err(runtime)
}

fn cmd_screen_once(args: &ScreenOnceArgs) -> Result<(), CliError> {
    let params = load_model(&args.model).map_err(validation)?;
    let model_version = model_version_of(&args.model)?;
    let embedder = make_embedder(args.embed_provider, &args.embed_model, true)?;
    let response = match (&args.description, &args.image) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "supply exactly one of --description or --image".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Validation(
                "supply --description or --image".into(),
            ))
        }
        (Some(description), None) => {
            screen_description(&params, embedder.as_ref(), description, &model_version)
                .map_err(runtime)?
        }
        (None, Some(image_path)) => {
            let vlm = make_vlm_provider(&args.vlm_model, args.mock_fixtures.as_deref())?;
            let image = std::fs::read(image_path).map_err(|e| {
                CliError::Runtime(format!("describe stage failed: {e}"))
            })?;
            screen_image(
                &params,
                vlm.as_ref(),
                embedder.as_ref(),
                &image,
                &model_version,
            )
            .map_err(runtime)?
        }
    };
    println!("{}", serde_json::to_string(&response).expect("response"));
    Ok(())
}
