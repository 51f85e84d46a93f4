//! `semint`: batch simulations, timing benchmarks, one-shot projections,
//! corpus generation and the HTTP session service.
//!
//! Every command prints one `resolved:` line holding the full effective
//! configuration, seeds included. Re-running with those values reproduces
//! every artifact byte for byte, timing measurements aside.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use semint_core::corpus::{embed_tfidf_capped, synth_clusters, CorpusFormat, DEFAULT_TARGET_DIM};
use semint_core::sim::{
    export_results, loglog_exponent, run_learning_curve, run_timing_benchmark, ExportFormat, Results, SimConfig,
};
use semint_core::{Corpus, ModelState, Pipeline, PipelineConfig};
use semint_service::AppState;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("corpus not found: {0}")]
    MissingCorpus(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] semint_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingCorpus(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "semint", version, about = "Semantic-interaction projection engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulated-analyst learning curve and write it out.
    Simulate(SimulateArgs),
    /// Time update cycles across corpus sizes.
    Bench(BenchArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
    /// Compute the initial layout of a corpus and write it as CSV.
    Project(ProjectArgs),
    /// Generate a corpus file.
    MakeData(MakeDataArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PipelineArg {
    Deepsi,
    Neuralsi,
}

impl From<PipelineArg> for Pipeline {
    fn from(p: PipelineArg) -> Pipeline {
        match p {
            PipelineArg::Deepsi => Pipeline::DeepSi,
            PipelineArg::Neuralsi => Pipeline::NeuralSi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    /// JSON file with pipeline settings; unspecified fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target dimension when the corpus carries only text.
    #[arg(long, default_value_t = DEFAULT_TARGET_DIM)]
    tfidf_dim: usize,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    pipeline: PipelineArg,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Seeds both the analyst and the model.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, default_value_t = 3)]
    per_class: usize,
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args, Serialize)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,200,500,1000",
          value_parser = clap::value_parser!(u64).range(1..))]
    sizes: Vec<u64>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "deepsi,neuralsi")]
    pipelines: Vec<PipelineArg>,
    /// Timing table CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-stage JSON; defaults to the table path with a `.stages.json` suffix.
    #[arg(long)]
    stages: Option<PathBuf>,
    /// Classes in each synthetic benchmark corpus; sizes must be multiples.
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 0.3)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// 0 picks a free port; the bound address is printed.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "snapshots")]
    snapshot_dir: PathBuf,
    /// Corpora to register at startup, keyed by file stem.
    #[arg(long)]
    corpus: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TARGET_DIM)]
    tfidf_dim: usize,
}

#[derive(Debug, Args, Serialize)]
struct ProjectArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    pipeline: PipelineArg,
    #[arg(long)]
    out: PathBuf,
    /// Model seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args, Serialize)]
struct MakeDataArgs {
    #[command(subcommand)]
    kind: MakeDataKind,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
enum MakeDataKind {
    /// Gaussian clusters around orthogonal centers.
    Synth {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 25)]
        per_class: usize,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 0.3)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Vectorize a text corpus with TF-IDF and truncated SVD.
    Tfidf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TARGET_DIM)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_resolved(command: &str, value: &impl Serialize) -> CliResult<()> {
    println!("resolved: {}", serde_json::json!({ "command": command, "settings": value }));
    Ok(())
}

fn load_corpus(path: &Path, tfidf_dim: usize) -> CliResult<(Corpus, Option<usize>)> {
    if !path.exists() {
        return Err(CliError::MissingCorpus(path.to_path_buf()));
    }
    let corpus = Corpus::load(path, CorpusFormat::from_path(path))?;
    if corpus.is_vectorized() {
        return Ok((corpus, None));
    }
    let (embedded, dim) = embed_tfidf_capped(&corpus, tfidf_dim)?;
    Ok((embedded, Some(dim)))
}

fn load_config(path: Option<&Path>) -> CliResult<PipelineConfig> {
    let cfg: PipelineConfig = match path {
        Some(p) => serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(p)?))?,
        None => PipelineConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let (corpus, tfidf) = load_corpus(&args.corpus, args.model.tfidf_dim)?;
    let mut cfg = load_config(args.model.config.as_deref())?;
    cfg.seed = args.seed;
    let sim = SimConfig {
        per_class: args.per_class,
        iterations: args.iterations,
        knn_k: args.knn_k,
        seed: args.seed,
        ..SimConfig::default()
    };
    print_resolved(
        "simulate",
        &serde_json::json!({ "args": &args, "tfidf_dim_used": tfidf, "pipeline_config": &cfg, "sim_config": &sim }),
    )?;
    let curve = run_learning_curve(args.pipeline.into(), &corpus, &sim, &cfg)?;
    let format = match args.format {
        FormatArg::Csv => ExportFormat::Csv,
        FormatArg::Json => ExportFormat::Json,
    };
    export_results(Results::Curve(&curve), &args.out, format)?;
    let first = curve.accuracies.first().copied().unwrap_or(f64::NAN);
    let last = curve.accuracies.last().copied().unwrap_or(f64::NAN);
    println!(
        "{}: {} layouts, knn accuracy {first:.3} -> {last:.3}, written to {}",
        curve.pipeline,
        curve.accuracies.len(),
        args.out.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> CliResult<()> {
    if args.classes < 2 {
        return Err(CliError::Usage("--classes must be at least 2".into()));
    }
    let sizes: Vec<usize> = args.sizes.iter().map(|&n| n as usize).collect();
    if let Some(n) = sizes.iter().find(|&&n| n % args.classes != 0 || n < 2 * args.classes) {
        return Err(CliError::Usage(format!(
            "size {n} must be a multiple of --classes {} and at least twice it",
            args.classes
        )));
    }
    let mut cfg = load_config(args.config.as_deref())?;
    cfg.seed = args.seed;
    let sim = SimConfig { seed: args.seed, ..SimConfig::default() };
    let stages_path = args.stages.clone().unwrap_or_else(|| {
        let mut s = args.out.clone().into_os_string();
        s.push(".stages.json");
        PathBuf::from(s)
    });
    print_resolved(
        "bench",
        &serde_json::json!({ "args": &args, "stages_path": &stages_path, "pipeline_config": &cfg, "sim_config": &sim }),
    )?;
    let pipelines: Vec<Pipeline> = args.pipelines.iter().map(|&p| p.into()).collect();
    let (classes, dim, spread, seed) = (args.classes, args.dim, args.spread, args.seed);
    let family = move |n: usize| synth_clusters(classes, n / classes, dim, spread, seed);
    let report = run_timing_benchmark(&pipelines, &family, &sizes, args.repeats as usize, &cfg, &sim)?;

    export_results(Results::Table(&report.table), &args.out, ExportFormat::Csv)?;
    std::fs::write(&stages_path, serde_json::to_vec_pretty(&report.stages)?)?;
    for r in &report.table.rows {
        println!("{:>9} n={:<5} mean {:.6}s  std {:.6}s", r.pipeline.to_string(), r.n, r.mean_s, r.std_s);
    }
    for &p in &pipelines {
        match loglog_exponent(report.table.rows_for(p)) {
            Some(e) => println!("{p}: log-log exponent {e:.2}"),
            None => println!("{p}: log-log exponent needs at least two sizes"),
        }
    }
    println!("table written to {}, stages to {}", args.out.display(), stages_path.display());
    Ok(())
}

fn serve(args: ServeArgs) -> CliResult<()> {
    print_resolved("serve", &args)?;
    let state = AppState::new(&args.snapshot_dir);
    for path in &args.corpus {
        let (corpus, _) = load_corpus(path, args.tfidf_dim)?;
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Usage(format!("cannot derive a corpus id from {}", path.display())))?;
        state.add_corpus(id, corpus).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
        println!("listening on http://{}", listener.local_addr()?);
        semint_service::serve(listener, Arc::clone(&state)).await
    })?;
    Ok(())
}

fn project(args: ProjectArgs) -> CliResult<()> {
    let (corpus, tfidf) = load_corpus(&args.corpus, args.model.tfidf_dim)?;
    let mut cfg = load_config(args.model.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    print_resolved("project", &serde_json::json!({ "args": &args, "tfidf_dim_used": tfidf, "pipeline_config": &cfg }))?;
    let blind = corpus.without_labels();
    let mut state = ModelState::init(args.pipeline.into(), &blind, &cfg)?;
    let layout = state.forward(&blind, &cfg)?;
    if layout.degenerate {
        eprintln!("warning: the layout collapsed to a single point");
    }
    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record(["id", "x", "y", "label"])?;
    for (doc, p) in corpus.docs().iter().zip(layout.positions.rows()) {
        let label = doc.label.map(|l| l.to_string()).unwrap_or_default();
        w.write_record([doc.id.clone(), p[0].to_string(), p[1].to_string(), label])?;
    }
    w.flush()?;
    println!("{} points written to {}", corpus.len(), args.out.display());
    Ok(())
}

fn make_data(args: MakeDataArgs) -> CliResult<()> {
    print_resolved("make-data", &args.kind)?;
    let (corpus, out) = match args.kind {
        MakeDataKind::Synth { k, per_class, dim, spread, seed, out } => {
            (synth_clusters(k, per_class, dim, spread, seed)?, out)
        }
        MakeDataKind::Tfidf { input, dim, out } => {
            let (corpus, used) = load_corpus(&input, dim)?;
            match used {
                Some(d) if d < dim => println!("tf-idf dimension lowered to {d}"),
                None => return Err(CliError::Usage(format!("{} is already vectorized", input.display()))),
                _ => {}
            }
            (corpus, out)
        }
    };
    corpus.save(&out, CorpusFormat::from_path(&out))?;
    println!("{} documents written to {}", corpus.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
        Command::Serve(a) => serve(a),
        Command::Project(a) => project(a),
        Command::MakeData(a) => make_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
