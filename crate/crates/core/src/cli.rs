//! `srcalloc` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 constraint or degenerate-data
//! error, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::allocation::{allocate, ReturnsCurve, SourcePool, Strategy, StrategyConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::manifest::{build_manifest, Task};
use crate::similarity::build_similarity_matrix;
use crate::simulator::{tournament, ModelCase, TournamentSpec, UtilityModel};
use crate::stats::{compare, render_table};

/// Relative `--out` paths are resolved against this directory when set.
pub const OUT_DIR_ENV: &str = "SRCALLOC_OUT_DIR";

const AFTER_HELP: &str = "Environment:\n  SRCALLOC_OUT_DIR  if set, relative --out paths are resolved against this directory\n\nExit codes: 0 success, 1 input error, 2 constraint/degenerate error, 3 I/O error";

#[derive(Debug, Parser)]
#[command(
    name = "srcalloc",
    version,
    about = "Budget-constrained source-language selection for cross-lingual transfer",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cosine-gap similarity matrix from a directory of embedding files.
    Similarity(SimilarityArgs),
    /// Allocate a sentence budget across source languages.
    Allocate(AllocateArgs),
    /// Sample a shuffled train/validation manifest from an allocation.
    Manifest(ManifestArgs),
    /// Paired statistics over run results.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Surrogate-model simulations.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Debug, Args)]
#[command(after_help = AFTER_HELP)]
struct SimilarityArgs {
    /// Directory with one embedding file per language.
    #[arg(long)]
    embeddings: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(after_help = AFTER_HELP)]
struct AllocateArgs {
    /// all-from-best, top-k-proportional, top-k-uniform, random-k, diversity-aware or greedy-marginal.
    #[arg(long)]
    strategy: String,
    /// Total training sentences.
    #[arg(long)]
    budget: u64,
    /// Number of sources for the top-k, random and diversity strategies.
    #[arg(long, default_value_t = StrategyConfig::DEFAULT_K)]
    k: usize,
    /// Diversity penalty.
    #[arg(long, default_value_t = StrategyConfig::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    /// Greedy-marginal batch size.
    #[arg(long, default_value_t = StrategyConfig::DEFAULT_BATCH_SIZE)]
    batch_size: u64,
    /// Greedy-marginal saturation scale.
    #[arg(long, default_value_t = StrategyConfig::DEFAULT_SATURATION_C)]
    saturation_c: f64,
    /// Greedy-marginal returns curve: hyperbolic or exponential.
    #[arg(long, default_value = "hyperbolic")]
    returns: String,
    /// Similarity matrix CSV including the target.
    #[arg(long)]
    similarity: PathBuf,
    /// Availability CSV `language,count`.
    #[arg(long)]
    availability: PathBuf,
    #[arg(long)]
    target: String,
    /// Output JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(after_help = AFTER_HELP)]
struct ManifestArgs {
    /// Allocation JSON written by `allocate`.
    #[arg(long)]
    allocation: PathBuf,
    /// Directory with one `<language>.txt` example-id file per source.
    #[arg(long)]
    index_dir: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Fraction of records held out for validation.
    #[arg(long, default_value_t = crate::manifest::DEFAULT_VAL_FRACTION)]
    val_fraction: f64,
    /// NER, SENTIMENT or OTHER.
    #[arg(long, default_value = "OTHER")]
    task: String,
    /// Output JSON Lines.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum StatsCommand {
    /// Paired t-tests of strategy b against strategy a per task and budget.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
#[command(after_help = AFTER_HELP)]
struct CompareArgs {
    /// Results CSV `task,target,budget,model,strategy,seed,metric,utilization`.
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Number of comparisons in the Bonferroni family.
    #[arg(long, default_value_t = 1)]
    family_size: usize,
    /// Only use runs of this model.
    #[arg(long)]
    model: Option<String>,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum SimulateCommand {
    /// Evaluate every model × pool × strategy × budget × seed combination.
    Tournament(TournamentArgs),
}

#[derive(Debug, Args)]
#[command(after_help = AFTER_HELP)]
struct TournamentArgs {
    /// Tournament spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Output results CSV.
    #[arg(long)]
    out: PathBuf,
}

fn resolve_out(out: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if out.is_relative() => Path::new(&dir).join(out),
        _ => out.to_path_buf(),
    }
}

fn parse_returns(s: &str) -> Result<ReturnsCurve> {
    match s {
        "hyperbolic" => Ok(ReturnsCurve::Hyperbolic),
        "exponential" => Ok(ReturnsCurve::Exponential),
        _ => Err(Error::input(format!(
            "--returns must be `hyperbolic` or `exponential`, got `{s}`"
        ))),
    }
}

fn run_similarity(args: &SimilarityArgs, stdout: &mut dyn Write) -> Result<()> {
    let sets = io::read_embedding_dir(&args.embeddings)?;
    let provenance = format!(
        "cosine gap over {}; directed gaps averaged",
        args.embeddings.display()
    );
    let matrix = build_similarity_matrix(&sets, provenance.clone())?;
    let out = resolve_out(&args.out);
    io::atomic_write(&out, io::format_matrix_csv(&matrix).as_bytes())?;
    io::write_meta(
        &out,
        &json!({
            "command": "similarity",
            "embeddings": args.embeddings,
            "languages": matrix.languages(),
            "sentences": sets[0].len(),
            "dim": sets[0].dim(),
            "provenance": provenance,
        }),
    )?;
    let _ = writeln!(
        stdout,
        "wrote {} ({} languages)",
        out.display(),
        matrix.len()
    );
    Ok(())
}

fn run_allocate(args: &AllocateArgs, stdout: &mut dyn Write) -> Result<()> {
    let strategy: Strategy = args.strategy.parse()?;
    let cfg = StrategyConfig::new(strategy, args.budget)
        .with_k(args.k)
        .with_alpha(args.alpha)
        .with_seed(args.seed)
        .with_batch_size(args.batch_size)
        .with_saturation(args.saturation_c, parse_returns(&args.returns)?);
    cfg.validate()?;
    let matrix = io::read_matrix_csv(&args.similarity)?;
    let availability = io::read_availability_csv(&args.availability)?;
    let pool = SourcePool::from_matrix(&args.target, &matrix, &availability)?;
    let allocation = allocate(&pool, &cfg)?;
    let out = resolve_out(&args.out);
    io::atomic_write(&out, io::allocation_to_json(&allocation).as_bytes())?;
    let _ = writeln!(
        stdout,
        "{}: {} of {} sentences over {} sources (utilization {:.3})",
        strategy,
        allocation.used,
        allocation.budget,
        allocation.active_sources(),
        allocation.utilization
    );
    Ok(())
}

fn run_manifest(args: &ManifestArgs, stdout: &mut dyn Write) -> Result<()> {
    let task: Task = args.task.parse()?;
    let allocation = io::read_allocation_json(&args.allocation)?;
    let langs: Vec<&str> = allocation
        .entries
        .iter()
        .filter(|e| e.amount > 0)
        .map(|e| e.language.as_str())
        .collect();
    let indexes = io::read_index_dir(&args.index_dir, &langs, task)?;
    let manifest = build_manifest(&allocation, &indexes, args.seed, args.val_fraction)?;
    let out = resolve_out(&args.out);
    io::atomic_write(&out, io::manifest_to_jsonl(&manifest).as_bytes())?;
    let alloc_json: serde_json::Value =
        serde_json::from_str(&io::allocation_to_json(&allocation)).expect("valid JSON");
    io::write_meta(
        &out,
        &json!({
            "command": "manifest",
            "allocation": alloc_json,
            "index_dir": args.index_dir,
            "seed": args.seed,
            "task": task.to_string(),
            "val_fraction": args.val_fraction,
            "records": manifest.len(),
            "validation_records": manifest.count(crate::manifest::Split::Validation),
        }),
    )?;
    let _ = writeln!(
        stdout,
        "wrote {} ({} records)",
        out.display(),
        manifest.len()
    );
    Ok(())
}

fn run_compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let results = io::read_results_csv(&args.results)?;
    let rows = compare(
        &results,
        &args.a,
        &args.b,
        args.family_size,
        args.model.as_deref(),
    )?;
    let out = resolve_out(&args.out);
    io::atomic_write(&out, io::report_to_csv(&rows).as_bytes())?;
    io::write_meta(
        &out,
        &json!({
            "command": "stats compare",
            "results": args.results,
            "a": args.a,
            "b": args.b,
            "family_size": args.family_size,
            "model": args.model,
            "delta": "b - a",
        }),
    )?;
    let _ = write!(stdout, "{}", render_table(&rows));
    Ok(())
}

fn run_tournament(args: &TournamentArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| Error::io(&args.spec, e))?;
    let spec: TournamentSpec =
        serde_json::from_str(&text).map_err(|e| Error::parse(&args.spec, e.to_string()))?;
    let base_dir = args.spec.parent().unwrap_or(Path::new("."));
    let mut models = Vec::with_capacity(spec.models.len());
    for (i, m) in spec.models.iter().enumerate() {
        let mut model = UtilityModel::new(m.target.clone(), m.sims.clone())
            .with_tau(m.tau)
            .with_beta(m.beta)
            .with_noise(m.noise_sd, m.seed);
        if let Some(r) = &m.inter_source_ref {
            model = model.with_inter_source(io::read_matrix_csv(&base_dir.join(r))?);
        }
        models.push(ModelCase {
            tag: m.tag.clone().unwrap_or_else(|| format!("model{i}")),
            model,
        });
    }
    let results = tournament(&models, &spec.pools, &spec.configs())?;
    let out = resolve_out(&args.out);
    io::atomic_write(&out, io::results_to_csv(&results).as_bytes())?;
    io::write_meta(
        &out,
        &json!({
            "command": "simulate tournament",
            "spec_file": args.spec,
            "spec": spec,
            "runs": results.len(),
        }),
    )?;
    let _ = writeln!(stdout, "wrote {} ({} runs)", out.display(), results.len());
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Similarity(a) => run_similarity(a, stdout),
        Command::Allocate(a) => run_allocate(a, stdout),
        Command::Manifest(a) => run_manifest(a, stdout),
        Command::Stats(StatsCommand::Compare(a)) => run_compare(a, stdout),
        Command::Simulate(SimulateCommand::Tournament(a)) => run_tournament(a, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = &mut std::io::stdout();
    let stderr = &mut std::io::stderr();
    run_with(std::env::args_os(), stdout, stderr)
}
