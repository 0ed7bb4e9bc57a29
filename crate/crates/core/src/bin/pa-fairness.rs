use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use pa_fairness::cohort::{write_csv, write_jsonl, InputFormat};
use pa_fairness::glm::MissingPolicy;
use pa_fairness::report::{self, Analysis, RunConfig};
use pa_fairness::synth::{generate_raw, SynthSpec};
use pa_fairness::{Error, Result};

/// Error-rate fairness audit for prior-authorization review systems.
///
/// Exit status: 0 success, 2 input or configuration error, 3 degenerate
/// statistics, 4 bootstrap discard cap exceeded.
#[derive(Parser)]
#[command(name = "pa-fairness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured analyses and write report.json, report.md and rejects.log.
    Audit(AuditArgs),
    /// Print cohort composition and protocol diagnostics.
    Describe(DescribeArgs),
    /// Generate a synthetic case file from a spec.
    Synth(SynthArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Case file (.csv, .jsonl or .ndjson); repeat for several files.
    #[arg(long = "input", short = 'i')]
    inputs: Vec<PathBuf>,
    /// Attribute mapping file (TOML); the bundled mapping by default.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Compute ages at this date (YYYY-MM-DD) instead of each review date.
    #[arg(long)]
    reference_date: Option<NaiveDate>,
}

#[derive(Args)]
struct AuditArgs {
    /// Run configuration file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    /// Tolerance band half-width as a fraction (0.05 = ±5 pp).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Bootstrap resamples (at least 100).
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of describe,unadjusted,adjusted,sensitivity,robustness.
    #[arg(long, value_delimiter = ',')]
    analyses: Option<Vec<Analysis>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Unknown covariate values in the adjusted analysis: unknown or complete-case.
    #[arg(long, value_parser = parse_policy)]
    missing_policy: Option<MissingPolicy>,
    /// Bootstrap worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DescribeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Also write report files into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Synthetic cohort spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output case file; the extension selects CSV or JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_policy(s: &str) -> std::result::Result<MissingPolicy, String> {
    match s {
        "unknown" | "unknown-level" => Ok(MissingPolicy::UnknownLevel),
        "complete-case" => Ok(MissingPolicy::CompleteCase),
        _ => Err(format!("expected unknown or complete-case, got {s:?}")),
    }
}

fn apply_inputs(config: &mut RunConfig, args: InputArgs) {
    if !args.inputs.is_empty() {
        config.inputs = args.inputs;
    }
    if args.mapping.is_some() {
        config.mapping = args.mapping;
    }
    if args.reference_date.is_some() {
        config.reference_date = args.reference_date;
    }
}

fn audit(args: AuditArgs) -> Result<i32> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    apply_inputs(&mut config, args.input);
    config.delta = args.delta.unwrap_or(config.delta);
    config.alpha = args.alpha.unwrap_or(config.alpha);
    config.resamples = args.resamples.unwrap_or(config.resamples);
    config.seed = args.seed.unwrap_or(config.seed);
    config.analyses = args.analyses.unwrap_or(config.analyses);
    config.out = args.out.unwrap_or(config.out);
    config.missing_policy = args.missing_policy.unwrap_or(config.missing_policy);
    config.threads = args.threads.or(config.threads);

    let report = report::run(&config)?;
    for failure in report.failures() {
        eprintln!("warning: {failure}");
    }
    eprintln!(
        "wrote report.json, report.md and rejects.log to {} ({} cases, {} rejected)",
        config.out.display(),
        report.metadata.cases_loaded,
        report.metadata.cases_rejected
    );
    Ok(report.exit_code())
}

fn describe(args: DescribeArgs) -> Result<i32> {
    let mut config = RunConfig {
        analyses: vec![Analysis::Describe],
        ..RunConfig::default()
    };
    apply_inputs(&mut config, args.input);
    let report = report::execute(&config)?;
    print!("{}", report::emit_markdown(&report));
    if let Some(dir) = args.out {
        report::write_outputs(&report, &dir)?;
    }
    Ok(0)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn synth(args: SynthArgs) -> Result<i32> {
    let mut spec = SynthSpec::from_path(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let cases = generate_raw(&spec)?;
    match InputFormat::from_path(&args.out)? {
        InputFormat::Csv => write_csv(&cases, create(&args.out)?)?,
        InputFormat::Jsonl => write_jsonl(&cases, create(&args.out)?)?,
    }
    eprintln!("wrote {} cases to {}", cases.len(), args.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Audit(args) => audit(args),
        Command::Describe(args) => describe(args),
        Command::Synth(args) => synth(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
