// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use varcov_core::source::facts_to_json;
use varcov_core::{analyze, compare, AnalysisOptions, CoverageReport, Error, FileId, Input, MetricSet, Mode};

/// Measure how completely debug information covers local variables.
#[derive(Parser)]
#[command(name = "varcov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute coverage for one binary or fixture against its sources.
    Analyze(AnalyzeArgs),
    /// Diff two reports produced by `analyze`.
    Compare(CompareArgs),
    /// Print the source-side scope facts of one C file as JSON.
    SourceFacts(SourceFactsArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Object file with debug information.
    #[arg(long, value_name = "PATH", conflicts_with = "fixture", required_unless_present = "fixture")]
    binary: Option<PathBuf>,
    /// Text fixture describing the debug information.
    #[arg(long, value_name = "PATH")]
    fixture: Option<PathBuf>,
    /// Directory the debug info's source paths are resolved against.
    #[arg(long, value_name = "DIR")]
    source_root: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Variable)]
    mode: ModeArg,
    /// Comma-separated metrics; `accurate` is always included.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "accurate",
        value_parser = ["accurate", "unshrunk", "naive-bytes"]
    )]
    metric: Vec<String>,
    /// Restrict all line sets to the `path:line` entries of this file.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Latch each variable's last described value until the end of its scope.
    #[arg(long)]
    knowledge_extension: bool,
    /// Fail when a source file cannot be found.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Record the analysis time in the report metadata.
    #[arg(long)]
    meta_timestamps: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_name = "PATH")]
    before: PathBuf,
    #[arg(long, value_name = "PATH")]
    after: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SourceFactsArgs {
    #[arg(long, value_name = "PATH")]
    source: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Variable,
    Line,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InFile {
            path: p.to_path_buf(),
            source: Box::new(Error::Report(format!("cannot write output: {e}"))),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Report(format!("cannot write output: {e}")))
        }
    }
}

fn run_analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let input = match (args.binary, args.fixture) {
        (Some(b), None) => Input::Binary(b),
        (None, Some(f)) => Input::Fixture(f),
        _ => unreachable!("clap enforces exactly one input"),
    };
    let mut opts = AnalysisOptions::new(input, args.source_root);
    opts.mode = match args.mode {
        ModeArg::Variable => Mode::Variable,
        ModeArg::Line => Mode::Line,
    };
    opts.metrics = MetricSet::parse(args.metric.iter().map(String::as_str))?;
    opts.trace = args.trace;
    opts.knowledge_extension = args.knowledge_extension;
    opts.strict = args.strict;
    if args.meta_timestamps {
        opts.timestamp = Some(humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string());
    }
    let analysis = analyze(&opts)?;
    for w in &analysis.warnings {
        eprintln!("varcov: warning: {w}");
    }
    let text = match args.format {
        Format::Json => analysis.report.to_json(),
        Format::Csv => analysis.report.to_csv(),
    };
    emit(args.out.as_deref(), &text)
}

fn run_compare(args: CompareArgs) -> Result<(), Error> {
    let before = CoverageReport::load(&args.before)?;
    let after = CoverageReport::load(&args.after)?;
    let cmp = compare(&before, &after)?;
    emit(args.out.as_deref(), &cmp.to_json())
}

fn run_source_facts(args: SourceFactsArgs) -> Result<(), Error> {
    let ast = varcov_core::parse_source(&args.source, FileId(0)).map_err(|e| match e {
        e @ Error::Io { .. } => e,
        e => Error::InFile {
            path: args.source.clone(),
            source: Box::new(e),
        },
    })?;
    emit(args.out.as_deref(), &facts_to_json(&varcov_core::variable_source_facts(&ast)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Compare(c) => run_compare(c),
        Command::SourceFacts(s) => run_source_facts(s),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("varcov: {}: {e}", e.module());
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
