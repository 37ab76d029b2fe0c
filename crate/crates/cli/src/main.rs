use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lodlog::ingest::LogFormat;
use lodlog::store::ExportFormat;
use lodlog_cli::{cmd_analyze, cmd_curate, cmd_export, cmd_ingest, cmd_profile, RunConfig};

#[derive(Parser)]
#[command(name = "lodlog", version, about = "Trust-aware curation of SPARQL query logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Log files to read.
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "clf", value_parser = parse_format)]
    format: LogFormat,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    topics: Option<PathBuf>,
    #[arg(long)]
    provenance: Option<PathBuf>,
    #[arg(long)]
    pipeline: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Directory receiving `run-<id>/`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Pins the run directory name; defaults to a UTC timestamp.
    #[arg(long)]
    run_id: Option<String>,
    /// Also write plot-ready CSV tables.
    #[arg(long)]
    csv: bool,
}

impl From<RunArgs> for RunConfig {
    fn from(a: RunArgs) -> Self {
        RunConfig {
            inputs: a.inputs,
            format: a.format,
            vocab: a.vocab,
            topics: a.topics,
            provenance: a.provenance,
            pipeline: a.pipeline,
            policy: a.policy,
            out: a.out,
            run_id: a.run_id,
            csv: a.csv,
        }
    }
}

fn parse_format(s: &str) -> Result<LogFormat, String> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Parse logs and keep the SELECT/CONSTRUCT queries.
    Ingest(RunArgs),
    /// Label every query with every analyzer and count the labels.
    Profile(RunArgs),
    /// Run the curation pipeline and split by trust degree.
    Curate(RunArgs),
    /// Mine MD patterns from a run and/or compare two runs.
    Analyze {
        #[arg(long)]
        run: Option<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["RUN_A", "RUN_B"])]
        compare: Option<Vec<PathBuf>>,
        /// Similarity needed to link two patterns.
        #[arg(long, default_value_t = lodlog::analytics::DEFAULT_SIMILARITY)]
        threshold: f64,
        #[arg(long)]
        csv: bool,
    },
    /// Write a trust partition of a run to a file.
    Export {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value = "trusted")]
        partition: String,
        #[arg(long = "to", default_value = "records", value_parser = clap::builder::ValueParser::new(|s: &str| s.parse::<ExportFormat>()))]
        to: ExportFormat,
        #[arg(long)]
        dest: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(&a.into(), &mut out, &mut err).map(drop),
        Command::Profile(a) => cmd_profile(&a.into(), &mut out, &mut err).map(drop),
        Command::Curate(a) => cmd_curate(&a.into(), &mut out, &mut err).map(drop),
        Command::Analyze {
            run,
            compare,
            threshold,
            csv,
        } => {
            let pair = compare.as_ref().map(|v| (v[0].as_path(), v[1].as_path()));
            cmd_analyze(run.as_deref(), pair, threshold, csv, &mut out, &mut err)
        }
        Command::Export {
            run,
            partition,
            to,
            dest,
        } => cmd_export(&run, &partition, to, &dest, &mut out).map(drop),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
