//! `bfsk` — build, query, benchmark, and serialize the filter variants.
//!
//! Exit codes: 0 success, 2 bad configuration or malformed input files,
//! 3 capability violation (the workload asked a filter for something its
//! capability row does not advertise).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bfsk_cli::config::{ReportFormat, RunConfig};
use bfsk_cli::error::CliError;
use bfsk_cli::report::ReportRow;
use bfsk_cli::run::{bench_fpp, bench_throughput, build_with_workload};
use bfsk_cli::{matrix, report, serialize};

#[derive(Parser)]
#[command(name = "bfsk", version, about = "Bloom-filter variant workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(arg: FormatArg) -> ReportFormat {
        match arg {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration (filter, workload, output).
    #[arg(long)]
    config: PathBuf,
    /// Override the workload seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of the config's output path / stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format, overriding the config.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a filter and run the workload's insert/remove phases.
    Build(RunArgs),
    /// Build per config, then look up the given items.
    Query {
        #[command(flatten)]
        args: RunArgs,
        /// Items to look up (utf-8 bytes).
        #[arg(required = true)]
        items: Vec<String>,
    },
    /// Measure the false-positive rate and compare it with the prediction.
    BenchFpp(RunArgs),
    /// Measure query throughput (the throughput cell is wall-clock).
    BenchThroughput(RunArgs),
    /// Print the capability matrix.
    Capabilities {
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build per config and write the filter container.
    Save {
        /// JSON run configuration (filter, workload).
        #[arg(long)]
        config: PathBuf,
        /// Override the workload seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Container file to create.
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a filter container, print a summary, optionally query items.
    Load {
        /// Container file written by `save`.
        #[arg(long)]
        input: PathBuf,
        /// Items to look up after loading.
        #[arg(long)]
        probe: Vec<String>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_report(rows: &[ReportRow], args: &RunArgs, config: &RunConfig) -> Result<(), CliError> {
    let format = args
        .format
        .map(ReportFormat::from)
        .unwrap_or(config.output.format);
    let text = match format {
        ReportFormat::Csv => report::render_csv(rows)?,
        ReportFormat::Json => report::render_json(rows)?,
    };
    let out = args.out.as_ref().or(config.output.path.as_ref());
    emit(&text, out)
}

fn print_verdicts(filter: &dyn bfsk::api::MembershipFilter, items: &[String]) {
    for item in items {
        let outcome = filter.query(item.as_bytes());
        let verdict = if outcome.is_present() { "present" } else { "absent" };
        println!("{item}\t{verdict}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => {
            let config = RunConfig::from_path(&args.config)?;
            let built = build_with_workload(&config, args.seed)?;
            println!(
                "variant={} seed={} inserted={} removed={} allocated_bits={}",
                config.filter.variant().name(),
                built.workload_seed,
                config.workload.insertions,
                config.workload.removals,
                built.filter.allocated_bits(),
            );
            if let Some(out) = &args.out {
                serialize::save_file(built.filter.as_ref(), out)?;
            }
        }
        Command::Query { args, items } => {
            let config = RunConfig::from_path(&args.config)?;
            let built = build_with_workload(&config, args.seed)?;
            print_verdicts(built.filter.as_ref(), &items);
        }
        Command::BenchFpp(args) => {
            let config = RunConfig::from_path(&args.config)?;
            let row = bench_fpp(&config, args.seed)?;
            emit_report(&[row], &args, &config)?;
        }
        Command::BenchThroughput(args) => {
            let config = RunConfig::from_path(&args.config)?;
            let row = bench_throughput(&config, args.seed)?;
            emit_report(&[row], &args, &config)?;
        }
        Command::Capabilities { format, out } => {
            let text = match format {
                FormatArg::Csv => matrix::render_csv()?,
                FormatArg::Json => matrix::render_json()?,
            };
            emit(&text, out.as_ref())?;
        }
        Command::Save { config, seed, out } => {
            let config = RunConfig::from_path(&config)?;
            let built = build_with_workload(&config, seed)?;
            serialize::save_file(built.filter.as_ref(), &out)?;
            println!(
                "saved variant={} items={} to {}",
                config.filter.variant().name(),
                built.filter.tracked_items(),
                out.display(),
            );
        }
        Command::Load { input, probe } => {
            let filter = serialize::load_file(&input)?;
            let descriptor = filter.descriptor();
            println!(
                "variant={} seed={} tracked_items={} allocated_bits={}",
                descriptor.variant().name(),
                descriptor.seed,
                filter.tracked_items(),
                filter.allocated_bits(),
            );
            print_verdicts(filter.as_ref(), &probe);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
