use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use dilation_harness::config::ScenarioConfig;
use dilation_harness::describe::{describe, DescribeInput};
use dilation_harness::execute;

#[derive(Parser)]
#[command(name = "dilation", version, about = "Property suites for product-system dilations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites named in a scenario config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the config's suite list; repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print a trace of a construction given as JSON.
    Describe {
        #[arg(long)]
        input: PathBuf,
    },
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, suites, seed, report, jobs } => run(config, suites, seed, report, jobs),
        Command::Describe { input } => match describe_file(&input) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
    }
}

fn describe_file(path: &PathBuf) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let input: DescribeInput = serde_json::from_str(&text).context("parsing describe input")?;
    Ok(describe(&input)?)
}

fn run(
    config: PathBuf,
    suites: Vec<String>,
    seed: Option<u64>,
    report: Option<PathBuf>,
    jobs: Option<usize>,
) -> ExitCode {
    let plan = ScenarioConfig::load(&config).and_then(|c| c.resolve((!suites.is_empty()).then_some(&suites[..]), seed));
    let plan = match plan {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let mut out: Box<dyn Write + Send> = match &report {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("cannot create {}: {e}", path.display());
                return ExitCode::from(CONFIG_ERROR);
            }
        },
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let outcomes = match pool.install(|| execute(&plan, &mut out)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error writing report: {e}");
            return ExitCode::FAILURE;
        }
    };
    for o in &outcomes {
        eprintln!("{:<22} {}/{} passed ({:.1}s)", o.suite.name(), o.passed(), o.records.len(), o.wall_time);
    }
    if outcomes.iter().all(|o| o.failed() == 0) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
