use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use psdo::harness::{run_experiment, ExperimentConfig, RunOptions, ScalingReport};
use psdo::symbols::list_families;

#[derive(Parser)]
#[command(name = "psdo", version, about = "Schatten quasi-norm experiments for discretized pseudo-differential operators")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write `<name>.json` and `<name>.csv` to the output directory.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the builtin symbol and amplitude families.
    ListFixtures,
    /// Parse and check a config without running it.
    ValidateConfig { config: PathBuf },
    /// Print the summary table of a stored report.
    ShowReport { file: PathBuf },
}

const EXIT_FAIL: u8 = 2;

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, workers, seed } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg, RunOptions { workers, seed }).with_context(|| format!("running {}", config.display()))?;
            let (json, csv) = report.write_files(&out).with_context(|| format!("writing reports to {}", out.display()))?;
            print!("{}", report.summary_table());
            println!("wrote {} and {}", json.display(), csv.display());
            Ok(if report.verdict.pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAIL) })
        }
        Command::ListFixtures => {
            for f in list_families() {
                println!("{:<20} {:<10} {}", f.name, f.kind, f.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateConfig { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let errs = cfg.violations();
            if errs.is_empty() {
                println!("{}: ok ({})", config.display(), cfg.kind.name());
                return Ok(ExitCode::SUCCESS);
            }
            for e in &errs {
                eprintln!("{}: {e}", config.display());
            }
            Ok(ExitCode::FAILURE)
        }
        Command::ShowReport { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let report = ScalingReport::from_json(&text)?;
            print!("{}", report.summary_table());
            if !report.is_consistent() {
                eprintln!("warning: stored verdict does not follow from the stored rows");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
