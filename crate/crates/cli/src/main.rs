use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pencil_cli::export::{export_to_file, ExportKind};
use pencil_cli::{run, CliError, RunOptions, RunReport, Scenario};

#[derive(Parser)]
#[command(name = "pencil", version, about = "Residual checks, dressing runs and Lax certification for metric pencils")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its JSON report.
    Run {
        scenario: PathBuf,
        /// Output directory for the report.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override of the residual tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
        /// Seed of the random zero-curvature probes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record wall-clock timings in the report (makes it non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Cut a CSV table out of a report.
    Export {
        report: PathBuf,
        /// beta-field, h-field, residual-map or monodromy-vs-lambda.
        #[arg(long)]
        what: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(args: Args) -> Result<bool, CliError> {
    match args.command {
        Command::Run {
            scenario,
            out,
            tolerance,
            threads,
            seed,
            timings,
        } => {
            if let Some(k) = threads {
                if k == 0 {
                    return Err(CliError::input("--threads", "must be positive"));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .map_err(|e| CliError::input("--threads", e.to_string()))?;
            }
            let sc = Scenario::load(&scenario)?;
            let report = run(&sc, &RunOptions { tolerance, seed, timings })?;
            let path = out.join(&report.scenario.outputs.report);
            report.write(&path)?;
            print!("{}", report.summary());
            println!("report: {}", path.display());
            Ok(report.verdict.passed)
        }
        Command::Export { report, what, out } => {
            let kind: ExportKind = what.parse()?;
            let report = RunReport::load(&report)?;
            export_to_file(&report, kind, &out)?;
            println!("{}: {}", kind.name(), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
