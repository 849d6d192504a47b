use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hamiltonize_cli::{catalog, run_source, RunOptions};

#[derive(Parser)]
#[command(name = "hamiltonize", version, about = "Construct and certify Poisson structures that hamiltonize vector fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a problem file and emit a JSON report.
    Run {
        problem: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampler seed, overriding the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Stop at the first task that does not pass.
        #[arg(long)]
        fail_fast: bool,
        /// Sample count, overriding the file.
        #[arg(long)]
        samples: Option<usize>,
        /// Zero-test tolerance, overriding the file.
        #[arg(long)]
        tol: Option<f64>,
        /// Record wall-clock time per task (makes reports non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// List construction and check identifiers with their inputs.
    ListTasks,
    /// Print the hypothesis checklist of a task.
    Explain { task: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListTasks => {
            print!("{}", catalog::list_tasks());
            ExitCode::SUCCESS
        }
        Command::Explain { task } => match catalog::explain(&task) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown task `{task}`; see `hamiltonize list-tasks`");
                ExitCode::from(2)
            }
        },
        Command::Run {
            problem,
            out,
            seed,
            fail_fast,
            samples,
            tol,
            timings,
        } => {
            let source = match fs::read_to_string(&problem) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}: {e}", problem.display());
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                seed,
                samples,
                tol,
                fail_fast,
                timings,
            };
            let report = match run_source(&source, &opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", problem.display());
                    return ExitCode::from(2);
                }
            };
            let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(&path, json) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{json}"),
            }
            for t in report.tasks.iter().filter(|t| !t.passed) {
                eprintln!("task {} ({}) did not pass", t.index, t.kind);
            }
            for f in report.flows.iter().filter(|f| !f.passed) {
                eprintln!("flow check on `{}` did not pass", f.field);
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
