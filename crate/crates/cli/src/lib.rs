//! Batch front end: problem files in, JSON certificate reports out.

pub mod catalog;
pub mod problem;
pub mod report;
pub mod run;

pub use problem::{Problem, ProblemError};
pub use report::Report;
pub use run::{run, RunOptions};

/// Parse and run a problem file's contents.
pub fn run_source(source: &str, opts: &RunOptions) -> Result<Report, ProblemError> {
    Ok(run(&Problem::parse(source)?, opts))
}
