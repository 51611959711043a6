//! Command-line front end: problem files, report writers and the `solve`,
//! `certify`, `scalar` and `lcp` commands.

pub mod commands;
pub mod error;
pub mod problem_file;
pub mod report;

pub use commands::{main_with_args, Cli, Exit};
pub use error::CliError;
pub use problem_file::{parse_problem, LoadedProblem, ProblemFile};
