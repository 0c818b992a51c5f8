//! Front end for the `mfpt` binary: argument definitions, the four
//! subcommands and the CSV report format.

pub mod args;
pub mod commands;
pub mod report;

pub use commands::{Failure, RunConfig, Source, EXIT_INPUT, EXIT_OK, EXIT_SOLVER};
pub use report::{BenchRow, Outcome, CSV_HEADER};

use args::{Cli, Command};

pub fn run(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Solve(a) => commands::cmd_solve(a),
        Command::Bench(a) => commands::cmd_bench(a),
        Command::Validate(a) => commands::cmd_validate(a),
        Command::Gen(a) => commands::cmd_gen(a),
    }
}
