//! Command-line front end: configuration ingestion, subcommand dispatch and
//! result emission for the evaluators, optimizers and simulators.
//!
//! Exit codes: 0 success, 1 validation error (bad arguments or inputs),
//! 2 internal failure.

pub mod args;
pub mod commands;
pub mod emit;
pub mod schema;

use clap::Parser;

/// Errors surfaced to the user, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError::Internal(msg.into())
    }

    /// Core errors all stem from configuration problems at this boundary.
    pub fn from_core(e: keyrate_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => m,
        }
    }
}

/// Parse and run; returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else is a
            // usage error.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            2
        }
    }
}

fn run(cli: args::Cli) -> Result<(), CliError> {
    use args::{Command, RegionCmd, ReduceCmd, SimulateCmd};
    match cli.command {
        Command::Region { cmd } => match cmd {
            RegionCmd::InnerNofb(a) => commands::region_inner_nofb(a),
            RegionCmd::OuterNofb(a) => commands::region_outer_nofb(a),
            RegionCmd::InnerFb(a) => commands::region_inner_fb(a),
            RegionCmd::FmVerify(a) => commands::region_fm_verify(a),
        },
        Command::Simulate { cmd } => match cmd {
            SimulateCmd::Nofb(a) => commands::simulate_nofb(a),
            SimulateCmd::Fb(a) => commands::simulate_fb(a),
        },
        Command::Reduce { cmd } => match cmd {
            ReduceCmd::Wiretap(a) => commands::reduce_wiretap(a),
        },
    }
}
