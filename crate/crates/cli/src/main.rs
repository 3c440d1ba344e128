use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use flatrank_cli::{run, Cli, CommandResult, Status};

fn main() -> ExitCode {
    let result = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            CommandResult::error(e.kind())
        }
    };
    let bytes = result.payload.as_bytes();
    let written = if result.status == Status::Error {
        std::io::stderr().lock().write_all(bytes)
    } else {
        std::io::stdout().lock().write_all(bytes)
    };
    if written.is_err() {
        return ExitCode::from(1);
    }
    ExitCode::from(result.exit_code() as u8)
}
