use std::process::ExitCode;

use clap::Parser;
use lkhol_cli::{run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let out = run(&cli);
    if out.code == EXIT_INPUT {
        eprintln!("{}", out.report);
    } else if cli.common.out.is_none() {
        print!("{}", out.report);
    }
    ExitCode::from(out.code as u8)
}
