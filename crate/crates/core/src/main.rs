use std::process::ExitCode;

use clap::Parser;
use vectorial::cli::{self, Cli};

fn main() -> ExitCode {
    cli::init_logging();
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match cli::run(&args, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("vectorial: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
