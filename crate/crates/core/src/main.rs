use std::process::ExitCode;
use std::sync::atomic::Ordering;

use clap::Parser;
use qnetsim::cli::{run, Cli, INTERRUPTED};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = ctrlc::set_handler(|| INTERRUPTED.store(true, Ordering::SeqCst)) {
        eprintln!("warning: cannot install interrupt handler: {e}");
    }
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
