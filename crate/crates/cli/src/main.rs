use std::process::ExitCode;

use clap::Parser;
use mrds_cli::{exit_code, run, thread_count, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_count(cli.common.threads).and_then(|n| {
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        run(&cli, &mut std::io::stdout().lock())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
