use std::process::ExitCode;

use biharm_cli::{run, Args};
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) => {
            if !args.quiet {
                println!("{}", outcome.headline);
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("biharm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
