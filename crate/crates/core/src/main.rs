use clap::Parser;

use hkbose::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            for file in &summary.files {
                eprintln!("hkbose: wrote {}", file.display());
            }
        }
        Err(err) => {
            eprintln!("hkbose: error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
