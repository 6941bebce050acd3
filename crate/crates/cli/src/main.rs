use clap::Parser;
use rifclark_cli::{init_threads, run, RunConfig};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    init_threads();
    match run(&config) {
        Ok(outcome) => {
            let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
            if outcome.output_path.is_some() {
                let _ = out.write_all(outcome.summary.as_bytes());
            } else {
                let _ = out.write_all(outcome.artifact.as_bytes());
                let _ = err.write_all(outcome.summary.as_bytes());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = std::io::stderr().write_all(e.to_json().as_bytes());
            ExitCode::FAILURE
        }
    }
}
