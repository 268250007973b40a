use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qcgrowth::cli::{run, RunConfig};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let out = run(&cfg);
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    if !out.stderr.is_empty() {
        eprintln!("qcgrowth: {}", out.stderr);
    }
    ExitCode::from(out.code as u8)
}
