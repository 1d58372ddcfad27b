use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nilsoliton::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, code) = run(&cli);
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
