use std::process::ExitCode;

use clap::Parser;
use hwsim_cli::{run, Cli};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(m) => {
            let dir = m.outputs.keys().cloned().collect::<Vec<_>>().join(", ");
            eprintln!("{}: wrote {dir} ({:.1}s, {} threads)", m.subcommand, m.wall_clock_secs, m.threads);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
