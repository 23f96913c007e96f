use clap::Parser;
use locdisc_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("locdisc: {e}");
        std::process::exit(e.exit_code());
    }
}
