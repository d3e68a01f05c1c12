use clap::Parser;

use fpa_forge::cli::{run, Cli};

fn main() {
    // clap exits with code 2 on usage errors
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
