use clap::Parser;

use hqdetect::cli::{init_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = init_threads().and_then(|()| run(cli)) {
        eprintln!("hqdetect: {e}");
        std::process::exit(e.exit_code());
    }
}
