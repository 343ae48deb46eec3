use clap::Parser;

fn main() {
    let cli = lookout::cli::Cli::parse();
    if let Err(err) = lookout::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
