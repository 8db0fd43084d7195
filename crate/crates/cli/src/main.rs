use clap::Parser;

fn main() {
    let cli = openenv_cli::Cli::parse();
    if let Err(e) = openenv_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
