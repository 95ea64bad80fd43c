use clap::Parser;

fn main() {
    let cli = qfridge_cli::Cli::parse();
    if let Err(e) = qfridge_cli::run(cli) {
        eprintln!("qfridge: {e}");
        std::process::exit(e.exit_code());
    }
}
