use clap::Parser;

fn main() {
    let cli = pibound_cli::Cli::parse();
    std::process::exit(pibound_cli::run(cli));
}
