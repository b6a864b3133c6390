use clap::Parser;

fn main() {
    let cli = factorbt_cli::Cli::parse();
    std::process::exit(factorbt_cli::run(&cli));
}
