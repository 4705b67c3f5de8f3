use clap::Parser;

fn main() {
    let cli = infodist_cli::Cli::parse();
    std::process::exit(infodist_cli::run_and_write(&cli));
}
