use clap::Parser;

fn main() {
    let cli = secnc_cli::Cli::parse();
    std::process::exit(secnc_cli::run(&cli));
}
