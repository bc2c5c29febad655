use clap::Parser;

fn main() {
    std::process::exit(chsh_cli::run(chsh_cli::Cli::parse()));
}
