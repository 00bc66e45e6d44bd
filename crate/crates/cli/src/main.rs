use clap::Parser;

fn main() {
    if let Err(e) = multidm_cli::run(multidm_cli::Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
