use clap::Parser;

use hybrid_perov::cli::{run, Args, RunConfig};

fn main() {
    let config = RunConfig::from(Args::parse());
    std::process::exit(run(&config));
}
