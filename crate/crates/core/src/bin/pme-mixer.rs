use clap::Parser;
use pme_mixer::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(&Cli::parse()));
}
