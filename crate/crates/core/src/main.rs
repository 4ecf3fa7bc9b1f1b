use clap::Parser;

use maxwil::cli::{main_with, CliArgs};

fn main() {
    std::process::exit(main_with(&CliArgs::parse()));
}
