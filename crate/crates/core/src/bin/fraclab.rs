use clap::Parser;
use fraclab::cli::{main_with, Args};

fn main() {
    std::process::exit(main_with(Args::parse()));
}
