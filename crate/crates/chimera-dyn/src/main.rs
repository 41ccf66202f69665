//! Entry point: parse arguments, dispatch, and map failures onto the exit
//! code contract (0 success, 2 usage, 3 malformed input, 4 numerical).

use clap::Parser;

mod cli;

fn main() {
    let parsed = cli::Cli::parse();
    if let Err(e) = cli::run(parsed) {
        eprintln!("error: {e}");
        let code = if e.is_input() {
            3
        } else if e.is_numerical() {
            4
        } else {
            2
        };
        std::process::exit(code);
    }
}
