#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use qlaser_cli::args::Cli;

// one argument per line
fuzz_target!(|text: &str| {
    let argv = std::iter::once("qlaser").chain(text.lines());
    if let Ok(cli) = Cli::try_parse_from(argv) {
        let _ = cli.resolve();
    }
});
