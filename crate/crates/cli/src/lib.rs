//! Front end for `qlaser-core`: pump scans, the comparison table, profile
//! export and the validation report, rendered as CSV or JSON.

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use error::CliError;

use clap::Parser;
use std::ffi::OsString;

/// Parses `argv`, runs the command and returns what `main` should print and
/// the exit status. Output goes to `--out` when given.
pub fn run_from<I, T>(argv: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 { (text, String::new(), 0) } else { (String::new(), text, code) };
        }
    };
    let result = cli.resolve().and_then(|cfg| {
        let outcome = commands::run(&cfg)?;
        let text = outcome.table.render(cfg.format);
        match &cfg.out {
            Some(path) => {
                std::fs::write(path, &text).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok((String::new(), outcome.success))
            }
            None => Ok((text, outcome.success)),
        }
    });
    match result {
        Ok((text, true)) => (text, String::new(), 0),
        Ok((text, false)) => (text, "qlaser: validation failed\n".into(), 1),
        Err(e) => (String::new(), format!("qlaser: {e}\n"), e.exit_code()),
    }
}
