//! Command-line flags, reduced to [`Settings`] so they layer over a config
//! file.

use crate::config::{Command, Key, RunConfig, Settings};
use crate::error::CliError;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qlaser", version, about = "Photon statistics of the single-atom laser from the Husimi function")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Mean photon number and Mandel parameter over a pump scan.
    ScanPump(Flags),
    /// The three-column comparison of linear theory and the asymptotic solution.
    Table(Flags),
    /// Q(I) curves on a shared grid.
    Profile(Flags),
    /// Identity and invariant checks; exit status 0 iff all pass.
    Validate(Flags),
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Saturation photon number I_s.
    #[arg(long = "is", value_name = "I_S")]
    pub i_s: Option<String>,
    /// Cooperativity c, or a comma-separated list.
    #[arg(long)]
    pub c: Option<String>,
    /// Dimensionless pump r.
    #[arg(long)]
    pub r: Option<String>,
    /// Inclusive pump range START:END.
    #[arg(long, value_name = "START:END")]
    pub r_range: Option<String>,
    /// Step for --r-range [default: 0.25].
    #[arg(long)]
    pub r_step: Option<String>,
    /// Pump proportional to cooperativity, r = RATIO * c.
    #[arg(long, value_name = "RATIO")]
    pub r_ratio: Option<String>,
    /// Add columns from the exact steady state.
    #[arg(long)]
    pub with_oracle: bool,
    /// Allow large oracle cutoffs; adds the oracle row to `table`.
    #[arg(long)]
    pub heavy: bool,
    /// Fixed Fock cutoff for the oracle.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Output format, csv or json [default: csv].
    #[arg(long)]
    pub format: Option<String>,
    /// Write to PATH instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<String>,
    /// Below THETA * r_th the thermal form is used [default: 0.5].
    #[arg(long)]
    pub theta: Option<String>,
    /// Grid size for `profile` [default: 401].
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long)]
    pub tol_residual: Option<String>,
    #[arg(long)]
    pub tol_norm: Option<String>,
    #[arg(long)]
    pub tol_moment: Option<String>,
    /// Flat key = value file; flags given here override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub mutate: Option<String>,
}

impl Flags {
    pub fn settings(&self) -> Settings {
        let mut s = Settings::default();
        let pairs = [
            (Key::IS, &self.i_s),
            (Key::C, &self.c),
            (Key::R, &self.r),
            (Key::RRange, &self.r_range),
            (Key::RStep, &self.r_step),
            (Key::RRatio, &self.r_ratio),
            (Key::Cutoff, &self.cutoff),
            (Key::Format, &self.format),
            (Key::Out, &self.out),
            (Key::Theta, &self.theta),
            (Key::Points, &self.points),
            (Key::TolResidual, &self.tol_residual),
            (Key::TolNorm, &self.tol_norm),
            (Key::TolMoment, &self.tol_moment),
            (Key::Mutate, &self.mutate),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                s.set(k, v.clone());
            }
        }
        if self.with_oracle {
            s.set(Key::WithOracle, "true");
        }
        if self.heavy {
            s.set(Key::Heavy, "true");
        }
        s
    }
}

impl Cli {
    pub fn command(&self) -> (Command, &Flags) {
        match &self.command {
            Sub::ScanPump(f) => (Command::ScanPump, f),
            Sub::Table(f) => (Command::Table, f),
            Sub::Profile(f) => (Command::Profile, f),
            Sub::Validate(f) => (Command::Validate, f),
        }
    }

    /// Layers the flags over the config file, if any.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let (command, flags) = self.command();
        let base = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        RunConfig::resolve(command, &base.overlay(flags.settings()))
    }
}
