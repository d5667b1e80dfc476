//! Run configuration: a flat `key = value` file layered under command-line
//! flags, resolved into a validated [`RunConfig`].

use crate::error::CliError;
use qlaser_core::coeffs::CoeffId;
use qlaser_core::qsolution::DEFAULT_THETA;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Upper bound on expanded scan lengths.
pub const MAX_SCAN_POINTS: usize = 100_000;
pub const DEFAULT_R_STEP: f64 = 0.25;
pub const DEFAULT_POINTS: usize = 401;
pub const DEFAULT_MUTATION: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Key {
    IS,
    C,
    R,
    RRange,
    RStep,
    RRatio,
    WithOracle,
    Heavy,
    Cutoff,
    Format,
    Out,
    Theta,
    Points,
    TolResidual,
    TolNorm,
    TolMoment,
    Mutate,
}

impl Key {
    pub const ALL: [Key; 17] = [
        Key::IS,
        Key::C,
        Key::R,
        Key::RRange,
        Key::RStep,
        Key::RRatio,
        Key::WithOracle,
        Key::Heavy,
        Key::Cutoff,
        Key::Format,
        Key::Out,
        Key::Theta,
        Key::Points,
        Key::TolResidual,
        Key::TolNorm,
        Key::TolMoment,
        Key::Mutate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Key::IS => "is",
            Key::C => "c",
            Key::R => "r",
            Key::RRange => "r-range",
            Key::RStep => "r-step",
            Key::RRatio => "r-ratio",
            Key::WithOracle => "with-oracle",
            Key::Heavy => "heavy",
            Key::Cutoff => "cutoff",
            Key::Format => "format",
            Key::Out => "out",
            Key::Theta => "theta",
            Key::Points => "points",
            Key::TolResidual => "tol-residual",
            Key::TolNorm => "tol-norm",
            Key::TolMoment => "tol-moment",
            Key::Mutate => "mutate",
        }
    }

    /// Accepts the flag spelling with or without leading dashes, and `_`
    /// for `-`.
    pub fn from_name(name: &str) -> Option<Key> {
        let name = name.trim_start_matches("--").replace('_', "-");
        Key::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Raw values by key. Both the config file and the flags are reduced to
/// this form so a value parses the same way wherever it came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<Key, String>);

impl Settings {
    pub fn set(&mut self, key: Key, value: impl Into<String>) {
        self.0.insert(key, value.into());
    }

    pub fn get(&self, key: Key) -> Option<&str> {
        self.0.get(&key).map(String::as_str)
    }

    /// `other` wins on conflicts.
    pub fn overlay(mut self, other: Settings) -> Settings {
        self.0.extend(other.0);
        self
    }

    pub fn parse(text: &str) -> Result<Settings, CliError> {
        let mut out = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config { line, message };
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let key = Key::from_name(k.trim()).ok_or_else(|| err(format!("unknown key {:?}", k.trim())))?;
            if out.0.contains_key(&key) {
                return Err(err(format!("duplicate key {:?}", key.name())));
            }
            let value = v.trim();
            if value.is_empty() {
                return Err(err(format!("empty value for {:?}", key.name())));
            }
            out.set(key, value);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ScanPump,
    Table,
    Profile,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ScanPump => "scan-pump",
            Command::Table => "table",
            Command::Profile => "profile",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pump {
    Unset,
    Single(f64),
    Range { start: f64, end: f64, step: f64 },
    /// `r = ratio · c` for each cooperativity.
    Ratio(f64),
}

impl Pump {
    pub fn values(&self, c: f64) -> Vec<f64> {
        match *self {
            Pump::Unset => vec![],
            Pump::Single(r) => vec![r],
            Pump::Ratio(k) => vec![k * c],
            Pump::Range { start, end, step } => expand_range(start, end, step).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub normalization: f64,
    pub moment: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-6,
            normalization: 1e-8,
            moment: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub i_s: Option<f64>,
    pub c: Vec<f64>,
    pub pump: Pump,
    pub with_oracle: bool,
    pub heavy: bool,
    pub cutoff: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub theta: f64,
    pub points: usize,
    pub tolerances: Tolerances,
    pub mutate: Option<(CoeffId, f64)>,
}

impl RunConfig {
    pub fn resolve(command: Command, s: &Settings) -> Result<RunConfig, CliError> {
        let pos = |k: Key| s.get(k).map(|v| parse_positive(k, v)).transpose();
        let i_s = pos(Key::IS)?;
        let c = match s.get(Key::C) {
            Some(v) => parse_list(Key::C, v)?,
            None => vec![],
        };
        let pump = resolve_pump(s)?;
        let cutoff = s
            .get(Key::Cutoff)
            .map(|v| {
                v.parse::<usize>()
                    .ok()
                    .filter(|&n| n >= qlaser_core::oracle::MIN_CUTOFF)
                    .ok_or_else(|| invalid(Key::Cutoff, v, "an integer >= 4"))
            })
            .transpose()?;
        let format = match s.get(Key::Format) {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(v) => return Err(invalid(Key::Format, v, "csv or json")),
        };
        let points = s
            .get(Key::Points)
            .map(|v| {
                v.parse::<usize>()
                    .ok()
                    .filter(|n| (2..=MAX_SCAN_POINTS).contains(n))
                    .ok_or_else(|| invalid(Key::Points, v, "an integer in [2, 100000]"))
            })
            .transpose()?
            .unwrap_or(DEFAULT_POINTS);
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            residual: pos(Key::TolResidual)?.unwrap_or(defaults.residual),
            normalization: pos(Key::TolNorm)?.unwrap_or(defaults.normalization),
            moment: pos(Key::TolMoment)?.unwrap_or(defaults.moment),
        };
        let cfg = RunConfig {
            command,
            i_s,
            c,
            pump,
            with_oracle: parse_bool(Key::WithOracle, s.get(Key::WithOracle))?,
            heavy: parse_bool(Key::Heavy, s.get(Key::Heavy))?,
            cutoff,
            format,
            out: s.get(Key::Out).map(PathBuf::from),
            theta: pos(Key::Theta)?.unwrap_or(DEFAULT_THETA),
            points,
            tolerances,
            mutate: s.get(Key::Mutate).map(parse_mutation).transpose()?,
        };
        cfg.check_required()?;
        Ok(cfg)
    }

    fn check_required(&self) -> Result<(), CliError> {
        let need_triple = |what: &str| -> Result<(), CliError> {
            if self.i_s.is_none() || self.c.is_empty() {
                return Err(CliError::usage(format!("{what} needs --is and --c")));
            }
            Ok(())
        };
        match self.command {
            Command::Table => Ok(()),
            Command::ScanPump => {
                need_triple("scan-pump")?;
                if matches!(self.pump, Pump::Unset) {
                    return Err(CliError::usage("scan-pump needs --r, --r-range or --r-ratio"));
                }
                Ok(())
            }
            Command::Profile => {
                need_triple("profile")?;
                if self.c.len() != 1 || !matches!(self.pump, Pump::Single(_)) {
                    return Err(CliError::usage("profile needs a single --c and a single --r"));
                }
                Ok(())
            }
            Command::Validate => {
                let any = self.i_s.is_some() || !self.c.is_empty() || !matches!(self.pump, Pump::Unset);
                if any && (self.i_s.is_none() || self.c.len() != 1 || !matches!(self.pump, Pump::Single(_))) {
                    return Err(CliError::usage("validate takes either no triple or all of --is, --c, --r"));
                }
                Ok(())
            }
        }
    }
}

fn resolve_pump(s: &Settings) -> Result<Pump, CliError> {
    let given: Vec<Key> = [Key::R, Key::RRange, Key::RRatio]
        .into_iter()
        .filter(|&k| s.get(k).is_some())
        .collect();
    if given.len() > 1 {
        let names: Vec<_> = given.iter().map(|k| format!("--{}", k.name())).collect();
        return Err(CliError::usage(format!("{} are mutually exclusive", names.join(", "))));
    }
    if s.get(Key::RStep).is_some() && s.get(Key::RRange).is_none() {
        return Err(CliError::usage("--r-step requires --r-range"));
    }
    if let Some(v) = s.get(Key::R) {
        return Ok(Pump::Single(parse_positive(Key::R, v)?));
    }
    if let Some(v) = s.get(Key::RRatio) {
        return Ok(Pump::Ratio(parse_positive(Key::RRatio, v)?));
    }
    if let Some(v) = s.get(Key::RRange) {
        let (start, end) = parse_range(v)?;
        let step = match s.get(Key::RStep) {
            Some(v) => parse_positive(Key::RStep, v)?,
            None => DEFAULT_R_STEP,
        };
        expand_range(start, end, step)?;
        return Ok(Pump::Range { start, end, step });
    }
    Ok(Pump::Unset)
}

fn invalid(key: Key, value: &str, expected: &str) -> CliError {
    CliError::usage(format!("--{}: expected {expected}, got {value:?}", key.name()))
}

pub fn parse_positive(key: Key, value: &str) -> Result<f64, CliError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite() && *x > 0.0)
        .ok_or_else(|| invalid(key, value, "a positive number"))
}

pub fn parse_list(key: Key, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| parse_positive(key, v)).collect()
}

pub fn parse_bool(key: Key, value: Option<&str>) -> Result<bool, CliError> {
    match value {
        None => Ok(false),
        Some("true" | "yes" | "1" | "on") => Ok(true),
        Some("false" | "no" | "0" | "off") => Ok(false),
        Some(v) => Err(invalid(key, v, "true or false")),
    }
}

/// `start:end` or `start..end`, both ends inclusive.
pub fn parse_range(value: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = value
        .split_once("..")
        .or_else(|| value.split_once(':'))
        .ok_or_else(|| invalid(Key::RRange, value, "START:END"))?;
    let start = parse_positive(Key::RRange, a)?;
    let end = parse_positive(Key::RRange, b)?;
    Ok((start, end))
}

/// Grid `start + k·step` up to `end`, allowing for rounding at the end
/// point. Empty ranges are a usage error.
pub fn expand_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::usage(format!("step must be positive, got {step}")));
    }
    if !(start <= end) {
        return Err(CliError::usage(format!("empty range {start}..{end}")));
    }
    let span = (end - start) / step;
    if !(span < MAX_SCAN_POINTS as f64) {
        return Err(CliError::usage(format!("range {start}..{end} by {step} exceeds {MAX_SCAN_POINTS} points")));
    }
    let count = (span + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// `b42` or `b42=1.01`.
pub fn parse_mutation(value: &str) -> Result<(CoeffId, f64), CliError> {
    let (name, factor) = match value.split_once('=') {
        Some((n, f)) => (n.trim(), parse_positive(Key::Mutate, f)?),
        None => (value.trim(), DEFAULT_MUTATION),
    };
    let id = CoeffId::from_name(name).ok_or_else(|| invalid(Key::Mutate, value, "a coefficient name such as b42"))?;
    Ok((id, factor))
}
