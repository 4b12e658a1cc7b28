//! Run configuration: command-line flags merged over an optional key/value file.
//!
//! The file format is one `key = value` pair per line. Blank lines and lines
//! starting with `#` are ignored, a key may repeat to form a list, and a value
//! may itself be a comma-separated list. Keys are the long flag names without
//! the leading dashes. A flag given on the command line replaces every value
//! the file supplies for that key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use mpd_core::PParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: PathBuf, line: usize, msg: String },
    #[error("invalid value {value:?} for {key}: {msg}")]
    Value { key: String, value: String, msg: String },
    #[error("invalid grid point: {0}")]
    Param(#[from] mpd_core::ParamError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Poincare,
    Stratification,
    Frobenius,
    Kunneth,
    Basechange,
    ArithLemmas,
    Crosscheck,
    Jet,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Poincare,
        Suite::Stratification,
        Suite::Frobenius,
        Suite::Kunneth,
        Suite::Basechange,
        Suite::ArithLemmas,
        Suite::Crosscheck,
        Suite::Jet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Poincare => "poincare",
            Suite::Stratification => "stratification",
            Suite::Frobenius => "frobenius",
            Suite::Kunneth => "kunneth",
            Suite::Basechange => "basechange",
            Suite::ArithLemmas => "arith-lemmas",
            Suite::Crosscheck => "crosscheck",
            Suite::Jet => "jet",
        }
    }

    /// Advisory suites are reported but never change the exit code.
    pub fn is_advisory(self) -> bool {
        self == Suite::Jet
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite (expected all, none or one of {})", suite_names()))
    }
}

fn suite_names() -> String {
    Suite::ALL.map(Suite::name).join(", ")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, false)
    }
}

/// Flags shared by `verify`, `homology` and `explore-jet`.
#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Primes of the grid (repeat or comma-separate)
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u64>,
    /// Levels m
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u32>,
    /// Numbers of coordinates n
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Precision exponents N: coefficients live in Z/p^N
    #[arg(long = "modulus-exp", value_delimiter = ',')]
    pub modulus_exp: Vec<u32>,
    /// Smallest weight reported by `homology`
    #[arg(long = "min-weight")]
    pub min_weight: Option<u64>,
    /// Largest weight of every weight window
    #[arg(long = "max-weight")]
    pub max_weight: Option<u64>,
    /// Evaluation points a, broadcast to (a, ..., a)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eval: Vec<i64>,
    /// Suites to run: all, none, or suite names
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Key/value config file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for grid evaluation
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory holding golden files, one per suite
    #[arg(long = "golden-dir")]
    pub golden_dir: Option<PathBuf>,
    /// Include per-result wall-clock timings (breaks byte determinism)
    #[arg(long)]
    pub timings: bool,
    /// Rewrite golden files from this run instead of comparing
    #[arg(long)]
    pub bless: bool,
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub p: Vec<u64>,
    pub m: Vec<u32>,
    pub n: Vec<usize>,
    pub modulus_exp: Vec<u32>,
    pub min_weight: u64,
    pub max_weight: u64,
    pub eval: Vec<i64>,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub golden_dir: Option<PathBuf>,
    pub timings: bool,
    pub bless: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: vec![2, 3],
            m: vec![0, 1],
            n: vec![1, 2],
            modulus_exp: vec![1, 2],
            min_weight: 0,
            max_weight: 8,
            eval: vec![0, 1, 2, 3],
            suites: Suite::ALL.to_vec(),
            out: None,
            format: Format::Json,
            threads: None,
            golden_dir: None,
            timings: false,
            bless: false,
        }
    }
}

/// The part of a [`RunConfig`] that determines report content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub p: Vec<u64>,
    pub m: Vec<u32>,
    pub n: Vec<usize>,
    pub modulus_exp: Vec<u32>,
    pub min_weight: u64,
    pub max_weight: u64,
    pub eval: Vec<i64>,
    pub suites: Vec<Suite>,
}

const KEYS: [&str; 14] = [
    "p",
    "m",
    "n",
    "modulus-exp",
    "min-weight",
    "max-weight",
    "eval",
    "suite",
    "out",
    "format",
    "threads",
    "golden-dir",
    "timings",
    "bless",
];

/// Parses the key/value file format into a list of values per key.
pub fn parse_config_text(path: &Path, text: &str) -> Result<BTreeMap<String, Vec<String>>, ConfigError> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |msg: String| ConfigError::Syntax {
            path: path.to_path_buf(),
            line: k + 1,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected `key = value`".into()))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(syntax(format!("unknown key {key:?}")));
        }
        let entry = out.entry(key).or_default();
        entry.extend(value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from));
    }
    Ok(out)
}

fn parse_list<T: FromStr>(key: &str, values: &[String]) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    values
        .iter()
        .map(|v| {
            v.parse().map_err(|e: T::Err| ConfigError::Value {
                key: key.into(),
                value: v.clone(),
                msg: e.to_string(),
            })
        })
        .collect()
}

fn parse_single<T: FromStr>(key: &str, values: &[String]) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    match values {
        [] => Ok(None),
        [v] => parse_list(key, std::slice::from_ref(v)).map(|mut x| x.pop()),
        _ => Err(ConfigError::Value {
            key: key.into(),
            value: values.join(","),
            msg: "expected a single value".into(),
        }),
    }
}

/// Expands `all` and `none`; the result is deduplicated and in canonical order.
pub fn parse_suites(values: &[String]) -> Result<Vec<Suite>, ConfigError> {
    let mut out = Vec::new();
    let mut none = false;
    for v in values {
        match v.as_str() {
            "all" => out.extend(Suite::ALL),
            "none" => none = true,
            s => out.push(s.parse().map_err(|msg| ConfigError::Value {
                key: "suite".into(),
                value: v.clone(),
                msg,
            })?),
        }
    }
    if none && !out.is_empty() {
        return Err(ConfigError::Invalid("suite `none` cannot be combined with other suites".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl RunConfig {
    /// Merges flags over the config file (if any) over defaults, then validates.
    pub fn resolve(args: &GridArgs) -> Result<Self, ConfigError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                parse_config_text(path, &text)?
            }
            None => BTreeMap::new(),
        };
        let get = |key: &str| file.get(key).map(Vec::as_slice).unwrap_or(&[]);
        let mut c = RunConfig::default();

        macro_rules! list {
            ($field:ident, $key:literal) => {
                if !args.$field.is_empty() {
                    c.$field = args.$field.clone();
                } else if !get($key).is_empty() {
                    c.$field = parse_list($key, get($key))?;
                }
            };
        }
        list!(p, "p");
        list!(m, "m");
        list!(n, "n");
        list!(modulus_exp, "modulus-exp");
        list!(eval, "eval");

        let suites = if args.suite.is_empty() { get("suite").to_vec() } else { args.suite.clone() };
        if !suites.is_empty() {
            c.suites = parse_suites(&suites)?;
        }

        macro_rules! single {
            ($field:ident, $key:literal) => {
                match args.$field.clone() {
                    Some(v) => Some(v),
                    None => parse_single($key, get($key))?,
                }
            };
        }
        if let Some(w) = single!(min_weight, "min-weight") {
            c.min_weight = w;
        }
        if let Some(w) = single!(max_weight, "max-weight") {
            c.max_weight = w;
        }
        if let Some(f) = single!(format, "format") {
            c.format = f;
        }
        c.out = single!(out, "out");
        c.threads = single!(threads, "threads");
        c.golden_dir = single!(golden_dir, "golden-dir");
        c.timings = args.timings || parse_single("timings", get("timings"))?.unwrap_or(false);
        c.bless = args.bless || parse_single("bless", get("bless"))?.unwrap_or(false);

        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for (key, empty) in [
            ("p", self.p.is_empty()),
            ("m", self.m.is_empty()),
            ("n", self.n.is_empty()),
            ("modulus-exp", self.modulus_exp.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::Invalid(format!("{key} needs at least one value")));
            }
        }
        self.grid()?;
        if self.min_weight > self.max_weight {
            return Err(ConfigError::Invalid(format!(
                "min-weight {} exceeds max-weight {}",
                self.min_weight, self.max_weight
            )));
        }
        if self.threads == Some(0) {
            return Err(ConfigError::Invalid("threads must be positive".into()));
        }
        if self.bless && self.golden_dir.is_none() {
            return Err(ConfigError::Invalid("--bless needs --golden-dir".into()));
        }
        Ok(())
    }

    /// Every grid point, sorted and deduplicated.
    pub fn grid(&self) -> Result<Vec<PParams>, ConfigError> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &m in &self.m {
                for &n in &self.n {
                    for &big_n in &self.modulus_exp {
                        out.push(PParams::new(p, m, n, big_n)?);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn echo(&self) -> ConfigEcho {
        fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
            v.sort();
            v.dedup();
            v
        }
        ConfigEcho {
            p: sorted(self.p.clone()),
            m: sorted(self.m.clone()),
            n: sorted(self.n.clone()),
            modulus_exp: sorted(self.modulus_exp.clone()),
            min_weight: self.min_weight,
            max_weight: self.max_weight,
            eval: self.eval.clone(),
            suites: self.suites.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> GridArgs {
        GridArgs::default()
    }

    #[test]
    fn repeated_keys_form_lists() {
        let text = "# grid\np = 2\np = 3, 5\n\nmax_weight = 4\nsuite = poincare\n";
        let map = parse_config_text(Path::new("x.conf"), text).unwrap();
        assert_eq!(map["p"], ["2", "3", "5"]);
        assert_eq!(map["max-weight"], ["4"]);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config_text(Path::new("x.conf"), "p = 2\nbogus\n").unwrap_err();
        assert!(err.to_string().contains("x.conf:2"));
        let err = parse_config_text(Path::new("x.conf"), "colour = red\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "p = 5\nm = 2\nmax-weight = 3\nformat = csv\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        a.p = vec![3];
        let c = RunConfig::resolve(&a).unwrap();
        assert_eq!(c.p, [3]);
        assert_eq!(c.m, [2]);
        assert_eq!(c.max_weight, 3);
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn suite_selection() {
        let s = |v: &[&str]| parse_suites(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        assert_eq!(s(&["none"]).unwrap(), []);
        assert_eq!(s(&["jet", "poincare", "jet"]).unwrap(), [Suite::Poincare, Suite::Jet]);
        assert_eq!(s(&["all"]).unwrap(), Suite::ALL);
        assert!(s(&["none", "jet"]).is_err());
        assert!(s(&["kunneth2"]).is_err());
    }

    #[test]
    fn invalid_points_are_config_errors() {
        let mut a = args();
        a.p = vec![4];
        assert!(matches!(RunConfig::resolve(&a), Err(ConfigError::Param(_))));
        let mut a = args();
        a.min_weight = Some(5);
        a.max_weight = Some(2);
        assert!(RunConfig::resolve(&a).is_err());
    }
}
