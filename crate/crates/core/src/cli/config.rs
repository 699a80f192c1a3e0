//! Flat `key=value` run configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Domain(format!("unknown format '{other}'"))),
        }
    }
}

/// Every command parameter, as optional values. Flags and a config file
/// each produce one; [`RunConfig::merged_over`] layers them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Option<String>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub alpha_lo: Option<f64>,
    pub alpha_hi: Option<f64>,
    pub p_lo: Option<f64>,
    pub p_hi: Option<f64>,
    pub n_alpha: Option<usize>,
    pub n_p: Option<usize>,
    pub exclude_band: Option<f64>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub s_points: Option<usize>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub which: Option<String>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("cannot parse value '{value}' for key '{key}'")))
}

impl RunConfig {
    /// Parses `key=value` lines; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Domain(format!("config line {} has no '=': {line}", lineno + 1))
            })?;
            let key = key.trim();
            let v = value.trim();
            match key {
                "command" => c.command = Some(v.to_string()),
                "alpha" => c.alpha = Some(parse_value(key, v)?),
                "p" => c.p = Some(parse_value(key, v)?),
                "N" => c.n = Some(parse_value(key, v)?),
                "tol" => c.tol = Some(parse_value(key, v)?),
                "alpha_lo" => c.alpha_lo = Some(parse_value(key, v)?),
                "alpha_hi" => c.alpha_hi = Some(parse_value(key, v)?),
                "p_lo" => c.p_lo = Some(parse_value(key, v)?),
                "p_hi" => c.p_hi = Some(parse_value(key, v)?),
                "n_alpha" => c.n_alpha = Some(parse_value(key, v)?),
                "n_p" => c.n_p = Some(parse_value(key, v)?),
                "exclude_band" => c.exclude_band = Some(parse_value(key, v)?),
                "s_min" => c.s_min = Some(parse_value(key, v)?),
                "s_max" => c.s_max = Some(parse_value(key, v)?),
                "s_points" => c.s_points = Some(parse_value(key, v)?),
                "out" => c.out = Some(v.to_string()),
                "format" => c.format = Some(v.parse()?),
                "which" => c.which = Some(v.to_string()),
                other => return Err(Error::Domain(format!("unknown config key '{other}'"))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// Values set here win; unset ones fall back to `base`.
    pub fn merged_over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            alpha: self.alpha.or(base.alpha),
            p: self.p.or(base.p),
            n: self.n.or(base.n),
            tol: self.tol.or(base.tol),
            alpha_lo: self.alpha_lo.or(base.alpha_lo),
            alpha_hi: self.alpha_hi.or(base.alpha_hi),
            p_lo: self.p_lo.or(base.p_lo),
            p_hi: self.p_hi.or(base.p_hi),
            n_alpha: self.n_alpha.or(base.n_alpha),
            n_p: self.n_p.or(base.n_p),
            exclude_band: self.exclude_band.or(base.exclude_band),
            s_min: self.s_min.or(base.s_min),
            s_max: self.s_max.or(base.s_max),
            s_points: self.s_points.or(base.s_points),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            which: self.which.or(base.which),
        }
    }
}

impl fmt::Display for RunConfig {
    /// One `key=value` line per set field; floats use the shortest
    /// round-trip representation, so parsing the output restores `self`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        macro_rules! line {
            ($key:expr, $field:expr) => {
                if let Some(v) = &$field {
                    writeln!(f, "{}={}", $key, v)?;
                }
            };
        }
        line!("command", self.command);
        line!("alpha", self.alpha);
        line!("p", self.p);
        line!("N", self.n);
        line!("tol", self.tol);
        line!("alpha_lo", self.alpha_lo);
        line!("alpha_hi", self.alpha_hi);
        line!("p_lo", self.p_lo);
        line!("p_hi", self.p_hi);
        line!("n_alpha", self.n_alpha);
        line!("n_p", self.n_p);
        line!("exclude_band", self.exclude_band);
        line!("s_min", self.s_min);
        line!("s_max", self.s_max);
        line!("s_points", self.s_points);
        line!("out", self.out);
        line!("format", self.format);
        line!("which", self.which);
        Ok(())
    }
}
