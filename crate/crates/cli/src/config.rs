//! Run configuration: defaults, `key = value` files and command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use diabatic::propagator::Method;
use diabatic::{Model, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Closed interval with a point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 || self.min == self.max {
            vec![self.min]
        } else {
            diabatic::numeric::linspace(self.min, self.max, self.points)
        }
    }
}

/// Everything a run depends on. Serialized into every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eps0: f64,
    pub eps1: f64,
    pub coupling_strength: f64,
    pub f_exponent: u32,
    pub g_exponent: u32,

    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// `dp` (adaptive) or `rk4`.
    pub method: String,
    pub rk4_steps: usize,

    pub v_min: f64,
    pub v_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    /// Grid density; `None` means the command's own default.
    pub nv: Option<usize>,
    pub nb: Option<usize>,
    /// Fixed impact parameter of `sweep-v`.
    pub b: f64,
    /// Per-gate search window overrides; `None` keeps the gate's default.
    pub search_v_min: Option<f64>,
    pub search_v_max: Option<f64>,
    pub search_b_min: Option<f64>,
    pub search_b_max: Option<f64>,
    pub refine_evals: usize,

    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,

    pub threshold: f64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps0: -1.0,
            eps1: 1.0,
            coupling_strength: 1.0,
            f_exponent: 4,
            g_exponent: 4,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
            method: "dp".into(),
            rk4_steps: 2000,
            v_min: 0.01,
            v_max: 0.5,
            b_min: 0.0,
            b_max: 0.5,
            nv: None,
            nb: None,
            b: 0.0,
            search_v_min: None,
            search_v_max: None,
            search_b_min: None,
            search_b_max: None,
            refine_evals: 400,
            eps_min: 1e-4,
            eps_max: 1e-3,
            eps_count: 7,
            threshold: 1e-4,
            threads: 0,
            out_dir: PathBuf::from("."),
            format: Format::Json,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub const KEYS: [&'static str; 32] = [
        "eps0",
        "eps1",
        "coupling_strength",
        "f_exponent",
        "g_exponent",
        "rel_tol",
        "abs_tol",
        "max_steps",
        "method",
        "rk4_steps",
        "v_min",
        "v_max",
        "b_min",
        "b_max",
        "nv",
        "nb",
        "b",
        "search_v_min",
        "search_v_max",
        "search_b_min",
        "search_b_max",
        "refine_evals",
        "eps_min",
        "eps_max",
        "eps_count",
        "threshold",
        "threads",
        "out_dir",
        "format",
        "grid",
        "v_points",
        "b_points",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "eps0" => self.eps0 = parse(key, value)?,
            "eps1" => self.eps1 = parse(key, value)?,
            "coupling_strength" => self.coupling_strength = parse(key, value)?,
            "f_exponent" => self.f_exponent = parse(key, value)?,
            "g_exponent" => self.g_exponent = parse(key, value)?,
            "rel_tol" => self.rel_tol = parse(key, value)?,
            "abs_tol" => self.abs_tol = parse(key, value)?,
            "max_steps" => self.max_steps = parse(key, value)?,
            "method" => self.method = value.to_string(),
            "rk4_steps" => self.rk4_steps = parse(key, value)?,
            "v_min" => self.v_min = parse(key, value)?,
            "v_max" => self.v_max = parse(key, value)?,
            "b_min" => self.b_min = parse(key, value)?,
            "b_max" => self.b_max = parse(key, value)?,
            "nv" | "v_points" => self.nv = Some(parse(key, value)?),
            "nb" | "b_points" => self.nb = Some(parse(key, value)?),
            "grid" => {
                let (nv, nb) = parse_grid(value).map_err(ConfigError)?;
                self.nv = Some(nv);
                self.nb = Some(nb);
            }
            "b" => self.b = parse(key, value)?,
            "search_v_min" => self.search_v_min = Some(parse(key, value)?),
            "search_v_max" => self.search_v_max = Some(parse(key, value)?),
            "search_b_min" => self.search_b_min = Some(parse(key, value)?),
            "search_b_max" => self.search_b_max = Some(parse(key, value)?),
            "refine_evals" => self.refine_evals = parse(key, value)?,
            "eps_min" => self.eps_min = parse(key, value)?,
            "eps_max" => self.eps_max = parse(key, value)?,
            "eps_count" => self.eps_count = parse(key, value)?,
            "threshold" => self.threshold = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "format" => self.format = value.parse().map_err(ConfigError)?,
            _ => return Err(ConfigError(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document. `#` starts a comment; repeated keys
    /// are rejected.
    pub fn apply_str(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(ConfigError(format!("line {}: duplicate key {key:?}", n + 1)));
            }
            seen.push(key);
            self.set(key, value)
                .map_err(|e| ConfigError(format!("line {}: {}", n + 1, e.0)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        cfg.apply_str(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return fail("tolerances must be positive".into());
        }
        if !(self.v_min > 0.0 && self.v_min <= self.v_max) {
            return fail(format!("empty or invalid v range [{}, {}]", self.v_min, self.v_max));
        }
        if !(self.b_min >= 0.0 && self.b_min <= self.b_max && self.b_max < 1.0) {
            return fail(format!("empty or invalid b range [{}, {}]", self.b_min, self.b_max));
        }
        if !(self.b >= 0.0 && self.b < 1.0) {
            return fail(format!("b = {} outside [0, 1)", self.b));
        }
        if self.nv == Some(0) || self.nb == Some(0) {
            return fail("grid densities must be positive".into());
        }
        if !(self.eps_min > 0.0 && self.eps_min <= self.eps_max && self.eps_count >= 2) {
            return fail("eps range needs 0 < eps_min <= eps_max and eps_count >= 2".into());
        }
        if !(self.threshold >= 0.0) {
            return fail("threshold must be non-negative".into());
        }
        self.method()?;
        self.model()?;
        Ok(())
    }

    pub fn method(&self) -> Result<Method, ConfigError> {
        match self.method.as_str() {
            "dp" | "dopri5" => Ok(Method::DormandPrince),
            "rk4" => Ok(Method::Rk4 {
                steps_per_half: self.rk4_steps,
            }),
            m => Err(ConfigError(format!("unknown method {m:?} (expected dp or rk4)"))),
        }
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        Model::new(
            self.eps0,
            self.eps1,
            self.coupling_strength,
            self.f_exponent,
            self.g_exponent,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn settings(&self) -> Settings {
        Settings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_steps: self.max_steps,
            method: self.method().unwrap_or(Method::DormandPrince),
        }
    }

    pub fn v_range(&self, default_points: usize) -> Range {
        Range {
            min: self.v_min,
            max: self.v_max,
            points: self.nv.unwrap_or(default_points),
        }
    }

    pub fn b_range(&self, default_points: usize) -> Range {
        Range {
            min: self.b_min,
            max: self.b_max,
            points: self.nb.unwrap_or(default_points),
        }
    }

    pub fn eps_list(&self) -> Vec<f64> {
        diabatic::numeric::logspace(self.eps_min, self.eps_max, self.eps_count)
    }
}

/// Parses `NVxNB`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid {s:?} must look like 100x48"))?;
    let nv = a.trim().parse().map_err(|_| format!("bad grid size {a:?}"))?;
    let nb = b.trim().parse().map_err(|_| format!("bad grid size {b:?}"))?;
    if nv == 0 || nb == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((nv, nb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documents() {
        let mut c = RunConfig::default();
        c.apply_str("# model\nrel_tol = 1e-9\n\nformat=csv  # inline\ngrid = 20x10\n")
            .unwrap();
        assert_eq!(c.rel_tol, 1e-9);
        assert_eq!(c.format, Format::Csv);
        assert_eq!((c.nv, c.nb), (Some(20), Some(10)));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let mut c = RunConfig::default();
        assert!(c.apply_str("speed = 3").unwrap_err().0.contains("unknown config key"));
        assert!(c.apply_str("b = 0.1\nb = 0.2").unwrap_err().0.contains("duplicate"));
        assert!(c.apply_str("rel_tol").is_err());
        assert!(c.apply_str("rel_tol = fast").is_err());
    }

    #[test]
    fn every_listed_key_is_accepted() {
        for key in RunConfig::KEYS {
            let value = match key {
                "method" => "rk4",
                "format" => "csv",
                "grid" => "3x4",
                "out_dir" => "/tmp",
                "f_exponent" | "g_exponent" | "max_steps" | "rk4_steps" | "nv" | "nb" | "v_points"
                | "b_points" | "refine_evals" | "eps_count" | "threads" => "3",
                _ => "0.25",
            };
            RunConfig::default().set(key, value).unwrap();
        }
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.rel_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.v_min = 0.6;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.eps0 = 2.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.method = "euler".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("100x48").unwrap(), (100, 48));
        assert!(parse_grid("100").is_err());
        assert!(parse_grid("0x4").is_err());
    }
}
