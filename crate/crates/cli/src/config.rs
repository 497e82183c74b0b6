//! `key = value` configuration with `#` comments.
//!
//! | key | default |
//! |-----|---------|
//! | `hbar` | 1 |
//! | `fk.tau0`, `fk.growth`, `fk.max_steps`, `fk.tol`, `fk.min_tau` | 1, 2, 30, 1e-6, 0 |
//! | `fk.fermi.tau0`, `.growth`, `.max_steps`, `.tol`, `.min_tau` | 1, 2, 10, 2e-3, 1024 |
//! | `quadrature.tol`, `quadrature.window`, `quadrature.max_window` | 1e-12, 4, 512 |
//! | `regime.ratio`, `regime.weak` | 0.2, 1e-3 |

use starq_core::feynman_kac::{RegimeThresholds, Schedule};
use starq_core::moyal::QuadratureParams;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub hbar: f64,
    pub fk: Schedule,
    pub fk_fermi: Schedule,
    pub quadrature: QuadratureParams,
    pub regime: RegimeThresholds,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            fk: Schedule::bosonic(),
            fk_fermi: Schedule::fermionic(),
            quadrature: QuadratureParams::default(),
            regime: RegimeThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.msg),
            None => write!(f, "config: {}", self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

fn line_of(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false)
    })
    .map(|i| i + 1)
}

impl Config {
    /// Missing file gives the defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        match std::fs::read_to_string(path) {
            Ok(src) => Self::parse(&src),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(ConfigError { line: None, msg: format!("{}: {e}", path.display()) }),
        }
    }

    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = src.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
            ConfigError { line, msg: e.message().trim().to_string() }
        })?;
        let mut entries = Vec::new();
        flatten("", &table, &mut entries);
        let mut cfg = Config::default();
        for (key, value) in entries {
            let line = line_of(src, &key);
            let bad = |msg: String| ConfigError { line, msg };
            let num = match &value {
                toml::Value::Integer(i) => *i as f64,
                toml::Value::Float(f) => *f,
                _ => return Err(bad(format!("`{key}` must be a number"))),
            };
            let count = || -> Result<usize, ConfigError> {
                if num >= 0.0 && num.fract() == 0.0 && num <= 64.0 {
                    Ok(num as usize)
                } else {
                    Err(bad(format!("`{key}` must be an integer in 0..=64")))
                }
            };
            match key.as_str() {
                "hbar" => cfg.hbar = num,
                "fk.tau0" => cfg.fk.tau0 = num,
                "fk.growth" => cfg.fk.growth = num,
                "fk.max_steps" => cfg.fk.max_steps = count()?,
                "fk.tol" => cfg.fk.tol = num,
                "fk.min_tau" => cfg.fk.min_tau = num,
                "fk.fermi.tau0" => cfg.fk_fermi.tau0 = num,
                "fk.fermi.growth" => cfg.fk_fermi.growth = num,
                "fk.fermi.max_steps" => cfg.fk_fermi.max_steps = count()?,
                "fk.fermi.tol" => cfg.fk_fermi.tol = num,
                "fk.fermi.min_tau" => cfg.fk_fermi.min_tau = num,
                "quadrature.tol" => cfg.quadrature.tol = num,
                "quadrature.window" => cfg.quadrature.initial_window = num,
                "quadrature.max_window" => cfg.quadrature.max_window = num,
                "regime.ratio" => cfg.regime.ratio = num,
                "regime.weak" => cfg.regime.weak = num,
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
            let invalid = match key.as_str() {
                "hbar" => !(num > 0.0 && num.is_finite()),
                "quadrature.tol" | "quadrature.window" | "quadrature.max_window" | "regime.ratio" | "regime.weak" => {
                    !(num > 0.0)
                }
                _ => false,
            };
            if invalid {
                return Err(bad(format!("`{key}` must be > 0")));
            }
        }
        for (name, s) in [("fk", &cfg.fk), ("fk.fermi", &cfg.fk_fermi)] {
            s.validate().map_err(|e| ConfigError { line: None, msg: format!("{name}: {e}") })?;
        }
        Ok(cfg)
    }
}
