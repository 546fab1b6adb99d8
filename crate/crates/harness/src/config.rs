//! Flat INI-style experiment configuration.
//!
//! One experiment per file: a `[section]` header opens a section, `key =
//! value` lines fill it, `#` or `;` start a comment line. Every key is
//! checked against the experiment's schema, so a typo fails loudly instead
//! of silently falling back to a default. Command-line overrides use the
//! dotted form `section.key=value` and must also name schema keys.

use crate::error::{HarnessError, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    KdvSweep,
    KpiiSweep,
    EpResidual,
    ZkIdentities,
    EquilibriumRegression,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::KdvSweep => "kdv_sweep",
            Self::KpiiSweep => "kpii_sweep",
            Self::EpResidual => "ep_residual",
            Self::ZkIdentities => "zk_identities",
            Self::EquilibriumRegression => "equilibrium_regression",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "kdv_sweep" => Self::KdvSweep,
            "kpii_sweep" => Self::KpiiSweep,
            "ep_residual" => Self::EpResidual,
            "zk_identities" => Self::ZkIdentities,
            "equilibrium_regression" => Self::EquilibriumRegression,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown experiment kind '{other}'"
                )))
            }
        })
    }

    pub fn all() -> [Self; 5] {
        [
            Self::KdvSweep,
            Self::KpiiSweep,
            Self::EpResidual,
            Self::ZkIdentities,
            Self::EquilibriumRegression,
        ]
    }

    /// Experiment-specific dotted keys; `experiment.kind`, `experiment.out`
    /// and `experiment.seed` are accepted everywhere.
    fn schema(&self) -> &'static [&'static str] {
        match self {
            Self::KdvSweep => &[
                "grid.nx",
                "grid.nv",
                "profile.family",
                "profile.amplitude",
                "profile.wavenumber",
                "sweep.eps_list",
                "sweep.theta0",
                "sweep.t_end",
                "sweep.c_cfl",
                "sweep.law",
                "sweep.stride",
                "sweep.dt_robustness",
            ],
            Self::KpiiSweep => &[
                "grid.nx1",
                "grid.nx2",
                "grid.nv1",
                "grid.nv2",
                "profile.family",
                "profile.amplitude",
                "profile.wavenumber",
                "profile.transverse_amplitude",
                "sweep.eps_list",
                "sweep.theta0",
                "sweep.t_end",
                "sweep.c_cfl",
                "sweep.law",
                "sweep.stride",
                "sweep.dt_robustness",
            ],
            Self::EpResidual => &[
                "grid.nx",
                "profile.family",
                "profile.amplitude",
                "profile.wavenumber",
                "study.eps_list",
                "study.include_rho2",
            ],
            Self::ZkIdentities => &[
                "grid.n",
                "profile.amplitude",
                "study.t_end",
                "study.dt",
                "study.samples",
                "study.corruption",
                "study.threshold",
            ],
            Self::EquilibriumRegression => &[
                "grid.nx",
                "grid.nv",
                "sweep.eps_list",
                "sweep.theta0",
                "sweep.t_end",
                "sweep.c_cfl",
                "sweep.law",
                "sweep.stride",
            ],
        }
    }

    fn key_allowed(&self, key: &str) -> bool {
        matches!(key, "experiment.kind" | "experiment.out" | "experiment.seed")
            || self.schema().contains(&key)
    }
}

/// A parsed, schema-checked configuration. Values stay as strings; typed
/// accessors convert on demand and name the key in any error.
#[derive(Clone, Debug)]
pub struct Config {
    pub kind: ExperimentKind,
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parse INI text. Unknown sections or keys are rejected by name.
    pub fn parse(text: &str) -> Result<Config> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(HarnessError::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            if section.is_empty() {
                return Err(HarnessError::Config(format!(
                    "line {}: key outside any [section]",
                    lineno + 1
                )));
            }
            let key = format!("{section}.{}", k.trim());
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(HarnessError::Config(format!("duplicate key '{key}'")));
            }
        }
        let kind_str = values
            .get("experiment.kind")
            .ok_or_else(|| HarnessError::Config("missing experiment.kind".into()))?;
        let kind = ExperimentKind::parse(kind_str)?;
        for key in values.keys() {
            if !kind.key_allowed(key) {
                return Err(HarnessError::Config(format!(
                    "unknown key '{key}' for experiment {}",
                    kind.name()
                )));
            }
        }
        Ok(Config { kind, values })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Config> {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            HarnessError::Config(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Config::parse(&text)
    }

    /// Apply `section.key=value` overrides; keys must be in the schema.
    pub fn apply_overrides(&mut self, overrides: &[(String, String)]) -> Result<()> {
        for (key, value) in overrides {
            if !self.kind.key_allowed(key) {
                return Err(HarnessError::Config(format!(
                    "override names unknown key '{key}' for experiment {}",
                    self.kind.name()
                )));
            }
            if key == "experiment.kind" {
                return Err(HarnessError::Config(
                    "experiment.kind cannot be overridden".into(),
                ));
            }
            self.values.insert(key.clone(), value.clone());
        }
        Ok(())
    }

    /// Canonical plan text: sorted `key = value` lines. Identical configs
    /// serialize identically, which `--dry-run` relies on.
    pub fn plan(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment {}", self.kind.name());
        for (k, v) in &self.values {
            let _ = writeln!(out, "  {k} = {v}");
        }
        out
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| HarnessError::Config(format!("missing key '{key}'")))
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    pub fn get_str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.raw(key)?
            .parse()
            .map_err(|_| HarnessError::Config(format!("key '{key}' is not a number")))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.raw(key)?
            .parse()
            .map_err(|_| HarnessError::Config(format!("key '{key}' is not an integer")))
    }

    pub fn get_u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| HarnessError::Config(format!("key '{key}' is not an integer"))),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.raw(key)? {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(HarnessError::Config(format!(
                "key '{key}' is not a boolean (got '{other}')"
            ))),
        }
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("key '{key}': bad number '{s}'")))
            })
            .collect()
    }

    /// The sweep's ε list: strictly decreasing, every value in (0, 1).
    pub fn eps_list(&self, key: &str) -> Result<Vec<f64>> {
        let eps = self.get_f64_list(key)?;
        if eps.is_empty() {
            return Err(HarnessError::Config(format!("key '{key}' is empty")));
        }
        for pair in eps.windows(2) {
            if pair[1] >= pair[0] {
                return Err(HarnessError::Config(format!(
                    "key '{key}' must be strictly decreasing"
                )));
            }
        }
        if eps.iter().any(|&e| e <= 0.0 || e >= 1.0) {
            return Err(HarnessError::Config(format!(
                "key '{key}' values must lie in (0, 1)"
            )));
        }
        Ok(eps)
    }
}

/// Parse a `section.key=value` command-line override token.
pub fn parse_override(token: &str) -> Result<(String, String)> {
    let Some((key, value)) = token.split_once('=') else {
        return Err(HarnessError::Config(format!(
            "override '{token}' is not of the form section.key=value"
        )));
    };
    if !key.contains('.') {
        return Err(HarnessError::Config(format!(
            "override key '{key}' must be dotted (section.key)"
        )));
    }
    Ok((key.trim().to_string(), value.trim().to_string()))
}
