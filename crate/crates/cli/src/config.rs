//! Run configuration and its two on-disk formats.
//!
//! The native format is a sectioned `key = value` file (below); JSON with
//! the same shape is accepted as an alternative and detected by content or
//! a `.json` extension.  Writing then re-reading a config reproduces it
//! exactly: floats are printed in Rust's shortest round-trip form.
//!
//! ```text
//! [params]
//! mu = 1              # similarity exponent (> 1/2)
//! alpha = 0.5         # Hölder weight exponent
//! m = 32              # symmetry order
//! series_cap = 48     # interaction series term budget
//! tol_inner = 1e-10   # local inversion step tolerance
//! tol_outer = 1e-9    # outer fixed-point step tolerance
//! tol_quad = 1e-9     # quadrature / series tail tolerance
//! max_iter_inner = 60
//! max_iter_outer = 40
//! ball_radius = 3     # trust region of the local inversion
//!
//! [grid]
//! theta_min = 1e-4
//! theta_max = 10000
//! n_nodes = 2048
//! head_exponent = 0   # off-grid continuation exponents
//! tail_exponent = -1
//!
//! [outputs]
//! out_dir = out
//! format = json       # csv | svg | json
//!
//! [checks]
//! suite = all
//! seed = 0            # seeds the randomized check families
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spiralsheet::Params;

/// Everything one invocation needs: solver parameters plus artifact
/// plumbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub params: Params,
    pub outputs: Outputs,
    pub checks: Checks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub out_dir: PathBuf,
    /// Export format: `csv`, `svg`, or `json`.
    pub format: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Checks {
    pub suite: String,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: Params::default(),
            outputs: Outputs::default(),
            checks: Checks::default(),
        }
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            out_dir: PathBuf::from("out"),
            format: "json".into(),
        }
    }
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            suite: "all".into(),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Read a config file in either format, starting from defaults.
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let looks_like_json = path.extension().is_some_and(|e| e == "json")
            || text.trim_start().starts_with('{');
        let config = if looks_like_json {
            serde_json::from_str(&text).map_err(|e| format!("invalid JSON config: {e}"))?
        } else {
            parse_keyvalue(&text)?
        };
        validate(&config)?;
        Ok(config)
    }

    /// Serialize in the native sectioned format.
    pub fn to_keyvalue(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let g = &p.grid;
        writeln!(s, "[params]").unwrap();
        writeln!(s, "mu = {}", p.mu).unwrap();
        writeln!(s, "alpha = {}", p.alpha).unwrap();
        writeln!(s, "m = {}", p.m).unwrap();
        writeln!(s, "series_cap = {}", p.series_cap).unwrap();
        writeln!(s, "tol_inner = {}", p.tol_inner).unwrap();
        writeln!(s, "tol_outer = {}", p.tol_outer).unwrap();
        writeln!(s, "tol_quad = {}", p.tol_quad).unwrap();
        writeln!(s, "max_iter_inner = {}", p.max_iter_inner).unwrap();
        writeln!(s, "max_iter_outer = {}", p.max_iter_outer).unwrap();
        writeln!(s, "ball_radius = {}", p.ball_radius).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[grid]").unwrap();
        writeln!(s, "theta_min = {}", g.theta_min).unwrap();
        writeln!(s, "theta_max = {}", g.theta_max).unwrap();
        writeln!(s, "n_nodes = {}", g.n_nodes).unwrap();
        writeln!(s, "head_exponent = {}", g.head_exponent).unwrap();
        writeln!(s, "tail_exponent = {}", g.tail_exponent).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[outputs]").unwrap();
        writeln!(s, "out_dir = {}", self.outputs.out_dir.display()).unwrap();
        writeln!(s, "format = {}", self.outputs.format).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[checks]").unwrap();
        writeln!(s, "suite = {}", self.checks.suite).unwrap();
        writeln!(s, "seed = {}", self.checks.seed).unwrap();
        s
    }
}

fn validate(config: &RunConfig) -> Result<(), String> {
    config
        .params
        .validate()
        .map_err(|e| format!("invalid value under [params]/[grid]: {e}"))?;
    match config.outputs.format.as_str() {
        "csv" | "svg" | "json" => Ok(()),
        other => Err(format!(
            "invalid value for key `outputs.format`: `{other}` (csv|svg|json)"
        )),
    }
}

/// Parse the sectioned `key = value` format.  Unknown sections or keys are
/// errors that name the offender; omitted keys keep their defaults.
pub fn parse_keyvalue(text: &str) -> Result<RunConfig, String> {
    let mut config = RunConfig::default();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| format!("line {}: unterminated section header", idx + 1))?;
            if !matches!(name, "params" | "grid" | "outputs" | "checks") {
                return Err(format!("line {}: unknown section `[{name}]`", idx + 1));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        set_key(&mut config, &section, key, value)
            .map_err(|e| format!("line {}: {e}", idx + 1))?;
    }
    Ok(config)
}

fn set_key(config: &mut RunConfig, section: &str, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T, String> {
        value
            .parse()
            .map_err(|_| format!("invalid value for key `{section}.{key}`: `{value}`"))
    }
    let p = &mut config.params;
    match (section, key) {
        ("params", "mu") => p.mu = num(section, key, value)?,
        ("params", "alpha") => p.alpha = num(section, key, value)?,
        ("params", "m") => p.m = num(section, key, value)?,
        ("params", "series_cap") => p.series_cap = num(section, key, value)?,
        ("params", "tol_inner") => p.tol_inner = num(section, key, value)?,
        ("params", "tol_outer") => p.tol_outer = num(section, key, value)?,
        ("params", "tol_quad") => p.tol_quad = num(section, key, value)?,
        ("params", "max_iter_inner") => p.max_iter_inner = num(section, key, value)?,
        ("params", "max_iter_outer") => p.max_iter_outer = num(section, key, value)?,
        ("params", "ball_radius") => p.ball_radius = num(section, key, value)?,
        ("grid", "theta_min") => p.grid.theta_min = num(section, key, value)?,
        ("grid", "theta_max") => p.grid.theta_max = num(section, key, value)?,
        ("grid", "n_nodes") => p.grid.n_nodes = num(section, key, value)?,
        ("grid", "head_exponent") => p.grid.head_exponent = num(section, key, value)?,
        ("grid", "tail_exponent") => p.grid.tail_exponent = num(section, key, value)?,
        ("outputs", "out_dir") => config.outputs.out_dir = PathBuf::from(value),
        ("outputs", "format") => config.outputs.format = value.to_string(),
        ("checks", "suite") => config.checks.suite = value.to_string(),
        ("checks", "seed") => config.checks.seed = num(section, key, value)?,
        _ => {
            let place = if section.is_empty() {
                format!("`{key}` before any section")
            } else {
                format!("`{section}.{key}`")
            };
            return Err(format!("unknown key {place}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyvalue_round_trip_is_lossless() {
        let mut config = RunConfig::default();
        config.params.mu = 0.75;
        config.params.tol_outer = 3.5e-11;
        config.params.m = 17;
        config.params.grid.theta_min = 2.5e-5;
        config.outputs.out_dir = PathBuf::from("artifacts/run1");
        config.outputs.format = "svg".into();
        config.checks.seed = 42;
        let text = config.to_keyvalue();
        let back = parse_keyvalue(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let mut config = RunConfig::default();
        config.params.alpha = 0.625;
        config.params.tol_quad = 7e-13;
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_keyvalue("[params]\nmoo = 1\n").unwrap_err();
        assert!(err.contains("params.moo"), "got: {err}");
        let err = parse_keyvalue("[params]\nmu = banana\n").unwrap_err();
        assert!(err.contains("params.mu"), "got: {err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# top note\n\n[params]\nm = 12  # twelve branches\n";
        let config = parse_keyvalue(text).unwrap();
        assert_eq!(config.params.m, 12);
    }
}
