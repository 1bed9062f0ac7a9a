//! Run configuration: defaults, overlaid by a key=value file, overlaid by
//! command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "SIMPLEX_SECTIONS_CONFIG";

/// Tolerances that may be overridden, with the library defaults.
pub const TOLERANCE_KEYS: [(&str, f64); 3] = [
    ("gap_tol", simplex_sections::section::GAP_TOL),
    ("match_tol", simplex_sections::search::MATCH_TOL),
    ("dir_tol", simplex_sections::search::DIR_TOL),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_format: Format,
    pub output_path: Option<PathBuf>,
    pub parallelism: usize,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            seed: 0,
            tolerances: BTreeMap::new(),
            output_format: Format::Table,
            output_path: None,
            parallelism: std::thread::available_parallelism().map_or(1, |p| p.get()),
        }
    }
}

impl CliConfig {
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or_else(|| {
            TOLERANCE_KEYS
                .iter()
                .find(|(k, _)| *k == key)
                .map(|&(_, v)| v)
                .unwrap_or_else(|| panic!("unknown tolerance {key}"))
        })
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are ignored;
    /// tolerance keys may carry a `tolerance.` prefix.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", lineno + 1);
            };
            self.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        self.apply_file_contents(&text)
            .with_context(|| format!("in config {}", path.display()))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = value.parse().context("seed must be a non-negative integer")?,
            "format" | "output_format" => {
                self.output_format = Format::from_str(value, true)
                    .map_err(|_| anyhow::anyhow!("unknown format {value:?}"))?
            }
            "output" | "output_path" => {
                self.output_path = (!value.is_empty()).then(|| PathBuf::from(value))
            }
            "parallelism" => {
                let p: usize = value.parse().context("parallelism must be an integer")?;
                if p == 0 {
                    bail!("parallelism must be at least 1");
                }
                self.parallelism = p;
            }
            _ => {
                let name = key.strip_prefix("tolerance.").unwrap_or(key);
                if !TOLERANCE_KEYS.iter().any(|(k, _)| *k == name) {
                    bail!("unknown config key {key:?}");
                }
                let v: f64 = value.parse().with_context(|| format!("{name} must be a number"))?;
                if !(v.is_finite() && v >= 0.0) {
                    bail!("{name} must be finite and non-negative");
                }
                self.tolerances.insert(name.to_string(), v);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = CliConfig::default();
        c.apply_file_contents("# comment\nseed = 7\nformat = csv\n\ntolerance.match_tol = 1e-5\ndir_tol=2e-4\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.output_format, Format::Csv);
        assert_eq!(c.tolerance("match_tol"), 1e-5);
        assert_eq!(c.tolerance("dir_tol"), 2e-4);
        assert_eq!(c.tolerance("gap_tol"), simplex_sections::section::GAP_TOL);
    }

    #[test]
    fn bad_lines_are_rejected() {
        for text in ["seed 3", "colour = red", "parallelism = 0", "match_tol = -1", "format = xml"] {
            assert!(CliConfig::default().apply_file_contents(text).is_err(), "{text}");
        }
    }
}
