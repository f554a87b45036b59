//! Run configuration: defaults, then a flat `key=value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use twobody_core::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    /// Hole-count oracle grid.
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Latitudes in the `F(theta)` grid of `contact-check`.
    pub f_grid: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerances: Tolerances::default(),
            grid_theta: 512,
            grid_phi: 1024,
            f_grid: 10_000,
            seed: 0,
            out: None,
            format: None,
        }
    }
}

pub const MIN_GRID: usize = 16;

impl RunConfig {
    /// Applies one `key=value` assignment. Tolerances are addressed by name,
    /// optionally prefixed with `tol.`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = || format!("invalid value for {key}: {value:?}");
        let grid = |v: &str| -> Result<usize, String> {
            let n: usize = v.parse().map_err(|_| bad())?;
            if n < MIN_GRID {
                return Err(format!("{key} = {n} must be >= {MIN_GRID}"));
            }
            Ok(n)
        };
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => {
                self.format = Some(match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad()),
                })
            }
            "grid_theta" => self.grid_theta = grid(value)?,
            "grid_phi" => self.grid_phi = grid(value)?,
            "f_grid" => self.f_grid = grid(value)?,
            _ => {
                let name = key.strip_prefix("tol.").unwrap_or(key);
                let v: f64 = value.parse().map_err(|_| bad())?;
                if !Tolerances::NAMES.contains(&name) {
                    return Err(format!("unknown configuration key {key:?}"));
                }
                if !self.tolerances.set(name, v) {
                    return Err(format!("tolerance {name} = {value} must be finite and > 0"));
                }
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines. Blank lines and lines starting with `#`
    /// are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            self.set(k.trim(), v.trim()).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.apply_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nseed = 7\n\ntol.level_set=1e-8\nrank_relative = 1e-10\ngrid_theta=128\nformat=json\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.tolerances.level_set, 1e-8);
        assert_eq!(c.tolerances.rank_relative, 1e-10);
        assert_eq!(c.grid_theta, 128);
        assert_eq!(c.format, Some(Format::Json));
    }

    #[test]
    fn rejects_bad_entries() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("seed").is_err());
        assert!(c.apply_text("nonsense=1").is_err());
        assert!(c.apply_text("level_set=0").is_err());
        assert!(c.apply_text("level_set=-1").is_err());
        assert!(c.apply_text("grid_phi=8").is_err());
        assert!(c.apply_text("format=xml").is_err());
        assert_eq!(c, RunConfig::default());
    }
}
