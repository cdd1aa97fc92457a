use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use fsladder::ladder::{LcParams, MAX_LEVEL};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bail!("format must be csv or json, got {other:?}"),
        }
    }
}

/// Flags shared by every command. Each may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long = "L", global = true)]
    pub inductance: Option<f64>,
    #[arg(long = "C", global = true)]
    pub capacitance: Option<f64>,
    /// Shorthand for omega = sqrt(t / (2 L C)).
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub level: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub quick: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: LcParams,
    pub eps: Vec<f64>,
    pub level: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tol: f64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub quick: bool,
}

fn read_file(path: &Path) -> Result<Common> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut c = Common::default();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key = value", path.display(), k + 1))?;
        let value = value.trim();
        let ctx = || format!("{}:{}: bad value for {}", path.display(), k + 1, key.trim());
        match key.trim() {
            "omega" => c.omega = Some(value.parse().with_context(ctx)?),
            "L" => c.inductance = Some(value.parse().with_context(ctx)?),
            "C" => c.capacitance = Some(value.parse().with_context(ctx)?),
            "t" => c.t = Some(value.parse().with_context(ctx)?),
            "eps" => {
                let list = value
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .with_context(ctx)?;
                c.eps = Some(list);
            }
            "level" => c.level = Some(value.parse().with_context(ctx)?),
            "alpha" => c.alpha = Some(value.parse().with_context(ctx)?),
            "seed" => c.seed = Some(value.parse().with_context(ctx)?),
            "tol" => c.tol = Some(value.parse().with_context(ctx)?),
            "format" => c.format = Some(value.parse()?),
            "out" => c.out = Some(PathBuf::from(value)),
            "quick" => c.quick = value.parse().with_context(ctx)?,
            other => bail!("{}:{}: unknown key {other:?}", path.display(), k + 1),
        }
    }
    Ok(c)
}

impl Common {
    /// Merges the config file under the flags and applies defaults.
    pub fn resolve(&self, default_level: usize) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => read_file(p)?,
            None => Common::default(),
        };
        let inductance = self.inductance.or(file.inductance).unwrap_or(1.0);
        let capacitance = self.capacitance.or(file.capacitance).unwrap_or(1.0);
        let omega = self
            .omega
            .or(if self.t.is_some() { None } else { file.omega });
        let t = self.t.or(if self.omega.is_some() { None } else { file.t });
        let params = match (omega, t) {
            (Some(_), Some(_)) => bail!("give either --omega or --t, not both"),
            (Some(w), None) => LcParams::new(w, inductance, capacitance)?,
            (None, Some(t)) => LcParams::from_t(t, inductance, capacitance)?,
            (None, None) => LcParams::from_t(8.0, inductance, capacitance)?,
        };
        let level = self.level.or(file.level).unwrap_or(default_level);
        if level > MAX_LEVEL {
            bail!("level {level} exceeds the maximum {MAX_LEVEL}");
        }
        let eps = self
            .eps
            .clone()
            .or(file.eps)
            .unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
        if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            bail!("every epsilon must be positive");
        }
        let tol = self.tol.or(file.tol).unwrap_or(1e-7);
        if !(tol > 0.0 && tol.is_finite()) {
            bail!("tolerance must be positive");
        }
        Ok(RunConfig {
            params,
            eps,
            level,
            alpha: self.alpha.or(file.alpha).unwrap_or(0.5),
            seed: self.seed.or(file.seed).unwrap_or(42),
            tol,
            format: self.format.or(file.format),
            out: self.out.clone().or(file.out),
            quick: self.quick || file.quick,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nt = 20\nseed = 7\nlevel = 2\nformat = csv").unwrap();
        let c = Common {
            config: Some(f.path().to_path_buf()),
            seed: Some(9),
            ..Default::default()
        };
        let r = c.resolve(3).unwrap();
        assert!((r.params.t() - 20.0).abs() < 1e-12);
        assert_eq!(r.seed, 9);
        assert_eq!(r.level, 2);
        assert_eq!(r.format, Some(Format::Csv));
    }

    #[test]
    fn omega_flag_replaces_file_t() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t = 20").unwrap();
        let c = Common {
            config: Some(f.path().to_path_buf()),
            omega: Some(2.0),
            ..Default::default()
        };
        assert!((c.resolve(3).unwrap().params.t() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let deep = Common {
            level: Some(9),
            ..Default::default()
        };
        assert!(deep.resolve(3).is_err());
        let both = Common {
            omega: Some(1.0),
            t: Some(2.0),
            ..Default::default()
        };
        assert!(both.resolve(3).is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "colour = blue").unwrap();
        let unknown = Common {
            config: Some(f.path().to_path_buf()),
            ..Default::default()
        };
        assert!(unknown.resolve(3).is_err());
    }
}
