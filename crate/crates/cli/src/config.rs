//! Run configuration: a flat `key = value` file overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dhcsp_core::codegen::TimeUnit;
use dhcsp_core::pipeline::PipelineConfig;

/// Keys accepted in configuration files.
pub const KEYS: &[&str] = &[
    "source",
    "eps",
    "eps_dde",
    "time_bound",
    "sigma",
    "dt_ref",
    "seed",
    "out",
    "time_unit",
    "state_budget",
    "max_halvings",
    "robustness_runs",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub pipeline: PipelineConfig,
}

impl RunConfig {
    /// Parses a configuration file. Paths in it are relative to the file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
        cfg.source = cfg.source.map(|p| base.join(p));
        cfg.out = cfg.out.map(|p| base.join(p));
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.pipeline;
        match key {
            "source" => self.source = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "eps" => p.eps = num(key, value)?,
            "eps_dde" => p.eps_dde = Some(num(key, value)?),
            "time_bound" => p.t_end = num(key, value)?,
            "sigma" => p.sigma = num(key, value)?,
            "dt_ref" => p.dt_ref = num(key, value)?,
            "seed" => p.seed = num(key, value)?,
            "state_budget" => p.state_budget = num(key, value)?,
            "max_halvings" => p.max_halvings = num(key, value)?,
            "robustness_runs" => p.robustness_runs = num(key, value)?,
            "time_unit" => p.time_unit = value.parse::<TimeUnit>()?,
            _ => bail!("unknown key {key:?}; expected one of {}", KEYS.join(", ")),
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}
