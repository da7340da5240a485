//! Run configuration: defaults, then a TOML file, then `RADPRAG_*`
//! environment variables. Command-line flags are applied last by the CLI.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Averaging, PositiveFive};
use crate::stats::DEFAULT_SHIFT_THRESHOLD;

pub const ENV_PREFIX: &str = "RADPRAG_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: Option<String>,
    pub token: Option<String>,
    pub timeout_secs: u64,
    /// Retries for rewriting requests; generation requests are never retried.
    pub retries: u32,
    /// Maximum concurrent requests.
    pub in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            token: None,
            timeout_secs: 30,
            retries: 2,
            in_flight: 4,
        }
    }
}

impl RemoteConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn require_endpoint(&self, what: &str) -> Result<&str> {
        self.endpoint
            .as_deref()
            .ok_or_else(|| Error::Config(format!("no {what} endpoint configured")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub lexicon: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub shift_threshold: f64,
    pub f1_averaging: Averaging,
    pub positive_five: PositiveFive,
    pub jobs: usize,
    /// Recorded only; every operation is deterministic.
    pub seed: Option<u64>,
    pub clean: RemoteConfig,
    pub generate: RemoteConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            lexicon: None,
            catalog: None,
            out_dir: None,
            shift_threshold: DEFAULT_SHIFT_THRESHOLD,
            f1_averaging: Averaging::Macro,
            positive_five: PositiveFive::Fixed,
            jobs: 4,
            seed: None,
            clean: RemoteConfig::default(),
            generate: RemoteConfig::default(),
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| Error::Config(format!("{ENV_PREFIX}{name}={raw:?}: {e}")))
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Overrides fields from variables named `RADPRAG_<NAME>`, looked up via `var`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        let get = |name: &str| var(&format!("{ENV_PREFIX}{name}")).filter(|v| !v.is_empty());
        if let Some(v) = get("LEXICON") {
            self.lexicon = Some(v.into());
        }
        if let Some(v) = get("CATALOG") {
            self.catalog = Some(v.into());
        }
        if let Some(v) = get("OUT_DIR") {
            self.out_dir = Some(v.into());
        }
        if let Some(v) = get("SHIFT_THRESHOLD") {
            self.shift_threshold = parse_env("SHIFT_THRESHOLD", &v)?;
        }
        if let Some(v) = get("F1_AVERAGING") {
            self.f1_averaging = parse_env("F1_AVERAGING", &v)?;
        }
        if let Some(v) = get("POSITIVE_FIVE") {
            self.positive_five = parse_env("POSITIVE_FIVE", &v)?;
        }
        if let Some(v) = get("JOBS") {
            self.jobs = parse_env("JOBS", &v)?;
        }
        for (prefix, remote) in [("CLEAN", &mut self.clean), ("GEN", &mut self.generate)] {
            if let Some(v) = get(&format!("{prefix}_ENDPOINT")) {
                remote.endpoint = Some(v);
            }
            if let Some(v) = get(&format!("{prefix}_TOKEN")) {
                remote.token = Some(v);
            }
            if let Some(v) = get(&format!("{prefix}_TIMEOUT_SECS")) {
                remote.timeout_secs = parse_env(&format!("{prefix}_TIMEOUT_SECS"), &v)?;
            }
            if let Some(v) = get(&format!("{prefix}_RETRIES")) {
                remote.retries = parse_env(&format!("{prefix}_RETRIES"), &v)?;
            }
            if let Some(v) = get(&format!("{prefix}_IN_FLIGHT")) {
                remote.in_flight = parse_env(&format!("{prefix}_IN_FLIGHT"), &v)?;
            }
        }
        Ok(())
    }

    /// Defaults, then `file` when given, then the process environment.
    pub fn resolve(file: Option<&Path>) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shift_threshold.is_finite() && self.shift_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "shift_threshold must be >= 0, got {}",
                self.shift_threshold
            )));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        for (name, r) in [("clean", &self.clean), ("generate", &self.generate)] {
            if r.in_flight == 0 {
                return Err(Error::Config(format!("{name}.in_flight must be at least 1")));
            }
        }
        Ok(())
    }

    /// Relative paths are placed under `out_dir` when one is configured.
    pub fn output_path(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// JSON with auth tokens replaced by a placeholder.
    pub fn redacted_json(&self) -> String {
        let mut c = self.clone();
        for r in [&mut c.clean, &mut c.generate] {
            if r.token.is_some() {
                r.token = Some("<redacted>".into());
            }
        }
        serde_json::to_string_pretty(&c).expect("config serializes") + "\n"
    }
}
