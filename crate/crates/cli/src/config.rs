//! Run configuration: evolution + simulator + backend/endpoint settings,
//! loaded from a flat `key = value` file and overridable from the command
//! line. The effective configuration is written verbatim into every run
//! directory before the run starts.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result, bail};
use policyevo_core::evolve::EvolutionConfig;
use policyevo_core::sim::SimConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Mock,
    Live,
}

impl BackendChoice {
    pub fn label(self) -> &'static str {
        match self {
            BackendChoice::Mock => "mock",
            BackendChoice::Live => "live",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "mock" => Some(BackendChoice::Mock),
            "live" => Some(BackendChoice::Live),
            _ => None,
        }
    }
}

/// Where and how to reach a chat-completion endpoint. The credential is
/// always read from the named environment variable, never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointConfig {
    pub base_url: String,
    pub path: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "https://api.openai.com".to_string(),
            path: "/v1/chat/completions".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            timeout_secs: 60,
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

impl EndpointConfig {
    pub fn url(&self) -> String {
        format!("{}{}", self.base_url.trim_end_matches('/'), self.path)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub evolution: EvolutionConfig,
    pub sim: SimConfig,
    pub backend: BackendChoice,
    pub endpoint: EndpointConfig,
    pub out_dir: PathBuf,
    /// Batch seeds; each runs independently in its own subdirectory.
    pub seeds: Vec<u64>,
    /// Write a code-and-rationale transcript of every backend call.
    pub transcript: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            evolution: EvolutionConfig::default(),
            sim: SimConfig::default(),
            backend: BackendChoice::Mock,
            endpoint: EndpointConfig::default(),
            out_dir: PathBuf::from("runs/run"),
            seeds: Vec::new(),
            transcript: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut config = RunConfig::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`", path.display(), line_no + 1);
            };
            config
                .set_key(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), line_no + 1))?;
        }
        Ok(config)
    }

    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        if key.starts_with("evo.") {
            self.evolution.set_key(key, value).map_err(anyhow::Error::msg)?;
            return Ok(());
        }
        if key.starts_with("sim.") {
            self.sim.set_key(key, value).map_err(|e| anyhow::Error::msg(e.to_string()))?;
            return Ok(());
        }
        match key {
            "backend" => {
                self.backend = BackendChoice::from_label(value)
                    .ok_or_else(|| anyhow::anyhow!("unknown backend `{value}` (mock|live)"))?;
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seeds" => {
                self.seeds = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<u64>().map_err(|_| anyhow::anyhow!("bad seed `{s}`")))
                    .collect::<Result<Vec<u64>>>()?;
            }
            "transcript" => {
                self.transcript =
                    value.parse().map_err(|_| anyhow::anyhow!("bad bool `{value}`"))?;
            }
            "endpoint.base_url" => self.endpoint.base_url = value.to_string(),
            "endpoint.path" => self.endpoint.path = value.to_string(),
            "endpoint.api_key_env" => self.endpoint.api_key_env = value.to_string(),
            "endpoint.timeout_secs" => {
                self.endpoint.timeout_secs =
                    value.parse().with_context(|| format!("key `{key}`"))?;
            }
            "endpoint.max_attempts" => {
                self.endpoint.max_attempts =
                    value.parse().with_context(|| format!("key `{key}`"))?;
            }
            "endpoint.backoff_ms" => {
                self.endpoint.backoff_ms =
                    value.parse().with_context(|| format!("key `{key}`"))?;
            }
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// The flat text form written into run directories. Contains the
    /// credential variable's NAME, never its value. Invocation-level
    /// settings (out_dir, seed batch) are intentionally absent: a run
    /// directory describes itself wherever it lives.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("backend={}\n", self.backend.label()));
        out.push_str(&format!("transcript={}\n", self.transcript));
        out.push_str(&format!("endpoint.base_url={}\n", self.endpoint.base_url));
        out.push_str(&format!("endpoint.path={}\n", self.endpoint.path));
        out.push_str(&format!("endpoint.api_key_env={}\n", self.endpoint.api_key_env));
        out.push_str(&format!("endpoint.timeout_secs={}\n", self.endpoint.timeout_secs));
        out.push_str(&format!("endpoint.max_attempts={}\n", self.endpoint.max_attempts));
        out.push_str(&format!("endpoint.backoff_ms={}\n", self.endpoint.backoff_ms));
        for (k, v) in self.evolution.to_key_values() {
            out.push_str(&format!("{k}={v}\n"));
        }
        for (k, v) in self.sim.to_key_values() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }
}
