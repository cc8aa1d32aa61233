//! Session configuration file (TOML) for the `simulate` command.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use auctionkit::sim::{AgentKind, AgentSpec, SessionConfig};
use auctionkit::{CtrProfile, Grid, Mechanism};
use serde::Deserialize;

/// On-disk schema. Defaults mirror the experiment: GSP or VCG mechanism,
/// five CTRs (0.38, 0.29, 0.20, 0.11, 0.02), 1500 rounds, grid 1..60.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionFile {
    pub mechanism: String,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Top-down click-through rates; omitted = experiment defaults.
    pub ctrs: Option<Vec<f64>>,
    pub grid: Option<GridFile>,
    pub agents: Vec<AgentFile>,
}

fn default_rounds() -> usize {
    auctionkit::sim::EXPERIMENT_ROUNDS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub lo: u32,
    pub hi: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    /// truthful-noisy | hedge | eps-greedy | biased-overbidder | replay
    pub kind: String,
    pub value: f64,
    pub sigma: Option<f64>,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub kappa: Option<f64>,
    pub bids: Option<Vec<f64>>,
}

impl AgentFile {
    fn to_spec(&self) -> anyhow::Result<AgentSpec> {
        let kind = match self.kind.as_str() {
            "truthful-noisy" => AgentKind::TruthfulNoisy { sigma: self.sigma.unwrap_or(0.0) },
            "hedge" => AgentKind::Hedge { eta: self.eta },
            "eps-greedy" => AgentKind::EpsGreedy {
                epsilon: self
                    .epsilon
                    .ok_or_else(|| anyhow!("eps-greedy agent needs `epsilon`"))?,
            },
            "biased-overbidder" => AgentKind::BiasedOverbidder {
                kappa: self.kappa.ok_or_else(|| anyhow!("biased-overbidder needs `kappa`"))?,
                sigma: self.sigma.unwrap_or(0.0),
            },
            "replay" => AgentKind::Replay {
                bids: self.bids.clone().ok_or_else(|| anyhow!("replay agent needs `bids`"))?,
            },
            other => bail!("unknown agent kind `{other}`"),
        };
        Ok(AgentSpec { kind, value: self.value })
    }
}

/// Load and validate a session config; `seed_override` (CLI flag or the
/// `AUCTIONKIT_SEED` variable) wins over the file's seed.
pub fn load_session(path: &Path, seed_override: Option<u64>) -> anyhow::Result<SessionConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: SessionFile =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let mechanism: Mechanism =
        file.mechanism.parse().map_err(|e| anyhow!("{e}: `{}`", file.mechanism))?;
    let ctrs = match &file.ctrs {
        Some(rates) => CtrProfile::new(rates.clone()).map_err(|e| anyhow!("{e}"))?,
        None => CtrProfile::experiment_default(),
    };
    let grid = match &file.grid {
        Some(g) => Grid::new(g.lo, g.hi).map_err(|e| anyhow!("{e}"))?,
        None => Grid::default(),
    };
    let agents = file
        .agents
        .iter()
        .map(AgentFile::to_spec)
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SessionConfig {
        mechanism,
        ctrs,
        rounds: file.rounds,
        agents,
        grid,
        seed: seed_override.unwrap_or(file.seed),
    })
}
