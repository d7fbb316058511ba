//! Scenario files: TOML documents naming one experiment and its inputs.
//!
//! ```toml
//! experiment = "grow"          # entangle | grow | run-pattern | prune | budget | verify
//! seed = 7
//! trials = 100
//!
//! [hardware.link]
//! p_success = 0.5
//! attempt_time = 1e-9
//!
//! [strategy]
//! kind = "branch"              # or "broker" with `nodes` and `edges`
//! steps = 10000
//! ```
//!
//! Relative file paths under `[target]` resolve against the scenario's
//! directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use mbqc_core::budget::{CavityParams, SpinTimes};
use mbqc_core::erasure::ApparatusParams;
use mbqc_core::growth::LinkModel;
use mbqc_core::mbqc::Execution;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Entangle,
    Grow,
    RunPattern,
    Prune,
    Budget,
    Verify,
}

impl Experiment {
    pub fn default_trials(self) -> usize {
        match self {
            Experiment::Entangle => 1000,
            Experiment::Grow => 10,
            Experiment::RunPattern => 100,
            Experiment::Verify => 20,
            Experiment::Prune | Experiment::Budget => 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hardware {
    pub apparatus: Option<ApparatusParams>,
    pub link: Option<LinkModel>,
    pub spin: Option<SpinTimes>,
    pub cavity: Option<CavityParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Strategy {
    Branch {
        steps: usize,
        initial_length: Option<usize>,
        trace_every: Option<usize>,
    },
    /// `nodes` broker nodes. Without `target.edges`, `edges` brokered edges
    /// are made in ring order.
    Broker {
        nodes: usize,
        #[serde(default)]
        edges: usize,
    },
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Branch { steps: 1000, initial_length: None, trace_every: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    #[default]
    Plus,
    Zero,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    /// Circuit JSON for `run-pattern`.
    pub circuit: Option<PathBuf>,
    /// Pattern JSON for `run-pattern`.
    pub pattern: Option<PathBuf>,
    #[serde(default)]
    pub input: InputKind,
    #[serde(default)]
    pub mode: Execution,
    /// Cluster shape for `prune`.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    #[serde(default)]
    pub keep: Vec<u32>,
    /// Target graph: kept-vertex edges for `prune`, or broker node pairs
    /// for `grow` (default: a ring).
    #[serde(default)]
    pub edges: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Nv,
    Qd,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub preset: Option<Preset>,
    pub attempt_time: Option<f64>,
    pub client_t2: Option<f64>,
    pub fault_budget: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Suite names; empty runs all.
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub inject_failure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    pub trials: Option<usize>,
    #[serde(default)]
    pub hardware: Hardware,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub target: Target,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default)]
    pub verify: VerifySection,
}

impl Scenario {
    pub fn new(experiment: Experiment) -> Self {
        Scenario {
            experiment,
            seed: 0,
            trials: None,
            hardware: Hardware::default(),
            strategy: Strategy::default(),
            target: Target::default(),
            budget: BudgetSection::default(),
            verify: VerifySection::default(),
        }
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(self.experiment.default_trials())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).context("invalid scenario")?;
        Ok(scenario)
    }

    /// Reads a scenario file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read scenario {}", path.display()))?;
        let mut scenario = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut scenario.target.circuit, &mut scenario.target.pattern].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials() > 0, "trials must be positive");
        for p in [&self.target.circuit, &self.target.pattern].into_iter().flatten() {
            ensure!(p.is_file(), "referenced file {} does not exist", p.display());
        }
        match (self.experiment, &self.strategy) {
            (Experiment::Grow, Strategy::Branch { steps, .. }) => ensure!(*steps > 0, "strategy.steps must be positive"),
            (Experiment::Grow, Strategy::Broker { nodes, edges }) => {
                ensure!(*nodes >= 2, "strategy.nodes must be at least 2");
                ensure!(*edges > 0 || !self.target.edges.is_empty(), "strategy.edges must be positive");
                for &(a, b) in &self.target.edges {
                    ensure!(a != b, "target edge {a}-{b} is a self-loop");
                    ensure!((a as usize) < *nodes && (b as usize) < *nodes, "target edge {a}-{b} names a node outside 0..{nodes}");
                }
            }
            _ => {}
        }
        if self.experiment == Experiment::RunPattern && self.target.circuit.is_some() == self.target.pattern.is_some() {
            bail!("run-pattern needs exactly one of target.circuit and target.pattern");
        }
        if self.experiment == Experiment::Prune {
            ensure!(self.target.rows.is_some() && self.target.cols.is_some(), "prune needs target.rows and target.cols");
        }
        Ok(())
    }
}
