//! Synchronous round-based execution of the trimmed-mean algorithm.
//!
//! Each round every fault-free node sends its state on all outgoing links,
//! faulty nodes send whatever their [`Adversary`] chooses, and every
//! fault-free node applies [`update_step`] to what it received.

pub mod adversary;
pub mod update;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use adversary::{
    builtin_adversaries, splitter_adversary, Adversary, AdversaryInfo, AdversarySpec, Constant, Mimic, RoundView,
    Silent, Splitter, SplitterSpec, Uniform,
};
pub use update::{trim_bounds, update_step, TrimRecord};

use crate::error::{Error, Result};
use crate::fault::{FaultDomain, LocalFaultView};
use crate::graph::DirectedGraph;
use crate::nodeset::{NodeId, NodeSet};

pub const DEFAULT_EPSILON: f64 = 1e-6;

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// Everything needed to reproduce one execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionConfig {
    pub graph: DirectedGraph,
    pub domain: FaultDomain,
    /// The actual faulty set; must be feasible.
    pub faulty: NodeSet,
    /// Input of every node, indexed by `id - 1`. Entries for faulty nodes are
    /// only used by the mimic strategy.
    pub inputs: Vec<f64>,
    pub rounds: usize,
    pub adversary: AdversarySpec,
    /// Substituted for omitted messages.
    #[serde(default)]
    pub default_value: f64,
    /// Convergence threshold on the fault-free spread.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ExecutionConfig {
    /// No faulty nodes, silent adversary, zero rounds.
    pub fn new(graph: DirectedGraph, domain: FaultDomain, inputs: Vec<f64>) -> Self {
        ExecutionConfig {
            graph,
            domain,
            faulty: NodeSet::EMPTY,
            inputs,
            rounds: 0,
            adversary: AdversarySpec::Silent,
            default_value: 0.0,
            epsilon: DEFAULT_EPSILON,
            seed: 0,
        }
    }

    pub fn with_faulty(mut self, faulty: NodeSet) -> Self {
        self.faulty = faulty;
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_adversary(mut self, adversary: AdversarySpec) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_default_value(mut self, value: f64) -> Self {
        self.default_value = value;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.domain.universe_size() != n {
            return Err(Error::Dimension(format!(
                "graph has {n} nodes but the fault domain is over {}",
                self.domain.universe_size()
            )));
        }
        if self.inputs.len() != n {
            return Err(Error::Dimension(format!("expected {n} inputs, got {}", self.inputs.len())));
        }
        if let Some(i) = (1..=n).find(|&i| !self.inputs[i - 1].is_finite()) {
            return Err(Error::input(format!("input of node {i} is not finite")));
        }
        if !self.default_value.is_finite() {
            return Err(Error::input("default value must be finite"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::input(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        self.domain.require_feasible(self.faulty)
    }

    /// `V - F`.
    pub fn fault_free(&self) -> NodeSet {
        self.graph.nodes().difference(self.faulty)
    }
}

/// A value on one link in one round; `None` means nothing was sent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub from: NodeId,
    pub to: NodeId,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Fault-free states `v[t-1]`.
    pub states_before: BTreeMap<NodeId, f64>,
    pub messages: Vec<Message>,
    /// One record per fault-free node, ascending id.
    pub trims: Vec<TrimRecord>,
    /// Fault-free states `v[t]`.
    pub states_after: BTreeMap<NodeId, f64>,
}

impl RoundRecord {
    pub fn trim_of(&self, node: NodeId) -> Option<&TrimRecord> {
        self.trims.iter().find(|r| r.node == node)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub config: ExecutionConfig,
    pub initial_states: BTreeMap<NodeId, f64>,
    pub records: Vec<RoundRecord>,
    /// First round `t` with spread below `epsilon` (0 if the inputs already
    /// agree).
    pub converged_at: Option<usize>,
    pub final_spread: f64,
}

impl ExecutionTrace {
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    /// Fault-free states after round `t` (`t = 0` gives the inputs).
    pub fn states_at(&self, t: usize) -> Option<&BTreeMap<NodeId, f64>> {
        if t == 0 {
            Some(&self.initial_states)
        } else {
            self.records.get(t - 1).map(|r| &r.states_after)
        }
    }

    pub fn final_states(&self) -> &BTreeMap<NodeId, f64> {
        self.records.last().map_or(&self.initial_states, |r| &r.states_after)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `max - min` over the values; 0 for an empty map.
pub fn spread(states: &BTreeMap<NodeId, f64>) -> f64 {
    let (lo, hi) = states
        .values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

/// Round-by-round stepper.
pub struct Execution {
    cfg: ExecutionConfig,
    adversary: Box<dyn Adversary>,
    views: Vec<LocalFaultView>,
    initial: BTreeMap<NodeId, f64>,
    states: BTreeMap<NodeId, f64>,
    records: Vec<RoundRecord>,
    converged_at: Option<usize>,
}

impl Execution {
    /// Validates the configuration and builds the adversary it names.
    pub fn new(cfg: ExecutionConfig) -> Result<Self> {
        cfg.validate()?;
        let adversary = cfg.adversary.build(&cfg)?;
        Self::with_adversary(cfg, adversary)
    }

    /// Uses a caller-provided strategy; `cfg.adversary` is kept only as a
    /// label.
    pub fn with_adversary(cfg: ExecutionConfig, adversary: Box<dyn Adversary>) -> Result<Self> {
        cfg.validate()?;
        let views = cfg
            .fault_free()
            .iter()
            .map(|i| cfg.domain.local_view(&cfg.graph, i))
            .collect::<Result<Vec<_>>>()?;
        let initial: BTreeMap<NodeId, f64> = cfg.fault_free().iter().map(|i| (i, cfg.inputs[i - 1])).collect();
        let converged_at = (spread(&initial) < cfg.epsilon).then_some(0);
        Ok(Execution {
            states: initial.clone(),
            initial,
            cfg,
            adversary,
            views,
            records: Vec::new(),
            converged_at,
        })
    }

    pub fn config(&self) -> &ExecutionConfig {
        &self.cfg
    }

    pub fn round(&self) -> usize {
        self.records.len()
    }

    pub fn states(&self) -> &BTreeMap<NodeId, f64> {
        &self.states
    }

    pub fn spread(&self) -> f64 {
        spread(&self.states)
    }

    pub fn converged_at(&self) -> Option<usize> {
        self.converged_at
    }

    /// Runs one round and returns its record.
    pub fn step(&mut self) -> &RoundRecord {
        let round = self.records.len() + 1;
        let n = self.cfg.graph.node_count();
        let before = self.states.clone();
        let view = RoundView { round, graph: &self.cfg.graph, faulty: self.cfg.faulty, states: &before };

        let mut messages = Vec::with_capacity(self.cfg.graph.edge_count());
        let mut inbox: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n + 1];
        for (from, to) in self.cfg.graph.edges() {
            let value = if self.cfg.faulty.contains(from) {
                self.adversary.message(&view, from, to)
            } else {
                Some(before[&from])
            };
            messages.push(Message { from, to, value });
            inbox[to].push((from, value.unwrap_or(self.cfg.default_value)));
        }

        let mut after = BTreeMap::new();
        let mut trims = Vec::with_capacity(self.views.len());
        for view_i in &self.views {
            let i = view_i.node;
            let mut received = vec![(i, before[&i])];
            received.extend_from_slice(&inbox[i]);
            let (v, rec) = update_step(i, &received, view_i).expect("inbox matches in-neighbors");
            after.insert(i, v);
            trims.push(rec);
        }
        self.adversary.end_round(&view, &messages);

        if self.converged_at.is_none() && spread(&after) < self.cfg.epsilon {
            self.converged_at = Some(round);
        }
        self.states = after.clone();
        self.records.push(RoundRecord { round, states_before: before, messages, trims, states_after: after });
        self.records.last().expect("just pushed")
    }

    pub fn into_trace(self) -> ExecutionTrace {
        let final_spread = spread(&self.states);
        ExecutionTrace {
            config: self.cfg,
            initial_states: self.initial,
            records: self.records,
            converged_at: self.converged_at,
            final_spread,
        }
    }
}

/// Runs `cfg.rounds` rounds with the adversary named in the configuration.
pub fn run(cfg: ExecutionConfig) -> Result<ExecutionTrace> {
    let rounds = cfg.rounds;
    let mut ex = Execution::new(cfg)?;
    for _ in 0..rounds {
        ex.step();
    }
    Ok(ex.into_trace())
}

/// Runs `cfg.rounds` rounds with a caller-provided strategy.
pub fn run_with(cfg: ExecutionConfig, adversary: Box<dyn Adversary>) -> Result<ExecutionTrace> {
    let rounds = cfg.rounds;
    let mut ex = Execution::with_adversary(cfg, adversary)?;
    for _ in 0..rounds {
        ex.step();
    }
    Ok(ex.into_trace())
}
