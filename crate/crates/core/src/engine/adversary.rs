//! Behaviour of faulty nodes.
//!
//! Faulty nodes are omniscient: every round a strategy sees the fault-free
//! states from the end of the previous round and the topology, and picks the
//! value to put on each of its outgoing links independently (equivocation is
//! allowed). Returning `None` omits the message; the receiver then uses the
//! configured default value.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::update::update_step;
use super::{ExecutionConfig, Message};
use crate::error::{Error, Result};
use crate::fault::LocalFaultView;
use crate::graph::DirectedGraph;
use crate::nodeset::{NodeId, NodeSet};

/// Read-only snapshot handed to a strategy each round.
#[derive(Clone, Copy, Debug)]
pub struct RoundView<'a> {
    pub round: usize,
    pub graph: &'a DirectedGraph,
    pub faulty: NodeSet,
    /// Fault-free states `v[t-1]`.
    pub states: &'a BTreeMap<NodeId, f64>,
}

/// A pluggable faulty-node strategy.
pub trait Adversary: Send {
    /// Value faulty node `from` puts on its link to `to` this round.
    fn message(&mut self, view: &RoundView<'_>, from: NodeId, to: NodeId) -> Option<f64>;

    /// Called once all messages of the round are known.
    fn end_round(&mut self, _view: &RoundView<'_>, _messages: &[Message]) {}
}

/// Omits every message.
#[derive(Clone, Debug, Default)]
pub struct Silent;

impl Adversary for Silent {
    fn message(&mut self, _: &RoundView<'_>, _: NodeId, _: NodeId) -> Option<f64> {
        None
    }
}

/// Sends the same value everywhere.
#[derive(Clone, Debug)]
pub struct Constant(pub f64);

impl Adversary for Constant {
    fn message(&mut self, _: &RoundView<'_>, _: NodeId, _: NodeId) -> Option<f64> {
        Some(self.0)
    }
}

/// Independent uniform values in `[low, high]` per link and round.
#[derive(Clone, Debug)]
pub struct Uniform {
    low: f64,
    high: f64,
    rng: ChaCha8Rng,
}

impl Uniform {
    pub fn new(low: f64, high: f64, seed: u64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::input(format!("random adversary needs finite low <= high, got [{low}, {high}]")));
        }
        Ok(Uniform { low, high, rng: ChaCha8Rng::seed_from_u64(seed) })
    }
}

impl Adversary for Uniform {
    fn message(&mut self, _: &RoundView<'_>, _: NodeId, _: NodeId) -> Option<f64> {
        Some(self.rng.random_range(self.low..=self.high))
    }
}

/// Keeps nodes in `left` pinned at `low` and nodes in `right` pinned at
/// `high`: sends `below` to `left`, `above` to `right` and the midpoint of
/// `[low, high]` to everyone else.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitter {
    pub left: NodeSet,
    pub right: NodeSet,
    pub rest: NodeSet,
    pub low: f64,
    pub high: f64,
    pub below: f64,
    pub above: f64,
}

impl Splitter {
    pub fn mid(&self) -> f64 {
        (self.low + self.high) / 2.0
    }

    pub fn value_for(&self, to: NodeId) -> f64 {
        if self.left.contains(to) {
            self.below
        } else if self.right.contains(to) {
            self.above
        } else {
            self.mid()
        }
    }
}

impl Adversary for Splitter {
    fn message(&mut self, _: &RoundView<'_>, _: NodeId, to: NodeId) -> Option<f64> {
        Some(self.value_for(to))
    }
}

/// Builds a splitter for the partition `left`, `right`, `rest` of the
/// fault-free nodes. Requires `below < low <= high < above` and pairwise
/// disjoint parts.
pub fn splitter_adversary(
    left: NodeSet,
    right: NodeSet,
    rest: NodeSet,
    low: f64,
    high: f64,
    margins: (f64, f64),
) -> Result<Splitter> {
    let (below, above) = margins;
    if !left.intersection(right).is_empty()
        || !left.intersection(rest).is_empty()
        || !right.intersection(rest).is_empty()
    {
        return Err(Error::input(format!("splitter parts overlap: L={left} R={right} C={rest}")));
    }
    if !(below < low && low <= high && high < above) {
        return Err(Error::input(format!(
            "splitter values must satisfy below < low <= high < above, got {below}, {low}, {high}, {above}"
        )));
    }
    Ok(Splitter { left, right, rest, low, high, below, above })
}

/// Behaves exactly like a fault-free node running the same update rule.
#[derive(Clone, Debug)]
pub struct Mimic {
    shadow: BTreeMap<NodeId, f64>,
    views: BTreeMap<NodeId, LocalFaultView>,
    default_value: f64,
}

impl Mimic {
    pub fn new(cfg: &ExecutionConfig) -> Result<Self> {
        let mut shadow = BTreeMap::new();
        let mut views = BTreeMap::new();
        for u in cfg.faulty {
            shadow.insert(u, cfg.inputs[u - 1]);
            views.insert(u, cfg.domain.local_view(&cfg.graph, u)?);
        }
        Ok(Mimic { shadow, views, default_value: cfg.default_value })
    }
}

impl Adversary for Mimic {
    fn message(&mut self, _: &RoundView<'_>, from: NodeId, _: NodeId) -> Option<f64> {
        self.shadow.get(&from).copied()
    }

    fn end_round(&mut self, _: &RoundView<'_>, messages: &[Message]) {
        let mut next = BTreeMap::new();
        for (&u, view) in &self.views {
            let mut received = vec![(u, self.shadow[&u])];
            received.extend(
                messages
                    .iter()
                    .filter(|m| m.to == u)
                    .map(|m| (m.from, m.value.unwrap_or(self.default_value))),
            );
            let (v, _) = update_step(u, &received, view).expect("complete inbox");
            next.insert(u, v);
        }
        self.shadow = next;
    }
}

/// Optional overrides for the splitter; anything left out is derived from
/// the execution's inputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitterSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<NodeSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<NodeSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub below: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub above: Option<f64>,
}

impl SplitterSpec {
    /// Resolves defaults against a configuration:
    /// `left`/`right` are the fault-free nodes holding the smallest/largest
    /// input, `low`/`high` the smallest/largest fault-free input, and the
    /// margins sit `high - low + 1` outside `[low, high]`.
    pub fn resolve(&self, cfg: &ExecutionConfig) -> Result<Splitter> {
        let alive = cfg.graph.nodes().difference(cfg.faulty);
        let inputs: Vec<(NodeId, f64)> = alive.iter().map(|i| (i, cfg.inputs[i - 1])).collect();
        let min = inputs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max = inputs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let left = self
            .left
            .unwrap_or_else(|| inputs.iter().filter(|p| p.1 == min).map(|p| p.0).collect());
        let right = self.right.unwrap_or_else(|| {
            inputs.iter().filter(|p| p.1 == max && !left.contains(p.0)).map(|p| p.0).collect()
        });
        for part in [left, right] {
            if !part.is_subset(alive) {
                return Err(Error::input(format!("splitter part {part} is not inside V - F = {alive}")));
            }
        }
        let low = self.low.unwrap_or(min);
        let high = self.high.unwrap_or(max);
        let gap = (high - low).abs() + 1.0;
        let below = self.below.unwrap_or(low - gap);
        let above = self.above.unwrap_or(high + gap);
        let rest = alive.difference(left).difference(right);
        splitter_adversary(left, right, rest, low, high, (below, above))
    }
}

/// Serializable identifier of a built-in strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AdversarySpec {
    Silent,
    Constant { value: f64 },
    Random { low: f64, high: f64 },
    Splitter(SplitterSpec),
    Mimic,
}

impl AdversarySpec {
    pub fn build(&self, cfg: &ExecutionConfig) -> Result<Box<dyn Adversary>> {
        Ok(match self {
            AdversarySpec::Silent => Box::new(Silent),
            AdversarySpec::Constant { value } => Box::new(Constant(*value)),
            AdversarySpec::Random { low, high } => Box::new(Uniform::new(*low, *high, cfg.seed)?),
            AdversarySpec::Splitter(spec) => Box::new(spec.resolve(cfg)?),
            AdversarySpec::Mimic => Box::new(Mimic::new(cfg)?),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            AdversarySpec::Silent => "silent",
            AdversarySpec::Constant { .. } => "constant",
            AdversarySpec::Random { .. } => "random",
            AdversarySpec::Splitter(_) => "splitter",
            AdversarySpec::Mimic => "mimic",
        }
    }
}

/// One entry of the built-in catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AdversaryInfo {
    pub id: &'static str,
    pub syntax: &'static str,
    pub description: &'static str,
}

pub fn builtin_adversaries() -> Vec<AdversaryInfo> {
    vec![
        AdversaryInfo {
            id: "silent",
            syntax: "silent",
            description: "omit every message; receivers substitute the default value",
        },
        AdversaryInfo {
            id: "constant",
            syntax: "constant(C)",
            description: "send C on every outgoing link",
        },
        AdversaryInfo {
            id: "random",
            syntax: "random(LO,HI)",
            description: "independent uniform values in [LO, HI] per link, seeded by --seed",
        },
        AdversaryInfo {
            id: "splitter",
            syntax: "splitter | splitter(L={..},R={..},m=..,M=..,below=..,above=..)",
            description: "send `below` to L, `above` to R and (m+M)/2 to everyone else",
        },
        AdversaryInfo {
            id: "mimic",
            syntax: "mimic",
            description: "follow the fault-free update rule (control run)",
        },
    ]
}

fn fmt_set(s: NodeSet) -> String {
    s.to_string()
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Silent => f.write_str("silent"),
            AdversarySpec::Mimic => f.write_str("mimic"),
            AdversarySpec::Constant { value } => write!(f, "constant({value})"),
            AdversarySpec::Random { low, high } => write!(f, "random({low},{high})"),
            AdversarySpec::Splitter(s) => {
                let mut parts = Vec::new();
                if let Some(l) = s.left {
                    parts.push(format!("L={}", fmt_set(l)));
                }
                if let Some(r) = s.right {
                    parts.push(format!("R={}", fmt_set(r)));
                }
                for (key, v) in [("m", s.low), ("M", s.high), ("below", s.below), ("above", s.above)] {
                    if let Some(v) = v {
                        parts.push(format!("{key}={v}"));
                    }
                }
                if parts.is_empty() {
                    f.write_str("splitter")
                } else {
                    write!(f, "splitter({})", parts.join(","))
                }
            }
        }
    }
}

/// Splits on commas that are not inside braces.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..k].trim());
                start = k + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::input(format!("cannot parse {what} `{s}` as a number")))
}

fn parse_set(s: &str) -> Result<NodeSet> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    let mut set = NodeSet::EMPTY;
    for tok in inner.split([',', ' ', '|']).filter(|t| !t.is_empty()) {
        let id: NodeId =
            tok.parse().map_err(|_| Error::input(format!("bad node id `{tok}` in {s}")))?;
        if !(1..=crate::nodeset::MAX_NODES).contains(&id) {
            return Err(Error::input(format!("node id {id} out of range in {s}")));
        }
        set.insert(id);
    }
    Ok(set)
}

impl FromStr for AdversarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(p) if s.ends_with(')') => (&s[..p], split_args(&s[p + 1..s.len() - 1])),
            Some(_) => return Err(Error::input(format!("unbalanced parentheses in `{s}`"))),
            None => (s, Vec::new()),
        };
        let arity = |want: usize| -> Result<()> {
            if args.len() == want {
                Ok(())
            } else {
                Err(Error::input(format!("`{name}` takes {want} argument(s), got {}", args.len())))
            }
        };
        match name.trim() {
            "silent" => {
                arity(0)?;
                Ok(AdversarySpec::Silent)
            }
            "mimic" => {
                arity(0)?;
                Ok(AdversarySpec::Mimic)
            }
            "constant" => {
                arity(1)?;
                Ok(AdversarySpec::Constant { value: parse_num(args[0], "constant")? })
            }
            "random" => {
                arity(2)?;
                Ok(AdversarySpec::Random {
                    low: parse_num(args[0], "low")?,
                    high: parse_num(args[1], "high")?,
                })
            }
            "splitter" => {
                let mut spec = SplitterSpec::default();
                for arg in args {
                    let (key, value) = arg
                        .split_once('=')
                        .ok_or_else(|| Error::input(format!("splitter argument `{arg}` is not key=value")))?;
                    match key.trim() {
                        "L" | "left" => spec.left = Some(parse_set(value)?),
                        "R" | "right" => spec.right = Some(parse_set(value)?),
                        "m" | "low" => spec.low = Some(parse_num(value, "m")?),
                        "M" | "high" => spec.high = Some(parse_num(value, "M")?),
                        "below" | "lo" => spec.below = Some(parse_num(value, "below")?),
                        "above" | "hi" => spec.above = Some(parse_num(value, "above")?),
                        other => return Err(Error::input(format!("unknown splitter key `{other}`"))),
                    }
                }
                Ok(AdversarySpec::Splitter(spec))
            }
            other => Err(Error::UnknownAdversary(other.to_string())),
        }
    }
}
