//! Per-round transition matrices `M[t]` with `v[t] = M[t] v[t-1]` over the
//! fault-free nodes.
//!
//! A faulty survivor's value always lies between values held by fault-free
//! nodes, so its contribution can be rewritten as a convex combination of
//! fault-free states. Which fault-free nodes absorb it depends on whether
//! the low-trimmed set `S` and the high-trimmed set `L` contain fault-free
//! nodes (`S_g`, `L_g`) and whether any survivor is faulty; this gives six
//! cases.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::engine::RoundRecord;
use crate::error::{Error, Result};
use crate::fault::FaultDomain;
use crate::graph::DirectedGraph;
use crate::nodeset::{NodeId, NodeSet};
use crate::reduction::{build_reduced, FxChoice, ReducedGraph};

pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;

/// `α / (4n)` with `α = min_i 1 / (|N_i^-| + 1)`.
pub fn beta(g: &DirectedGraph) -> f64 {
    let n = g.node_count();
    let max_in = g.nodes().iter().map(|i| g.incoming()[i - 1].len()).max().unwrap_or(0);
    let alpha = 1.0 / (max_in + 1) as f64;
    alpha / (4 * n) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `S_g`, `L_g` nonempty, some survivor faulty.
    I,
    /// `S_g`, `L_g` nonempty, no survivor faulty.
    II,
    /// `S_g` empty, `L_g` nonempty, some survivor faulty.
    III,
    /// `S_g` nonempty, `L_g` empty, some survivor faulty.
    IV,
    /// `S_g`, `L_g` empty, some survivor faulty.
    V,
    /// No survivor faulty and at most one of `S_g`, `L_g` nonempty.
    VI,
}

impl Case {
    pub fn classify(sg_empty: bool, lg_empty: bool, faulty_survivor: bool) -> Case {
        match (sg_empty, lg_empty, faulty_survivor) {
            (false, false, true) => Case::I,
            (false, false, false) => Case::II,
            (true, false, true) => Case::III,
            (false, true, true) => Case::IV,
            (true, true, true) => Case::V,
            (_, _, false) => Case::VI,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `(s, l)` with `s + l = 1`, `s, l >= 0` and `w = s*lo + l*hi` whenever
/// `lo <= w <= hi`. A degenerate interval puts all weight on `lo`.
fn split(w: f64, lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let s = ((hi - w) / (hi - lo)).clamp(0.0, 1.0);
        (s, 1.0 - s)
    } else {
        (1.0, 0.0)
    }
}

/// One row `M_i[t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRow {
    pub node: NodeId,
    /// Entries over the fault-free nodes in ascending id order.
    pub entries: Vec<f64>,
    /// The feasible set `F_x(i)` chosen by the construction.
    pub fx: NodeSet,
    pub case: Case,
}

fn mean(states: &BTreeMap<NodeId, f64>, set: NodeSet) -> f64 {
    set.iter().map(|j| states[&j]).sum::<f64>() / set.len() as f64
}

/// Builds row `i` of `M[t]` from one round of a trace. The fault-free nodes
/// are the keys of `record.states_before`; everything else that appears in
/// `i`'s trim data is treated as faulty.
pub fn build_transition_row(i: NodeId, record: &RoundRecord) -> Result<TransitionRow> {
    let states = &record.states_before;
    let alive: NodeSet = states.keys().copied().collect();
    let trim = record
        .trim_of(i)
        .ok_or_else(|| Error::input(format!("round {} has no trim record for node {i}", record.round)))?;
    if !alive.contains(i) {
        return Err(Error::input(format!("node {i} is not fault-free in round {}", record.round)));
    }
    let pos = |j: NodeId| alive.iter().position(|x| x == j).expect("alive node");
    let order = alive.len();
    let mut row = vec![0.0; order];

    let low = trim.low_trimmed();
    let high = trim.high_trimmed();
    let sg = low.intersection(alive);
    let lg = high.intersection(alive);
    let survivors = trim.survivors;
    let bad = survivors.difference(alive);
    let good = survivors.intersection(alive);
    let a = 1.0 / survivors.len() as f64;
    let w = |k: NodeId| trim.value_of(k).expect("survivor has a value");
    let case = Case::classify(sg.is_empty(), lg.is_empty(), !bad.is_empty());
    let surv_order = trim.surviving_order();

    let fx = match case {
        Case::I => {
            let (ms, ml) = (mean(states, sg), mean(states, lg));
            let (mut sum_s, mut sum_l, mut any_half) = (0.0, 0.0, false);
            for k in bad {
                let (s, l) = split(w(k), ms, ml);
                sum_s += s;
                sum_l += l;
                any_half |= s >= 0.5;
            }
            for j in good {
                row[pos(j)] += a;
            }
            for j in sg {
                row[pos(j)] += a * sum_s / sg.len() as f64;
            }
            for j in lg {
                row[pos(j)] += a * sum_l / lg.len() as f64;
            }
            if any_half {
                high
            } else {
                low
            }
        }
        Case::II => {
            let (ms, ml) = (mean(states, sg), mean(states, lg));
            let (sz, lz) = split(states[&i], ms, ml);
            for j in good {
                row[pos(j)] += if j == i { a / 2.0 } else { a };
            }
            for j in sg {
                row[pos(j)] += a / 2.0 * sz / sg.len() as f64;
            }
            for j in lg {
                row[pos(j)] += a / 2.0 * lz / lg.len() as f64;
            }
            if sz >= 0.5 {
                high
            } else {
                low
            }
        }
        Case::III | Case::IV | Case::V => {
            let first = surv_order[0];
            let last = surv_order[surv_order.len() - 1];
            // the anchors absorbing faulty mass: (lower, upper)
            let (lo, hi) = match case {
                Case::III => {
                    let l = trim.order[trim.order.len() - trim.f2..]
                        .iter()
                        .copied()
                        .find(|j| alive.contains(*j))
                        .expect("L_g nonempty");
                    (first, l)
                }
                Case::IV => {
                    let s = trim.order[..trim.f1]
                        .iter()
                        .rev()
                        .copied()
                        .find(|j| alive.contains(*j))
                        .expect("S_g nonempty");
                    (s, last)
                }
                _ => (first, last),
            };
            for anchor in [lo, hi] {
                if !alive.contains(anchor) {
                    return Err(Error::input(format!(
                        "round {}: node {i} kept faulty extreme {anchor}; trimming was not maximal",
                        record.round
                    )));
                }
            }
            let (mut sum_s, mut sum_l) = (0.0, 0.0);
            for k in bad {
                let (s, l) = split(w(k), states[&lo], states[&hi]);
                sum_s += s;
                sum_l += l;
            }
            for j in good {
                row[pos(j)] += a;
            }
            row[pos(lo)] += a * sum_s;
            row[pos(hi)] += a * sum_l;
            match case {
                Case::III => high,
                Case::IV => low,
                _ => NodeSet::EMPTY,
            }
        }
        Case::VI => {
            for j in good {
                row[pos(j)] += a;
            }
            if sg.is_empty() {
                high
            } else {
                low
            }
        }
    };
    Ok(TransitionRow { node: i, entries: row, fx, case })
}

/// `M[t]` over the fault-free nodes, with the construction's witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    /// Fault-free nodes in ascending order; row/column `k` is `nodes[k]`.
    pub nodes: Vec<NodeId>,
    pub entries: DMatrix<f64>,
    pub fx_witness: FxChoice,
    pub case_tags: BTreeMap<NodeId, Case>,
}

pub fn build_transition_matrix(record: &RoundRecord) -> Result<TransitionMatrix> {
    let nodes: Vec<NodeId> = record.states_before.keys().copied().collect();
    let m = nodes.len();
    let mut entries = DMatrix::zeros(m, m);
    let mut fx_witness = FxChoice::new();
    let mut case_tags = BTreeMap::new();
    for (r, &i) in nodes.iter().enumerate() {
        let row = build_transition_row(i, record)?;
        for (c, v) in row.entries.iter().enumerate() {
            entries[(r, c)] = *v;
        }
        fx_witness.insert(i, row.fx);
        case_tags.insert(i, row.case);
    }
    Ok(TransitionMatrix { nodes, entries, fx_witness, case_tags })
}

impl TransitionMatrix {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn index_of(&self, node: NodeId) -> Option<usize> {
        self.nodes.iter().position(|&j| j == node)
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        match (self.index_of(i), self.index_of(j)) {
            (Some(r), Some(c)) => self.entries[(r, c)],
            _ => 0.0,
        }
    }

    /// `max_i |sum_j M_ij - 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.entries.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.min_entry() >= 0.0 && self.row_sum_error() <= ROW_SUM_TOLERANCE
    }

    fn vector(&self, states: &BTreeMap<NodeId, f64>) -> Result<DVector<f64>> {
        let values = self
            .nodes
            .iter()
            .map(|j| {
                states
                    .get(j)
                    .copied()
                    .ok_or_else(|| Error::Dimension(format!("state vector has no entry for node {j}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(values))
    }

    /// `|M v_before - v_after|_inf`.
    pub fn reconstruction_error(
        &self,
        before: &BTreeMap<NodeId, f64>,
        after: &BTreeMap<NodeId, f64>,
    ) -> Result<f64> {
        let predicted = &self.entries * self.vector(before)?;
        let actual = self.vector(after)?;
        Ok((predicted - actual).amax())
    }

    /// Smallest `M_ij` over `j ∈ {i} ∪ ((V_F - F_x(i)) ∩ N_i^-)`, the entries
    /// that must be at least `β`.
    pub fn min_dominated_entry(&self, g: &DirectedGraph) -> f64 {
        let alive: NodeSet = self.nodes.iter().copied().collect();
        let mut min = f64::INFINITY;
        for &i in &self.nodes {
            let fx = self.fx_witness.get(&i).copied().unwrap_or_default();
            let keep = g.incoming()[i - 1].intersection(alive).difference(fx);
            for j in keep.union(NodeSet::singleton(i)) {
                min = min.min(self.get(i, j));
            }
        }
        min
    }

    /// The reduced graph picked by the construction's `F_x` choices.
    pub fn witness_graph(&self, g: &DirectedGraph, d: &FaultDomain) -> Result<ReducedGraph> {
        let alive: NodeSet = self.nodes.iter().copied().collect();
        let faulty = g.nodes().difference(alive);
        build_reduced(g, d, faulty, &self.fx_witness)
    }
}
