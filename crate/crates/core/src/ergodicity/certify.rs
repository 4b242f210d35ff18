//! End-to-end numerical certificate for a recorded execution.
//!
//! Every round's `M[t]` is rebuilt and checked (row sums, reconstruction of
//! the recorded states, the `β` lower bound, dominance over the witness
//! reduced graph). When every reduced graph of the execution's fault set has
//! a single source component, the rounds are also grouped into blocks of
//! `τ(n-ψ)` matrices whose products must be scrambling, and the products'
//! coefficients of ergodicity are checked against the Hajnal bound and the
//! observed spread.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::engine::{spread, ExecutionTrace};
use crate::error::{Error, Result};
use crate::fault::FaultDomain;
use crate::nodeset::{NodeId, NodeSet};
use crate::reduction::{enumerate_reduced, FxChoice};

use super::coefficients::ergodicity;
use super::connectivity::{connectivity_matrix, dominates, has_nonzero_column, BoolMatrix};
use super::transition::{beta, build_transition_matrix, Case, RECONSTRUCTION_TOLERANCE, ROW_SUM_TOLERANCE};

/// Slack on the contraction and Hajnal inequalities.
pub const PRODUCT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub cases: BTreeMap<NodeId, Case>,
    pub fx: FxChoice,
    pub row_sum_error: f64,
    pub reconstruction_error: f64,
    /// Smallest entry that the construction guarantees to be at least `β`.
    pub min_dominated_entry: f64,
    pub dominates_witness: bool,
    pub validity: bool,
    /// `λ(M[t])`.
    pub lambda: f64,
    /// `δ` and `λ` of `P_t = M[t] ... M[1]`.
    pub product_delta: f64,
    pub product_lambda: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub index: usize,
    pub first_round: usize,
    pub last_round: usize,
    /// Coefficients of `Q(i)`.
    pub delta: f64,
    pub lambda: f64,
    pub overlap: f64,
    /// First all-ones column of the boolean product of the block's witness
    /// graphs.
    pub nonzero_column: Option<NodeId>,
    /// `δ(Q(i) ... Q(1))` against `Π λ(Q(k))`.
    pub running_delta: f64,
    pub lambda_product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub fault_set: NodeSet,
    /// `n - ψ`.
    pub fault_free: usize,
    pub beta: f64,
    /// `|R_F|`.
    pub tau: usize,
    /// `τ(n-ψ)`.
    pub block_length: usize,
    /// `ln β^{τ(n-ψ)}`; the block bound is `1 - exp(log_block_bound)`.
    pub log_block_bound: f64,
    pub condition_holds: bool,
    pub rounds: usize,
    pub round_reports: Vec<RoundReport>,
    pub blocks: Vec<BlockReport>,
    pub properties: Vec<PropertyCheck>,
    pub passed: bool,
}

impl Certificate {
    pub fn property(&self, name: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Tally {
    name: &'static str,
    failures: usize,
    first: Option<String>,
    applicable: bool,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, failures: 0, first: None, applicable: true }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn finish(self, checked: usize, na_reason: &str) -> PropertyCheck {
        let (status, detail) = if !self.applicable {
            (Status::NotApplicable, na_reason.to_string())
        } else if self.failures == 0 {
            (Status::Pass, format!("{checked} checks passed"))
        } else {
            (Status::Fail, format!("{} of {checked} checks failed; first: {}", self.failures, self.first.unwrap_or_default()))
        };
        PropertyCheck { name: self.name.to_string(), status, detail }
    }
}

/// Rebuilds and checks every round of `trace` against the fault domain `d`.
///
/// Fails with [`Error::TraceTooShort`] when the block analysis applies but
/// the trace has fewer than `τ(n-ψ)` rounds.
pub fn certify_convergence(trace: &ExecutionTrace, d: &FaultDomain) -> Result<Certificate> {
    let g = &trace.config.graph;
    let n = g.node_count();
    if d.universe_size() != n {
        return Err(Error::Dimension(format!("graph has {n} nodes, fault domain {}", d.universe_size())));
    }
    let faulty = trace.config.faulty;
    d.require_feasible(faulty)?;
    let alive = g.nodes().difference(faulty);
    let fault_free = alive.len();
    let b = beta(g);

    let reduced: Vec<_> = enumerate_reduced(g, d, faulty)?.collect();
    let tau = reduced.len();
    let condition_holds = reduced.iter().all(|r| r.source_components().len() == 1);
    let block_length = tau * fault_free;
    let rounds = trace.rounds();
    if condition_holds && rounds < block_length {
        return Err(Error::TraceTooShort { required: block_length, actual: rounds });
    }

    let mut consistency = Tally::new("trace_consistency");
    let mut row_stochastic = Tally::new("row_stochastic");
    let mut reconstruction = Tally::new("reconstruction");
    let mut lower_bound = Tally::new("lower_bound");
    let mut dominance = Tally::new("dominance");
    let mut validity = Tally::new("validity");
    let mut hajnal_rounds = Tally::new("hajnal_rounds");
    let mut spread_check = Tally::new("spread_bound");
    let mut nonzero = Tally::new("nonzero_column");
    let mut scrambling = Tally::new("block_scrambling");
    let mut block_bound = Tally::new("block_lambda_bound");
    let mut hajnal_blocks = Tally::new("hajnal_blocks");

    let nodes: Vec<NodeId> = alive.to_vec();
    if trace.initial_states.keys().copied().collect::<NodeSet>() != alive {
        return Err(Error::input("initial states do not match the fault-free nodes"));
    }
    let spread0 = spread(&trace.initial_states);
    let scale = trace.initial_states.values().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut product = DMatrix::<f64>::identity(fault_free, fault_free);
    let mut lambda_prod = 1.0f64;
    let mut round_reports = Vec::with_capacity(rounds);
    let mut matrices = Vec::with_capacity(rounds);
    let mut witnesses = Vec::with_capacity(rounds);
    let mut prev = &trace.initial_states;

    for rec in &trace.records {
        let t = rec.round;
        let same_states = &rec.states_before == prev;
        let honest_values = rec.trims.iter().all(|tr| {
            tr.order
                .iter()
                .zip(&tr.values)
                .all(|(j, v)| !alive.contains(*j) || rec.states_before.get(j) == Some(v))
        });
        consistency.record(same_states && honest_values && rec.round == round_reports.len() + 1, || {
            format!("round {t} does not continue the previous round")
        });
        prev = &rec.states_after;

        let m = build_transition_matrix(rec)?;
        if m.nodes != nodes {
            return Err(Error::input(format!("round {t} covers nodes {:?}, expected {nodes:?}", m.nodes)));
        }
        let row_err = m.row_sum_error();
        row_stochastic.record(m.min_entry() >= 0.0 && row_err <= ROW_SUM_TOLERANCE, || {
            format!("round {t}: row sum error {row_err:e}")
        });
        let rec_err = m.reconstruction_error(&rec.states_before, &rec.states_after)?;
        reconstruction.record(rec_err <= RECONSTRUCTION_TOLERANCE, || format!("round {t}: error {rec_err:e}"));
        let min_dom = m.min_dominated_entry(g);
        lower_bound.record(min_dom >= b, || format!("round {t}: entry {min_dom:e} < beta {b:e}"));
        let h = connectivity_matrix(&m.witness_graph(g, d)?);
        let dom = dominates(&m, &h, b)?;
        dominance.record(dom, || format!("round {t}"));

        let (lo, hi) = rec.states_before.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let valid = rec.states_after.values().all(|&v| lo <= v && v <= hi);
        validity.record(valid, || format!("round {t}"));

        let stats = ergodicity(&m.entries)?;
        product = &m.entries * &product;
        let ps = ergodicity(&product)?;
        lambda_prod *= stats.lambda;
        hajnal_rounds.record(ps.delta <= lambda_prod + PRODUCT_SLACK, || {
            format!("round {t}: delta {} > {}", ps.delta, lambda_prod)
        });
        let s = spread(&rec.states_after);
        spread_check.record(s <= ps.lambda * spread0 + PRODUCT_SLACK * scale, || {
            format!("round {t}: spread {s:e} > {:e}", ps.lambda * spread0)
        });

        round_reports.push(RoundReport {
            round: t,
            cases: m.case_tags.clone(),
            fx: m.fx_witness.clone(),
            row_sum_error: row_err,
            reconstruction_error: rec_err,
            min_dominated_entry: min_dom,
            dominates_witness: dom,
            validity: valid,
            lambda: stats.lambda,
            product_delta: ps.delta,
            product_lambda: ps.lambda,
            spread: s,
        });
        matrices.push(m.entries);
        witnesses.push(h);
    }

    let mut nonzero_checked = 0;
    let mut blocks = Vec::new();
    if condition_holds {
        let power = fault_free.max(1);
        for r in &reduced {
            nonzero_checked += 1;
            let (ok, _) = has_nonzero_column(&connectivity_matrix(r), power)?;
            nonzero.record(ok, || format!("F = {faulty}, F_x = {:?}", r.fx()));
        }
        let mut running = DMatrix::<f64>::identity(fault_free, fault_free);
        let mut block_lambda_prod = 1.0;
        let bound = 1.0 - (block_length as f64 * b.ln()).exp();
        for (index, chunk) in matrices.chunks_exact(block_length.max(1)).enumerate() {
            let first_round = index * block_length + 1;
            let mut q = DMatrix::<f64>::identity(fault_free, fault_free);
            let mut hq = BoolMatrix::identity(nodes.clone());
            for (k, mt) in chunk.iter().enumerate() {
                q = mt * &q;
                hq = witnesses[first_round - 1 + k].mul(&hq)?;
            }
            let qs = ergodicity(&q)?;
            running = &q * &running;
            let rs = ergodicity(&running)?;
            block_lambda_prod *= qs.lambda;
            let col = hq.first_full_column().map(|c| nodes[c]);
            scrambling.record(qs.is_scrambling() && col.is_some(), || {
                format!("block {index}: overlap {:e}, nonzero column {col:?}", qs.overlap)
            });
            block_bound.record(qs.lambda <= bound + PRODUCT_SLACK, || format!("block {index}: lambda {}", qs.lambda));
            hajnal_blocks.record(rs.delta <= block_lambda_prod + PRODUCT_SLACK, || {
                format!("block {index}: delta {} > {}", rs.delta, block_lambda_prod)
            });
            blocks.push(BlockReport {
                index,
                first_round,
                last_round: first_round + block_length - 1,
                delta: qs.delta,
                lambda: qs.lambda,
                overlap: qs.overlap,
                nonzero_column: col,
                running_delta: rs.delta,
                lambda_product: block_lambda_prod,
            });
        }
    } else {
        for t in [&mut nonzero, &mut scrambling, &mut block_bound, &mut hajnal_blocks] {
            t.applicable = false;
        }
    }

    let na = "some reduced graph for this fault set has more than one source component";
    let properties = vec![
        consistency.finish(rounds, na),
        row_stochastic.finish(rounds, na),
        reconstruction.finish(rounds, na),
        lower_bound.finish(rounds, na),
        dominance.finish(rounds, na),
        validity.finish(rounds, na),
        hajnal_rounds.finish(rounds, na),
        spread_check.finish(rounds, na),
        nonzero.finish(nonzero_checked, na),
        scrambling.finish(blocks.len(), na),
        block_bound.finish(blocks.len(), na),
        hajnal_blocks.finish(blocks.len(), na),
    ];
    let passed = properties.iter().all(|p| p.status != Status::Fail);
    Ok(Certificate {
        fault_set: faulty,
        fault_free,
        beta: b,
        tau,
        block_length,
        log_block_bound: block_length as f64 * b.ln(),
        condition_holds,
        rounds,
        round_reports,
        blocks,
        properties,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, ExecutionConfig};
    use crate::graph::DirectedGraph;

    fn ns<const N: usize>(ids: [usize; N]) -> NodeSet {
        NodeSet::from(ids)
    }

    #[test]
    fn fault_free_complete_graph() {
        let g = DirectedGraph::complete(3).unwrap();
        let d = FaultDomain::fault_free(3).unwrap();
        let t = run(ExecutionConfig::new(g, d.clone(), vec![0.0, 1.0, 5.0]).with_rounds(3)).unwrap();
        let c = certify_convergence(&t, &d).unwrap();
        assert!(c.passed, "{:?}", c.properties);
        assert_eq!((c.tau, c.block_length), (1, 3));
        assert_eq!(c.blocks.len(), 1);
        assert_eq!(c.blocks[0].lambda, 0.0);
        assert_eq!(c.round_reports[0].product_delta, 0.0);
    }

    #[test]
    fn k4_constant_adversary() {
        let g = DirectedGraph::complete(4).unwrap();
        let d = FaultDomain::f_total(4, 1).unwrap();
        let cfg = ExecutionConfig::new(g, d.clone(), vec![0.0, 1.0, 2.0, 3.0])
            .with_faulty(ns([4]))
            .with_rounds(30)
            .with_adversary("constant(100)".parse().unwrap());
        let t = run(cfg).unwrap();
        let c = certify_convergence(&t, &d).unwrap();
        assert_eq!(c.beta, 1.0 / 64.0);
        assert!(c.condition_holds);
        assert!(c.passed, "{:?}", c.properties);
        let bound = 1.0 - c.beta.powi(c.block_length as i32);
        assert!(c.blocks.iter().all(|blk| blk.lambda <= bound + PRODUCT_SLACK));
    }

    #[test]
    fn too_short_trace() {
        let g = DirectedGraph::complete(4).unwrap();
        let d = FaultDomain::f_total(4, 1).unwrap();
        let t = run(ExecutionConfig::new(g, d.clone(), vec![0.0, 1.0, 2.0, 3.0]).with_faulty(ns([4])).with_rounds(2))
            .unwrap();
        match certify_convergence(&t, &d) {
            Err(Error::TraceTooShort { required, actual }) => {
                assert_eq!(actual, 2);
                assert!(required > 2);
            }
            other => panic!("expected TraceTooShort, got {other:?}"),
        }
    }

    #[test]
    fn splitter_run_is_not_applicable() {
        let g = DirectedGraph::complete(3).unwrap();
        let d = FaultDomain::f_total(3, 1).unwrap();
        let cfg = ExecutionConfig::new(g, d.clone(), vec![0.0, 1.0, 0.5])
            .with_faulty(ns([3]))
            .with_rounds(20)
            .with_adversary("splitter(L={1},R={2},m=0,M=1)".parse().unwrap());
        let t = run(cfg).unwrap();
        let c = certify_convergence(&t, &d).unwrap();
        assert!(!c.condition_holds);
        assert!(c.passed);
        assert_eq!(c.property("validity").unwrap().status, Status::Pass);
        assert_eq!(c.property("block_scrambling").unwrap().status, Status::NotApplicable);
        assert!(c.round_reports.iter().all(|r| r.product_delta == 1.0));
    }

    #[test]
    fn tampered_state_fails_reconstruction() {
        let g = DirectedGraph::complete(4).unwrap();
        let d = FaultDomain::f_total(4, 1).unwrap();
        let cfg = ExecutionConfig::new(g, d.clone(), vec![0.0, 1.0, 2.0, 3.0])
            .with_faulty(ns([4]))
            .with_rounds(30)
            .with_adversary("random(-5,5)".parse().unwrap());
        let mut t = run(cfg).unwrap();
        *t.records[4].states_after.get_mut(&2).unwrap() += 0.25;
        let c = certify_convergence(&t, &d).unwrap();
        assert!(!c.passed);
        assert_eq!(c.property("reconstruction").unwrap().status, Status::Fail);
    }
}
