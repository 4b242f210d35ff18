//! Reduced graphs and the exactly-one-source-component condition.
//!
//! For a feasible fault set `F` and a feasible set `F_x(i)` per surviving
//! node, the reduced graph drops `F` with all its links, then drops every link
//! `(j, i)` with `j ∈ F_x(i) ∩ N_i^-`. The graph admits an iterative
//! approximate Byzantine consensus algorithm iff every reduced graph, for
//! every feasible `F`, has exactly one source component.
//!
//! Enumeration only visits the *maximal* choices of `F_x(i)`: deleting more
//! edges on a fixed node set never lowers the number of source components
//! (each old source component still contains one), so a non-maximal choice
//! cannot fail unless a maximal one does. Fault sets, on the other hand, are
//! not monotone in that sense (removing a node can absorb a source), so every
//! feasible `F` is visited.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::{antichain, FaultDomain};
use crate::graph::{condense_masks, source_masks, Condensation, DirectedGraph};
use crate::nodeset::{NodeId, NodeSet};

/// Per-node choice of `F_x(i)`.
pub type FxChoice = BTreeMap<NodeId, NodeSet>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedGraph {
    n: usize,
    fault_set: NodeSet,
    fx: FxChoice,
    nodes: NodeSet,
    /// Out-sets of surviving nodes, indexed by `id - 1`.
    outgoing: Vec<NodeSet>,
    incoming: Vec<NodeSet>,
}

impl ReducedGraph {
    /// Size of the base graph.
    pub fn base_size(&self) -> usize {
        self.n
    }

    pub fn fault_set(&self) -> NodeSet {
        self.fault_set
    }

    pub fn fx(&self) -> &FxChoice {
        &self.fx
    }

    /// `V_F = V - F`.
    pub fn nodes(&self) -> NodeSet {
        self.nodes
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.nodes.contains(from) && self.outgoing[from - 1].contains(to)
    }

    /// `E_F` in lexicographic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes.iter().flat_map(|i| self.outgoing[i - 1].iter().map(move |j| (i, j))).collect()
    }

    pub fn in_neighbors(&self, i: NodeId) -> NodeSet {
        if self.nodes.contains(i) {
            self.incoming[i - 1]
        } else {
            NodeSet::EMPTY
        }
    }

    pub fn condense(&self) -> Condensation {
        condense_masks(self.nodes, &self.outgoing)
    }

    pub fn source_components(&self) -> Vec<NodeSet> {
        source_masks(self.nodes, &self.outgoing, &self.incoming)
    }

    /// Edge-set key used for de-duplication.
    fn key(&self) -> Vec<NodeSet> {
        self.incoming.clone()
    }
}

fn reduce(g: &DirectedGraph, fault_set: NodeSet, fx: FxChoice) -> ReducedGraph {
    let n = g.node_count();
    let nodes = g.nodes().difference(fault_set);
    let mut incoming = vec![NodeSet::EMPTY; n];
    let mut outgoing = vec![NodeSet::EMPTY; n];
    for i in nodes {
        let drop = fx.get(&i).copied().unwrap_or_default();
        let keep = g.incoming()[i - 1].intersection(nodes).difference(drop);
        incoming[i - 1] = keep;
        for j in keep {
            outgoing[j - 1].insert(i);
        }
    }
    ReducedGraph { n, fault_set, fx, nodes, outgoing, incoming }
}

/// Builds one reduced graph. Nodes of `V - F` missing from `fx` get `F_x(i) = {}`.
pub fn build_reduced(
    g: &DirectedGraph,
    d: &FaultDomain,
    fault_set: NodeSet,
    fx: &FxChoice,
) -> Result<ReducedGraph> {
    if g.node_count() != d.universe_size() {
        return Err(Error::Dimension(format!(
            "graph has {} nodes, fault domain {}",
            g.node_count(),
            d.universe_size()
        )));
    }
    d.require_feasible(fault_set)?;
    let nodes = g.nodes().difference(fault_set);
    for (&i, &set) in fx {
        if !nodes.contains(i) {
            return Err(Error::input(format!("F_x given for node {i}, which is not in V - F")));
        }
        d.require_feasible(set)?;
    }
    Ok(reduce(g, fault_set, fx.clone()))
}

/// Maximal removal choices for node `i` given fault set `F`: the local sets
/// of `i` restricted to `V - F`, antichain-normalized, in lexicographic order.
fn maximal_choices(g: &DirectedGraph, d: &FaultDomain, fault_set: NodeSet, i: NodeId) -> Vec<NodeSet> {
    let alive = g.nodes().difference(fault_set);
    let local = d.local_view(g, i).expect("node in range");
    antichain(local.local_sets.iter().map(|s| s.intersection(alive)))
}

/// Lazily enumerates the distinct reduced graphs for one fault set, in
/// lexicographic order of the `F_x` choices (node with the smallest id most
/// significant). Graphs with an edge set already produced are skipped.
pub struct ReducedGraphs<'a> {
    g: &'a DirectedGraph,
    fault_set: NodeSet,
    alive: Vec<NodeId>,
    choices: Vec<Vec<NodeSet>>,
    odometer: Vec<usize>,
    done: bool,
    seen: HashSet<Vec<NodeSet>>,
    combinations: usize,
}

impl<'a> ReducedGraphs<'a> {
    /// Number of `F_x` combinations stepped through so far (before de-duplication).
    pub fn combinations_visited(&self) -> usize {
        self.combinations
    }

    /// Total number of `F_x` combinations (product of per-node choice counts).
    pub fn combination_count(&self) -> usize {
        self.choices.iter().map(Vec::len).product()
    }
}

impl Iterator for ReducedGraphs<'_> {
    type Item = ReducedGraph;

    fn next(&mut self) -> Option<ReducedGraph> {
        while !self.done {
            let fx: FxChoice = self
                .alive
                .iter()
                .zip(&self.odometer)
                .enumerate()
                .map(|(p, (&i, &k))| (i, self.choices[p][k]))
                .collect();
            self.combinations += 1;
            // advance, least significant digit last
            let mut pos = self.odometer.len();
            loop {
                if pos == 0 {
                    self.done = true;
                    break;
                }
                pos -= 1;
                self.odometer[pos] += 1;
                if self.odometer[pos] < self.choices[pos].len() {
                    break;
                }
                self.odometer[pos] = 0;
            }
            let r = reduce(self.g, self.fault_set, fx);
            if self.seen.insert(r.key()) {
                return Some(r);
            }
        }
        None
    }
}

/// The distinct reduced graphs `R_F` for a feasible fault set.
pub fn enumerate_reduced<'a>(
    g: &'a DirectedGraph,
    d: &FaultDomain,
    fault_set: NodeSet,
) -> Result<ReducedGraphs<'a>> {
    if g.node_count() != d.universe_size() {
        return Err(Error::Dimension(format!(
            "graph has {} nodes, fault domain {}",
            g.node_count(),
            d.universe_size()
        )));
    }
    d.require_feasible(fault_set)?;
    let alive: Vec<NodeId> = g.nodes().difference(fault_set).to_vec();
    let choices: Vec<Vec<NodeSet>> =
        alive.iter().map(|&i| maximal_choices(g, d, fault_set, i)).collect();
    Ok(ReducedGraphs {
        g,
        fault_set,
        odometer: vec![0; alive.len()],
        alive,
        choices,
        done: false,
        seen: HashSet::new(),
        combinations: 0,
    })
}

/// `τ = |R_F|`: number of distinct reduced graphs for `F`.
pub fn reduced_graph_count(g: &DirectedGraph, d: &FaultDomain, fault_set: NodeSet) -> Result<usize> {
    Ok(enumerate_reduced(g, d, fault_set)?.count())
}

/// A reduced graph without exactly one source component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub fault_set: NodeSet,
    pub fx: FxChoice,
    /// First two source components (`L` and `R`); empty when the reduced
    /// graph has no nodes at all.
    pub left: NodeSet,
    pub right: NodeSet,
    pub source_components: Vec<NodeSet>,
}

impl Witness {
    /// `C = V - F - L - R`.
    pub fn rest(&self, n: usize) -> NodeSet {
        NodeSet::full(n).difference(self.fault_set).difference(self.left).difference(self.right)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub fault_sets_examined: usize,
    pub reduced_graph_count: usize,
}

/// Decides whether every reduced graph of every feasible fault set has
/// exactly one source component. The witness, if any, is the first failure in
/// lexicographic order of `(F, F_x)`.
pub fn check_condition(g: &DirectedGraph, d: &FaultDomain) -> Result<ConditionReport> {
    let mut examined = 0;
    let mut count = 0;
    for f in d.feasible_sets() {
        examined += 1;
        for r in enumerate_reduced(g, d, f)? {
            count += 1;
            let sources = r.source_components();
            if sources.len() != 1 {
                let left = sources.first().copied().unwrap_or_default();
                let right = sources.get(1).copied().unwrap_or_default();
                return Ok(ConditionReport {
                    holds: false,
                    witness: Some(Witness {
                        fault_set: f,
                        fx: r.fx.clone(),
                        left,
                        right,
                        source_components: sources,
                    }),
                    fault_sets_examined: examined,
                    reduced_graph_count: count,
                });
            }
        }
    }
    Ok(ConditionReport { holds: true, witness: None, fault_sets_examined: examined, reduced_graph_count: count })
}

/// Whether every reduced graph for the single fault set `F` has exactly one
/// source component, together with `τ = |R_F|`.
pub fn condition_for_fault_set(g: &DirectedGraph, d: &FaultDomain, fault_set: NodeSet) -> Result<(bool, usize)> {
    let mut tau = 0;
    let mut ok = true;
    for r in enumerate_reduced(g, d, fault_set)? {
        tau += 1;
        if r.source_components().len() != 1 {
            ok = false;
        }
    }
    Ok((ok, tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns<const N: usize>(ids: [usize; N]) -> NodeSet {
        NodeSet::from(ids)
    }

    #[test]
    fn no_faults_gives_base_graph() {
        let g = DirectedGraph::new(3, [(1, 2), (2, 3), (3, 1), (1, 3)]).unwrap();
        let d = FaultDomain::fault_free(3).unwrap();
        let r = build_reduced(&g, &d, NodeSet::EMPTY, &FxChoice::new()).unwrap();
        assert_eq!(r.edges(), g.edges());
        assert_eq!(r.nodes(), g.nodes());
    }

    #[test]
    fn k4_single_fault_with_predecessor_choice() {
        let g = DirectedGraph::complete(4).unwrap();
        let d = FaultDomain::f_total(4, 1).unwrap();
        let fx: FxChoice = [(1, ns([3])), (2, ns([1])), (3, ns([2]))].into_iter().collect();
        let r = build_reduced(&g, &d, ns([4]), &fx).unwrap();
        // oracle: every surviving edge avoids node 4 and the chosen in-neighbor
        let expect: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter(|&(j, i)| j != 4 && i != 4 && !fx[&i].contains(j))
            .collect();
        assert_eq!(r.edges(), expect);
        assert_eq!(r.edges(), vec![(1, 3), (2, 1), (3, 2)]);
        for i in 1..=3 {
            assert_eq!(r.in_neighbors(i).len(), 1);
        }
    }

    #[test]
    fn fault_removes_incident_links() {
        let g = DirectedGraph::new(2, [(1, 2)]).unwrap();
        let d = FaultDomain::f_total(2, 1).unwrap();
        let r = build_reduced(&g, &d, ns([1]), &FxChoice::new()).unwrap();
        assert_eq!(r.nodes(), ns([2]));
        assert!(r.edges().is_empty());
    }

    #[test]
    fn build_rejects_infeasible() {
        let g = DirectedGraph::complete(4).unwrap();
        let d = FaultDomain::f_total(4, 1).unwrap();
        assert!(matches!(
            build_reduced(&g, &d, ns([1, 2]), &FxChoice::new()),
            Err(Error::Infeasible { .. })
        ));
        let fx: FxChoice = [(1, ns([2, 3]))].into_iter().collect();
        assert!(build_reduced(&g, &d, NodeSet::EMPTY, &fx).is_err());
        let fx: FxChoice = [(4, ns([2]))].into_iter().collect();
        assert!(build_reduced(&g, &d, ns([4]), &fx).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let g = DirectedGraph::complete(4).unwrap();
        let fault_free = FaultDomain::fault_free(4).unwrap();
        assert_eq!(enumerate_reduced(&g, &fault_free, NodeSet::EMPTY).unwrap().count(), 1);

        let d = FaultDomain::f_total(4, 1).unwrap();
        let it = enumerate_reduced(&g, &d, NodeSet::EMPTY).unwrap();
        assert_eq!(it.combination_count(), 81);
        assert_eq!(it.count(), 81);
        let it = enumerate_reduced(&g, &d, ns([4])).unwrap();
        assert_eq!(it.combination_count(), 8);
        assert_eq!(it.count(), 8);
    }

    #[test]
    fn choices_collapse_to_empty() {
        // N_1^- = {}, N_2^- = {3}: neither can drop anything; node 3 drops 1 or 2
        let g = DirectedGraph::new(3, [(1, 3), (2, 3), (3, 2)]).unwrap();
        let d = FaultDomain::new(3, [ns([1]), ns([2])]).unwrap();
        let mut it = enumerate_reduced(&g, &d, NodeSet::EMPTY).unwrap();
        let graphs: Vec<_> = it.by_ref().collect();
        assert_eq!(graphs.len(), 2);
        assert_eq!(it.combinations_visited(), 2);
        assert_eq!(graphs[0].fx()[&3], ns([1]));
        assert_eq!(graphs[0].edges(), vec![(2, 3), (3, 2)]);
    }

    #[test]
    fn condition_examples() {
        let k4 = DirectedGraph::complete(4).unwrap();
        let rep = check_condition(&k4, &FaultDomain::f_total(4, 1).unwrap()).unwrap();
        assert!(rep.holds && rep.witness.is_none());

        let k3 = DirectedGraph::complete(3).unwrap();
        let rep = check_condition(&k3, &FaultDomain::f_total(3, 1).unwrap()).unwrap();
        assert!(!rep.holds);
        let w = rep.witness.unwrap();
        assert_eq!(w.fault_set.len(), 1);
        assert_eq!((w.left.len(), w.right.len()), (1, 1));
        assert_eq!(w.source_components.len(), 2);
        assert_eq!(w.fault_set, ns([1]));
        assert_eq!(w.rest(3), NodeSet::EMPTY);

        let cyc = DirectedGraph::cycle(5).unwrap();
        assert!(check_condition(&cyc, &FaultDomain::fault_free(5).unwrap()).unwrap().holds);
    }

    #[test]
    fn non_maximal_fault_set_matters() {
        // 2 <-> 3 with isolated node 1: with F = {} two sources, with F = {1} one.
        let g = DirectedGraph::new(3, [(2, 3), (3, 2)]).unwrap();
        let d = FaultDomain::new(3, [ns([1])]).unwrap();
        let rep = check_condition(&g, &d).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.witness.unwrap().fault_set, NodeSet::EMPTY);
    }

    #[test]
    fn all_nodes_faulty_has_no_source() {
        let g = DirectedGraph::complete(2).unwrap();
        let d = FaultDomain::new(2, [ns([1, 2])]).unwrap();
        let graphs: Vec<_> = enumerate_reduced(&g, &d, ns([1, 2])).unwrap().collect();
        assert_eq!(graphs.len(), 1);
        assert!(graphs[0].source_components().is_empty());
        assert!(!check_condition(&g, &d).unwrap().holds);
    }
}
