//! Directed communication graphs, strongly connected components and the
//! condensation DAG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::{NodeId, NodeSet, MAX_NODES};

/// A simple directed graph on nodes `1..=n`: no self-loops, no parallel edges.
///
/// Values are immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    n: usize,
    incoming: Vec<NodeSet>,
    outgoing: Vec<NodeSet>,
}

/// On-disk graph format: `{ "n": 4, "edges": [[1,2], ...] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[NodeId; 2]>,
}

impl DirectedGraph {
    /// Builds a graph, rejecting self-loops, duplicate edges, out-of-range ids
    /// and `n < 2`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        if n > MAX_NODES {
            return Err(Error::InvalidGraph(format!(
                "at most {MAX_NODES} nodes are supported, got {n}"
            )));
        }
        let mut incoming = vec![NodeSet::EMPTY; n];
        let mut outgoing = vec![NodeSet::EMPTY; n];
        for (from, to) in edges {
            for node in [from, to] {
                if !(1..=n).contains(&node) {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if from == to {
                return Err(Error::InvalidGraph(format!("self-loop on node {from}")));
            }
            if outgoing[from - 1].contains(to) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({from},{to})")));
            }
            outgoing[from - 1].insert(to);
            incoming[to - 1].insert(from);
        }
        Ok(DirectedGraph { n, incoming, outgoing })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j))))
    }

    /// Directed cycle `1 -> 2 -> ... -> n -> 1`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).map(|i| (i, i % n + 1)))
    }

    /// Directed path `1 -> 2 -> ... -> n`.
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i, i + 1)))
    }

    /// Each ordered pair `(i, j)`, `i != j`, is an edge with probability `p`,
    /// decided in lexicographic order from a ChaCha8 stream seeded by `seed`.
    pub fn random(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("edge probability {p} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(NodeId, NodeId)> =
            (1..=n).flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        Self::new(n, pairs.into_iter().filter(|_| rng.random_bool(p)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    pub fn edge_count(&self) -> usize {
        self.outgoing.iter().map(|s| s.len()).sum()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        (1..=self.n)
            .flat_map(|i| self.outgoing[i - 1].iter().map(move |j| (i, j)))
            .collect()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        (1..=self.n).contains(&from) && self.outgoing[from - 1].contains(to)
    }

    fn check(&self, i: NodeId) -> Result<()> {
        if (1..=self.n).contains(&i) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: i, n: self.n })
        }
    }

    /// `N_i^-`: nodes with an edge into `i`.
    pub fn in_neighbors(&self, i: NodeId) -> Result<NodeSet> {
        self.check(i)?;
        Ok(self.incoming[i - 1])
    }

    /// `N_i^+`: nodes `i` has an edge to.
    pub fn out_neighbors(&self, i: NodeId) -> Result<NodeSet> {
        self.check(i)?;
        Ok(self.outgoing[i - 1])
    }

    pub(crate) fn incoming(&self) -> &[NodeSet] {
        &self.incoming
    }

    #[cfg(test)]
    pub(crate) fn outgoing(&self) -> &[NodeSet] {
        &self.outgoing
    }

    pub fn condense(&self) -> Condensation {
        condense_masks(self.nodes(), &self.outgoing)
    }

    pub fn source_components(&self) -> Vec<NodeSet> {
        let c = self.condense();
        c.source_components().into_iter().map(|k| c.components[k]).collect()
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Self::new(file.n, file.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

impl Serialize for DirectedGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirectedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GraphFile::deserialize(d)?;
        DirectedGraph::from_file(&file).map_err(serde::de::Error::custom)
    }
}

/// Strongly connected components and the DAG between them.
///
/// Components are indexed in ascending order of their smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condensation {
    pub components: Vec<NodeSet>,
    /// `(k, l)` whenever some node of component `k` has an edge to some node of
    /// component `l`, `k != l`. Sorted, no duplicates.
    pub dag_edges: Vec<(usize, usize)>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, node: NodeId) -> Option<usize> {
        self.components.iter().position(|c| c.contains(node))
    }

    /// Component indices with no incoming DAG edge.
    pub fn source_components(&self) -> Vec<usize> {
        let mut has_in = vec![false; self.components.len()];
        for &(_, l) in &self.dag_edges {
            has_in[l] = true;
        }
        (0..self.components.len()).filter(|&k| !has_in[k]).collect()
    }

    /// The DAG viewed as a graph on nodes `1..=len` (component `k` becomes
    /// node `k + 1`). Fails when there are fewer than two components.
    pub fn as_graph(&self) -> Result<DirectedGraph> {
        DirectedGraph::new(self.len(), self.dag_edges.iter().map(|&(k, l)| (k + 1, l + 1)))
    }
}

/// Tarjan's algorithm restricted to `nodes`; `out[v - 1]` is the out-set of `v`
/// (members outside `nodes` are ignored).
pub(crate) fn scc_masks(nodes: NodeSet, out: &[NodeSet]) -> Vec<NodeSet> {
    struct State<'a> {
        nodes: NodeSet,
        out: &'a [NodeSet],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: NodeSet,
        stack: Vec<NodeId>,
        next: usize,
        comps: Vec<NodeSet>,
    }

    fn visit(st: &mut State<'_>, v: NodeId) {
        st.index[v - 1] = Some(st.next);
        st.low[v - 1] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack.insert(v);
        for w in st.out[v - 1].intersection(st.nodes) {
            match st.index[w - 1] {
                None => {
                    visit(st, w);
                    st.low[v - 1] = st.low[v - 1].min(st.low[w - 1]);
                }
                Some(iw) if st.on_stack.contains(w) => {
                    st.low[v - 1] = st.low[v - 1].min(iw);
                }
                Some(_) => {}
            }
        }
        if Some(st.low[v - 1]) == st.index[v - 1] {
            let mut comp = NodeSet::EMPTY;
            loop {
                let w = st.stack.pop().expect("tarjan stack underflow");
                st.on_stack.remove(w);
                comp.insert(w);
                if w == v {
                    break;
                }
            }
            st.comps.push(comp);
        }
    }

    let size = out.len();
    let mut st = State {
        nodes,
        out,
        index: vec![None; size],
        low: vec![0; size],
        on_stack: NodeSet::EMPTY,
        stack: Vec::new(),
        next: 0,
        comps: Vec::new(),
    };
    for v in nodes {
        if st.index[v - 1].is_none() {
            visit(&mut st, v);
        }
    }
    let mut comps = st.comps;
    comps.sort_by_key(|c| c.first());
    comps
}

pub(crate) fn condense_masks(nodes: NodeSet, out: &[NodeSet]) -> Condensation {
    let components = scc_masks(nodes, out);
    let mut comp_of = vec![usize::MAX; out.len()];
    for (k, c) in components.iter().enumerate() {
        for v in *c {
            comp_of[v - 1] = k;
        }
    }
    let mut dag_edges = Vec::new();
    for v in nodes {
        for w in out[v - 1].intersection(nodes) {
            let (k, l) = (comp_of[v - 1], comp_of[w - 1]);
            if k != l {
                dag_edges.push((k, l));
            }
        }
    }
    dag_edges.sort_unstable();
    dag_edges.dedup();
    Condensation { components, dag_edges }
}

/// Source components of the subgraph induced on `nodes`. A component is a
/// source when none of its members has an in-neighbor in `nodes` outside it.
pub(crate) fn source_masks(nodes: NodeSet, out: &[NodeSet], incoming: &[NodeSet]) -> Vec<NodeSet> {
    scc_masks(nodes, out)
        .into_iter()
        .filter(|c| c.iter().all(|v| incoming[v - 1].intersection(nodes).is_subset(*c)))
        .collect()
}
