//! Generalized fault domains.
//!
//! A fault domain is a collection of node sets that may fail together in one
//! execution. A set `F` is *feasible* when it is contained in some member of
//! the domain, so the domain is stored as its maximal generators (an
//! antichain) and feasibility is a subset query against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::nodeset::{NodeId, NodeSet, MAX_NODES};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaultDomain {
    n: usize,
    sets: Vec<NodeSet>,
}

/// On-disk fault-domain format: `{ "n": 4, "sets": [[1], [2,3,4]] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultDomainFile {
    pub n: usize,
    pub sets: Vec<Vec<NodeId>>,
}

/// Removes duplicates and sets contained in other sets, then sorts
/// lexicographically. An empty input becomes `[{}]`.
pub fn antichain(sets: impl IntoIterator<Item = NodeSet>) -> Vec<NodeSet> {
    let mut all: Vec<NodeSet> = sets.into_iter().collect();
    // larger sets first so a kept set is never a subset of a later one
    all.sort_by(|a, b| b.len().cmp(&a.len()).then(a.lex_cmp(*b)));
    let mut kept: Vec<NodeSet> = Vec::with_capacity(all.len());
    for s in all {
        if !kept.iter().any(|k| s.is_subset(*k)) {
            kept.push(s);
        }
    }
    if kept.is_empty() {
        kept.push(NodeSet::EMPTY);
    }
    kept.sort_by(|a, b| a.lex_cmp(*b));
    kept
}

impl FaultDomain {
    /// Builds a domain over `1..=n` from arbitrary generator sets.
    pub fn new(n: usize, sets: impl IntoIterator<Item = NodeSet>) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::input(format!("fault domain size {n} outside 1..={MAX_NODES}")));
        }
        let full = NodeSet::full(n);
        let sets: Vec<NodeSet> = sets.into_iter().collect();
        for s in &sets {
            if !s.is_subset(full) {
                return Err(Error::NodeOutOfRange { node: s.max_id(), n });
            }
        }
        Ok(FaultDomain { n, sets: antichain(sets) })
    }

    /// Only the fault-free execution is feasible.
    pub fn fault_free(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    /// `f`-total: any set of at most `f` nodes.
    pub fn f_total(n: usize, f: usize) -> Result<Self> {
        if f > n {
            return Err(Error::input(format!("f-total bound {f} exceeds node count {n}")));
        }
        let mut sets = Vec::new();
        combinations(NodeSet::full(n), f, &mut sets);
        Self::new(n, sets)
    }

    /// `f`-local: at most `f` faulty in-neighbors at every node.
    pub fn f_local(g: &DirectedGraph, f: usize) -> Result<Self> {
        Self::per_node_bound(g, |_| f)
    }

    /// `f`-fraction: at most `floor(f * |N_i^-|)` faulty in-neighbors at every node.
    pub fn f_fraction(g: &DirectedGraph, f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::input(format!("fault fraction {f} outside [0, 1]")));
        }
        // the epsilon absorbs representation error, e.g. (1/3) * 3
        Self::per_node_bound(g, |deg| (f * deg as f64 + 1e-9).floor() as usize)
    }

    /// Maximal sets `s` with `|s ∩ N_i^-| <= bound(|N_i^-|)` for every node `i`.
    fn per_node_bound(g: &DirectedGraph, bound: impl Fn(usize) -> usize) -> Result<Self> {
        let n = g.node_count();
        let ins: Vec<NodeSet> = (1..=n).map(|i| g.incoming()[i - 1]).collect();
        let caps: Vec<usize> = ins.iter().map(|s| bound(s.len())).collect();
        let ok = |s: NodeSet| ins.iter().zip(&caps).all(|(inn, &c)| s.intersection(*inn).len() <= c);

        // depth-first over increasing ids; feasibility is downward closed, so a
        // violating prefix prunes all of its supersets
        let mut maximal = Vec::new();
        let mut stack = vec![(NodeSet::EMPTY, 1usize)];
        while let Some((s, next)) = stack.pop() {
            let is_max = (1..=n).filter(|&v| !s.contains(v)).all(|v| {
                let mut t = s;
                t.insert(v);
                !ok(t)
            });
            if is_max {
                maximal.push(s);
            }
            for v in next..=n {
                let mut t = s;
                t.insert(v);
                if ok(t) {
                    stack.push((t, v + 1));
                }
            }
        }
        Self::new(n, maximal)
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    /// Maximal generators, antichain-normalized and in lexicographic order.
    pub fn sets(&self) -> &[NodeSet] {
        &self.sets
    }

    fn check_range(&self, s: NodeSet) -> Result<()> {
        if s.is_subset(NodeSet::full(self.n)) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: s.max_id(), n: self.n })
        }
    }

    pub fn is_feasible(&self, s: NodeSet) -> Result<bool> {
        self.check_range(s)?;
        Ok(self.sets.iter().any(|g| s.is_subset(*g)))
    }

    /// Like [`is_feasible`](Self::is_feasible) but returns an error naming
    /// the generators that were checked.
    pub fn require_feasible(&self, s: NodeSet) -> Result<()> {
        if self.is_feasible(s)? {
            Ok(())
        } else {
            Err(Error::Infeasible { set: s, generators: self.describe() })
        }
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.sets.iter().map(|s| s.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }

    /// Every feasible set (the downward closure), deduplicated, in
    /// lexicographic order. Exponential in the generator sizes.
    pub fn feasible_sets(&self) -> Vec<NodeSet> {
        let mut all: Vec<NodeSet> = self.sets.iter().flat_map(|g| g.subsets()).collect();
        all.sort_by_key(|s| s.bits());
        all.dedup();
        all.sort_by(|a, b| a.lex_cmp(*b));
        all
    }

    /// What node `i` needs to know: the generators intersected with `N_i^-`.
    pub fn local_view(&self, g: &DirectedGraph, i: NodeId) -> Result<LocalFaultView> {
        if g.node_count() != self.n {
            return Err(Error::Dimension(format!(
                "graph has {} nodes, fault domain {}",
                g.node_count(),
                self.n
            )));
        }
        let inn = g.in_neighbors(i)?;
        Ok(LocalFaultView {
            node: i,
            in_neighbors: inn,
            local_sets: antichain(self.sets.iter().map(|s| s.intersection(inn))),
        })
    }

    pub fn to_file(&self) -> FaultDomainFile {
        FaultDomainFile { n: self.n, sets: self.sets.iter().map(|s| s.to_vec()).collect() }
    }

    pub fn from_file(file: &FaultDomainFile) -> Result<Self> {
        let mut sets = Vec::with_capacity(file.sets.len());
        for raw in &file.sets {
            let mut s = NodeSet::EMPTY;
            for &id in raw {
                if !(1..=file.n).contains(&id) {
                    return Err(Error::NodeOutOfRange { node: id, n: file.n });
                }
                s.insert(id);
            }
            sets.push(s);
        }
        Self::new(file.n, sets)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

impl Serialize for FaultDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FaultDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = FaultDomainFile::deserialize(d)?;
        FaultDomain::from_file(&file).map_err(serde::de::Error::custom)
    }
}

fn combinations(pool: NodeSet, k: usize, out: &mut Vec<NodeSet>) {
    fn go(items: &[NodeId], k: usize, start: usize, cur: NodeSet, out: &mut Vec<NodeSet>) {
        if cur.len() == k {
            out.push(cur);
            return;
        }
        for idx in start..items.len() {
            if items.len() - idx < k - cur.len() {
                break;
            }
            let mut next = cur;
            next.insert(items[idx]);
            go(items, k, idx + 1, next, out);
        }
    }
    let items = pool.to_vec();
    go(&items, k, 0, NodeSet::EMPTY, out);
}

/// The part of the fault domain visible to one node: which of its
/// in-neighbors may fail together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFaultView {
    pub node: NodeId,
    pub in_neighbors: NodeSet,
    /// Antichain of `F* ∩ N_i^-` over the generators `F*`.
    pub local_sets: Vec<NodeSet>,
}

impl LocalFaultView {
    /// Whether `s` lies inside a single local set (hence is a feasible subset
    /// of `N_i^-`).
    pub fn covers(&self, s: NodeSet) -> bool {
        self.local_sets.iter().any(|l| s.is_subset(*l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ns<const N: usize>(ids: [usize; N]) -> NodeSet {
        NodeSet::from(ids)
    }

    fn closure_brute(n: usize, gens: &[NodeSet]) -> Vec<NodeSet> {
        NodeSet::full(n).subsets().filter(|s| gens.iter().any(|g| s.is_subset(*g))).collect()
    }

    #[test]
    fn feasibility_examples() {
        let d = FaultDomain::new(4, [ns([1]), ns([2, 3, 4])]).unwrap();
        assert!(d.is_feasible(ns([3, 4])).unwrap());
        let d2 = FaultDomain::new(4, [ns([1]), ns([2]), ns([3, 4])]).unwrap();
        assert!(!d2.is_feasible(ns([1, 3])).unwrap());
        assert!(d2.is_feasible(NodeSet::EMPTY).unwrap());
        let empty = FaultDomain::new(4, []).unwrap();
        assert_eq!(empty.sets(), &[NodeSet::EMPTY]);
        assert!(empty.is_feasible(NodeSet::EMPTY).unwrap());
        assert!(matches!(d.is_feasible(ns([5])), Err(Error::NodeOutOfRange { node: 5, n: 4 })));
        let err = d2.require_feasible(ns([1, 3])).unwrap_err().to_string();
        assert!(err.contains("{1,3}") && err.contains("{3,4}"), "{err}");
    }

    #[test]
    fn normalization_drops_subsets() {
        let d = FaultDomain::new(4, [ns([2]), ns([2, 3]), ns([2, 3]), ns([1])]).unwrap();
        assert_eq!(d.sets(), &[ns([1]), ns([2, 3])]);
    }

    #[test]
    fn local_view_examples() {
        let d = FaultDomain::new(5, [ns([1]), ns([2, 3, 4])]).unwrap();
        let g = DirectedGraph::new(5, [(1, 5), (2, 5), (3, 5), (4, 5), (1, 2)]).unwrap();
        assert_eq!(d.local_view(&g, 5).unwrap().local_sets, vec![ns([1]), ns([2, 3, 4])]);
        assert_eq!(d.local_view(&g, 2).unwrap().local_sets, vec![ns([1])]);

        let g2 = DirectedGraph::new(5, [(1, 3), (2, 3)]).unwrap();
        assert_eq!(d.local_view(&g2, 3).unwrap().local_sets, vec![ns([1]), ns([2])]);

        let d3 = FaultDomain::new(3, [ns([1, 2]), ns([2, 3])]).unwrap();
        let g3 = DirectedGraph::new(3, [(2, 1)]).unwrap();
        assert_eq!(d3.local_view(&g3, 1).unwrap().local_sets, vec![ns([2])]);
    }

    #[test]
    fn f_total_examples() {
        let d = FaultDomain::f_total(4, 1).unwrap();
        assert_eq!(d.sets(), &[ns([1]), ns([2]), ns([3]), ns([4])]);
        assert_eq!(FaultDomain::f_total(3, 0).unwrap().sets(), &[NodeSet::EMPTY]);
        let d2 = FaultDomain::f_total(4, 2).unwrap();
        assert!(d2.is_feasible(ns([1, 2])).unwrap());
        assert!(!d2.is_feasible(ns([1, 2, 3])).unwrap());
        assert!(FaultDomain::f_total(3, 4).is_err());
    }

    /// Brute-force oracle for per-node bounds.
    fn per_node_oracle(g: &DirectedGraph, caps: &[usize]) -> Vec<NodeSet> {
        g.nodes()
            .subsets()
            .filter(|s| {
                (1..=g.node_count())
                    .all(|i| s.intersection(g.in_neighbors(i).unwrap()).len() <= caps[i - 1])
            })
            .collect()
    }

    #[test]
    fn f_local_examples() {
        let k4 = DirectedGraph::complete(4).unwrap();
        let d = FaultDomain::f_local(&k4, 1).unwrap();
        assert!(!d.is_feasible(ns([1, 2])).unwrap());
        let mut closure = d.feasible_sets();
        closure.sort_by_key(|s| s.bits());
        assert_eq!(closure, per_node_oracle(&k4, &[1; 4]));
        assert_eq!(d, FaultDomain::f_total(4, 1).unwrap());

        let g = DirectedGraph::new(3, [(1, 3), (2, 3)]).unwrap();
        let d = FaultDomain::f_local(&g, 1).unwrap();
        assert!(!d.is_feasible(ns([1, 2])).unwrap());
        assert!(d.is_feasible(ns([1])).unwrap());
        // node 3 has no in-neighbors, so it may be faulty alongside either
        assert!(d.is_feasible(ns([1, 3])).unwrap());

        let d0 = FaultDomain::f_local(&k4, 0).unwrap();
        assert_eq!(d0.sets(), &[NodeSet::EMPTY]);
    }

    #[test]
    fn f_fraction_examples() {
        let k4 = DirectedGraph::complete(4).unwrap();
        assert_eq!(FaultDomain::f_fraction(&k4, 0.0).unwrap().sets(), &[NodeSet::EMPTY]);
        let third = FaultDomain::f_fraction(&k4, 1.0 / 3.0).unwrap();
        assert_eq!(third, FaultDomain::f_local(&k4, 1).unwrap());
        let all = FaultDomain::f_fraction(&k4, 1.0).unwrap();
        assert_eq!(all.sets(), &[NodeSet::full(4)]);
        assert!(FaultDomain::f_fraction(&k4, 1.5).is_err());
    }

    #[test]
    fn json_format() {
        let d = FaultDomain::from_json(r#"{"n":4,"sets":[[2,3,4],[1]]}"#).unwrap();
        assert_eq!(d.sets(), &[ns([1]), ns([2, 3, 4])]);
        assert!(FaultDomain::from_json(r#"{"n":4,"sets":[[5]]}"#).is_err());
        let back = serde_json::to_string(&d).unwrap();
        assert_eq!(back, r#"{"n":4,"sets":[[1],[2,3,4]]}"#);
    }

    fn arb_domain() -> impl Strategy<Value = (usize, Vec<NodeSet>)> {
        (1usize..=6).prop_flat_map(|n| {
            let full = (1u64 << n) - 1;
            (Just(n), proptest::collection::vec((0..=full).prop_map(NodeSet::from_bits), 0..5))
        })
    }

    proptest! {
        #[test]
        fn normalization_preserves_closure((n, gens) in arb_domain()) {
            let d = FaultDomain::new(n, gens.clone()).unwrap();
            let raw = if gens.is_empty() { vec![NodeSet::EMPTY] } else { gens };
            let mut expect = closure_brute(n, &raw);
            expect.sort_by_key(|s| s.bits());
            let mut got = d.feasible_sets();
            got.sort_by_key(|s| s.bits());
            prop_assert_eq!(&got, &expect);
            for s in NodeSet::full(n).subsets() {
                prop_assert_eq!(d.is_feasible(s).unwrap(), expect.contains(&s));
            }
            // antichain: no generator inside another
            for (a, x) in d.sets().iter().enumerate() {
                for (b, y) in d.sets().iter().enumerate() {
                    prop_assert!(a == b || !x.is_subset(*y));
                }
            }
        }

        #[test]
        fn feasibility_is_downward_closed((n, gens) in arb_domain()) {
            let d = FaultDomain::new(n, gens).unwrap();
            for s in NodeSet::full(n).subsets() {
                if d.is_feasible(s).unwrap() {
                    for t in s.subsets() {
                        prop_assert!(d.is_feasible(t).unwrap());
                    }
                }
            }
        }

        #[test]
        fn f_total_is_cardinality(n in 1usize..=6, f in 0usize..=6) {
            prop_assume!(f <= n);
            let d = FaultDomain::f_total(n, f).unwrap();
            for s in NodeSet::full(n).subsets() {
                prop_assert_eq!(d.is_feasible(s).unwrap(), s.len() <= f);
            }
        }
    }
}
