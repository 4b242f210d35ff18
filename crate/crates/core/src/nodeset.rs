//! Compact sets of 1-based node ids.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Node identifier. Ids are 1-based and dense: a graph on `n` nodes uses `1..=n`.
pub type NodeId = usize;

/// Largest node count representable by [`NodeSet`].
pub const MAX_NODES: usize = 64;

/// A set of node ids stored as a 64-bit mask (bit `i - 1` holds node `i`).
///
/// Serialized as a sorted JSON array of ids.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// All nodes `1..=n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_NODES);
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(node: NodeId) -> Self {
        debug_assert!((1..=MAX_NODES).contains(&node));
        NodeSet(1u64 << (node - 1))
    }

    pub fn contains(self, node: NodeId) -> bool {
        (1..=MAX_NODES).contains(&node) && self.0 & (1u64 << (node - 1)) != 0
    }

    pub fn insert(&mut self, node: NodeId) {
        self.0 |= NodeSet::singleton(node).0;
    }

    pub fn remove(&mut self, node: NodeId) {
        self.0 &= !NodeSet::singleton(node).0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<NodeId> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize + 1)
        }
    }

    /// Largest member id, or 0 for the empty set.
    pub fn max_id(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Members in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<NodeId> {
        self.iter().collect()
    }

    /// Lexicographic comparison of the ascending id sequences.
    pub fn lex_cmp(self, other: NodeSet) -> Ordering {
        self.iter().cmp(other.iter())
    }

    /// Every subset of `self`, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = NodeSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(NodeSet(cur))
        })
    }
}

#[derive(Clone, Debug)]
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for NodeSet {
    type Item = NodeId;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<NodeId> for NodeSet {
    /// Panics on ids outside `1..=64`; validated constructors check ranges first.
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        let mut s = NodeSet::EMPTY;
        for id in iter {
            assert!((1..=MAX_NODES).contains(&id), "node id {id} out of range");
            s.insert(id);
        }
        s
    }
}

impl<const N: usize> From<[NodeId; N]> for NodeSet {
    fn from(ids: [NodeId; N]) -> Self {
        ids.into_iter().collect()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, id) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids = Vec::<NodeId>::deserialize(deserializer)?;
        let mut s = NodeSet::EMPTY;
        for id in ids {
            if !(1..=MAX_NODES).contains(&id) {
                return Err(serde::de::Error::custom(format!(
                    "node id {id} outside 1..={MAX_NODES}"
                )));
            }
            s.insert(id);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let s = NodeSet::from([1, 3, 4]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(3) && !s.contains(2) && !s.contains(0) && !s.contains(65));
        assert_eq!(s.to_vec(), vec![1, 3, 4]);
        assert_eq!(s.first(), Some(1));
        assert_eq!(s.max_id(), 4);
        assert!(NodeSet::from([3, 4]).is_subset(s));
        assert_eq!(format!("{s}"), "{1,3,4}");
        assert_eq!(NodeSet::full(64).len(), 64);
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let s = NodeSet::from([2, 5, 7]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        assert_eq!(NodeSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn lex_order() {
        let a = NodeSet::from([1, 4]);
        let b = NodeSet::from([2]);
        assert_eq!(a.lex_cmp(b), Ordering::Less);
        assert_eq!(NodeSet::EMPTY.lex_cmp(a), Ordering::Less);
        assert_eq!(NodeSet::from([1]).lex_cmp(a), Ordering::Less);
    }

    #[test]
    fn serde_round_trip() {
        let s = NodeSet::from([2, 9]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, "[2,9]");
        assert_eq!(serde_json::from_str::<NodeSet>(&j).unwrap(), s);
        assert!(serde_json::from_str::<NodeSet>("[0]").is_err());
    }
}
