//! Boolean connectivity matrices of reduced graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::{NodeId, NodeSet};
use crate::reduction::ReducedGraph;

use super::transition::TransitionMatrix;

/// Slack allowed when comparing `β·H_ij` against `M_ij`.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// Square 0/1 matrix; row `k` is a bitmask over column indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoolMatrix {
    /// Node id of each row/column.
    pub labels: Vec<NodeId>,
    rows: Vec<u64>,
}

impl BoolMatrix {
    pub fn zeros(labels: Vec<NodeId>) -> Self {
        let rows = vec![0; labels.len()];
        BoolMatrix { labels, rows }
    }

    pub fn identity(labels: Vec<NodeId>) -> Self {
        let rows = (0..labels.len()).map(|k| 1u64 << k).collect();
        BoolMatrix { labels, rows }
    }

    pub fn ones(labels: Vec<NodeId>) -> Self {
        let full = mask(labels.len());
        let rows = vec![full; labels.len()];
        BoolMatrix { labels, rows }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        if value {
            self.rows[r] |= 1 << c;
        } else {
            self.rows[r] &= !(1 << c);
        }
    }

    /// Boolean product `self · other`.
    pub fn mul(&self, other: &BoolMatrix) -> Result<BoolMatrix> {
        if self.labels != other.labels {
            return Err(Error::Dimension(format!(
                "cannot multiply matrices over {:?} and {:?}",
                self.labels, other.labels
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|&r| NodeSet::from_bits(r).iter().fold(0, |acc, k| acc | other.rows[k - 1]))
            .collect();
        Ok(BoolMatrix { labels: self.labels.clone(), rows })
    }

    pub fn pow(&self, power: usize) -> BoolMatrix {
        let mut acc = BoolMatrix::identity(self.labels.clone());
        for _ in 0..power {
            acc = acc.mul(self).expect("same labels");
        }
        acc
    }

    /// Index of the first column whose entries are all `true`.
    pub fn first_full_column(&self) -> Option<usize> {
        let all = self.rows.iter().fold(mask(self.order()), |acc, &r| acc & r);
        (all != 0).then(|| all.trailing_zeros() as usize)
    }
}

fn mask(k: usize) -> u64 {
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// `H_ij = 1` iff `(j, i)` is a link of `h` or `i = j`, over `V - F` in
/// ascending order.
pub fn connectivity_matrix(h: &ReducedGraph) -> BoolMatrix {
    let labels = h.nodes().to_vec();
    let mut m = BoolMatrix::identity(labels.clone());
    for (r, &i) in labels.iter().enumerate() {
        for j in h.in_neighbors(i) {
            let c = labels.iter().position(|&x| x == j).expect("in-neighbor survives");
            m.set(r, c, true);
        }
    }
    m
}

/// Whether `H^power` has a column of all ones, and the node id of the first
/// such column.
pub fn has_nonzero_column(h: &BoolMatrix, power: usize) -> Result<(bool, Option<NodeId>)> {
    if power == 0 {
        return Err(Error::input("power must be at least 1"));
    }
    let col = h.pow(power).first_full_column().map(|c| h.labels[c]);
    Ok((col.is_some(), col))
}

/// `β·H_ij <= M_ij` for all entries, with [`DOMINANCE_SLACK`].
pub fn dominates(m: &TransitionMatrix, h: &BoolMatrix, beta: f64) -> Result<bool> {
    if m.nodes != h.labels {
        return Err(Error::Dimension(format!(
            "transition matrix over {:?}, connectivity matrix over {:?}",
            m.nodes, h.labels
        )));
    }
    let k = h.order();
    Ok((0..k).all(|r| (0..k).all(|c| !h.get(r, c) || beta <= m.entries[(r, c)] + DOMINANCE_SLACK)))
}
