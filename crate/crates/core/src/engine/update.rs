//! The update rule executed by every fault-free node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::LocalFaultView;
use crate::nodeset::{NodeId, NodeSet};

/// What node `i` did with the values it received in one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimRecord {
    pub node: NodeId,
    /// `D`: senders sorted by received value, ties by ascending id.
    pub order: Vec<NodeId>,
    /// Received values in the order of `order`.
    pub values: Vec<f64>,
    /// Number of smallest values dropped.
    pub f1: usize,
    /// Number of largest values dropped.
    pub f2: usize,
    /// `N_i*[t]`: senders whose values survived.
    pub survivors: NodeSet,
    /// Equal weight `a_i = 1 / |N_i*[t]|`.
    pub weight: f64,
}

impl TrimRecord {
    /// Senders of the `f1` dropped smallest values.
    pub fn low_trimmed(&self) -> NodeSet {
        self.order[..self.f1].iter().copied().collect()
    }

    /// Senders of the `f2` dropped largest values.
    pub fn high_trimmed(&self) -> NodeSet {
        self.order[self.order.len() - self.f2..].iter().copied().collect()
    }

    /// Survivors in sorted order.
    pub fn surviving_order(&self) -> &[NodeId] {
        &self.order[self.f1..self.order.len() - self.f2]
    }

    /// Value received from `node`, if it sent one this round.
    pub fn value_of(&self, node: NodeId) -> Option<f64> {
        self.order.iter().position(|&j| j == node).map(|p| self.values[p])
    }
}

/// `(f1, f2)`: the longest prefix and suffix of `order` that fit inside one
/// feasible subset of `N_i^-`. Node `i` itself is never trimmed.
pub fn trim_bounds(i: NodeId, order: &[NodeId], view: &LocalFaultView) -> Result<(usize, usize)> {
    let inn = view.in_neighbors;
    if order.len() != inn.len() + 1 {
        return Err(Error::input(format!(
            "ordering for node {i} has {} entries, expected {}",
            order.len(),
            inn.len() + 1
        )));
    }
    let mut seen = NodeSet::EMPTY;
    for &j in order {
        if j == 0 || (j != i && !inn.contains(j)) || seen.contains(j) {
            return Err(Error::input(format!(
                "ordering for node {i} must be a permutation of N_i^- ∪ {{i}}, got {order:?}"
            )));
        }
        seen.insert(j);
    }

    // feasibility is downward closed, so the first failing prefix ends the scan
    let scan = |iter: &mut dyn Iterator<Item = &NodeId>| {
        let mut acc = NodeSet::EMPTY;
        let mut k = 0;
        for &j in iter {
            if j == i {
                break;
            }
            acc.insert(j);
            if !view.covers(acc) {
                break;
            }
            k += 1;
        }
        k
    };
    let f1 = scan(&mut order.iter());
    let f2 = scan(&mut order.iter().rev());
    Ok((f1, f2))
}

/// One update step at node `i`: sort the received values, trim with
/// [`trim_bounds`], and average the survivors with equal weight.
///
/// `received` must hold exactly one value per member of `N_i^- ∪ {i}`.
pub fn update_step(i: NodeId, received: &[(NodeId, f64)], view: &LocalFaultView) -> Result<(f64, TrimRecord)> {
    if view.node != i {
        return Err(Error::input(format!("local view is for node {}, not {i}", view.node)));
    }
    let mut sorted: Vec<(NodeId, f64)> = received.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let order: Vec<NodeId> = sorted.iter().map(|p| p.0).collect();
    let values: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let (f1, f2) = trim_bounds(i, &order, view)?;

    let kept = &values[f1..values.len() - f2];
    let count = kept.len();
    let weight = 1.0 / count as f64;
    let lo = kept[0];
    let hi = kept[count - 1];
    // shifted mean: exact when all survivors agree
    let mean = lo + kept.iter().map(|w| w - lo).sum::<f64>() / count as f64;
    let next = mean.clamp(lo, hi);

    let survivors = order[f1..order.len() - f2].iter().copied().collect();
    Ok((next, TrimRecord { node: i, order, values, f1, f2, survivors, weight }))
}
