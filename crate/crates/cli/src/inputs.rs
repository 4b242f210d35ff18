//! Loading graphs and fault domains, and parsing the small list syntaxes
//! accepted on the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use iabc::{DirectedGraph, FaultDomain, NodeId, NodeSet};

/// Exactly one way of describing the fault domain.
#[derive(Args, Clone, Debug, Default)]
#[group(multiple = false)]
pub struct DomainArgs {
    /// Fault domain JSON file: {"n": 4, "sets": [[1], [2, 3, 4]]}
    #[arg(long, value_name = "FILE")]
    pub domain: Option<PathBuf>,
    /// At most K faulty nodes in total
    #[arg(long, value_name = "K")]
    pub f_total: Option<usize>,
    /// At most K faulty in-neighbors at every node
    #[arg(long, value_name = "K")]
    pub f_local: Option<usize>,
    /// At most floor(P * in-degree) faulty in-neighbors at every node
    #[arg(long, value_name = "P")]
    pub f_fraction: Option<f64>,
}

impl DomainArgs {
    pub fn is_given(&self) -> bool {
        self.domain.is_some() || self.f_total.is_some() || self.f_local.is_some() || self.f_fraction.is_some()
    }

    /// Builds the domain for `g`. File errors are parse errors; bad bounds
    /// are reported as invalid input.
    pub fn resolve(&self, g: &DirectedGraph) -> Result<FaultDomain, crate::Failure> {
        let n = g.node_count();
        let d = if let Some(path) = &self.domain {
            let d = load_domain(path).map_err(crate::Failure::Parse)?;
            if d.universe_size() != n {
                return Err(crate::Failure::Parse(anyhow::anyhow!(
                    "{} describes {} nodes but the graph has {n}",
                    path.display(),
                    d.universe_size()
                )));
            }
            d
        } else if let Some(k) = self.f_total {
            FaultDomain::f_total(n, k).map_err(|e| crate::Failure::Parse(e.into()))?
        } else if let Some(k) = self.f_local {
            FaultDomain::f_local(g, k).map_err(|e| crate::Failure::Parse(e.into()))?
        } else if let Some(p) = self.f_fraction {
            FaultDomain::f_fraction(g, p).map_err(|e| crate::Failure::Parse(e.into()))?
        } else {
            return Err(crate::Failure::Parse(anyhow::anyhow!(
                "a fault domain is required: --domain, --f-total, --f-local or --f-fraction"
            )));
        };
        Ok(d)
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_graph(path: &Path) -> Result<DirectedGraph> {
    DirectedGraph::from_json(&read(path)?).with_context(|| format!("{} is not a valid graph file", path.display()))
}

pub fn load_domain(path: &Path) -> Result<FaultDomain> {
    FaultDomain::from_json(&read(path)?).with_context(|| format!("{} is not a valid fault-domain file", path.display()))
}

/// `"{1,3}"`, `"1,3"`, `"1 3"` or `""`.
pub fn parse_node_set(text: &str, n: usize) -> Result<NodeSet> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let mut set = NodeSet::EMPTY;
    for tok in inner.split([',', ' ']).filter(|t| !t.is_empty()) {
        let id: NodeId = tok.parse().with_context(|| format!("bad node id `{tok}`"))?;
        if !(1..=n).contains(&id) {
            bail!("node {id} is outside 1..={n}");
        }
        set.insert(id);
    }
    Ok(set)
}

/// Comma- or space-separated reals, one per node.
pub fn parse_inputs(text: &str, n: usize) -> Result<Vec<f64>> {
    let values = text
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad input value `{t}`")))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        bail!("expected {n} input values, got {}", values.len());
    }
    Ok(values)
}

/// Node `i` starts at `i - 1`.
pub fn default_inputs(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_sets() {
        assert_eq!(parse_node_set("{1,3}", 4).unwrap(), NodeSet::from([1, 3]));
        assert_eq!(parse_node_set("2 4", 4).unwrap(), NodeSet::from([2, 4]));
        assert_eq!(parse_node_set("", 4).unwrap(), NodeSet::EMPTY);
        assert_eq!(parse_node_set("{}", 4).unwrap(), NodeSet::EMPTY);
        assert!(parse_node_set("5", 4).is_err());
        assert!(parse_node_set("x", 4).is_err());
    }

    #[test]
    fn inputs() {
        assert_eq!(parse_inputs("0, 1.5,-2", 3).unwrap(), vec![0.0, 1.5, -2.0]);
        assert!(parse_inputs("0,1", 3).is_err());
        assert_eq!(default_inputs(3), vec![0.0, 1.0, 2.0]);
    }
}
