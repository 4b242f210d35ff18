use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use iabc::{DirectedGraph, FaultDomain, NodeSet};

use crate::output::emit_json;
use crate::{Failure, Outcome};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// complete | cycle | path | random(P,SEED) | random(P) | four-node-example
    pub family: Family,
    /// Number of nodes (the four-node example is always 4)
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for `random(P)` when the family does not carry one
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the graph here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the family's fault domain (four-node example only)
    #[arg(long, value_name = "FILE")]
    pub domain_out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Complete,
    Cycle,
    Path,
    Random { p: f64, seed: Option<u64> },
    /// K4 with the domain {{1}, {2, 3, 4}}: node 1 alone, or any of 2, 3, 4
    /// together, may fail.
    FourNodeExample,
}

impl FromStr for Family {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        match s {
            "complete" => return Ok(Family::Complete),
            "cycle" => return Ok(Family::Cycle),
            "path" => return Ok(Family::Path),
            "four-node-example" => return Ok(Family::FourNodeExample),
            _ => {}
        }
        let args = s
            .strip_prefix("random(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| anyhow!("unknown graph family `{s}`"))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let p: f64 = parts[0].parse().with_context(|| format!("bad edge probability `{}`", parts[0]))?;
        let seed = match parts.get(1) {
            Some(t) => Some(t.parse().with_context(|| format!("bad seed `{t}`"))?),
            None => None,
        };
        if parts.len() > 2 {
            bail!("random takes at most two arguments: random(P,SEED)");
        }
        Ok(Family::Random { p, seed })
    }
}

pub fn run(a: GenerateArgs) -> Outcome {
    let n = match (&a.family, a.n) {
        (Family::FourNodeExample, None | Some(4)) => 4,
        (Family::FourNodeExample, Some(n)) => {
            return Err(Failure::Parse(anyhow!("the four-node example has 4 nodes, not {n}")))
        }
        (_, Some(n)) => n,
        (_, None) => return Err(Failure::Parse(anyhow!("--n is required for this family"))),
    };
    if n < 2 {
        return Err(Failure::Negative(anyhow!("need at least 2 nodes, got {n}")));
    }
    if a.domain_out.is_some() && a.family != Family::FourNodeExample {
        return Err(Failure::Parse(anyhow!("--domain-out is only available for the four-node example")));
    }
    let g = match a.family {
        Family::Complete | Family::FourNodeExample => DirectedGraph::complete(n),
        Family::Cycle => DirectedGraph::cycle(n),
        Family::Path => DirectedGraph::path(n),
        Family::Random { p, seed } => DirectedGraph::random(n, p, seed.unwrap_or(a.seed)),
    }
    .map_err(|e| Failure::Parse(e.into()))?;
    emit_json(&g, a.out.as_deref())?;
    if let Some(path) = &a.domain_out {
        let d = FaultDomain::new(4, [NodeSet::from([1]), NodeSet::from([2, 3, 4])])
            .map_err(|e| Failure::Parse(e.into()))?;
        emit_json(&d, Some(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        assert_eq!("cycle".parse::<Family>().unwrap(), Family::Cycle);
        assert_eq!("four-node-example".parse::<Family>().unwrap(), Family::FourNodeExample);
        assert_eq!("random(0.5,9)".parse::<Family>().unwrap(), Family::Random { p: 0.5, seed: Some(9) });
        assert_eq!("random(0)".parse::<Family>().unwrap(), Family::Random { p: 0.0, seed: None });
        assert!("random(0.5,1,2)".parse::<Family>().is_err());
        assert!("star".parse::<Family>().is_err());
    }
}
