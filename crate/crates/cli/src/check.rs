use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use iabc::check_condition;

use crate::inputs::{load_graph, DomainArgs};
use crate::output::emit_json;
use crate::{Failure, Outcome};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Graph JSON file: {"n": 4, "edges": [[1, 2], ...]}
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(a: CheckArgs) -> Outcome {
    let g = load_graph(&a.graph).map_err(Failure::Parse)?;
    let d = a.domain.resolve(&g)?;
    let report = check_condition(&g, &d).map_err(|e| Failure::Parse(e.into()))?;
    log::info!(
        "{} fault sets, {} reduced graphs examined",
        report.fault_sets_examined,
        report.reduced_graph_count
    );
    emit_json(&report, a.out.as_deref())?;
    match &report.witness {
        None => Ok(()),
        Some(w) => Err(Failure::Negative(anyhow!(
            "condition fails: F = {}, L = {}, R = {}",
            w.fault_set,
            w.left,
            w.right
        ))),
    }
}
