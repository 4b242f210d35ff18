use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use iabc::engine::SplitterSpec;
use iabc::{AdversarySpec, ConditionReport, DirectedGraph, Error, ExecutionConfig, ExecutionTrace, NodeSet};
use serde::Serialize;

use crate::inputs::{default_inputs, load_graph, parse_inputs, parse_node_set, read, DomainArgs};
use crate::output::{emit_json, to_json, trace_csv, write_file, RunManifest};
use crate::{Failure, Outcome};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Graph JSON file
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Faulty nodes, e.g. "{2,4}"; must be a feasible fault set
    #[arg(long, value_name = "SET")]
    pub faulty: Option<String>,
    /// Adversary strategy, see `iabc adversaries` [default: silent]
    #[arg(long, value_name = "SPEC")]
    pub adversary: Option<String>,
    /// One input per node, comma separated [default: node i starts at i - 1]
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub inputs: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    /// Convergence threshold on the fault-free spread
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Value substituted for a missing message
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub default_value: f64,
    /// Take F, L and R from a failing `check` report and set up the splitter
    /// run on them (inputs 0 on L, 1 on R, 0.5 elsewhere)
    #[arg(long, value_name = "REPORT")]
    pub from_witness: Option<PathBuf>,
    /// Directory for trace.json, trace.csv and manifest.json
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary<'a> {
    rounds: usize,
    converged_at: Option<usize>,
    final_spread: f64,
    outputs: &'a [PathBuf],
}

/// Splitter setup derived from a witness.
struct WitnessRun {
    faulty: NodeSet,
    adversary: AdversarySpec,
    inputs: Vec<f64>,
}

fn witness_run(path: &Path, n: usize) -> anyhow::Result<WitnessRun> {
    let report: ConditionReport = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not a check report", path.display()))?;
    let w = report.witness.ok_or_else(|| anyhow!("{} has no witness: the condition holds", path.display()))?;
    if w.left.is_empty() || w.right.is_empty() {
        return Err(anyhow!("witness has fewer than two source components to split"));
    }
    let inputs = (1..=n)
        .map(|i| {
            if w.left.contains(i) {
                0.0
            } else if w.right.contains(i) {
                1.0
            } else {
                0.5
            }
        })
        .collect();
    let adversary = AdversarySpec::Splitter(SplitterSpec {
        left: Some(w.left),
        right: Some(w.right),
        low: Some(0.0),
        high: Some(1.0),
        below: Some(-1.0),
        above: Some(2.0),
    });
    Ok(WitnessRun { faulty: w.fault_set, adversary, inputs })
}

/// Infeasible fault sets are a negative answer, anything else is bad input.
fn classify(e: Error) -> Failure {
    match e {
        Error::Infeasible { .. } => Failure::Negative(e.into()),
        e => Failure::Parse(e.into()),
    }
}

pub fn build_config(a: &SimulateArgs, g: DirectedGraph) -> Result<ExecutionConfig, Failure> {
    let n = g.node_count();
    let d = a.domain.resolve(&g)?;
    let from = match &a.from_witness {
        Some(p) => Some(witness_run(p, n).map_err(Failure::Parse)?),
        None => None,
    };
    let faulty = match (&a.faulty, &from) {
        (Some(s), _) => parse_node_set(s, n).map_err(Failure::Parse)?,
        (None, Some(w)) => w.faulty,
        (None, None) => NodeSet::EMPTY,
    };
    let adversary = match (&a.adversary, &from) {
        (Some(s), _) => s.parse::<AdversarySpec>().map_err(|e| Failure::Parse(e.into()))?,
        (None, Some(w)) => w.adversary.clone(),
        (None, None) => AdversarySpec::Silent,
    };
    let inputs = match (&a.inputs, &from) {
        (Some(s), _) => parse_inputs(s, n).map_err(Failure::Parse)?,
        (None, Some(w)) => w.inputs.clone(),
        (None, None) => default_inputs(n),
    };
    let cfg = ExecutionConfig::new(g, d, inputs)
        .with_faulty(faulty)
        .with_adversary(adversary)
        .with_rounds(a.rounds)
        .with_epsilon(a.eps)
        .with_seed(a.seed)
        .with_default_value(a.default_value);
    cfg.validate().map_err(classify)?;
    Ok(cfg)
}

pub fn run(a: SimulateArgs) -> Outcome {
    let g = load_graph(&a.graph).map_err(Failure::Parse)?;
    let cfg = build_config(&a, g)?;
    let trace: ExecutionTrace = iabc::run(cfg.clone()).map_err(classify)?;

    let trace_path = a.out.join("trace.json");
    let csv_path = a.out.join("trace.csv");
    let manifest_path = a.out.join("manifest.json");
    write_file(&trace_path, &to_json(&trace)?)?;
    write_file(&csv_path, &trace_csv(&trace))?;

    let mut manifest = RunManifest::new("simulate", cfg.seed, &cfg);
    manifest.inputs.insert("graph".into(), a.graph.clone());
    if let Some(p) = &a.domain.domain {
        manifest.inputs.insert("domain".into(), p.clone());
    }
    if let Some(p) = &a.from_witness {
        manifest.inputs.insert("witness".into(), p.clone());
    }
    manifest.outputs = vec![trace_path, csv_path];
    write_file(&manifest_path, &to_json(&manifest)?)?;

    let mut outputs = manifest.outputs.clone();
    outputs.push(manifest_path);
    log::info!("{} rounds simulated", trace.rounds());
    emit_json(
        &Summary {
            rounds: trace.rounds(),
            converged_at: trace.converged_at,
            final_spread: trace.final_spread,
            outputs: &outputs,
        },
        None,
    )?;
    Ok(())
}
