use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use iabc::ergodicity::Status;
use iabc::{certify_convergence, check_condition, AdversarySpec, Error, ExecutionConfig, ExecutionTrace, NodeSet};
use rayon::prelude::*;
use serde::Serialize;

use crate::inputs::{default_inputs, load_graph, parse_inputs, DomainArgs};
use crate::output::{derive_seed, emit_json, to_json, write_file, RunManifest};
use crate::{Failure, Outcome};

const DEFAULT_ADVERSARIES: [&str; 5] = ["silent", "constant(10)", "random(-5,5)", "splitter", "mimic"];

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Graph JSON file
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Adversary to include; repeat for several
    /// [default: silent, constant(10), random(-5,5), splitter, mimic]
    #[arg(long = "adversary", value_name = "SPEC")]
    pub adversaries: Vec<String>,
    /// One input per node [default: node i starts at i - 1]
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub inputs: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Master seed; each run gets its own seed derived from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub default_value: f64,
    /// Certify every run (needs enough rounds for at least one block)
    #[arg(long)]
    pub certify: bool,
    /// Directory for summary.json and manifest.json [default: summary to stdout]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunSummary {
    fault_set: NodeSet,
    adversary: String,
    seed: u64,
    converged_at: Option<usize>,
    final_spread: f64,
    valid: bool,
    /// `pass`, `fail`, `not_applicable` or `too_short`; absent unless
    /// `--certify` was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<&'static str>,
}

#[derive(Serialize)]
struct Summary {
    condition_holds: bool,
    rounds: usize,
    runs: Vec<RunSummary>,
    all_converged: bool,
    all_valid: bool,
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    base: &'a ExecutionConfig,
    fault_sets: Vec<NodeSet>,
    adversaries: Vec<String>,
    certify: bool,
}

/// Every fault-free state stays within the range of fault-free inputs.
fn is_valid(trace: &ExecutionTrace) -> bool {
    let init = trace.initial_states.values();
    let lo = init.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = init.copied().fold(f64::NEG_INFINITY, f64::max);
    trace.records.iter().all(|r| r.states_after.values().all(|&v| lo <= v && v <= hi))
}

fn certificate_status(trace: &ExecutionTrace) -> Result<&'static str, Error> {
    match certify_convergence(trace, &trace.config.domain) {
        Ok(c) if !c.passed => Ok("fail"),
        Ok(c) if c.properties.iter().any(|p| p.status == Status::NotApplicable) => Ok("not_applicable"),
        Ok(_) => Ok("pass"),
        Err(Error::TraceTooShort { .. }) => Ok("too_short"),
        Err(e) => Err(e),
    }
}

pub fn run(a: SweepArgs) -> Outcome {
    let g = load_graph(&a.graph).map_err(Failure::Parse)?;
    let n = g.node_count();
    let d = a.domain.resolve(&g)?;
    let inputs = match &a.inputs {
        Some(s) => parse_inputs(s, n).map_err(Failure::Parse)?,
        None => default_inputs(n),
    };
    let names: Vec<String> = if a.adversaries.is_empty() {
        DEFAULT_ADVERSARIES.iter().map(|s| s.to_string()).collect()
    } else {
        a.adversaries.clone()
    };
    let specs = names
        .iter()
        .map(|s| s.parse::<AdversarySpec>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Parse(e.into()))?;
    let holds = check_condition(&g, &d).map_err(|e| Failure::Parse(e.into()))?.holds;

    let base = ExecutionConfig::new(g.clone(), d.clone(), inputs)
        .with_rounds(a.rounds)
        .with_epsilon(a.eps)
        .with_seed(a.seed)
        .with_default_value(a.default_value);
    base.validate().map_err(|e| Failure::Parse(e.into()))?;
    let fault_sets: Vec<NodeSet> = d.sets().iter().copied().filter(|f| f.len() < n).collect();
    let cells: Vec<(usize, NodeSet, &AdversarySpec)> = fault_sets
        .iter()
        .flat_map(|&f| specs.iter().map(move |s| (f, s)))
        .enumerate()
        .map(|(k, (f, s))| (k, f, s))
        .collect();
    log::info!("{} runs over {} fault sets", cells.len(), fault_sets.len());

    let runs = cells
        .par_iter()
        .map(|&(k, f, spec)| {
            let seed = derive_seed(a.seed, k as u64);
            let cfg = base.clone().with_faulty(f).with_adversary(spec.clone()).with_seed(seed);
            let trace = iabc::run(cfg)?;
            let certificate = if a.certify { Some(certificate_status(&trace)?) } else { None };
            Ok(RunSummary {
                fault_set: f,
                adversary: spec.to_string(),
                seed,
                converged_at: trace.converged_at,
                final_spread: trace.final_spread,
                valid: is_valid(&trace),
                certificate,
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| Failure::Parse(anyhow!(e)))?;

    let summary = Summary {
        condition_holds: holds,
        rounds: a.rounds,
        all_converged: runs.iter().all(|r| r.converged_at.is_some()),
        all_valid: runs.iter().all(|r| r.valid),
        runs,
    };
    match &a.out {
        None => emit_json(&summary, None)?,
        Some(dir) => {
            let summary_path = dir.join("summary.json");
            write_file(&summary_path, &to_json(&summary)?)?;
            let config = SweepConfig { base: &base, fault_sets, adversaries: names, certify: a.certify };
            let mut manifest = RunManifest::new("sweep", a.seed, config);
            manifest.inputs.insert("graph".into(), a.graph.clone());
            if let Some(p) = &a.domain.domain {
                manifest.inputs.insert("domain".into(), p.clone());
            }
            manifest.outputs = vec![summary_path];
            write_file(&dir.join("manifest.json"), &to_json(&manifest)?)?;
        }
    }
    Ok(())
}
