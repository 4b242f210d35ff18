use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use iabc::ergodicity::Status;
use iabc::{certify_convergence, Error, ExecutionTrace};

use crate::inputs::{read, DomainArgs};
use crate::output::emit_json;
use crate::{Failure, Outcome};

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Trace JSON written by `simulate`
    #[arg(long, value_name = "FILE")]
    pub trace: PathBuf,
    /// Fault domain to certify against [default: the one recorded in the trace]
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Write the certificate here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(a: CertifyArgs) -> Outcome {
    let text = read(&a.trace).map_err(Failure::Parse)?;
    let trace = ExecutionTrace::from_json(&text).map_err(|e| Failure::Parse(anyhow!("{}: {e}", a.trace.display())))?;
    let d = if a.domain.is_given() {
        a.domain.resolve(&trace.config.graph)?
    } else {
        trace.config.domain.clone()
    };
    let cert = match certify_convergence(&trace, &d) {
        Ok(c) => c,
        Err(e @ Error::TraceTooShort { .. }) => return Err(Failure::Negative(e.into())),
        Err(e @ Error::Infeasible { .. }) => return Err(Failure::Negative(e.into())),
        Err(e) => return Err(Failure::Parse(e.into())),
    };
    emit_json(&cert, a.out.as_deref())?;
    // Not-applicable checks (the condition fails for F) leave convergence
    // uncertified, so only an all-pass certificate exits 0.
    let open: Vec<String> = cert
        .properties
        .iter()
        .filter(|p| p.status != Status::Pass)
        .map(|p| format!("{} ({:?})", p.name, p.status))
        .collect();
    if open.is_empty() {
        Ok(())
    } else {
        Err(Failure::Negative(anyhow!("not certified: {}", open.join(", "))))
    }
}
