//! Iterative approximate Byzantine consensus under generalized fault domains.
//!
//! - [`graph`]: directed graphs, strongly connected components, condensation.
//! - [`fault`]: fault domains and per-node views of them.
//! - [`reduction`]: reduced graphs and the single-source-component condition.
//! - [`engine`]: round-based simulation of the trimmed-mean update with
//!   pluggable faulty behaviour.
//! - [`ergodicity`]: per-round transition matrices and convergence
//!   certificates.
//!
//! ```
//! use iabc::{check_condition, DirectedGraph, FaultDomain};
//!
//! let k4 = DirectedGraph::complete(4)?;
//! assert!(check_condition(&k4, &FaultDomain::f_total(4, 1)?)?.holds);
//! let k3 = DirectedGraph::complete(3)?;
//! assert!(!check_condition(&k3, &FaultDomain::f_total(3, 1)?)?.holds);
//! # Ok::<(), iabc::Error>(())
//! ```

pub mod engine;
pub mod ergodicity;
pub mod error;
pub mod fault;
pub mod graph;
pub mod json;
pub mod nodeset;
pub mod reduction;

pub use engine::{run, run_with, AdversarySpec, Execution, ExecutionConfig, ExecutionTrace, RoundRecord};
pub use ergodicity::{certify_convergence, Certificate};
pub use error::{Error, Result};
pub use fault::{FaultDomain, LocalFaultView};
pub use graph::{Condensation, DirectedGraph};
pub use nodeset::{NodeId, NodeSet};
pub use reduction::{check_condition, enumerate_reduced, ConditionReport, ReducedGraph, Witness};
