//! Book listings, compiled as doc-tests so the guide cannot drift from the
//! library. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/fault-domains.md")]
pub mod fault_domains {}
#[doc = include_str!("../../../book/src/condition.md")]
pub mod condition {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/certification.md")]
pub mod certification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
