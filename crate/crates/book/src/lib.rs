//! Compiles the guide in `book/` so that every Rust listing in it runs under
//! `cargo test --doc`. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/discrete-problem.md")]
pub mod discrete_problem {}

#[doc = include_str!("../../../book/src/eigenpair.md")]
pub mod eigenpair {}

#[doc = include_str!("../../../book/src/oracles.md")]
pub mod oracles {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
