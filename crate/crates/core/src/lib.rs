//! Multilateral matching with multi-signer contracts.
//!
//! A [`Market`] holds agents, contracts signed by at least two agents, and a
//! strict ranked preference over portfolios for every agent. On top of it:
//!
//! * [`stability`] audits outcomes for individual rationality, the three
//!   blocking notions and constrained efficiency, returning witnesses;
//! * [`conditions`] certifies or refutes preference conditions
//!   (complementarity, scale economies and its variants);
//! * [`csd`] runs the constrained serial dictatorship with a full trace;
//! * [`agent_target`] compiles agent-target specifications into markets.
//!
//! Every engine is exhaustive and bounded by [`MAX_CONTRACTS`] and
//! [`MAX_AGENTS`]. The scans run on rayon when the `parallel` feature is on.

pub mod agent_target;
pub mod bitset;
pub mod cli;
pub mod conditions;
pub mod csd;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod market;
pub mod random;
pub mod stability;
pub mod text;

pub use agent_target::AtmSpec;
pub use bitset::{AgentSet, ContractSet};
pub use conditions::{Condition, ConditionReport, ConditionTable, Counterexample};
pub use csd::{csd, csd_feasible_extensions, AgentOrder, CsdStep, CsdTrace};
pub use error::{Diagnostic, Error, Result};
pub use exec::Exec;
pub use market::{AgentId, Contract, Market, Preference, Preferred, MAX_AGENTS, MAX_CONTRACTS};
pub use stability::{Auditor, BlockKind, BlockWitness, StabilityReport};
pub use text::{market_to_text, parse_market};
