//! Engine for a multi-agent epistemic action language: Kripke-state
//! semantics, a domain/query language, the transition function, update
//! models, initial-state generation and a small CLI front end.

pub mod cli;
pub mod init;
pub mod kripke;
pub mod lang;
pub mod logic;
pub mod transition;
pub mod testgen;
pub mod update;
