//! Configuration-driven front end for the hardylab diagnostics.
//!
//! A scenario is a strict TOML file naming a domain, a composition
//! symbol, optional coefficient fields, and a list of diagnostics; see
//! [`config`] for the schema. [`scenario`] builds and runs it into a
//! [`report::RunReport`], and [`emit`] turns a report into JSON, CSV, or
//! plot-ready files. The binary wires these into the `run`, `selftest`,
//! and `emit` subcommands.

pub mod config;
pub mod emit;
pub mod report;
pub mod scenario;
