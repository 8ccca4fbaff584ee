//! Synthetic instances, a brute-force reference matcher and the worked
//! examples used by the test suites.
//!
//! Nothing here is needed to run the matcher; it exists so the optimized
//! engine can be checked against something simple enough to trust.

pub mod fixtures;
mod generator;
mod oracle;

pub use generator::{generate, law_instance, GeneratedInstance, GeneratorParams, LawInstance};
pub use oracle::{oracle_match, oracle_sources};
