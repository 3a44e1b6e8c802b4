//! Randomized instance generation and one verification suite per result.

pub mod generator;
pub mod report;
pub mod suites;

pub use generator::{generate_family, generate_pair, GeneratorSpec, WeightMode};
pub use report::VerificationReport;
pub use suites::{derive_seed, run_all, run_suite, weighted_group, Grid, Suite};
