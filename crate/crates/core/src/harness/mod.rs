//! Everything around the algorithms: random instances, JSON documents, DOT
//! output and the bound-checking experiment runner.

pub mod dot;
pub mod experiment;
pub mod generate;
pub mod io;

pub use dot::{export_dot, to_dot};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, ExperimentRow};
pub use generate::{generate, CostMode, GeneratorSpec, PriorMode};
pub use io::{read_instance, read_tree, write_instance, write_tree};
