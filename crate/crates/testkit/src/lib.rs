//! Test support shared by the workspace crates.

pub mod corpus;
pub mod fixtures;
pub mod generate;

pub use generate::{generate, generate_many, Generated};
