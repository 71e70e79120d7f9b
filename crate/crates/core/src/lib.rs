pub mod cli;
pub mod coloring;
pub mod config;
pub mod error;
pub mod matrix;
pub mod minimax;
pub mod mwu;
pub mod oracle;
pub mod reference;
pub mod rng;
pub mod sampling_tree;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use matrix::{ColoringVector, SetSystemMatrix};
pub use rng::SeededRng;
pub use sampling_tree::WeightTree;
