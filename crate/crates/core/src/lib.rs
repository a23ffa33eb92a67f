//! Proof-of-stake longest-chain mining games between a strategic miner and
//! an honest one: the state model, reference strategies, structural
//! classifiers, strategy reductions and revenue analysis.

pub mod analysis;
pub mod blocktree;
pub mod cli;
pub mod reductions;
pub mod strategies;
pub mod structure;

pub use blocktree::{Action, BlockId, GameState, Miner};
