//! The strategy interface, the game engine, and the reference strategies.

mod engine;
mod frontier;
pub mod fuzz;
mod scripted;
mod selfish;
mod spec;

use std::fmt;

use crate::blocktree::{Action, BlockId, GameState, Miner, StateError, ValidityError};

pub use engine::{run_game, step_round, Game, ReplayVisitor, RoundRecord, Trace};
pub(crate) use engine::game_rng;
pub use frontier::Frontier;
pub use scripted::{Script, ScriptParseError, Scripted};
pub use selfish::{NothingAtStake, NsmNode, SelfishMining, SmNode};
pub use spec::{SpecError, StrategySpec};

/// When the strategy treats part of the state as final.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capitulation {
    /// Capitulate at the height of the longest chain.
    Tip,
    /// Capitulate at a given height above the current root.
    Height(u64),
}

impl Capitulation {
    pub fn height(self, state: &GameState) -> u64 {
        match self {
            Capitulation::Tip => state.tip_height(),
            Capitulation::Height(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub action: Action,
    pub capitulate: Option<Capitulation>,
}

impl Decision {
    pub fn wait() -> Self {
        Decision {
            action: Action::Wait,
            capitulate: None,
        }
    }

    pub fn act(action: Action) -> Self {
        Decision {
            action,
            capitulate: None,
        }
    }

    pub fn then_capitulate(mut self, c: Capitulation) -> Self {
        self.capitulate = Some(c);
        self
    }
}

/// Stable identity used in CSV provenance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StrategyId {
    Frontier,
    Selfish,
    NothingAtStake,
    Scripted(String),
    Fuzz(String),
    Wrapped {
        reduction: String,
        inner: Box<StrategyId>,
    },
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyId::Frontier => write!(f, "frontier"),
            StrategyId::Selfish => write!(f, "sm"),
            StrategyId::NothingAtStake => write!(f, "nsm"),
            StrategyId::Scripted(name) => write!(f, "scripted:{name}"),
            StrategyId::Fuzz(name) => write!(f, "{name}"),
            StrategyId::Wrapped { reduction, inner } => write!(f, "{reduction}({inner})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("{strategy} reached a state its automaton cannot occupy at round {round}: {detail}")]
    UnreachableState {
        strategy: &'static str,
        round: u64,
        detail: String,
    },
    #[error("scripted action for round {round} is invalid: {source}")]
    ScriptMismatch { round: u64, source: ValidityError },
    #[error("inner strategy is not timeserving at round {round}: {action}")]
    InnerNotTimeserving { round: u64, action: String },
    #[error("inner strategy published a non-path set at round {round}: {action}")]
    InnerNotPath { round: u64, action: String },
    #[error("inner strategy is not orderly at round {round}: {action}")]
    InnerNotOrderly { round: u64, action: String },
    #[error("no longest-chain block at height {height} in round {round}")]
    NoChainBlockAtHeight { round: u64, height: u64 },
    #[error("round {round}: {needed} own blocks needed above {base}, {available} available")]
    TooFewBlocks {
        round: u64,
        base: BlockId,
        needed: usize,
        available: usize,
    },
    #[error("reduced action invalid at round {round}: {source}")]
    ReducedInvalid { round: u64, source: ValidityError },
    #[error("shadow and real game diverged after capitulation in round {round}")]
    CapitulationDiverged { round: u64 },
    #[error("sigma invariant broken at round {round}: {detail}")]
    SigmaInvariant { round: u64, detail: String },
    #[error("inner game failed at round {round}: {detail}")]
    Inner { round: u64, detail: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("round {round}: miner {miner} played invalid action {action}: {source}")]
    Invalid {
        round: u64,
        miner: Miner,
        action: String,
        source: ValidityError,
    },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("round {round}: {source}")]
    Capitulation { round: u64, source: StateError },
    #[error("no capitulation to B_0 within {cap} rounds")]
    NonRecurrent { cap: u64 },
}

/// A miner's policy. `decide` is called once per round at the half state:
/// after the round's block was created and, for Miner 1, after Miner 2 acted.
pub trait Strategy: Send {
    fn id(&self) -> StrategyId;

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError>;
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn id(&self) -> StrategyId {
        (**self).id()
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        (**self).decide(half, creator)
    }
}
