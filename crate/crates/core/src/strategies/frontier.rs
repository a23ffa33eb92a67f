use super::{Capitulation, Decision, Strategy, StrategyError, StrategyId};
use crate::blocktree::{Action, GameState, Miner};

/// The honest strategy: publish each new own block on the longest chain.
/// Capitulates every round, since nothing it knows is ever withheld.
#[derive(Clone, Debug)]
pub struct Frontier {
    me: Miner,
}

impl Frontier {
    pub fn new(me: Miner) -> Self {
        Frontier { me }
    }
}

impl Strategy for Frontier {
    fn id(&self) -> StrategyId {
        StrategyId::Frontier
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        let decision = if creator == self.me {
            Decision::act(Action::path([half.round()], half.tip()))
        } else {
            Decision::wait()
        };
        Ok(decision.then_capitulate(Capitulation::Tip))
    }
}
