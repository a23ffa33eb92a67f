//! Moving every fork onto the longest chain.
//!
//! [`LcmReduction`] is the fixed point of alternating [`StepN`] with the
//! orderly reduction: the shadow strategy's `Publish(k, u)` becomes
//! `Publish(k, v)` with `v` the real chain block at the height of `u`.
//! [`iterated_lcm`] builds the alternation literally, for cross-checking.

use super::orderly::OrderlyReduction;
use super::shadow::Shadow;
use crate::blocktree::{Action, GameState, Miner};
use crate::strategies::{Capitulation, Decision, Strategy, StrategyError, StrategyId};
use crate::structure::{publication_orderly, publication_timeserving};

pub struct LcmReduction {
    shadow: Shadow,
}

impl LcmReduction {
    /// `inner` must be timeserving and orderly.
    pub fn new(inner: Box<dyn Strategy>) -> Self {
        LcmReduction {
            shadow: Shadow::new(inner),
        }
    }
}

impl Strategy for LcmReduction {
    fn id(&self) -> StrategyId {
        StrategyId::Wrapped {
            reduction: "lcm".into(),
            inner: Box::new(self.shadow.inner_id()),
        }
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        let round = half.round();
        self.shadow.advance(half, creator)?;
        if self.shadow.state().tip_height() != half.tip_height() {
            return Err(StrategyError::CapitulationDiverged { round });
        }
        let (decision, p, orderly) = self.shadow.act(creator, publication_orderly)?;
        let mut action = Action::Wait;
        if !p.is_empty() {
            let witness = || decision.action.to_string();
            if !publication_timeserving(self.shadow.state(), &p) {
                return Err(StrategyError::InnerNotTimeserving { round, action: witness() });
            }
            if !orderly {
                return Err(StrategyError::InnerNotOrderly { round, action: witness() });
            }
            let (_, u) = p.as_path().expect("orderly publications are paths");
            let height = self.shadow.state().height(u).expect("base is published");
            let v = *half
                .chain()
                .get(height as usize)
                .ok_or(StrategyError::NoChainBlockAtHeight { round, height })?;
            let real = half
                .validate(Miner::One, &Action::publish(p.len(), v))
                .map_err(|source| StrategyError::ReducedInvalid { round, source })?;
            if real.len() != p.len() {
                return Err(StrategyError::TooFewBlocks {
                    round,
                    base: v,
                    needed: p.len(),
                    available: real.len(),
                });
            }
            action = real.to_action();
        }
        let capitulate = self.shadow.capitulate(decision.capitulate)?;
        Ok(Decision {
            action,
            capitulate: capitulate.map(Capitulation::Height),
        })
    }
}

/// Plays the inner strategy, except that in round `n + 1` a publication
/// whose base is off the longest chain is moved to the chain block at the
/// same height.
pub struct StepN {
    shadow: Shadow,
    n: u64,
}

impl StepN {
    pub fn new(inner: Box<dyn Strategy>, n: u64) -> Self {
        StepN {
            shadow: Shadow::new(inner),
            n,
        }
    }
}

impl Strategy for StepN {
    fn id(&self) -> StrategyId {
        StrategyId::Wrapped {
            reduction: format!("step{}", self.n),
            inner: Box::new(self.shadow.inner_id()),
        }
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        let round = half.round();
        self.shadow.advance(half, creator)?;
        let (decision, p, off_chain_base) = self.shadow.act(creator, |shadow_half, p| {
            p.as_path()
                .filter(|&(_, u)| !shadow_half.on_chain(u))
                .map(|(_, u)| shadow_half.height(u).expect("published base"))
        })?;
        let mut action = p.to_action();
        if round == self.n + 1 {
            if let (Some(height), Some((blocks, _))) = (off_chain_base, p.as_path()) {
                let v = *half
                    .chain()
                    .get(height as usize)
                    .ok_or(StrategyError::NoChainBlockAtHeight { round, height })?;
                action = Action::path(blocks, v);
            }
        }
        half.validate(Miner::One, &action)
            .map_err(|source| StrategyError::ReducedInvalid { round, source })?;
        let capitulate = self.shadow.capitulate(decision.capitulate)?;
        Ok(Decision {
            action,
            capitulate: capitulate.map(Capitulation::Height),
        })
    }
}

/// π_0 = inner, π_{N+1} = orderly(step_N(π_N)), returning π_horizon. Each
/// level keeps its own shadow game, so cost grows with `horizon`.
pub fn iterated_lcm(inner: Box<dyn Strategy>, horizon: u64) -> Box<dyn Strategy> {
    let mut pi = inner;
    for n in 0..horizon {
        pi = Box::new(OrderlyReduction::new(Box::new(StepN::new(pi, n))));
    }
    pi
}
