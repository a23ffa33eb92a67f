//! Randomized and degenerate Miner-1 strategies for exercising reductions
//! and monitors.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::engine::game_rng;
use super::{Decision, Strategy, StrategyError, StrategyId};
use crate::blocktree::{Action, BlockId, GameState, Miner};

/// With probability `publish_prob` per round, overtakes the longest chain
/// with a random subset of its withheld blocks on a random published base.
/// Every publication lands on the new longest chain, but neither the subset
/// nor the base is chosen in any orderly way. Never capitulates.
#[derive(Clone, Debug)]
pub struct RandomTimeserving {
    publish_prob: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomTimeserving {
    pub fn new(publish_prob: f64, seed: u64) -> Self {
        RandomTimeserving {
            publish_prob,
            seed,
            rng: game_rng(seed, u64::MAX),
        }
    }
}

impl Strategy for RandomTimeserving {
    fn id(&self) -> StrategyId {
        StrategyId::Fuzz(format!("random:{}:{}", self.publish_prob, self.seed))
    }

    fn decide(&mut self, half: &GameState, _creator: Miner) -> Result<Decision, StrategyError> {
        if !self.rng.gen_bool(self.publish_prob.clamp(0.0, 1.0)) {
            return Ok(Decision::wait());
        }
        let own: Vec<BlockId> = half.unpublished(Miner::One).iter().copied().collect();
        let top = half.tip_height();
        let eligible: Vec<(BlockId, u64, usize)> = half
            .published()
            .filter_map(|w| {
                let h = half.height(w).ok()?;
                let k = own.len() - own.partition_point(|&u| u <= w);
                (h + k as u64 > top).then_some((w, h, k))
            })
            .collect();
        if eligible.is_empty() {
            return Ok(Decision::wait());
        }
        let (w, h, k_max) = eligible[self.rng.gen_range(0..eligible.len())];
        let k_min = (top - h + 1) as usize;
        let k = self.rng.gen_range(k_min..=k_max);
        let above = &own[own.len() - k_max..];
        let chosen = sample(&mut self.rng, k_max, k).into_iter().map(|i| above[i]);
        Ok(Decision::act(Action::path(chosen, w)))
    }
}

/// Withholds everything forever.
#[derive(Clone, Copy, Debug, Default)]
pub struct Hoarder;

impl Strategy for Hoarder {
    fn id(&self) -> StrategyId {
        StrategyId::Fuzz("hoarder".into())
    }

    fn decide(&mut self, _half: &GameState, _creator: Miner) -> Result<Decision, StrategyError> {
        Ok(Decision::wait())
    }
}
