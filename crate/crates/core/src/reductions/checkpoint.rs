//! Deferring a publication that would fork the latest checkpoint until it
//! can be made on top of that checkpoint instead.

use std::collections::BTreeSet;

use crate::blocktree::{Action, BlockId, GameState, Miner};
use crate::structure::{checkpoints, is_timeserving, is_trimmed};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Case1Error {
    #[error("the action is not trimmed and timeserving")]
    NotTrimmed,
    #[error("the action does not fork the latest checkpoint {0}")]
    NotForkingCheckpoint(BlockId),
    #[error("initial lead {0} is not positive")]
    W0NonPositive(i64),
}

/// Wait while W > 0, W moving +1 per Miner-1 block and −1 per Miner-2
/// block; at W = 0 publish the blocks of Q above the checkpoint plus every
/// Miner-1 block created meanwhile, onto the checkpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case1Plan {
    pub checkpoint: BlockId,
    pub lifted: BTreeSet<BlockId>,
    pub w0: i64,
    pub w: i64,
    pub interim: Vec<BlockId>,
}

pub fn checkpoint_preserve_case1(
    state: &GameState,
    q: &BTreeSet<BlockId>,
    v: BlockId,
) -> Result<Case1Plan, Case1Error> {
    let action = Action::path(q.iter().copied(), v);
    if !is_trimmed(state, &action) || !is_timeserving(state, &action) {
        return Err(Case1Error::NotTrimmed);
    }
    let p = *checkpoints(state).last().expect("root is a checkpoint");
    if p <= v || !state.on_chain(p) {
        return Err(Case1Error::NotForkingCheckpoint(p));
    }
    let lifted: BTreeSet<BlockId> = q.range(p + 1..).copied().collect();
    let succ = state.successors(p).expect("checkpoint is published").len() as i64;
    let w0 = lifted.len() as i64 - succ - 1;
    if w0 < 1 {
        return Err(Case1Error::W0NonPositive(w0));
    }
    Ok(Case1Plan {
        checkpoint: p,
        lifted,
        w0,
        w: w0,
        interim: Vec::new(),
    })
}

impl Case1Plan {
    /// Feeds the next round's block; returns the publication once W hits 0.
    pub fn observe(&mut self, creator: Miner, block: BlockId) -> Option<Action> {
        match creator {
            Miner::One => {
                self.w += 1;
                self.interim.push(block);
            }
            Miner::Two => self.w -= 1,
        }
        (self.w == 0).then(|| {
            Action::path(
                self.lifted.iter().chain(&self.interim).copied(),
                self.checkpoint,
            )
        })
    }
}
