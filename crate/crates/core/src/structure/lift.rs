//! Moving a fork up to the most recent checkpoint it would override.

use std::collections::BTreeSet;

use super::checkpoints;
use crate::blocktree::{Action, BlockId, GameState, Miner};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("{0} is not a published block on the longest chain")]
    NotOnChain(BlockId),
    #[error("no checkpoint above {0} on the longest chain")]
    NoCheckpointAbove(BlockId),
}

/// PublishPath(Q ∩ (c_v, ∞), c_v) with c_v the highest checkpoint in Succ(v).
pub fn checkpoint_lift(
    state: &GameState,
    q: &BTreeSet<BlockId>,
    v: BlockId,
) -> Result<(BTreeSet<BlockId>, BlockId), LiftError> {
    if !state.on_chain(v) {
        return Err(LiftError::NotOnChain(v));
    }
    let c = checkpoints(state)
        .into_iter()
        .rfind(|&p| p > v)
        .ok_or(LiftError::NoCheckpointAbove(v))?;
    Ok((q.range(c + 1..).copied().collect(), c))
}

/// |(Succ(v) ∖ Succ(v′)) ∩ T_1| ≥ |Q ∖ Q′|, for v′ a chain block above v.
pub fn is_safe_lift(
    state: &GameState,
    original: (&BTreeSet<BlockId>, BlockId),
    lifted: (&BTreeSet<BlockId>, BlockId),
) -> bool {
    let (q, v) = original;
    let (q2, v2) = lifted;
    let (Ok(h), Ok(h2)) = (state.height(v), state.height(v2)) else {
        return false;
    };
    if !state.on_chain(v) || !state.on_chain(v2) || h2 <= h || !q2.is_subset(q) {
        return false;
    }
    let regained = state.local_chain_count(Miner::One, h2) - state.local_chain_count(Miner::One, h);
    regained >= q.difference(q2).count() as u64
}

/// The lift as an action.
pub fn lift_action(q: &BTreeSet<BlockId>, base: BlockId) -> Action {
    Action::path(q.iter().copied(), base)
}
