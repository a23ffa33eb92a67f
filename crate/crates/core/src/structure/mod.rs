//! Checkpoints and the structural predicates on Miner-1 actions, plus
//! trace-level classifiers and lemma monitors built from them.
//!
//! Intervals such as (a, b] are over block labels, so on the longest chain
//! they select the chain blocks strictly after `a` up to `b`.

mod classify;
mod lift;

use std::collections::BTreeSet;

use crate::blocktree::{Action, BlockId, GameState, Miner, Publication};

pub use classify::{
    checkpoint_override_check, classify_trace, fork_ownership_check, MonitorReport, PropertyReport,
    Verdict, Witness,
};
pub use lift::{checkpoint_lift, is_safe_lift, lift_action, LiftError};

fn count_in(set: &BTreeSet<BlockId>, lo: BlockId, hi: BlockId) -> u64 {
    if hi <= lo {
        0
    } else {
        set.range(lo + 1..=hi).count() as u64
    }
}

/// |A(C) ∩ (lo, hi] ∩ T_1| for chain blocks `lo`, `hi` (`lo` at or below `hi`).
fn chain_mine_between(state: &GameState, lo: BlockId, hi: BlockId) -> u64 {
    let (Ok(a), Ok(b)) = (state.height(lo), state.height(hi)) else {
        return 0;
    };
    if b <= a {
        return 0;
    }
    state.local_chain_count(Miner::One, b) - state.local_chain_count(Miner::One, a)
}

/// P_0 = root, then repeatedly the first chain block above the previous
/// checkpoint whose interval has at least as many Miner-1 chain blocks as
/// unpublished Miner-1 blocks.
pub fn checkpoints(state: &GameState) -> Vec<BlockId> {
    let chain = state.chain();
    // Chain labels increase with height, so |U_1 ∩ (root, v]| is a running count.
    let mut own = state.unpublished(Miner::One).range(chain[0] + 1..).peekable();
    let mut below = 0u64;
    let mut out = vec![chain[0]];
    let (mut prev_h, mut prev_below) = (0u64, 0u64);
    for (h, &v) in chain.iter().enumerate().skip(1) {
        let h = h as u64;
        while own.next_if(|&&u| u <= v).is_some() {
            below += 1;
        }
        let mine = state.local_chain_count(Miner::One, h) - state.local_chain_count(Miner::One, prev_h);
        if mine >= below - prev_below {
            out.push(v);
            prev_h = h;
            prev_below = below;
        }
    }
    out
}

pub fn is_checkpoint(state: &GameState, v: BlockId) -> bool {
    checkpoints(state).contains(&v)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InequalityViolation {
    #[error("checkpoint {v}, later checkpoint {p}: {mine} chain blocks < {unpublished} unpublished")]
    CheckpointToCheckpoint { v: BlockId, p: BlockId, mine: u64, unpublished: u64 },
    #[error("non-checkpoint {v} after checkpoint {p}: {mine} chain blocks >= {unpublished} unpublished")]
    AfterCheckpoint { v: BlockId, p: BlockId, mine: u64, unpublished: u64 },
    #[error("non-checkpoint {v}, later checkpoint {p}: {mine} chain blocks <= {unpublished} unpublished")]
    BeforeCheckpoint { v: BlockId, p: BlockId, mine: u64, unpublished: u64 },
    #[error("non-checkpoint {v} after checkpoint {p}: {mine} chain blocks, {created} created")]
    RewardBound { v: BlockId, p: BlockId, mine: u64, created: u64 },
}

/// Evaluates the three checkpoint inequalities at every chain block, with
/// intervals exactly as printed: (v, P_i) for the first, (P_i, v] and
/// (v, P_i] for the other two.
pub fn checkpoint_inequality(state: &GameState) -> Result<(), InequalityViolation> {
    let cps = checkpoints(state);
    let cp_set: BTreeSet<BlockId> = cps.iter().copied().collect();
    let own = state.unpublished(Miner::One);
    for &v in state.chain() {
        if cp_set.contains(&v) {
            for &p in cps.iter().filter(|&&p| p > v) {
                let mine = chain_mine_between(state, v, p);
                let unpublished = count_in(own, v, p - 1);
                if mine < unpublished {
                    return Err(InequalityViolation::CheckpointToCheckpoint { v, p, mine, unpublished });
                }
            }
        } else {
            let p = *cps.iter().rfind(|&&p| p < v).expect("root precedes v");
            let mine = chain_mine_between(state, p, v);
            let unpublished = count_in(own, p, v);
            if mine >= unpublished {
                return Err(InequalityViolation::AfterCheckpoint { v, p, mine, unpublished });
            }
            for &p in cps.iter().filter(|&&p| p > v) {
                let mine = chain_mine_between(state, v, p);
                let unpublished = count_in(own, v, p);
                if mine <= unpublished {
                    return Err(InequalityViolation::BeforeCheckpoint { v, p, mine, unpublished });
                }
            }
        }
    }
    Ok(())
}

/// For every non-checkpoint chain block v with preceding checkpoint P,
/// 2·|A(C) ∩ (P, v] ∩ T_1| < |T_1 ∩ (P, v]|. Only Miner-1 blocks still in
/// the state count towards T_1, which can only make the bound harder.
pub fn checkpoint_reward_bound(state: &GameState) -> Result<(), InequalityViolation> {
    let cps = checkpoints(state);
    let mine_all: BTreeSet<BlockId> = state
        .blocks()
        .filter(|b| b.creator == Some(Miner::One) && b.id != state.root())
        .map(|b| b.id)
        .collect();
    for &v in state.chain() {
        if cps.contains(&v) {
            continue;
        }
        let p = *cps.iter().rfind(|&&p| p < v).expect("root precedes v");
        let mine = chain_mine_between(state, p, v);
        let created = count_in(&mine_all, p, v);
        if 2 * mine >= created {
            return Err(InequalityViolation::RewardBound { v, p, mine, created });
        }
    }
    Ok(())
}

/// Every block of a validated publication sits on the longest chain of the
/// state after it was applied.
pub fn publication_timeserving(after: &GameState, p: &Publication) -> bool {
    p.blocks().all(|b| after.on_chain(b))
}

/// V′ = min^{|V′|}(U ∩ (u, ∞)) for a path publication; non-paths are not orderly.
pub fn publication_orderly(half: &GameState, p: &Publication) -> bool {
    if p.is_empty() {
        return true;
    }
    let Some((blocks, base)) = p.as_path() else {
        return false;
    };
    half.unpublished(Miner::One)
        .range(base + 1..)
        .take(blocks.len())
        .eq(blocks.iter())
}

/// Every edge that leaves the published set lands on the longest chain.
pub fn publication_lcm(half: &GameState, p: &Publication) -> bool {
    p.edges()
        .values()
        .filter(|to| p.edges().get(to).is_none())
        .all(|&to| half.on_chain(to))
}

/// LCM, and the fork point is the tip or is followed by a Miner-2 block.
pub fn publication_trimmed(half: &GameState, p: &Publication) -> bool {
    if !publication_lcm(half, p) {
        return false;
    }
    p.edges()
        .values()
        .filter(|to| p.edges().get(to).is_none())
        .all(|&u| match half.chain_successor(u) {
            None => true,
            Some(s) => half.creator(s) == Some(Miner::Two),
        })
}

fn with_publication(half: &GameState, action: &Action, f: impl FnOnce(&Publication) -> bool) -> bool {
    half.validate(Miner::One, action).is_ok_and(|p| f(&p))
}

/// False for invalid actions.
pub fn is_timeserving(half: &GameState, action: &Action) -> bool {
    let mut after = half.clone();
    match after.apply(Miner::One, action) {
        Ok(p) => publication_timeserving(&after, &p),
        Err(_) => false,
    }
}

pub fn is_orderly(half: &GameState, action: &Action) -> bool {
    with_publication(half, action, |p| publication_orderly(half, p))
}

pub fn is_lcm(half: &GameState, action: &Action) -> bool {
    with_publication(half, action, |p| publication_lcm(half, p))
}

pub fn is_trimmed(half: &GameState, action: &Action) -> bool {
    with_publication(half, action, |p| publication_trimmed(half, p))
}
