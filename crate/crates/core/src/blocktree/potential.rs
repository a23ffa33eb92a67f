//! Potential reward: the largest |r¹| a single Miner-1 action can realise.

use std::collections::BTreeSet;

use super::{reward, Action, BlockId, GameState, Miner};

/// Scans PublishPath(Q, v) with v on the longest path and Q the largest
/// orderly prefix of U ∩ (v, ∞). For such a base only the tallest prefix
/// matters: every prefix that overtakes the tip gains strictly more than
/// the Miner-1 blocks it displaces, and a longer prefix gains more.
pub fn potential_reward(state: &GameState) -> u64 {
    let own = state.unpublished(Miner::One);
    if own.is_empty() {
        return 0;
    }
    let top = state.tip_height();
    let mine_top = state.local_chain_count(Miner::One, top);
    let labels: Vec<BlockId> = own.iter().copied().collect();
    state
        .chain()
        .iter()
        .enumerate()
        .filter_map(|(h, &v)| {
            let h = h as u64;
            let k = (labels.len() - labels.partition_point(|&u| u <= v)) as u64;
            (h + k > top).then(|| state.local_chain_count(Miner::One, h) + k - mine_top)
        })
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("exhaustive enumeration needs {0} actions, above the configured limit")]
pub struct EnumerationTooLarge(pub u128);

const ENUMERATION_LIMIT: u128 = 2_000_000;

/// Brute force over every valid Miner-1 PublishSet. Exponential; meant for
/// cross-checking [`potential_reward`] on small states.
pub fn potential_reward_exhaustive(state: &GameState) -> Result<u64, EnumerationTooLarge> {
    let own: Vec<BlockId> = state.unpublished(Miner::One).iter().copied().collect();
    let published: Vec<BlockId> = state.published().collect();
    let mut total: u128 = 0;
    for mask in 1u64..(1u64 << own.len()) {
        let mut n: u128 = 1;
        for (i, &v) in own.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1) {
            let earlier_new = (0..i).filter(|j| mask >> j & 1 == 1).count();
            let bases = published.iter().filter(|&&p| p < v).count() + earlier_new;
            n = n.saturating_mul(bases as u128);
        }
        total = total.saturating_add(n);
    }
    if total > ENUMERATION_LIMIT {
        return Err(EnumerationTooLarge(total));
    }
    let mut best = 0u64;
    for mask in 1u64..(1u64 << own.len()) {
        let chosen: Vec<BlockId> = own
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let mut edges = Vec::with_capacity(chosen.len());
        assign(state, &published, &chosen, 0, &mut edges, &mut best);
    }
    Ok(best)
}

fn assign(
    state: &GameState,
    published: &[BlockId],
    chosen: &[BlockId],
    i: usize,
    edges: &mut Vec<(BlockId, BlockId)>,
    best: &mut u64,
) {
    if i == chosen.len() {
        let action = Action::set(chosen.iter().copied(), edges.iter().copied());
        let mut next = state.clone();
        next.apply(Miner::One, &action).expect("enumerated actions are valid");
        *best = (*best).max(reward(state, &next, Miner::One).unsigned_abs());
        return;
    }
    let v = chosen[i];
    let bases: BTreeSet<BlockId> = published
        .iter()
        .copied()
        .filter(|&p| p < v)
        .chain(chosen[..i].iter().copied())
        .collect();
    for p in bases {
        edges.push((v, p));
        assign(state, published, chosen, i + 1, edges, best);
        edges.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::named;

    #[test]
    fn named_state_values() {
        assert_eq!(potential_reward(&named::lead(2)), 2);
        assert_eq!(potential_reward(&named::b01()), 0);
        assert_eq!(potential_reward_exhaustive(&named::b11()).unwrap(), 0);
        assert_eq!(potential_reward(&named::b11()), 0);
        assert_eq!(potential_reward_exhaustive(&named::b22()).unwrap(), 1);
        assert_eq!(potential_reward(&named::b22()), 1);
    }

    #[test]
    fn limit_is_reported() {
        assert!(potential_reward_exhaustive(&named::lead(14)).is_err());
    }
}
