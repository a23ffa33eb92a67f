//! Replays a timeserving strategy's publications with the smallest
//! eligible blocks, keeping the real tree isomorphic to the shadow tree.

use std::collections::BTreeMap;

use super::shadow::Shadow;
use crate::blocktree::{Action, BlockId, GameState, Miner};
use crate::strategies::{Capitulation, Decision, Strategy, StrategyError, StrategyId};
use crate::structure::publication_timeserving;

/// Shadow label → real label. Published Miner-1 blocks that moved are
/// stored explicitly; other published blocks map to themselves; unpublished
/// blocks map by rank within Miner 1's unpublished set.
#[derive(Clone, Debug, Default)]
pub struct SigmaMap {
    moved: BTreeMap<BlockId, BlockId>,
}

impl SigmaMap {
    pub fn published(&self, b: BlockId) -> BlockId {
        self.moved.get(&b).copied().unwrap_or(b)
    }

    pub fn apply(&self, b: BlockId, shadow: &GameState, real: &GameState) -> Option<BlockId> {
        if shadow.is_published(b) {
            return Some(self.published(b));
        }
        let rank = shadow.unpublished(Miner::One).range(..b).count();
        if !shadow.unpublished(Miner::One).contains(&b) {
            return None;
        }
        real.unpublished(Miner::One).iter().nth(rank).copied()
    }

    /// σ on every block of the shadow state, ascending by shadow label.
    pub fn table(&self, shadow: &GameState, real: &GameState) -> Vec<(BlockId, Option<BlockId>)> {
        let own: Vec<BlockId> = real.unpublished(Miner::One).iter().copied().collect();
        let mut rank = 0;
        shadow
            .blocks()
            .map(|b| {
                let image = if b.published.is_some() {
                    Some(self.published(b.id))
                } else if b.creator == Some(Miner::One) {
                    rank += 1;
                    own.get(rank - 1).copied()
                } else {
                    None
                };
                (b.id, image)
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.moved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moved.is_empty()
    }
}

/// Checks the σ invariants between a shadow state and the real state after
/// the same round: the published trees are isomorphic through σ with equal
/// creators, heights and publication stamps; Miner-2 blocks are fixed; and
/// σ is increasing from every block onto later unpublished blocks.
pub fn check_sigma(sigma: &SigmaMap, shadow: &GameState, real: &GameState) -> Result<(), String> {
    if shadow.num_published() != real.num_published() {
        return Err("published block counts differ".into());
    }
    if shadow.unpublished(Miner::One).len() != real.unpublished(Miner::One).len() {
        return Err("unpublished block counts differ".into());
    }
    let table = sigma.table(shadow, real);
    for (b, &(_, image)) in shadow.blocks().zip(&table) {
        let image = image.ok_or_else(|| format!("σ({}) undefined", b.id))?;
        if b.creator == Some(Miner::Two) && image != b.id {
            return Err(format!("Miner-2 block {} moved to {image}", b.id));
        }
        if b.published.is_none() {
            continue;
        }
        let r = real.block(image).ok_or_else(|| format!("σ({}) = {image} missing", b.id))?;
        if b.id != shadow.root() && r.creator != b.creator {
            return Err(format!("creator of {} differs from σ image {image}", b.id));
        }
        if r.height != b.height || r.published != b.published {
            return Err(format!("height or stamp of {} differs from σ image {image}", b.id));
        }
        if r.parent != b.parent.map(|p| sigma.published(p)) {
            return Err(format!("parent of σ({}) = {image} is not σ(parent)", b.id));
        }
    }
    let mut highest: Option<BlockId> = None;
    for (b, &(_, image)) in shadow.blocks().zip(&table) {
        let image = image.expect("checked above");
        if b.published.is_none() && highest.is_some_and(|m| image <= m) {
            return Err(format!("σ not increasing onto unpublished block {}", b.id));
        }
        highest = highest.max(Some(image));
    }
    Ok(())
}

pub struct OrderlyReduction {
    shadow: Shadow,
    sigma: SigmaMap,
    checked: bool,
}

impl OrderlyReduction {
    pub fn new(inner: Box<dyn Strategy>) -> Self {
        OrderlyReduction {
            shadow: Shadow::new(inner),
            sigma: SigmaMap::default(),
            checked: false,
        }
    }

    /// Also verifies the σ invariants and σ's monotonicity across each
    /// publication. Quadratic-ish per round; meant for tests.
    pub fn checked(inner: Box<dyn Strategy>) -> Self {
        OrderlyReduction {
            checked: true,
            ..Self::new(inner)
        }
    }

    pub fn sigma(&self) -> &SigmaMap {
        &self.sigma
    }

    fn sync(&mut self, half: &GameState) -> Result<(), StrategyError> {
        let round = half.round();
        let shadow = self.shadow.state();
        if self.checked {
            check_sigma(&self.sigma, shadow, half)
                .map_err(|detail| StrategyError::SigmaInvariant { round, detail })?;
        }
        if self.sigma.published(shadow.tip()) != half.tip()
            || shadow.tip_height() != half.tip_height()
            || shadow.unpublished(Miner::One).len() != half.unpublished(Miner::One).len()
        {
            return Err(StrategyError::CapitulationDiverged { round });
        }
        Ok(())
    }
}

impl Strategy for OrderlyReduction {
    fn id(&self) -> StrategyId {
        StrategyId::Wrapped {
            reduction: "orderly".into(),
            inner: Box::new(self.shadow.inner_id()),
        }
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        let round = half.round();
        self.shadow.advance(half, creator)?;
        self.sync(half)?;
        let before = self
            .checked
            .then(|| self.sigma.table(self.shadow.state(), half));
        let (decision, p, ()) = self.shadow.act(creator, |_, _| ())?;
        let mut action = Action::Wait;
        if !p.is_empty() {
            let witness = || decision.action.to_string();
            if !publication_timeserving(self.shadow.state(), &p) {
                return Err(StrategyError::InnerNotTimeserving { round, action: witness() });
            }
            let (blocks, u) = p
                .as_path()
                .ok_or_else(|| StrategyError::InnerNotPath { round, action: witness() })?;
            let base = self.sigma.published(u);
            let chosen: Vec<BlockId> = half
                .unpublished(Miner::One)
                .range(base + 1..)
                .take(blocks.len())
                .copied()
                .collect();
            if chosen.len() < blocks.len() {
                return Err(StrategyError::TooFewBlocks {
                    round,
                    base,
                    needed: blocks.len(),
                    available: chosen.len(),
                });
            }
            for (&s, &r) in blocks.iter().zip(&chosen) {
                if s == r {
                    self.sigma.moved.remove(&s);
                } else {
                    self.sigma.moved.insert(s, r);
                }
            }
            action = Action::path(chosen, base);
            half.validate(Miner::One, &action)
                .map_err(|source| StrategyError::ReducedInvalid { round, source })?;
        }
        if let Some(before) = before {
            let mut real = half.clone();
            real.apply(Miner::One, &action).expect("validated");
            let after = self.sigma.table(self.shadow.state(), &real);
            check_sigma(&self.sigma, self.shadow.state(), &real)
                .map_err(|detail| StrategyError::SigmaInvariant { round, detail })?;
            let after: BTreeMap<BlockId, Option<BlockId>> = after.into_iter().collect();
            for (b, old) in &before {
                let new = after[b];
                let published_now = p.edges().contains_key(b);
                let was_published = self.shadow.state().is_published(*b) && !published_now;
                let ok = if was_published {
                    new == *old
                } else if published_now {
                    new <= *old
                } else {
                    new >= *old
                };
                if !ok {
                    return Err(StrategyError::SigmaInvariant {
                        round,
                        detail: format!("σ({b}) moved from {old:?} to {new:?}"),
                    });
                }
            }
        }
        let capitulate = self.shadow.capitulate(decision.capitulate)?;
        if capitulate.is_some() {
            let shadow = self.shadow.state();
            self.sigma.moved.retain(|&b, _| shadow.contains(b));
        }
        Ok(Decision {
            action,
            capitulate: capitulate.map(Capitulation::Height),
        })
    }
}
