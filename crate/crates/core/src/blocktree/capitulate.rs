//! Reach-height queries, c-capitulation and equivalence up to relabelling.

use std::collections::{BTreeMap, BTreeSet};

use super::{BlockId, GameState, Miner, StateError};

impl GameState {
    /// Largest height `b` can end up at. Published blocks are where they
    /// are; an unpublished block can at best sit on top of a maximal stack
    /// of its owner's unpublished blocks between some published base and it.
    pub fn max_reach(&self, b: BlockId) -> Result<u64, StateError> {
        let block = self.blocks.get(&b).ok_or(StateError::UnknownBlock(b))?;
        if block.published.is_some() {
            return Ok(block.height);
        }
        let owner = block.creator.ok_or(StateError::UnknownBlock(b))?;
        let own = &self.unpublished[owner.index()];
        let below: Vec<BlockId> = own.range(..b).copied().collect();
        let best = self
            .blocks
            .range(..b)
            .filter(|(_, x)| x.published.is_some())
            .map(|(&w, x)| {
                let stack = below.len() - below.partition_point(|&u| u <= w);
                x.height + stack as u64 + 1
            })
            .max()
            .expect("root precedes every unpublished block");
        Ok(best)
    }

    /// Whether `b` is, or can be made by one valid action, at height ≥ `ell`.
    pub fn can_reach_height(&self, b: BlockId, ell: u64) -> Result<bool, StateError> {
        Ok(self.max_reach(b)? >= ell)
    }

    /// Treat the height-`c` chain block as the new genesis. Drops the chain
    /// below it, every block that can no longer reach height `c + 1`, and
    /// published blocks that do not descend from the new root.
    pub fn capitulate(&mut self, c: u64) -> Result<(), StateError> {
        let h = self.tip_height();
        if c > h {
            return Err(StateError::BadHeight {
                requested: c,
                chain: h,
            });
        }
        let new_root = self.chain[c as usize];
        let mut keep = BTreeSet::new();
        keep.insert(new_root);
        for (&id, b) in self.blocks.range(new_root + 1..) {
            let survives = match (b.published, b.parent) {
                (Some(_), Some(p)) => keep.contains(&p),
                (None, _) => self.max_reach(id)? > c,
                _ => false,
            };
            if survives {
                keep.insert(id);
            }
        }
        for m in Miner::BOTH {
            self.base[m.index()] += self.local_chain_count(m, c);
        }
        self.blocks.retain(|id, _| keep.contains(id));
        for b in self.blocks.values_mut() {
            if b.published.is_some() {
                b.height -= c;
            }
        }
        let root = self.blocks.get_mut(&new_root).expect("kept");
        root.parent = None;
        self.root = new_root;
        for set in &mut self.unpublished {
            set.retain(|id| keep.contains(id));
        }
        self.recompute_tip();
        Ok(())
    }

    /// Order-preserving relabelling normal form: root is 0, the remaining
    /// blocks are numbered 1.. by label. Each entry is (creator, parent
    /// index, publication rank); the root's creator is irrelevant.
    fn canonical_form(&self) -> Vec<(Option<Miner>, Option<usize>, Option<usize>)> {
        let index: BTreeMap<BlockId, usize> =
            self.blocks.keys().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut order: Vec<(super::Stamp, BlockId)> = self
            .blocks
            .iter()
            .filter(|(&id, _)| id != self.root)
            .filter_map(|(&id, b)| b.published.map(|s| (s, id)))
            .collect();
        order.sort_unstable();
        let rank: BTreeMap<BlockId, usize> =
            order.iter().enumerate().map(|(i, &(_, id))| (id, i)).collect();
        self.blocks
            .iter()
            .map(|(&id, b)| {
                if id == self.root {
                    (None, None, None)
                } else {
                    (b.creator, b.parent.map(|p| index[&p]), rank.get(&id).copied())
                }
            })
            .collect()
    }

    /// Isomorphic under an order-preserving relabelling that fixes
    /// creators, parents, publication order and unpublished sets.
    pub fn canonical_equal(&self, other: &GameState) -> bool {
        self.blocks.len() == other.blocks.len() && self.canonical_form() == other.canonical_form()
    }
}
