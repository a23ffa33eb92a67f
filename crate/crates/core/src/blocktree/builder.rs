//! Constructing arbitrary states directly, plus the named states used
//! throughout the analysis (B_0, B_{k,0}, B_{0,1}, B_{1,1}, ...).

use std::collections::{BTreeMap, BTreeSet};

use super::{Block, BlockId, GameState, Miner, Stamp, StateError};

#[derive(Clone, Debug)]
struct Entry {
    creator: Option<Miner>,
    parent: Option<BlockId>,
    published: Option<u64>,
}

/// Assembles a state from per-block facts. Publication order within a
/// round is reconstructed as Miner 2 first, then ascending label, which is
/// exactly what the engine produces.
#[derive(Clone, Debug)]
pub struct StateBuilder {
    round: Option<u64>,
    root: BlockId,
    base: [u64; 2],
    entries: BTreeMap<BlockId, Entry>,
}

impl Default for StateBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl StateBuilder {
    pub fn new() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            0,
            Entry {
                creator: None,
                parent: None,
                published: Some(0),
            },
        );
        StateBuilder {
            round: None,
            root: 0,
            base: [0, 0],
            entries,
        }
    }

    /// Use `root` (published in `published_round`) as the genesis stand-in.
    pub fn root(mut self, root: BlockId, creator: Option<Miner>, published_round: u64) -> Self {
        self.entries.remove(&self.root);
        self.root = root;
        self.entries.insert(
            root,
            Entry {
                creator,
                parent: None,
                published: Some(published_round),
            },
        );
        self
    }

    pub fn round(mut self, round: u64) -> Self {
        self.round = Some(round);
        self
    }

    pub fn base(mut self, base: [u64; 2]) -> Self {
        self.base = base;
        self
    }

    pub fn published(mut self, id: BlockId, creator: Miner, parent: BlockId, round: u64) -> Self {
        self.entries.insert(
            id,
            Entry {
                creator: Some(creator),
                parent: Some(parent),
                published: Some(round),
            },
        );
        self
    }

    pub fn unpublished(mut self, id: BlockId, creator: Miner) -> Self {
        self.entries.insert(
            id,
            Entry {
                creator: Some(creator),
                parent: None,
                published: None,
            },
        );
        self
    }

    pub fn build(self) -> Result<GameState, StateError> {
        let bad = |m: String| Err(StateError::Malformed(m));
        let max_id = *self.entries.keys().next_back().expect("root present");
        let round = self.round.unwrap_or(max_id);
        if max_id > round {
            return bad(format!("block {max_id} created after round {round}"));
        }
        let mut blocks = BTreeMap::new();
        let mut unpublished = [BTreeSet::new(), BTreeSet::new()];
        for (&id, e) in &self.entries {
            if id != self.root && id < self.root {
                return bad(format!("block {id} precedes root {}", self.root));
            }
            if id != self.root && e.creator.is_none() {
                return bad(format!("block {id} has no creator"));
            }
            let height = match (e.published, e.parent) {
                (Some(r), _) if r > round => {
                    return bad(format!("block {id} published in future round {r}"))
                }
                (Some(r), _) if id != self.root && r < id => {
                    return bad(format!("block {id} published before it was created"))
                }
                (Some(_), Some(p)) => {
                    if p >= id {
                        return bad(format!("parent {p} of {id} is not earlier"));
                    }
                    match blocks.get(&p) {
                        Some(Block {
                            published: Some(_),
                            height,
                            ..
                        }) => height + 1,
                        _ => return bad(format!("parent {p} of {id} is not a published block")),
                    }
                }
                (Some(_), None) if id == self.root => 0,
                (Some(_), None) => return bad(format!("published block {id} has no parent")),
                (None, Some(_)) => return bad(format!("unpublished block {id} has a parent")),
                (None, None) => {
                    unpublished[e.creator.expect("checked").index()].insert(id);
                    0
                }
            };
            blocks.insert(
                id,
                Block {
                    creator: e.creator,
                    parent: e.parent,
                    height,
                    published: e.published.map(|r| Stamp { round: r, seq: 0 }),
                },
            );
        }
        let mut order: Vec<(u64, u8, BlockId)> = blocks
            .iter()
            .filter(|(&id, _)| id != self.root)
            .filter_map(|(&id, b)| {
                let rank = u8::from(b.creator == Some(Miner::One));
                b.published.map(|s| (s.round, rank, id))
            })
            .collect();
        order.sort_unstable();
        for (i, &(_, _, id)) in order.iter().enumerate() {
            blocks.get_mut(&id).expect("present").published.as_mut().expect("published").seq =
                i as u64 + 1;
        }
        let mut state = GameState {
            round,
            root: self.root,
            blocks,
            unpublished,
            chain: vec![self.root],
            chain_mine: vec![0],
            base: self.base,
            next_seq: order.len() as u64 + 1,
        };
        state.recompute_tip();
        Ok(state)
    }
}

/// The states the analysis keeps referring to by name.
pub mod named {
    use super::*;

    /// B_0.
    pub fn b0() -> GameState {
        GameState::new()
    }

    /// B_{k,0}: Miner 1 created the first `k` blocks and published none.
    pub fn lead(k: u64) -> GameState {
        let mut b = StateBuilder::new().round(k);
        for id in 1..=k {
            b = b.unpublished(id, Miner::One);
        }
        b.build().expect("well-formed")
    }

    /// B_{0,1} = (({0,1},{1→0}),∅,∅).
    pub fn b01() -> GameState {
        StateBuilder::new()
            .published(1, Miner::Two, 0, 1)
            .build()
            .expect("well-formed")
    }

    /// B_{1,1} = (({0,2},{2→0}),{1},{1}).
    pub fn b11() -> GameState {
        StateBuilder::new()
            .unpublished(1, Miner::One)
            .published(2, Miner::Two, 0, 2)
            .build()
            .expect("well-formed")
    }

    /// B_{1,2} = (({0,2,3},{3→2→0}),{1},{1}).
    pub fn b12() -> GameState {
        StateBuilder::new()
            .unpublished(1, Miner::One)
            .published(2, Miner::Two, 0, 2)
            .published(3, Miner::Two, 2, 3)
            .build()
            .expect("well-formed")
    }

    /// B_{2,2} = (({0,2,3},{3→2→0}),{1,4},{1,4}).
    pub fn b22() -> GameState {
        StateBuilder::new()
            .unpublished(1, Miner::One)
            .published(2, Miner::Two, 0, 2)
            .published(3, Miner::Two, 2, 3)
            .unpublished(4, Miner::One)
            .build()
            .expect("well-formed")
    }
}
