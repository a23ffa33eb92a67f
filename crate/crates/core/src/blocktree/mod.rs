//! Game state: the published block tree, each miner's withheld blocks, and
//! the longest chain that rewards are paid on.
//!
//! Labels are never compacted. A block keeps the id of the round that
//! created it for its whole life, including across capitulation; the block
//! currently playing the role of genesis is the *root*, and all heights are
//! measured from it. Chain blocks that were capitulated away are folded into
//! per-miner `base` counters so chain totals and rewards stay continuous.

mod action;
mod builder;
mod capitulate;
mod io;
mod potential;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use action::{Action, ActionParseError, Edge, Publication, ValidityError};
pub use builder::{named, StateBuilder};
pub use io::{parse_statefile, to_dot, write_statefile, StatefileError};
pub use potential::{potential_reward, potential_reward_exhaustive, EnumerationTooLarge};

pub type BlockId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Miner {
    One,
    Two,
}

impl Miner {
    pub const BOTH: [Miner; 2] = [Miner::One, Miner::Two];

    pub fn index(self) -> usize {
        match self {
            Miner::One => 0,
            Miner::Two => 1,
        }
    }

    pub fn other(self) -> Miner {
        match self {
            Miner::One => Miner::Two,
            Miner::Two => Miner::One,
        }
    }

    /// 1 or 2, as used in file formats.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Miner> {
        match n {
            1 => Some(Miner::One),
            2 => Some(Miner::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Miner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Publication timestamp. `seq` is global and strictly increasing, so
/// ordering by stamp is ordering by "published first".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stamp {
    pub round: u64,
    pub seq: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Block {
    pub(crate) creator: Option<Miner>,
    pub(crate) parent: Option<BlockId>,
    /// Height above the root; meaningless while unpublished.
    pub(crate) height: u64,
    pub(crate) published: Option<Stamp>,
}

/// Read-only view of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockView {
    pub id: BlockId,
    pub creator: Option<Miner>,
    pub parent: Option<BlockId>,
    pub height: Option<u64>,
    pub published: Option<Stamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("unknown or unpublished block {0}")]
    UnknownBlock(BlockId),
    #[error("capitulation height {requested} exceeds longest chain height {chain}")]
    BadHeight { requested: u64, chain: u64 },
    #[error("malformed state: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug)]
pub struct GameState {
    round: u64,
    root: BlockId,
    blocks: BTreeMap<BlockId, Block>,
    unpublished: [BTreeSet<BlockId>; 2],
    /// `chain[h]` is the block at height `h` on the path from the root to the tip.
    chain: Vec<BlockId>,
    /// `chain_mine[h]` counts Miner-1 blocks among `chain[1..=h]`.
    chain_mine: Vec<u64>,
    /// Chain blocks at or below the root, per miner (genesis excluded).
    base: [u64; 2],
    next_seq: u64,
}

pub fn initial_state() -> GameState {
    GameState::new()
}

impl Default for GameState {
    fn default() -> Self {
        Self::new()
    }
}

impl GameState {
    /// B_0: the genesis block alone.
    pub fn new() -> Self {
        let mut blocks = BTreeMap::new();
        blocks.insert(
            0,
            Block {
                creator: None,
                parent: None,
                height: 0,
                published: Some(Stamp { round: 0, seq: 0 }),
            },
        );
        GameState {
            round: 0,
            root: 0,
            blocks,
            unpublished: [BTreeSet::new(), BTreeSet::new()],
            chain: vec![0],
            chain_mine: vec![0],
            base: [0, 0],
            next_seq: 1,
        }
    }

    /// Last completed round; also the largest label created so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Label of the block currently treated as genesis.
    pub fn root(&self) -> BlockId {
        self.root
    }

    /// Longest chain tip `C`.
    pub fn tip(&self) -> BlockId {
        *self.chain.last().expect("chain holds the root")
    }

    /// Height of the tip above the root.
    pub fn tip_height(&self) -> u64 {
        self.chain.len() as u64 - 1
    }

    /// Blocks on the longest path since the original genesis (genesis excluded).
    pub fn total_height(&self) -> u64 {
        self.base[0] + self.base[1] + self.tip_height()
    }

    /// The path root..=tip, indexed by height.
    pub fn chain(&self) -> &[BlockId] {
        &self.chain
    }

    /// Blocks on the longest path created by `miner`, counting finalized ones.
    pub fn chain_count(&self, miner: Miner) -> u64 {
        self.base[miner.index()] + self.local_chain_count(miner, self.tip_height())
    }

    /// `miner`'s blocks among `chain[1..=h]`.
    pub fn local_chain_count(&self, miner: Miner, h: u64) -> u64 {
        let mine = self.chain_mine[h as usize];
        match miner {
            Miner::One => mine,
            Miner::Two => h - mine,
        }
    }

    /// Finalized chain blocks at or below the root, per miner.
    pub fn base(&self) -> [u64; 2] {
        self.base
    }

    /// rev^(n): Miner 1's share of the longest path; 0 while it is empty.
    pub fn revenue(&self) -> f64 {
        let h = self.total_height();
        if h == 0 {
            0.0
        } else {
            self.chain_count(Miner::One) as f64 / h as f64
        }
    }

    pub fn contains(&self, b: BlockId) -> bool {
        self.blocks.contains_key(&b)
    }

    pub fn is_published(&self, b: BlockId) -> bool {
        self.blocks.get(&b).is_some_and(|x| x.published.is_some())
    }

    pub fn creator(&self, b: BlockId) -> Option<Miner> {
        self.blocks.get(&b).and_then(|x| x.creator)
    }

    pub fn stamp(&self, b: BlockId) -> Option<Stamp> {
        self.blocks.get(&b).and_then(|x| x.published)
    }

    pub fn parent(&self, b: BlockId) -> Option<BlockId> {
        self.blocks.get(&b).and_then(|x| x.parent)
    }

    pub fn unpublished(&self, miner: Miner) -> &BTreeSet<BlockId> {
        &self.unpublished[miner.index()]
    }

    pub fn block(&self, b: BlockId) -> Option<BlockView> {
        self.blocks.get(&b).map(|x| view(b, x))
    }

    /// All tracked blocks, ascending by label.
    pub fn blocks(&self) -> impl Iterator<Item = BlockView> + '_ {
        self.blocks.iter().map(|(&id, x)| view(id, x))
    }

    pub fn published(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.blocks
            .iter()
            .filter(|(_, x)| x.published.is_some())
            .map(|(&id, _)| id)
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_published(&self) -> usize {
        self.blocks.len() - self.unpublished[0].len() - self.unpublished[1].len()
    }

    /// h(b) = |A(b)| − 1, relative to the root.
    pub fn height(&self, b: BlockId) -> Result<u64, StateError> {
        match self.blocks.get(&b) {
            Some(x) if x.published.is_some() => Ok(x.height),
            _ => Err(StateError::UnknownBlock(b)),
        }
    }

    /// A(b), ascending from the root.
    pub fn ancestors(&self, b: BlockId) -> Result<Vec<BlockId>, StateError> {
        self.height(b)?;
        let mut out = vec![b];
        let mut cur = b;
        while let Some(p) = self.blocks[&cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Ok(out)
    }

    pub fn on_chain(&self, b: BlockId) -> bool {
        match self.blocks.get(&b) {
            Some(x) if x.published.is_some() => self.chain.get(x.height as usize) == Some(&b),
            _ => false,
        }
    }

    /// Succ(b): chain blocks strictly above `b`; empty when `b` is off the chain.
    pub fn successors(&self, b: BlockId) -> Result<Vec<BlockId>, StateError> {
        let h = self.height(b)?;
        if !self.on_chain(b) {
            return Ok(Vec::new());
        }
        Ok(self.chain[h as usize + 1..].to_vec())
    }

    /// Chain block following `b`, if `b` is on the chain below the tip.
    pub fn chain_successor(&self, b: BlockId) -> Option<BlockId> {
        if !self.on_chain(b) {
            return None;
        }
        self.chain.get(self.blocks[&b].height as usize + 1).copied()
    }

    /// True when the state is B_0 up to relabelling.
    pub fn is_fresh(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Start round `round + 1`: its block goes to `creator`'s unpublished set.
    pub fn create_block(&mut self, creator: Miner) -> BlockId {
        self.round += 1;
        let id = self.round;
        self.blocks.insert(
            id,
            Block {
                creator: Some(creator),
                parent: None,
                height: 0,
                published: None,
            },
        );
        self.unpublished[creator.index()].insert(id);
        id
    }

    /// Check validity of `action` for `miner` without changing anything.
    pub fn validate(&self, miner: Miner, action: &Action) -> Result<Publication, ValidityError> {
        action::validate(self, miner, action)
    }

    /// Validate and apply. Blocks are published in ascending label order.
    pub fn apply(&mut self, miner: Miner, action: &Action) -> Result<Publication, ValidityError> {
        let publication = self.validate(miner, action)?;
        self.commit(miner, &publication);
        Ok(publication)
    }

    fn commit(&mut self, miner: Miner, publication: &Publication) {
        if publication.is_empty() {
            return;
        }
        let mut best: Option<(u64, BlockId)> = None;
        for (&v, &p) in publication.edges() {
            let height = self.blocks[&p].height + 1;
            let stamp = Stamp {
                round: self.round,
                seq: self.next_seq,
            };
            self.next_seq += 1;
            let block = self.blocks.get_mut(&v).expect("validated");
            block.parent = Some(p);
            block.height = height;
            block.published = Some(stamp);
            self.unpublished[miner.index()].remove(&v);
            // Ascending labels means ascending stamps: the first block to
            // reach a height wins ties among this action's blocks.
            if best.map_or(true, |(h, _)| height > h) {
                best = Some((height, v));
            }
        }
        if let Some((h, v)) = best {
            // The old tip was published earlier, so only strictly taller wins.
            if h > self.tip_height() {
                self.switch_tip(v);
            }
        }
    }

    /// Re-point `chain` at `tip`, reusing the shared prefix.
    fn switch_tip(&mut self, tip: BlockId) {
        let mut path = Vec::new();
        let mut cur = tip;
        loop {
            let h = self.blocks[&cur].height as usize;
            if self.chain.get(h) == Some(&cur) {
                self.chain.truncate(h + 1);
                self.chain_mine.truncate(h + 1);
                break;
            }
            path.push(cur);
            cur = self.blocks[&cur].parent.expect("root is always on the chain");
        }
        for &b in path.iter().rev() {
            let prev = *self.chain_mine.last().expect("non-empty");
            let mine = u64::from(self.blocks[&b].creator == Some(Miner::One));
            self.chain.push(b);
            self.chain_mine.push(prev + mine);
        }
    }

    /// Full longest-chain selection: max height, then first published, then lowest label.
    pub(crate) fn recompute_tip(&mut self) {
        let best = self
            .blocks
            .iter()
            .filter_map(|(&id, b)| b.published.map(|s| (b.height, s, id)))
            .min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(_, _, id)| id)
            .expect("root is published");
        self.chain = vec![self.root];
        self.chain_mine = vec![0];
        self.switch_tip(best);
    }

    /// Structural self-check used by tests and debug harnesses.
    pub fn check_invariants(&self) -> Result<(), String> {
        let root = self.blocks.get(&self.root).ok_or("root missing")?;
        if root.parent.is_some() || root.published.is_none() || root.height != 0 {
            return Err("root must be a published parentless block at height 0".into());
        }
        for (&id, b) in &self.blocks {
            if id > self.round {
                return Err(format!("block {id} from the future"));
            }
            if id != self.root && id < self.root && b.published.is_none() {
                return Err(format!("unpublished block {id} below root"));
            }
            match (b.published, b.parent) {
                (Some(_), Some(p)) => {
                    if p >= id {
                        return Err(format!("parent {p} of {id} is not earlier"));
                    }
                    let pb = self.blocks.get(&p).ok_or(format!("parent {p} of {id} missing"))?;
                    if pb.published.is_none() {
                        return Err(format!("parent {p} of {id} unpublished"));
                    }
                    if pb.height + 1 != b.height {
                        return Err(format!("height of {id} inconsistent"));
                    }
                }
                (Some(_), None) if id != self.root => {
                    return Err(format!("published block {id} has no parent"));
                }
                (None, Some(_)) => return Err(format!("unpublished block {id} has a parent")),
                (None, None) => {
                    let c = b.creator.ok_or(format!("unpublished {id} has no creator"))?;
                    if !self.unpublished[c.index()].contains(&id) {
                        return Err(format!("block {id} missing from U_{}", c.number()));
                    }
                }
                _ => {}
            }
        }
        for m in Miner::BOTH {
            for &u in &self.unpublished[m.index()] {
                match self.blocks.get(&u) {
                    Some(b) if b.published.is_none() && b.creator == Some(m) => {}
                    _ => return Err(format!("U_{} entry {u} inconsistent", m.number())),
                }
            }
        }
        let mut fresh = self.clone();
        fresh.recompute_tip();
        if fresh.chain != self.chain || fresh.chain_mine != self.chain_mine {
            return Err("cached longest chain is stale".into());
        }
        Ok(())
    }
}

fn view(id: BlockId, b: &Block) -> BlockView {
    BlockView {
        id,
        creator: b.creator,
        parent: b.parent,
        height: b.published.map(|_| b.height),
        published: b.published,
    }
}

/// r^k(B, B') = |A(C(B')) ∩ T_k| − |A(C(B)) ∩ T_k|.
pub fn reward(before: &GameState, after: &GameState, miner: Miner) -> i64 {
    after.chain_count(miner) as i64 - before.chain_count(miner) as i64
}

/// r_λ(B, B') = (1 − λ) r¹ − λ r².
pub fn game_reward(before: &GameState, after: &GameState, lambda: f64) -> f64 {
    (1.0 - lambda) * reward(before, after, Miner::One) as f64
        - lambda * reward(before, after, Miner::Two) as f64
}
