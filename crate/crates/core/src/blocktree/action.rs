//! Actions, their desugaring to PublishSet, and the validity rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::{BlockId, GameState, Miner};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: BlockId,
    pub to: BlockId,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Wait,
    PublishSet {
        blocks: BTreeSet<BlockId>,
        edges: Vec<Edge>,
    },
    /// Path through `blocks` in label order, hanging off `base`.
    PublishPath {
        blocks: BTreeSet<BlockId>,
        base: BlockId,
    },
    /// PublishPath of the `count` smallest own unpublished blocks above `base`.
    Publish {
        count: usize,
        base: BlockId,
    },
}

impl Action {
    pub fn path(blocks: impl IntoIterator<Item = BlockId>, base: BlockId) -> Action {
        Action::PublishPath {
            blocks: blocks.into_iter().collect(),
            base,
        }
    }

    pub fn publish(count: usize, base: BlockId) -> Action {
        Action::Publish { count, base }
    }

    pub fn set(
        blocks: impl IntoIterator<Item = BlockId>,
        edges: impl IntoIterator<Item = (BlockId, BlockId)>,
    ) -> Action {
        Action::PublishSet {
            blocks: blocks.into_iter().collect(),
            edges: edges.into_iter().map(|(from, to)| Edge { from, to }).collect(),
        }
    }

    pub fn is_wait(&self) -> bool {
        matches!(self, Action::Wait)
    }

    /// Expand to raw (V′, E′) against `state`, as seen by `miner`.
    pub fn desugar(&self, state: &GameState, miner: Miner) -> (BTreeSet<BlockId>, Vec<Edge>) {
        match self {
            Action::Wait => (BTreeSet::new(), Vec::new()),
            Action::PublishSet { blocks, edges } => (blocks.clone(), edges.clone()),
            Action::PublishPath { blocks, base } => (blocks.clone(), path_edges(blocks, *base)),
            Action::Publish { count, base } => {
                let blocks: BTreeSet<BlockId> = state
                    .unpublished(miner)
                    .range(base + 1..)
                    .take(*count)
                    .copied()
                    .collect();
                let edges = path_edges(&blocks, *base);
                (blocks, edges)
            }
        }
    }
}

fn path_edges(blocks: &BTreeSet<BlockId>, base: BlockId) -> Vec<Edge> {
    let mut prev = base;
    blocks
        .iter()
        .map(|&b| {
            let e = Edge { from: b, to: prev };
            prev = b;
            e
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidityError {
    #[error("block {0} is not in the miner's unpublished set")]
    NotOwned(BlockId),
    #[error("edge {0} does not start in V' or does not land in V or V'")]
    DanglingEdge(Edge),
    #[error("edge {0} does not point to an earlier block")]
    BackwardEdge(Edge),
    #[error("block {0} does not have exactly one outgoing edge")]
    EdgeCardinality(BlockId),
}

/// A validated PublishSet: each newly published block with its parent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Publication {
    edges: BTreeMap<BlockId, BlockId>,
}

impl Publication {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// (block, parent) ascending by block.
    pub fn edges(&self) -> &BTreeMap<BlockId, BlockId> {
        &self.edges
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.edges.keys().copied()
    }

    pub fn max_block(&self) -> Option<BlockId> {
        self.edges.keys().next_back().copied()
    }

    /// `Some((V′, u))` when the set is exactly PublishPath(V′, u).
    pub fn as_path(&self) -> Option<(Vec<BlockId>, BlockId)> {
        let mut iter = self.edges.iter();
        let (&first, &base) = iter.next()?;
        let mut prev = first;
        for (&b, &p) in iter {
            if p != prev {
                return None;
            }
            prev = b;
        }
        Some((self.edges.keys().copied().collect(), base))
    }

    /// Canonical action form: a path when possible, otherwise a set.
    pub fn to_action(&self) -> Action {
        if self.is_empty() {
            return Action::Wait;
        }
        match self.as_path() {
            Some((blocks, base)) => Action::path(blocks, base),
            None => Action::set(
                self.edges.keys().copied(),
                self.edges.iter().map(|(&a, &b)| (a, b)),
            ),
        }
    }
}

pub(super) fn validate(
    state: &GameState,
    miner: Miner,
    action: &Action,
) -> Result<Publication, ValidityError> {
    let (blocks, edges) = action.desugar(state, miner);
    let own = state.unpublished(miner);
    if let Some(&v) = blocks.iter().find(|v| !own.contains(v)) {
        return Err(ValidityError::NotOwned(v));
    }
    if let Some(&e) = edges
        .iter()
        .find(|e| !blocks.contains(&e.from) || !(blocks.contains(&e.to) || state.is_published(e.to)))
    {
        return Err(ValidityError::DanglingEdge(e));
    }
    if let Some(&e) = edges.iter().find(|e| e.from <= e.to) {
        return Err(ValidityError::BackwardEdge(e));
    }
    let mut out = BTreeMap::new();
    for e in &edges {
        if out.insert(e.from, e.to).is_some_and(|prev| prev != e.to) {
            return Err(ValidityError::EdgeCardinality(e.from));
        }
    }
    if let Some(&v) = blocks.iter().find(|v| !out.contains_key(v)) {
        return Err(ValidityError::EdgeCardinality(v));
    }
    Ok(Publication { edges: out })
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(" ")
}

/// Compact form free of commas so it can sit in a CSV cell:
/// `wait`, `path[1 3]->0`, `publish[2]->0`, `set[1->0 3->1]`.
impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Wait => write!(f, "wait"),
            Action::PublishPath { blocks, base } => {
                write!(f, "path[{}]->{}", join(blocks.iter().map(|b| b.to_string())), base)
            }
            Action::Publish { count, base } => write!(f, "publish[{count}]->{base}"),
            Action::PublishSet { edges, .. } => {
                write!(f, "set[{}]", join(edges.iter().map(|e| e.to_string())))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse action `{0}`")]
pub struct ActionParseError(pub String);

impl FromStr for Action {
    type Err = ActionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ActionParseError(s.to_string());
        let s = s.trim();
        if s == "wait" {
            return Ok(Action::Wait);
        }
        let open = s.find('[').ok_or_else(err)?;
        let close = s.find(']').ok_or_else(err)?;
        if close < open {
            return Err(err());
        }
        let kind = s[..open].trim();
        let inner = &s[open + 1..close];
        let tail = s[close + 1..].trim();
        let base = || -> Result<BlockId, ActionParseError> {
            tail.strip_prefix("->")
                .ok_or_else(err)?
                .trim()
                .parse()
                .map_err(|_| err())
        };
        let ids = || -> Result<Vec<BlockId>, ActionParseError> {
            inner.split_whitespace().map(|t| t.parse().map_err(|_| err())).collect()
        };
        match kind {
            "path" => Ok(Action::path(ids()?, base()?)),
            "publish" => {
                let count = inner.trim().parse().map_err(|_| err())?;
                Ok(Action::publish(count, base()?))
            }
            "set" if tail.is_empty() => {
                let mut edges = Vec::new();
                for tok in inner.split_whitespace() {
                    let (a, b) = tok.split_once("->").ok_or_else(err)?;
                    edges.push((a.parse().map_err(|_| err())?, b.parse().map_err(|_| err())?));
                }
                let blocks: Vec<BlockId> = edges.iter().map(|e| e.0).collect();
                Ok(Action::set(blocks, edges))
            }
            _ => Err(err()),
        }
    }
}
