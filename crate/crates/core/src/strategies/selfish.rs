//! Selfish Mining and its nothing-at-stake variant as explicit automata.
//!
//! Both track their position with a node and check on every call that the
//! half state has the shape the node implies; a mismatch means the strategy
//! is being driven by something other than the game it was built for.

use super::{Capitulation, Decision, Strategy, StrategyError, StrategyId};
use crate::blocktree::{Action, GameState, Miner};

/// (|U_1|, tip height, published non-root blocks) relative to the root.
fn shape(half: &GameState) -> (usize, u64, usize) {
    (
        half.unpublished(Miner::One).len(),
        half.tip_height(),
        half.num_published() - 1,
    )
}

fn unreachable(strategy: &'static str, half: &GameState, node: impl std::fmt::Debug) -> StrategyError {
    let (u, h, p) = shape(half);
    StrategyError::UnreachableState {
        strategy,
        round: half.round(),
        detail: format!("node {node:?} with |U1|={u}, tip height {h}, {p} published"),
    }
}

/// Publish every withheld Miner-1 block as one path on the root.
fn release_all(half: &GameState) -> Action {
    Action::path(half.unpublished(Miner::One).iter().copied(), half.root())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmNode {
    /// B_0.
    Idle,
    /// B_{1,0}.
    Lead1,
    /// B_{1,1}.
    Tie,
    /// Reached from B_{2,0}; withholding until the lead shrinks to one.
    Race,
}

#[derive(Clone, Debug)]
pub struct SelfishMining {
    node: SmNode,
}

impl Default for SelfishMining {
    fn default() -> Self {
        Self::new()
    }
}

impl SelfishMining {
    pub fn new() -> Self {
        SelfishMining { node: SmNode::Idle }
    }

    /// Start at a given node, for play from a non-initial state.
    pub fn with_node(node: SmNode) -> Self {
        SelfishMining { node }
    }

    pub fn node(&self) -> SmNode {
        self.node
    }
}

impl Strategy for SelfishMining {
    fn id(&self) -> StrategyId {
        StrategyId::Selfish
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        use SmNode::*;
        let s = shape(half);
        let mine = creator == Miner::One;
        let (next, decision) = match (self.node, mine, s) {
            (Idle, true, (1, 0, 0)) => (Lead1, Decision::wait()),
            (Idle, false, (0, 1, 1)) => (Idle, Decision::wait().then_capitulate(Capitulation::Tip)),
            (Lead1, true, (2, 0, 0)) => (Race, Decision::wait()),
            (Lead1, false, (1, 1, 1)) => (Tie, Decision::wait()),
            (Tie, true, (2, 1, 1)) => (
                Idle,
                Decision::act(release_all(half)).then_capitulate(Capitulation::Tip),
            ),
            (Tie, false, (1, 2, 2)) => (Idle, Decision::wait().then_capitulate(Capitulation::Tip)),
            (Race, _, (k, j, p)) if p as u64 == j && k as u64 > j => {
                if j + 1 == k as u64 {
                    (
                        Idle,
                        Decision::act(release_all(half)).then_capitulate(Capitulation::Tip),
                    )
                } else {
                    (Race, Decision::wait())
                }
            }
            (node, _, _) => return Err(unreachable("sm", half, node)),
        };
        self.node = next;
        Ok(decision)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsmNode {
    /// B_0.
    Idle,
    /// B_{1,0}.
    Lead1,
    /// B_{1,1}.
    Tie,
    /// B_{1,2}.
    Behind,
    /// B_{2,2}.
    Tie2,
    /// Reached from B_{2,0}, as in SM.
    Race,
}

/// Like SM, but from B_{1,1} it keeps its orphaned block and waits one
/// more honest block before giving up.
#[derive(Clone, Debug)]
pub struct NothingAtStake {
    node: NsmNode,
}

impl Default for NothingAtStake {
    fn default() -> Self {
        Self::new()
    }
}

impl NothingAtStake {
    pub fn new() -> Self {
        NothingAtStake { node: NsmNode::Idle }
    }

    pub fn with_node(node: NsmNode) -> Self {
        NothingAtStake { node }
    }

    pub fn node(&self) -> NsmNode {
        self.node
    }
}

impl Strategy for NothingAtStake {
    fn id(&self) -> StrategyId {
        StrategyId::NothingAtStake
    }

    fn decide(&mut self, half: &GameState, creator: Miner) -> Result<Decision, StrategyError> {
        use NsmNode::*;
        let s = shape(half);
        let mine = creator == Miner::One;
        let release = || Decision::act(release_all(half)).then_capitulate(Capitulation::Tip);
        let give_up = || Decision::wait().then_capitulate(Capitulation::Tip);
        let (next, decision) = match (self.node, mine, s) {
            (Idle, true, (1, 0, 0)) => (Lead1, Decision::wait()),
            (Idle, false, (0, 1, 1)) => (Idle, give_up()),
            (Lead1, true, (2, 0, 0)) => (Race, Decision::wait()),
            (Lead1, false, (1, 1, 1)) => (Tie, Decision::wait()),
            (Tie, true, (2, 1, 1)) => (Idle, release()),
            (Tie, false, (1, 2, 2)) => (Behind, Decision::wait()),
            (Behind, true, (2, 2, 2)) => (Tie2, Decision::wait()),
            (Behind, false, (1, 3, 3)) => (Idle, give_up()),
            (Tie2, true, (3, 2, 2)) => (Idle, release()),
            // Finalize all but the newest honest block; the two newest
            // Miner-1 blocks and that honest block remain, which is B_{1,1}.
            (Tie2, false, (2, 3, 3)) => (
                Tie,
                Decision::wait().then_capitulate(Capitulation::Height(half.tip_height() - 1)),
            ),
            (Race, _, (k, j, p)) if p as u64 == j && k as u64 > j => {
                if j + 1 == k as u64 {
                    (Idle, release())
                } else {
                    (Race, Decision::wait())
                }
            }
            (node, _, _) => return Err(unreachable("nsm", half, node)),
        };
        self.node = next;
        Ok(decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::named;
    use crate::strategies::{step_round, Frontier};

    fn after_creation(mut s: GameState, creator: Miner) -> GameState {
        s.create_block(creator);
        if creator == Miner::Two {
            let tip = s.tip();
            s.apply(Miner::Two, &Action::path([s.round()], tip)).unwrap();
        }
        s
    }

    #[test]
    fn sm_tie_break_publishes_path_to_genesis() {
        let half = after_creation(named::b11(), Miner::One);
        let d = SelfishMining::with_node(SmNode::Tie).decide(&half, Miner::One).unwrap();
        assert_eq!(d.action, Action::path([1, 3], 0));
        assert_eq!(d.capitulate, Some(Capitulation::Tip));

        let half = after_creation(named::b11(), Miner::Two);
        let d = SelfishMining::with_node(SmNode::Tie).decide(&half, Miner::Two).unwrap();
        assert!(d.action.is_wait());
        assert_eq!(d.capitulate, Some(Capitulation::Tip));
    }

    #[test]
    fn sm_race_releases_when_lead_is_one() {
        let mut sm = SelfishMining::with_node(SmNode::Race);
        let half = after_creation(named::lead(2), Miner::Two);
        let d = sm.decide(&half, Miner::Two).unwrap();
        assert_eq!(d.action, Action::path([1, 2], 0));
        assert_eq!(sm.node(), SmNode::Idle);

        let mut sm = SelfishMining::with_node(SmNode::Race);
        let half = after_creation(named::lead(2), Miner::One);
        assert!(sm.decide(&half, Miner::One).unwrap().action.is_wait());
        assert_eq!(sm.node(), SmNode::Race);
    }

    #[test]
    fn nsm_b22_branches() {
        let half = after_creation(named::b22(), Miner::One);
        let d = NothingAtStake::with_node(NsmNode::Tie2).decide(&half, Miner::One).unwrap();
        assert_eq!(d.action, Action::path([1, 4, 5], 0));

        let mut s = named::b22();
        let mut nsm = NothingAtStake::with_node(NsmNode::Tie2);
        step_round(&mut s, Miner::Two, &mut Frontier::new(Miner::Two), &mut nsm).unwrap();
        assert!(s.canonical_equal(&named::b11()));
        assert_eq!(nsm.node(), NsmNode::Tie);
        assert_eq!(s.root(), 3);
    }

    #[test]
    fn nsm_behind_gives_up_on_honest_block() {
        let mut s = named::b12();
        let mut nsm = NothingAtStake::with_node(NsmNode::Behind);
        let r = step_round(&mut s, Miner::Two, &mut Frontier::new(Miner::Two), &mut nsm).unwrap();
        assert!(r.renewal);
        assert_eq!(r.miner2_action, Action::path([4], 3));
    }

    #[test]
    fn wrong_shape_is_reported() {
        let half = after_creation(named::b0(), Miner::One);
        let err = SelfishMining::with_node(SmNode::Tie).decide(&half, Miner::One).unwrap_err();
        assert!(matches!(err, StrategyError::UnreachableState { strategy: "sm", .. }));
    }
}
