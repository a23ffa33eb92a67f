//! Round stepping, seeded games and replayable traces.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Frontier, SimError, Strategy};
use crate::blocktree::{Action, BlockId, GameState, Miner, Publication};

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub creator: Miner,
    /// Desugared; a path whenever the published set is one.
    pub miner2_action: Action,
    pub miner1_action: Action,
    /// Height of the capitulation Miner 1 performed, if any.
    pub capitulation: Option<u64>,
    /// Capitulated and the result is B_0 up to relabelling.
    pub renewal: bool,
    pub tip: BlockId,
    pub height: u64,
    /// Blocks per miner on the longest path, finalized ones included.
    pub chain: [u64; 2],
    /// r^1, r^2 over the round.
    pub reward: [i64; 2],
}

impl RoundRecord {
    pub fn revenue(&self) -> f64 {
        if self.height == 0 {
            0.0
        } else {
            self.chain[0] as f64 / self.height as f64
        }
    }
}

fn invalid(round: u64, miner: Miner, action: &Action, source: crate::blocktree::ValidityError) -> SimError {
    SimError::Invalid {
        round,
        miner,
        action: action.to_string(),
        source,
    }
}

/// One round: block creation, Miner 2's action, Miner 1's action, then
/// Miner 1's capitulation if it asked for one.
pub fn step_round(
    state: &mut GameState,
    creator: Miner,
    miner2: &mut dyn Strategy,
    miner1: &mut dyn Strategy,
) -> Result<RoundRecord, SimError> {
    let before = [state.chain_count(Miner::One), state.chain_count(Miner::Two)];
    let round = state.create_block(creator);
    let d2 = miner2.decide(state, creator)?;
    let p2 = state
        .apply(Miner::Two, &d2.action)
        .map_err(|e| invalid(round, Miner::Two, &d2.action, e))?;
    let d1 = miner1.decide(state, creator)?;
    let p1 = state
        .apply(Miner::One, &d1.action)
        .map_err(|e| invalid(round, Miner::One, &d1.action, e))?;
    let mut capitulation = None;
    if let Some(c) = d1.capitulate {
        let h = c.height(state);
        state
            .capitulate(h)
            .map_err(|source| SimError::Capitulation { round, source })?;
        capitulation = Some(h);
    }
    let chain = [state.chain_count(Miner::One), state.chain_count(Miner::Two)];
    Ok(RoundRecord {
        round,
        creator,
        miner2_action: p2.to_action(),
        miner1_action: p1.to_action(),
        capitulation,
        renewal: capitulation.is_some() && state.is_fresh(),
        tip: state.tip(),
        height: state.total_height(),
        chain,
        reward: [
            chain[0] as i64 - before[0] as i64,
            chain[1] as i64 - before[1] as i64,
        ],
    })
}

enum Draws {
    Random { alpha: f64, rng: ChaCha8Rng },
    Fixed { creators: Vec<Miner>, next: usize },
}

/// A game with Miner 2 playing FRONTIER.
pub struct Game {
    state: GameState,
    miner1: Box<dyn Strategy>,
    miner2: Box<dyn Strategy>,
    draws: Draws,
}

/// Per-game generator: `seed` selects the experiment, `stream` the game.
pub(crate) fn game_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl Game {
    pub fn new(miner1: Box<dyn Strategy>, alpha: f64, seed: u64) -> Self {
        Self::from_state(GameState::new(), miner1, alpha, seed, 0)
    }

    pub fn from_state(
        state: GameState,
        miner1: Box<dyn Strategy>,
        alpha: f64,
        seed: u64,
        stream: u64,
    ) -> Self {
        Game {
            state,
            miner1,
            miner2: Box::new(Frontier::new(Miner::Two)),
            draws: Draws::Random {
                alpha,
                rng: game_rng(seed, stream),
            },
        }
    }

    /// Replays a fixed creator sequence; the game ends when it runs out.
    pub fn with_creators(miner1: Box<dyn Strategy>, creators: Vec<Miner>) -> Self {
        Game {
            state: GameState::new(),
            miner1,
            miner2: Box::new(Frontier::new(Miner::Two)),
            draws: Draws::Fixed { creators, next: 0 },
        }
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn strategy(&self) -> &dyn Strategy {
        self.miner1.as_ref()
    }

    /// Changes the creator probability for subsequent rounds.
    pub fn set_alpha(&mut self, a: f64) {
        if let Draws::Random { alpha, .. } = &mut self.draws {
            *alpha = a;
        }
    }

    fn draw(&mut self) -> Option<Miner> {
        match &mut self.draws {
            Draws::Random { alpha, rng } => Some(if rng.gen::<f64>() < *alpha {
                Miner::One
            } else {
                Miner::Two
            }),
            Draws::Fixed { creators, next } => {
                let c = creators.get(*next).copied();
                *next += 1;
                c
            }
        }
    }

    /// Plays one round; `None` once a fixed creator sequence is exhausted.
    pub fn step(&mut self) -> Result<Option<RoundRecord>, SimError> {
        let Some(creator) = self.draw() else {
            return Ok(None);
        };
        step_round(
            &mut self.state,
            creator,
            self.miner2.as_mut(),
            self.miner1.as_mut(),
        )
        .map(Some)
    }

    pub fn run(&mut self, rounds: u64) -> Result<Trace, SimError> {
        let mut trace = Trace {
            strategy: self.miner1.id().to_string(),
            initial: self.state.clone(),
            records: Vec::with_capacity(rounds.min(1 << 20) as usize),
        };
        for _ in 0..rounds {
            match self.step()? {
                Some(r) => trace.records.push(r),
                None => break,
            }
        }
        Ok(trace)
    }
}

/// Plays `rounds` rounds from B_0 against FRONTIER.
pub fn run_game(
    strategy: Box<dyn Strategy>,
    alpha: f64,
    rounds: u64,
    seed: u64,
) -> Result<Trace, SimError> {
    Game::new(strategy, alpha, seed).run(rounds)
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub strategy: String,
    pub initial: GameState,
    pub records: Vec<RoundRecord>,
}

/// Callbacks for [`Trace::replay`]; each defaults to doing nothing.
pub trait ReplayVisitor {
    /// After Miner 2 acted, before Miner 1 acts.
    fn half(&mut self, _record: &RoundRecord, _half: &GameState) {}
    /// Right after Miner 1's action, before any capitulation.
    fn acted(&mut self, _record: &RoundRecord, _state: &GameState, _publication: &Publication) {}
    /// End of round.
    fn finished(&mut self, _record: &RoundRecord, _state: &GameState) {}
}

impl Trace {
    pub fn final_revenue(&self) -> f64 {
        self.records.last().map_or(0.0, RoundRecord::revenue)
    }

    pub fn capitulations(&self) -> usize {
        self.records.iter().filter(|r| r.capitulation.is_some()).count()
    }

    pub fn renewals(&self) -> usize {
        self.records.iter().filter(|r| r.renewal).count()
    }

    /// Re-executes the recorded rounds from the initial state, returning the final state.
    pub fn replay(&self, visitor: &mut dyn ReplayVisitor) -> Result<GameState, SimError> {
        let mut state = self.initial.clone();
        for r in &self.records {
            state.create_block(r.creator);
            state
                .apply(Miner::Two, &r.miner2_action)
                .map_err(|e| invalid(r.round, Miner::Two, &r.miner2_action, e))?;
            visitor.half(r, &state);
            let p = state
                .apply(Miner::One, &r.miner1_action)
                .map_err(|e| invalid(r.round, Miner::One, &r.miner1_action, e))?;
            visitor.acted(r, &state, &p);
            if let Some(c) = r.capitulation {
                state
                    .capitulate(c)
                    .map_err(|source| SimError::Capitulation { round: r.round, source })?;
            }
            visitor.finished(r, &state);
        }
        Ok(state)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "round,creator,miner2_action,miner1_action,chain_tip,height,r1,r2,capitulated\n",
        );
        for r in &self.records {
            let cap = match (r.capitulation, r.renewal) {
                (Some(c), true) => format!("b0@{c}"),
                (Some(c), false) => format!("{c}"),
                (None, _) => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.round,
                r.creator,
                r.miner2_action,
                r.miner1_action,
                r.tip,
                r.height,
                r.reward[0],
                r.reward[1],
                cap
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::named;
    use crate::strategies::Scripted;

    struct Idle;
    impl Strategy for Idle {
        fn id(&self) -> super::super::StrategyId {
            super::super::StrategyId::Fuzz("idle".into())
        }
        fn decide(&mut self, _: &GameState, _: Miner) -> Result<super::super::Decision, super::super::StrategyError> {
            Ok(super::super::Decision::wait())
        }
    }

    #[test]
    fn honest_round_from_b0() {
        let mut s = GameState::new();
        let r = step_round(&mut s, Miner::Two, &mut Frontier::new(Miner::Two), &mut Frontier::new(Miner::One))
            .unwrap();
        assert_eq!(r.reward, [0, 1]);
        assert!(r.renewal);
        assert_eq!(r.miner2_action, Action::path([1], 0));
    }

    #[test]
    fn waiting_reaches_named_states() {
        let mut s = GameState::new();
        let mut m2 = Frontier::new(Miner::Two);
        step_round(&mut s, Miner::One, &mut m2, &mut Idle).unwrap();
        assert!(s.canonical_equal(&named::lead(1)));
        step_round(&mut s, Miner::Two, &mut m2, &mut Idle).unwrap();
        assert!(s.canonical_equal(&named::b11()));
        let mut s = GameState::new();
        step_round(&mut s, Miner::Two, &mut m2, &mut Idle).unwrap();
        assert!(s.canonical_equal(&named::b01()));
    }

    #[test]
    fn same_seed_same_trace() {
        let a = run_game(Box::new(Frontier::new(Miner::One)), 0.3, 500, 9).unwrap();
        let b = run_game(Box::new(Frontier::new(Miner::One)), 0.3, 500, 9).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.renewals(), 500);
    }

    #[test]
    fn zero_alpha_gives_zero_revenue() {
        let t = run_game(Box::new(Frontier::new(Miner::One)), 0.0, 200, 1).unwrap();
        assert_eq!(t.final_revenue(), 0.0);
        assert_eq!(t.records.last().unwrap().height, 200);
    }

    #[test]
    fn replay_reproduces_final_state() {
        let mut g = Game::new(Box::new(crate::strategies::SelfishMining::new()), 0.4, 3);
        let t = g.run(2000).unwrap();
        struct Nop;
        impl ReplayVisitor for Nop {}
        let end = t.replay(&mut Nop).unwrap();
        assert!(end.canonical_equal(g.state()));
        assert_eq!(end.total_height(), g.state().total_height());
    }

    #[test]
    fn script_exhaustion_and_fixed_creators() {
        let script = crate::strategies::Script::parse("creators 1 1 2\n2 path[1 2]->0\n", "t").unwrap();
        let creators = script.creators.clone().unwrap();
        let mut g = Game::with_creators(Box::new(Scripted::new(script)), creators);
        let t = g.run(10).unwrap();
        assert_eq!(t.records.len(), 3);
        assert_eq!(g.state().chain(), &[0, 1, 2, 3]);
        assert!(t.to_csv().starts_with("round,creator"));
    }
}
