use std::collections::BTreeSet;

use proptest::prelude::*;

use posmine::blocktree::{
    parse_statefile, potential_reward, potential_reward_exhaustive, write_statefile, Action,
    BlockId, GameState, Miner,
};
use posmine::reductions::{LcmReduction, OrderlyReduction};
use posmine::strategies::fuzz::RandomTimeserving;
use posmine::strategies::{
    Frontier, Game, NothingAtStake, ReplayVisitor, RoundRecord, Script, Scripted, SelfishMining,
    Strategy, StrategySpec,
};
use posmine::structure::{checkpoints, classify_trace};

fn strategy(kind: u8, seed: u64) -> Box<dyn Strategy> {
    match kind % 4 {
        0 => Box::new(Frontier::new(Miner::One)),
        1 => Box::new(SelfishMining::new()),
        2 => Box::new(NothingAtStake::new()),
        _ => Box::new(RandomTimeserving::new(0.35, seed)),
    }
}

/// A state reached by play; random strategies never capitulate, so these
/// trees keep their forks.
fn reached(kind: u8, alpha: f64, seed: u64, rounds: u64) -> GameState {
    let mut g = Game::from_state(GameState::new(), strategy(kind, seed), alpha, seed, 0);
    g.run(rounds).unwrap();
    g.state().clone()
}

/// Checkpoints straight from the definition.
fn checkpoints_oracle(s: &GameState) -> Vec<BlockId> {
    let chain = s.chain();
    let own = s.unpublished(Miner::One);
    let mut out = vec![chain[0]];
    let mut p = 0usize;
    for v in 1..chain.len() {
        let mine = chain[p + 1..=v]
            .iter()
            .filter(|&&b| s.creator(b) == Some(Miner::One))
            .count();
        let withheld = own.iter().filter(|&&u| u > chain[p] && u <= chain[v]).count();
        if mine >= withheld {
            out.push(chain[v]);
            p = v;
        }
    }
    out
}

struct Check;

impl ReplayVisitor for Check {
    fn finished(&mut self, r: &RoundRecord, s: &GameState) {
        s.check_invariants().unwrap();
        assert_eq!(s.num_published(), s.published().count());
        assert_eq!(r.chain[0] + r.chain[1], r.height);
        assert_eq!(s.tip(), r.tip);
        let rev = r.revenue();
        assert!((0.0..=1.0).contains(&rev));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn play_keeps_state_invariants(kind in 0u8..4, alpha in 0.05f64..0.49, seed in 0u64..1000, rounds in 1u64..300) {
        let t = Game::from_state(GameState::new(), strategy(kind, seed), alpha, seed, 0).run(rounds).unwrap();
        let mut sum = [0i64; 2];
        for r in &t.records {
            sum[0] += r.reward[0];
            sum[1] += r.reward[1];
        }
        let last = t.records.last().unwrap();
        prop_assert_eq!([sum[0] as u64, sum[1] as u64], last.chain);
        let end = t.replay(&mut Check).unwrap();
        prop_assert_eq!(end.tip(), last.tip);
    }

    #[test]
    fn statefile_roundtrip(kind in 0u8..4, alpha in 0.1f64..0.49, seed in 0u64..1000, rounds in 0u64..120) {
        let s = reached(kind, alpha, seed, rounds);
        let back = parse_statefile(&write_statefile(&s)).unwrap();
        prop_assert!(back.canonical_equal(&s));
        prop_assert_eq!(back.chain(), s.chain());
        prop_assert_eq!(back.base(), s.base());
        prop_assert_eq!(back.round(), s.round());
    }

    #[test]
    fn checkpoints_match_definition(kind in 0u8..4, alpha in 0.1f64..0.49, seed in 0u64..1000, rounds in 0u64..200) {
        let s = reached(kind, alpha, seed, rounds);
        let cps = checkpoints(&s);
        prop_assert_eq!(&cps, &checkpoints_oracle(&s));
        prop_assert_eq!(cps[0], s.root());
        prop_assert!(cps.iter().all(|&c| s.on_chain(c)));
        prop_assert!(cps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn potential_reward_matches_enumeration(alpha in 0.3f64..0.49, seed in 0u64..1000, rounds in 1u64..14) {
        let s = reached(3, alpha, seed, rounds);
        if let Ok(exact) = potential_reward_exhaustive(&s) {
            prop_assert_eq!(potential_reward(&s), exact);
        }
    }

    #[test]
    fn capitulation_keeps_chain_suffix(kind in 0u8..4, alpha in 0.1f64..0.49, seed in 0u64..1000, rounds in 1u64..150, frac in 0.0f64..=1.0) {
        let s = reached(kind, alpha, seed, rounds);
        let c = (s.tip_height() as f64 * frac).floor() as u64;
        let mut after = s.clone();
        after.capitulate(c).unwrap();
        after.check_invariants().unwrap();
        prop_assert_eq!(after.root(), s.chain()[c as usize]);
        prop_assert_eq!(after.chain(), &s.chain()[c as usize..]);
        prop_assert_eq!(after.total_height(), s.total_height());
        prop_assert_eq!(after.chain_count(Miner::One), s.chain_count(Miner::One));
        let root = s.chain()[c as usize];
        let kept: BTreeSet<BlockId> = after.unpublished(Miner::One).clone();
        for &u in s.unpublished(Miner::One) {
            prop_assert_eq!(kept.contains(&u), u > root && s.max_reach(u).unwrap() > c);
        }
    }

    #[test]
    fn action_text_roundtrip(blocks in proptest::collection::btree_set(1u64..60, 1..6), base in 0u64..60, k in 1usize..9) {
        for a in [Action::path(blocks.iter().copied(), base), Action::publish(k, base), Action::Wait] {
            let back: Action = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }
    }

    #[test]
    fn script_replays_its_trace(kind in 0u8..4, alpha in 0.1f64..0.49, seed in 0u64..1000, rounds in 1u64..200) {
        let t = Game::from_state(GameState::new(), strategy(kind, seed), alpha, seed, 0).run(rounds).unwrap();
        let text = Script::from_trace(&t, "p").to_text();
        let script = Script::parse(&text, "p").unwrap();
        let creators = script.creators.clone().unwrap();
        let again = Game::with_creators(Box::new(Scripted::new(script)), creators).run(rounds + 5).unwrap();
        prop_assert_eq!(again.records, t.records);
    }

    #[test]
    fn orderly_reduction_preserves_revenue(p in 0.05f64..0.9, alpha in 0.2f64..0.49, seed in 0u64..1000) {
        let inner = Game::new(Box::new(RandomTimeserving::new(p, seed)), alpha, seed).run(250).unwrap();
        let reduced = Game::new(
            Box::new(OrderlyReduction::checked(Box::new(RandomTimeserving::new(p, seed)))),
            alpha,
            seed,
        )
        .run(250)
        .unwrap();
        for (a, b) in inner.records.iter().zip(&reduced.records) {
            prop_assert_eq!(a.revenue(), b.revenue());
        }
        prop_assert!(classify_trace(&reduced).unwrap().orderly.holds());
    }

    #[test]
    fn lcm_reduction_dominates(p in 0.05f64..0.9, alpha in 0.2f64..0.49, seed in 0u64..1000) {
        let make = || Box::new(OrderlyReduction::new(Box::new(RandomTimeserving::new(p, seed))));
        let inner = Game::new(make(), alpha, seed).run(250).unwrap();
        let reduced = Game::new(Box::new(LcmReduction::new(make())), alpha, seed).run(250).unwrap();
        for (a, b) in inner.records.iter().zip(&reduced.records) {
            prop_assert!(b.revenue() >= a.revenue(), "round {}", a.round);
        }
        let r = classify_trace(&reduced).unwrap();
        prop_assert!(r.lcm.holds() && r.timeserving.holds());
    }

    #[test]
    fn strategy_spec_roundtrip(p in 0.0f64..=1.0, seed in 0u64..1000, wrap in 0u8..3) {
        let inner = format!("random:{p}:{seed}");
        let text = match wrap {
            0 => inner,
            1 => format!("orderly({inner})"),
            _ => format!("lcm(orderly({inner}))"),
        };
        let spec: StrategySpec = text.parse().unwrap();
        prop_assert_eq!(spec.to_string(), text.clone());
        prop_assert_eq!(spec.build().unwrap().id().to_string(), text);
    }
}
