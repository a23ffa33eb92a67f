//! Strategy-to-strategy transformations. Each wrapper runs the inner
//! strategy in a private shadow game driven by the same creator draws and
//! translates its actions into the real game.

mod checkpoint;
mod lcm;
mod orderly;
mod shadow;

pub use checkpoint::{checkpoint_preserve_case1, Case1Error, Case1Plan};
pub use lcm::{iterated_lcm, LcmReduction, StepN};
pub use orderly::{check_sigma, OrderlyReduction, SigmaMap};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::{Action, Miner};
    use crate::strategies::fuzz::RandomTimeserving;
    use crate::strategies::{Frontier, Game, NothingAtStake, Script, Scripted, Strategy};
    use crate::structure::classify_trace;

    fn coupled(a: Box<dyn Strategy>, b: Box<dyn Strategy>, alpha: f64, rounds: u64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let ta = Game::new(a, alpha, seed).run(rounds).unwrap();
        let tb = Game::new(b, alpha, seed).run(rounds).unwrap();
        (
            ta.records.iter().map(|r| r.revenue()).collect(),
            tb.records.iter().map(|r| r.revenue()).collect(),
        )
    }

    #[test]
    fn orderly_of_orderly_is_identity() {
        for seed in 0..3 {
            let a = Game::new(Box::new(NothingAtStake::new()), 0.4, seed).run(2000).unwrap();
            let b = Game::new(Box::new(OrderlyReduction::checked(Box::new(NothingAtStake::new()))), 0.4, seed)
                .run(2000)
                .unwrap();
            assert_eq!(a.records, b.records);
        }
    }

    #[test]
    fn orderly_matches_revenue_and_is_orderly() {
        for seed in 0..5 {
            let (inner, reduced) = coupled(
                Box::new(RandomTimeserving::new(0.3, seed)),
                Box::new(OrderlyReduction::checked(Box::new(RandomTimeserving::new(0.3, seed)))),
                0.45,
                400,
                seed,
            );
            assert_eq!(inner, reduced);
            let t = Game::new(Box::new(OrderlyReduction::new(Box::new(RandomTimeserving::new(0.3, seed)))), 0.45, seed)
                .run(400)
                .unwrap();
            let r = classify_trace(&t).unwrap();
            assert!(r.orderly.holds(), "{}", r.orderly);
            assert!(r.timeserving.holds(), "{}", r.timeserving);
        }
    }

    /// Miner 1 withholds 1..=3, Miner 2 publishes 4 and 5; Miner 1 then
    /// overtakes with {2, 3, 6} on 0, skipping 1.
    #[test]
    fn orderly_publishes_smallest_blocks() {
        let text = "creators 1 1 1 2 2 1\n6 path[2 3 6]->0\n";
        let script = Script::parse(text, "skip").unwrap();
        let creators = script.creators.clone().unwrap();
        let mut g = Game::with_creators(Box::new(OrderlyReduction::checked(Box::new(Scripted::new(script)))), creators);
        let t = g.run(6).unwrap();
        assert_eq!(t.records[5].miner1_action, Action::path([1, 2, 3], 0));
    }

    #[test]
    fn lcm_dominates_and_is_lcm() {
        for seed in 0..5 {
            let make = || Box::new(OrderlyReduction::new(Box::new(RandomTimeserving::new(0.3, seed))));
            let (inner, reduced) = coupled(make(), Box::new(LcmReduction::new(make())), 0.45, 400, seed);
            for (n, (a, b)) in inner.iter().zip(&reduced).enumerate() {
                assert!(b >= a, "seed {seed} round {}: {b} < {a}", n + 1);
            }
            let t = Game::new(Box::new(LcmReduction::new(make())), 0.45, seed).run(400).unwrap();
            let r = classify_trace(&t).unwrap();
            assert!(r.lcm.holds(), "{}", r.lcm);
            assert!(r.orderly.holds(), "{}", r.orderly);
        }
    }

    #[test]
    fn iterated_matches_direct() {
        for seed in 0..4 {
            let make = || Box::new(OrderlyReduction::new(Box::new(RandomTimeserving::new(0.4, seed))));
            let direct = Game::new(Box::new(LcmReduction::new(make())), 0.45, seed).run(40).unwrap();
            let iterated = Game::new(iterated_lcm(make(), 40), 0.45, seed).run(40).unwrap();
            assert_eq!(direct.records, iterated.records, "seed {seed}");
        }
    }

    #[test]
    fn frontier_unchanged_by_lcm() {
        let a = Game::new(Box::new(Frontier::new(Miner::One)), 0.3, 1).run(500).unwrap();
        let b = Game::new(Box::new(LcmReduction::new(Box::new(Frontier::new(Miner::One)))), 0.3, 1)
            .run(500)
            .unwrap();
        assert_eq!(a.records, b.records);
    }
}
