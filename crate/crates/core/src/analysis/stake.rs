//! Stake that compounds: finalized blocks mint coins to their creator.

use super::{AnalysisError, StrategyFactory};
use crate::blocktree::GameState;
use crate::strategies::Game;

pub const DEFAULT_COINS: u64 = 100_000;
const SAMPLES: u64 = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct StakeSeries {
    pub alpha0: f64,
    pub coins: u64,
    /// (round, Miner 1's stake fraction after the round), sampled.
    pub points: Vec<(u64, f64)>,
    pub final_stake: f64,
    pub minted: [u64; 2],
}

impl StakeSeries {
    pub const CSV_HEADER: &'static str = "round,stake";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (r, s) in &self.points {
            out.push_str(&format!("{r},{s:.8}\n"));
        }
        out
    }
}

/// Coins are minted when Miner 1 capitulates, one per block that the
/// capitulation finalizes, so blocks that may still be forked never count.
pub fn stake_dynamics(
    factory: StrategyFactory,
    alpha0: f64,
    coins: u64,
    rounds: u64,
    seed: u64,
) -> Result<StakeSeries, AnalysisError> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(AnalysisError::Domain {
            what: "alpha0",
            value: alpha0,
            domain: "(0, 1)",
        });
    }
    if coins == 0 {
        return Err(AnalysisError::BadArgument("coins must be at least 1".into()));
    }
    let every = (rounds / SAMPLES).max(1);
    let mut c1 = alpha0 * coins as f64;
    let mut c2 = coins as f64 - c1;
    let mut game = Game::from_state(GameState::new(), factory(), alpha0, seed, 0);
    let mut base = game.state().base();
    let mut minted = [0u64; 2];
    let mut points = vec![(0, c1 / (c1 + c2))];
    for n in 1..=rounds {
        game.set_alpha(c1 / (c1 + c2));
        let r = game.step()?.expect("random draws never run out");
        if r.capitulation.is_some() {
            let now = game.state().base();
            let d = [now[0] - base[0], now[1] - base[1]];
            c1 += d[0] as f64;
            c2 += d[1] as f64;
            minted[0] += d[0];
            minted[1] += d[1];
            base = now;
        }
        if n % every == 0 || n == rounds {
            points.push((n, c1 / (c1 + c2)));
        }
    }
    Ok(StakeSeries {
        alpha0,
        coins,
        points,
        final_stake: c1 / (c1 + c2),
        minted,
    })
}
