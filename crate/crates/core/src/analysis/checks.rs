//! Long-run sanity checks on a single simulated trace.

use super::{AnalysisError, StrategyFactory};
use crate::blocktree::{potential_reward, GameState};
use crate::strategies::Game;

const GROWTH_SLACK: f64 = 0.01;
pub const DEFAULT_DECAY_EPS: f64 = 0.02;
const MIN_ROUNDS: u64 = 10_000;
const SAMPLES: u64 = 2000;

fn check_args(alpha: f64, rounds: u64) -> Result<(), AnalysisError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnalysisError::Domain {
            what: "alpha",
            value: alpha,
            domain: "(0, 1)",
        });
    }
    if rounds < MIN_ROUNDS {
        return Err(AnalysisError::BadArgument(format!("rounds must be at least {MIN_ROUNDS}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    /// (n, h(C(X_n))/n), sampled.
    pub series: Vec<(u64, f64)>,
    /// Minimum of h/n over every n ≥ rounds/2.
    pub tail_min: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn growth_rate_check(
    factory: StrategyFactory,
    alpha: f64,
    rounds: u64,
    seed: u64,
) -> Result<GrowthReport, AnalysisError> {
    check_args(alpha, rounds)?;
    let every = (rounds / SAMPLES).max(1);
    let mut game = Game::from_state(GameState::new(), factory(), alpha, seed, 0);
    let mut series = Vec::new();
    let mut tail_min = f64::INFINITY;
    for n in 1..=rounds {
        let r = game.step()?.expect("random draws never run out");
        let rate = r.height as f64 / n as f64;
        if n >= rounds / 2 {
            tail_min = tail_min.min(rate);
        }
        if n % every == 0 || n == rounds {
            series.push((n, rate));
        }
    }
    let bound = (1.0 - alpha) - GROWTH_SLACK;
    Ok(GrowthReport {
        series,
        tail_min,
        bound,
        holds: tail_min >= bound,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// (n, pot¹(X_n)/n) over the second half, sampled.
    pub series: Vec<(u64, f64)>,
    pub tail_max: f64,
    pub eps: f64,
    pub holds: bool,
}

pub fn potential_reward_decay_check(
    factory: StrategyFactory,
    alpha: f64,
    rounds: u64,
    seed: u64,
    eps: f64,
) -> Result<DecayReport, AnalysisError> {
    check_args(alpha, rounds)?;
    let every = (rounds / SAMPLES).max(1);
    let mut game = Game::from_state(GameState::new(), factory(), alpha, seed, 0);
    let mut series = Vec::new();
    let mut tail_max = 0.0f64;
    for n in 1..=rounds {
        game.step()?.expect("random draws never run out");
        if n >= rounds / 2 && (n % every == 0 || n == rounds) {
            let pot = potential_reward(game.state()) as f64 / n as f64;
            tail_max = tail_max.max(pot);
            series.push((n, pot));
        }
    }
    Ok(DecayReport {
        series,
        tail_max,
        eps,
        holds: tail_max < eps,
    })
}
