//! Revenue and value estimators.

use std::fmt;

use super::{check_alpha, mean_stderr, par_units, AnalysisError, StrategyFactory};
use crate::blocktree::{GameState, Miner};
use crate::strategies::{Game, SimError};

pub const DEFAULT_CYCLE_CAP: u64 = 1_000_000;
const CYCLES_PER_CHUNK: u64 = 5_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    McLiminf,
    McRenewal,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::McLiminf => "mc_liminf",
            Method::McRenewal => "mc_renewal",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RevenuePoint {
    pub alpha: f64,
    pub strategy: String,
    pub method: Method,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub rounds: Option<u64>,
    pub games: Option<u64>,
    pub cycles: Option<u64>,
    pub seed: Option<u64>,
}

impl RevenuePoint {
    pub const CSV_HEADER: &'static str = "alpha,strategy,method,estimate,stderr,rounds,games,cycles,seed";

    pub fn closed_form(alpha: f64, strategy: &str, estimate: f64) -> Self {
        RevenuePoint {
            alpha,
            strategy: strategy.to_string(),
            method: Method::ClosedForm,
            estimate,
            stderr: None,
            rounds: None,
            games: None,
            cycles: None,
            seed: None,
        }
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: fmt::Display>(x: &Option<T>) -> String {
            x.as_ref().map_or(String::new(), |v| v.to_string())
        }
        format!(
            "{},{},{},{:.8},{},{},{},{},{}",
            self.alpha,
            self.strategy,
            self.method,
            self.estimate,
            self.stderr.map_or(String::new(), |s| format!("{s:.8}")),
            opt(&self.rounds),
            opt(&self.games),
            opt(&self.cycles),
            opt(&self.seed)
        )
    }
}

fn strategy_name(factory: StrategyFactory) -> String {
    factory().id().to_string()
}

/// Mean over `games` independent games of the final rev^(rounds).
pub fn mc_revenue_liminf(
    factory: StrategyFactory,
    alpha: f64,
    rounds: u64,
    games: u64,
    seed: u64,
) -> Result<RevenuePoint, AnalysisError> {
    check_alpha(alpha)?;
    if rounds == 0 || games == 0 {
        return Err(AnalysisError::BadArgument("rounds and games must be positive".into()));
    }
    let revs = par_units(games, |g| {
        let mut game = Game::from_state(GameState::new(), factory(), alpha, seed, g);
        let mut last = 0.0;
        for _ in 0..rounds {
            last = game.step()?.expect("random draws never run out").revenue();
        }
        Ok::<f64, SimError>(last)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, SimError>>()?;
    let (estimate, stderr) = mean_stderr(&revs);
    Ok(RevenuePoint {
        alpha,
        strategy: strategy_name(factory),
        method: Method::McLiminf,
        estimate,
        stderr: (games > 1).then_some(stderr),
        rounds: Some(rounds),
        games: Some(games),
        cycles: None,
        seed: Some(seed),
    })
}

/// Rewards over one renewal cycle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CycleStats {
    pub r1: i64,
    pub r2: i64,
    pub tau: u64,
}

#[derive(Clone, Copy, Debug, Default)]
struct Sums {
    n: f64,
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    ab: f64,
    tau: f64,
}

impl Sums {
    fn add(&mut self, c: CycleStats) {
        let (a, b) = (c.r1 as f64, (c.r1 + c.r2) as f64);
        self.n += 1.0;
        self.a += a;
        self.b += b;
        self.aa += a * a;
        self.bb += b * b;
        self.ab += a * b;
        self.tau += c.tau as f64;
    }

    fn merge(mut self, o: &Sums) -> Sums {
        self.n += o.n;
        self.a += o.a;
        self.b += o.b;
        self.aa += o.aa;
        self.bb += o.bb;
        self.ab += o.ab;
        self.tau += o.tau;
        self
    }
}

/// Plays consecutive renewal cycles of one game.
fn cycles_from(
    factory: StrategyFactory,
    alpha: f64,
    seed: u64,
    stream: u64,
    count: u64,
    cap: u64,
    mut each: impl FnMut(CycleStats),
) -> Result<(), SimError> {
    let mut game = Game::from_state(GameState::new(), factory(), alpha, seed, stream);
    for _ in 0..count {
        let mut c = CycleStats::default();
        loop {
            let r = game.step()?.expect("random draws never run out");
            c.r1 += r.reward[0];
            c.r2 += r.reward[1];
            c.tau += 1;
            if r.renewal {
                break;
            }
            if c.tau >= cap {
                return Err(SimError::NonRecurrent { cap });
            }
        }
        each(c);
    }
    Ok(())
}

/// E[R¹] / E[R¹ + R²] over `cycles` renewal cycles from B_0, with a
/// delta-method standard error.
pub fn mc_revenue_renewal(
    factory: StrategyFactory,
    alpha: f64,
    cycles: u64,
    seed: u64,
    cap: u64,
) -> Result<RevenuePoint, AnalysisError> {
    check_alpha(alpha)?;
    if cycles < 2 {
        return Err(AnalysisError::BadArgument("need at least two cycles".into()));
    }
    let chunks = cycles.div_ceil(CYCLES_PER_CHUNK);
    let parts = par_units(chunks, |c| {
        let n = CYCLES_PER_CHUNK.min(cycles - c * CYCLES_PER_CHUNK);
        let mut s = Sums::default();
        cycles_from(factory, alpha, seed, c, n, cap, |cs| s.add(cs)).map(|_| s)
    })
    .into_iter()
    .collect::<Result<Vec<Sums>, SimError>>()?;
    let s = parts.iter().fold(Sums::default(), |acc, p| acc.merge(p));
    let n = s.n;
    let (ma, mb) = (s.a / n, s.b / n);
    let r = ma / mb;
    let var_a = (s.aa / n - ma * ma) * n / (n - 1.0);
    let var_b = (s.bb / n - mb * mb) * n / (n - 1.0);
    let cov = (s.ab / n - ma * mb) * n / (n - 1.0);
    let var = (var_a - 2.0 * r * cov + r * r * var_b).max(0.0) / (mb * mb * n);
    Ok(RevenuePoint {
        alpha,
        strategy: strategy_name(factory),
        method: Method::McRenewal,
        estimate: r,
        stderr: Some(var.sqrt()),
        rounds: Some(s.tau as u64),
        games: Some(chunks),
        cycles: Some(cycles),
        seed: Some(seed),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub episodes: u64,
    pub mean_tau: f64,
}

/// Mean game reward r_λ(X_0, X_τ) from `start` until the strategy first
/// capitulates back to B_0.
pub fn mc_value(
    factory: StrategyFactory,
    start: &GameState,
    lambda: f64,
    alpha: f64,
    episodes: u64,
    seed: u64,
    cap: u64,
) -> Result<ValueEstimate, AnalysisError> {
    check_alpha(alpha)?;
    if episodes < 2 {
        return Err(AnalysisError::BadArgument("need at least two episodes".into()));
    }
    let out = par_units(episodes, |e| {
        let mut game = Game::from_state(start.clone(), factory(), alpha, seed, e);
        let c0 = [start.chain_count(Miner::One), start.chain_count(Miner::Two)];
        let mut tau = 0u64;
        loop {
            let r = game.step()?.expect("random draws never run out");
            tau += 1;
            if r.renewal {
                let d1 = r.chain[0] as f64 - c0[0] as f64;
                let d2 = r.chain[1] as f64 - c0[1] as f64;
                return Ok(((1.0 - lambda) * d1 - lambda * d2, tau as f64));
            }
            if tau >= cap {
                return Err(SimError::NonRecurrent { cap });
            }
        }
    })
    .into_iter()
    .collect::<Result<Vec<(f64, f64)>, SimError>>()?;
    let values: Vec<f64> = out.iter().map(|v| v.0).collect();
    let (mean, stderr) = mean_stderr(&values);
    Ok(ValueEstimate {
        mean,
        stderr,
        episodes,
        mean_tau: out.iter().map(|v| v.1).sum::<f64>() / episodes as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::named;
    use crate::strategies::{Frontier, SelfishMining, SmNode, Strategy};

    fn frontier() -> Box<dyn Strategy> {
        Box::new(Frontier::new(Miner::One))
    }

    #[test]
    fn frontier_cycles_have_length_one() {
        let p = mc_revenue_renewal(&frontier, 0.3, 10_000, 2, DEFAULT_CYCLE_CAP).unwrap();
        assert_eq!(p.rounds, Some(10_000));
        assert!((p.estimate - 0.3).abs() < 4.0 * p.stderr.unwrap());
    }

    #[test]
    fn liminf_is_deterministic() {
        let a = mc_revenue_liminf(&frontier, 0.3, 1000, 8, 5).unwrap();
        let b = mc_revenue_liminf(&frontier, 0.3, 1000, 8, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.csv_row().starts_with("0.3,frontier,mc_liminf,"));
    }

    #[test]
    fn hoarder_is_not_recurrent() {
        let hoard = || Box::new(crate::strategies::fuzz::Hoarder) as Box<dyn Strategy>;
        let err = mc_revenue_renewal(&hoard, 0.3, 10, 1, 1000).unwrap_err();
        assert_eq!(err, AnalysisError::Sim(SimError::NonRecurrent { cap: 1000 }));
    }

    #[test]
    fn frontier_value_at_alpha_is_small() {
        let v = mc_value(&frontier, &named::b0(), 0.3, 0.3, 20_000, 3, 10).unwrap();
        assert!(v.mean.abs() < 4.0 * v.stderr);
        assert_eq!(v.mean_tau, 1.0);
    }

    #[test]
    fn sm_from_lead_two_capitulates() {
        let sm = || Box::new(SelfishMining::with_node(SmNode::Race)) as Box<dyn Strategy>;
        let v = mc_value(&sm, &named::lead(2), 0.0, 0.25, 2000, 1, DEFAULT_CYCLE_CAP).unwrap();
        assert!(v.mean >= 2.0);
    }
}
