//! Closed-form revenue, random-walk facts, and Monte Carlo estimators.
//!
//! Every estimator splits its work into fixed units (games, walk batches,
//! cycle chunks) with one RNG stream per unit, and merges unit results in
//! index order. Output therefore does not depend on the worker count, which
//! is taken from `POSMINE_THREADS` when set.

mod checks;
mod closed;
mod estimate;
mod stake;
mod walk;

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::strategies::{SimError, Strategy};

pub use checks::{growth_rate_check, DEFAULT_DECAY_EPS, potential_reward_decay_check, DecayReport, GrowthReport};
pub use closed::{
    crossover, rev_frontier, rev_nsm_closed, rev_sm_closed, ruin_probability, sm_lead_reward,
    tie_break_bound, walk_stats, WalkStats,
};
pub use estimate::{
    mc_revenue_liminf, mc_revenue_renewal, mc_value, CycleStats, Method, RevenuePoint,
    ValueEstimate, DEFAULT_CYCLE_CAP,
};
pub use stake::{stake_dynamics, StakeSeries, DEFAULT_COINS};
pub use walk::{simulate_ruin, simulate_walks, WalkSample};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("f(α) − α does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{0}")]
    BadArgument(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Builds a fresh Miner-1 strategy per game.
pub type StrategyFactory<'a> = &'a (dyn Fn() -> Box<dyn Strategy> + Sync);

pub(crate) fn check_alpha(alpha: f64) -> Result<(), AnalysisError> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(AnalysisError::Domain {
            what: "alpha",
            value: alpha,
            domain: "(0, 1/2)",
        })
    }
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("POSMINE_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// `f(0..n)` in parallel, results in index order.
pub(crate) fn par_units<T: Send>(n: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    pool().install(|| (0..n).into_par_iter().map(f).collect())
}

/// Mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
