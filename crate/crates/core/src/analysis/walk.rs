//! Direct simulation of the biased walks behind the closed forms.

use rand::Rng;

use super::{check_alpha, par_units, AnalysisError};
use crate::strategies::game_rng;

const CHUNK: u64 = 10_000;

/// Sample means over `walks` walks, with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkSample {
    pub walks: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_tau: f64,
    pub stderr_x: f64,
    pub stderr_tau: f64,
}

fn chunks(total: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..total.div_ceil(CHUNK)).map(move |c| (c, CHUNK.min(total - c * CHUNK)))
}

/// Walks moving up with probability α, each stopped on first reaching one
/// below its start; X counts up-steps, Y down-steps.
pub fn simulate_walks(alpha: f64, walks: u64, seed: u64) -> Result<WalkSample, AnalysisError> {
    check_alpha(alpha)?;
    if walks < 2 {
        return Err(AnalysisError::BadArgument("need at least two walks".into()));
    }
    let units: Vec<(u64, u64)> = chunks(walks).collect();
    // Per chunk: Σx, Σx², Στ, Στ².
    let sums = par_units(units.len() as u64, |c| {
        let (id, n) = units[c as usize];
        let mut rng = game_rng(seed, id);
        let mut s = [0f64; 4];
        for _ in 0..n {
            let (mut level, mut x, mut y) = (0i64, 0u64, 0u64);
            while level > -1 {
                if rng.gen::<f64>() < alpha {
                    level += 1;
                    x += 1;
                } else {
                    level -= 1;
                    y += 1;
                }
            }
            let tau = (x + y) as f64;
            s[0] += x as f64;
            s[1] += (x * x) as f64;
            s[2] += tau;
            s[3] += tau * tau;
        }
        s
    });
    let t = sums.iter().fold([0f64; 4], |mut a, s| {
        for i in 0..4 {
            a[i] += s[i];
        }
        a
    });
    let n = walks as f64;
    let se = |sum: f64, sq: f64| {
        let mean = sum / n;
        ((sq / n - mean * mean) * n / (n - 1.0) / n).sqrt()
    };
    let mean_x = t[0] / n;
    let mean_tau = t[2] / n;
    Ok(WalkSample {
        walks,
        mean_x,
        mean_y: mean_tau - mean_x,
        mean_tau,
        stderr_x: se(t[0], t[1]),
        stderr_tau: se(t[2], t[3]),
    })
}

/// Fraction of walks from `i`, stepping down with probability α, that
/// reach 0. A walk that climbs to `i + 60` is counted as escaped; the
/// chance of returning from there is (α/(1−α))^60 or less.
pub fn simulate_ruin(alpha: f64, i: u32, walks: u64, seed: u64) -> Result<(f64, f64), AnalysisError> {
    check_alpha(alpha)?;
    if walks < 2 {
        return Err(AnalysisError::BadArgument("need at least two walks".into()));
    }
    let top = i as i64 + 60;
    let units: Vec<(u64, u64)> = chunks(walks).collect();
    let hits: u64 = par_units(units.len() as u64, |c| {
        let (id, n) = units[c as usize];
        let mut rng = game_rng(seed, id);
        let mut hits = 0u64;
        for _ in 0..n {
            let mut m = i as i64;
            while m > 0 && m < top {
                m += if rng.gen::<f64>() < alpha { -1 } else { 1 };
            }
            hits += u64::from(m == 0);
        }
        hits
    })
    .into_iter()
    .sum();
    let p = hits as f64 / walks as f64;
    Ok((p, (p * (1.0 - p) / walks as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_plausible() {
        let a = simulate_walks(0.3, 20_000, 1).unwrap();
        let b = simulate_walks(0.3, 20_000, 1).unwrap();
        assert_eq!(a, b);
        assert!((a.mean_tau - a.mean_x - a.mean_y).abs() < 1e-12);
        assert!((a.mean_y - a.mean_x - 1.0).abs() < 1e-9);
        let (p, _) = simulate_ruin(0.3, 0, 100, 1).unwrap();
        assert_eq!(p, 1.0);
    }
}
