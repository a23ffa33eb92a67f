use super::{check_alpha, AnalysisError};

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

pub fn rev_frontier(alpha: f64) -> Result<f64, AnalysisError> {
    check_alpha(alpha)?;
    Ok(alpha)
}

/// α²(4α² − 9α + 4) / (α³ − 2α² − α + 1).
pub fn rev_sm_closed(alpha: f64) -> Result<f64, AnalysisError> {
    check_alpha(alpha)?;
    let num = alpha * alpha * horner(&[4.0, -9.0, 4.0], alpha);
    let den = horner(&[1.0, -2.0, -1.0, 1.0], alpha);
    Ok(num / den)
}

pub fn rev_nsm_closed(alpha: f64) -> Result<f64, AnalysisError> {
    check_alpha(alpha)?;
    let num = alpha * alpha * horner(&[3.0, -13.0, 18.0, -4.0, -12.0, 15.0, -12.0, 4.0], alpha);
    let den = horner(&[3.0, -17.0, 40.0, -50.0, 36.0, -14.0, 1.0, 1.0, -2.0, 1.0], alpha);
    Ok(num / den)
}

/// Bisection for f(α) = α on [lo, hi]; needs a strict sign change of
/// f(α) − α at the endpoints.
pub fn crossover(
    f: impl Fn(f64) -> Result<f64, AnalysisError>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, AnalysisError> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(AnalysisError::BadArgument(format!(
            "need lo < hi and tol > 0, got [{lo}, {hi}] and {tol}"
        )));
    }
    let g = |a: f64| f(a).map(|v| v - a);
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a)?, g(b)?);
    if ga * gb >= 0.0 {
        return Err(AnalysisError::NoSignChange { lo, hi });
    }
    let neg_at_a = ga < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < tol {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Expected up-steps, down-steps and duration of a walk moving up with
/// probability α until it first drops one below its start.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkStats {
    pub ex: f64,
    pub ey: f64,
    pub etau: f64,
}

pub fn walk_stats(alpha: f64) -> Result<WalkStats, AnalysisError> {
    check_alpha(alpha)?;
    let d = 1.0 - 2.0 * alpha;
    Ok(WalkStats {
        ex: alpha / d,
        ey: (1.0 - alpha) / d,
        etau: 1.0 / d,
    })
}

/// Probability that a walk from `i`, stepping down with probability α,
/// ever reaches 0.
pub fn ruin_probability(alpha: f64, i: u32) -> Result<f64, AnalysisError> {
    check_alpha(alpha)?;
    Ok((alpha / (1.0 - alpha)).powi(i as i32))
}

/// Upper bound on the probability that Miner 1 ever displaces the current
/// tip when it is `ell` blocks short of forking it.
pub fn tie_break_bound(alpha: f64, ell: u32) -> Result<f64, AnalysisError> {
    if ell > 2 {
        return Err(AnalysisError::Domain {
            what: "ell",
            value: ell as f64,
            domain: "{0, 1, 2}",
        });
    }
    ruin_probability(alpha, ell)
}

/// Expected Miner-1 blocks in hand when SM, started from B_{2,0}, releases.
pub fn sm_lead_reward(alpha: f64) -> Result<f64, AnalysisError> {
    Ok(2.0 + walk_stats(alpha)?.ex)
}
