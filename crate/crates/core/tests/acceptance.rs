//! Acceptance criteria 1 to 13. Runs without the libtest harness so each
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::path::Path;
use std::time::Instant;

use posmine::analysis::{
    crossover, growth_rate_check, mc_revenue_renewal, mc_value, rev_nsm_closed, rev_sm_closed,
    ruin_probability, simulate_ruin, simulate_walks, stake_dynamics, walk_stats, DEFAULT_COINS,
    DEFAULT_CYCLE_CAP,
};
use posmine::blocktree::{named, parse_statefile, Miner};
use posmine::reductions::{LcmReduction, OrderlyReduction};
use posmine::strategies::fuzz::RandomTimeserving;
use posmine::strategies::{
    Frontier, Game, NothingAtStake, Script, Scripted, SelfishMining, SmNode, Strategy, Trace,
};
use posmine::structure::{
    checkpoint_override_check, checkpoints, classify_trace, fork_ownership_check,
};

type Outcome = Result<String, String>;

fn frontier() -> Box<dyn Strategy> {
    Box::new(Frontier::new(Miner::One))
}

fn sm() -> Box<dyn Strategy> {
    Box::new(SelfishMining::new())
}

fn nsm() -> Box<dyn Strategy> {
    Box::new(NothingAtStake::new())
}

fn grid() -> impl Iterator<Item = f64> {
    // 999 points strictly inside (0, 1/2), none of them exactly 1/3.
    (1..1000).map(|k| k as f64 / 2000.0)
}

fn c1_sm_closed_form() -> Outcome {
    let third = rev_sm_closed(1.0 / 3.0).unwrap();
    if (third - 1.0 / 3.0).abs() > 1e-12 {
        return Err(format!("rev_sm(1/3) = {third:.15}"));
    }
    for a in grid() {
        let above = rev_sm_closed(a).unwrap() > a;
        if above != (a > 1.0 / 3.0) {
            return Err(format!("sign of rev_sm(α) − α wrong at α = {a}"));
        }
    }
    Ok(format!("rev_sm(1/3) − 1/3 = {:.1e}; sign correct on 999 points", third - 1.0 / 3.0))
}

fn c2_nsm_threshold() -> Outcome {
    let x = crossover(rev_nsm_closed, 0.3, 0.4, 1e-9).map_err(|e| e.to_string())?;
    if (x - 0.3277).abs() <= 0.0002 {
        Ok(format!("crossover {x:.6}"))
    } else {
        Err(format!("crossover {x:.6}, want 0.3277 ± 0.0002"))
    }
}

fn c3_simulation_vs_formula() -> Outcome {
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    for (name, f, closed) in [
        ("sm", sm as fn() -> Box<dyn Strategy>, rev_sm_closed as fn(f64) -> _),
        ("nsm", nsm, rev_nsm_closed),
    ] {
        for (i, a) in [0.25, 0.35, 0.40].into_iter().enumerate() {
            let p = mc_revenue_renewal(&f, a, 200_000, 300 + i as u64, DEFAULT_CYCLE_CAP).map_err(|e| e.to_string())?;
            let d = (p.estimate - closed(a).unwrap()).abs();
            worst = worst.max(d);
            if d > 0.005 {
                fails.push(format!("{name} α={a}: off by {d:.5}"));
            }
        }
    }
    if fails.is_empty() {
        Ok(format!("max |mc − closed| = {worst:.5} over 6 cases"))
    } else {
        Err(fails.join("; "))
    }
}

fn c4_strategy_ordering() -> Outcome {
    let mut n = 0;
    for k in 0..1000 {
        let a = 0.335 + (0.40 - 0.335) * k as f64 / 999.0;
        if rev_nsm_closed(a).unwrap() <= rev_sm_closed(a).unwrap() {
            return Err(format!("rev_nsm ≤ rev_sm at α = {a}"));
        }
        let b = 0.45 + (0.49 - 0.45) * k as f64 / 999.0;
        if rev_sm_closed(b).unwrap() <= rev_nsm_closed(b).unwrap() {
            return Err(format!("rev_sm ≤ rev_nsm at α = {b}"));
        }
        n += 2;
    }
    Ok(format!("{n} grid points ordered as expected"))
}

fn c5_checkpoints() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/example_fig.state");
    let state = parse_statefile(&std::fs::read_to_string(path).unwrap()).map_err(|e| e.to_string())?;
    let cps = checkpoints(&state);
    if cps == [0, 1, 5, 7] {
        Ok("checkpoints 0 1 5 7".into())
    } else {
        Err(format!("checkpoints {cps:?}"))
    }
}

type Make = fn() -> Box<dyn Strategy>;

/// Criterion-6 traces: FRONTIER, SM, NSM at three alphas, 20 seeds each.
fn suite_traces() -> Vec<(&'static str, f64, u64, Trace)> {
    let jobs: Vec<(&'static str, Make, f64, u64)> = [
        ("frontier", frontier as Make),
        ("sm", sm),
        ("nsm", nsm),
    ]
    .into_iter()
    .flat_map(|(n, f)| {
        [0.2, 0.35, 0.45]
            .into_iter()
            .flat_map(move |a| (0..20u64).map(move |s| (n, f, a, s)))
    })
    .collect();
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = jobs.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(n, f, a, s)| (n, a, s, Game::new(f(), a, 600 + s).run(10_000).unwrap()))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

fn c6_classifier_suite(traces: &[(&'static str, f64, u64, Trace)]) -> Outcome {
    let mut fails = Vec::new();
    for (name, a, s, t) in traces {
        let r = classify_trace(t).map_err(|e| e.to_string())?;
        for (p, v) in [("timeserving", &r.timeserving), ("orderly", &r.orderly), ("lcm", &r.lcm), ("trimmed", &r.trimmed)] {
            if !v.holds() {
                fails.push(format!("{name} α={a} seed {s} {p}: {v}"));
            }
        }
        if *name == "frontier" && r.capitulations != r.rounds {
            fails.push(format!("frontier α={a} seed {s}: {} capitulations in {} rounds", r.capitulations, r.rounds));
        }
    }
    if fails.is_empty() {
        Ok(format!("{} traces of 10^4 rounds satisfy all four properties", traces.len()))
    } else {
        Err(fails.join("; "))
    }
}

fn revenues(t: &Trace) -> Vec<f64> {
    t.records.iter().map(|r| r.revenue()).collect()
}

fn c7_orderly_equality() -> Outcome {
    const ROUNDS: u64 = 10_000;
    // σ invariants are verified every round over this prefix; the checks are
    // linear in the tree size per round and the tree never shrinks here.
    const CHECKED_ROUNDS: u64 = 2_000;
    let source = Game::new(Box::new(RandomTimeserving::new(0.3, 11)), 0.45, 11).run(ROUNDS).unwrap();
    let script = Script::from_trace(&source, "random-replay");
    let creators = script.creators.clone().unwrap();
    let play = |strategy: Box<dyn Strategy>, rounds: u64| {
        Game::with_creators(strategy, creators.clone())
            .run(rounds)
            .map_err(|e| e.to_string())
    };
    let inner = play(Box::new(Scripted::new(script.clone())), ROUNDS)?;
    let reduced = play(Box::new(OrderlyReduction::new(Box::new(Scripted::new(script.clone())))), ROUNDS)?;
    let checked = play(
        Box::new(OrderlyReduction::checked(Box::new(Scripted::new(script)))),
        CHECKED_ROUNDS,
    )?;
    let before = classify_trace(&inner).map_err(|e| e.to_string())?;
    let after = classify_trace(&reduced).map_err(|e| e.to_string())?;
    if before.orderly.holds() {
        return Err("scripted strategy is orderly; nothing to reduce".into());
    }
    let (ri, rr) = (revenues(&inner), revenues(&reduced));
    if ri.len() != ROUNDS as usize || rr.len() != ROUNDS as usize {
        return Err("a trace ended early".into());
    }
    if let Some(n) = ri.iter().zip(&rr).position(|(a, b)| a != b) {
        return Err(format!("rev differs at round {}", n + 1));
    }
    if checked.records[..] != reduced.records[..CHECKED_ROUNDS as usize] {
        return Err("checked and unchecked reductions disagree".into());
    }
    if !after.orderly.holds() {
        return Err(format!("reduced trace: {}", after.orderly));
    }
    Ok(format!(
        "identical rev^(n) for n ≤ {ROUNDS}; orderly violations {} → 0; σ invariants held for {CHECKED_ROUNDS} rounds",
        before.orderly.violations
    ))
}

fn c8_lcm_dominance() -> Outcome {
    let mut gap = f64::INFINITY;
    for seed in 0..8 {
        let make = || Box::new(OrderlyReduction::new(Box::new(RandomTimeserving::new(0.3, seed))));
        let inner = Game::new(make(), 0.45, 800 + seed).run(10_000).map_err(|e| e.to_string())?;
        let reduced = Game::new(Box::new(LcmReduction::new(make())), 0.45, 800 + seed)
            .run(10_000)
            .map_err(|e| e.to_string())?;
        for (n, (a, b)) in revenues(&inner).iter().zip(&revenues(&reduced)).enumerate() {
            if b < a {
                return Err(format!("seed {seed} round {}: {b} < {a}", n + 1));
            }
            gap = gap.min(b - a);
        }
        let r = classify_trace(&reduced).map_err(|e| e.to_string())?;
        if !r.lcm.holds() {
            return Err(format!("seed {seed}: {}", r.lcm));
        }
    }
    Ok(format!("8 coupled seeds × 10^4 rounds; min rev gap {gap:.4}"))
}

fn c9_random_walks() -> Outcome {
    let mut worst = 0.0f64;
    for (k, a) in [0.25, 0.3, 0.4].into_iter().enumerate() {
        let ex = walk_stats(a).unwrap().ex;
        let s = simulate_walks(a, 1_000_000, 900 + k as u64).map_err(|e| e.to_string())?;
        let rel = (s.mean_x / ex - 1.0).abs();
        worst = worst.max(rel);
        if rel > 0.02 {
            return Err(format!("E[X] at α={a}: {:.5} vs {ex:.5}", s.mean_x));
        }
        for i in [1u32, 2] {
            let p = ruin_probability(a, i).unwrap();
            let (mc, _) = simulate_ruin(a, i, 1_000_000, 950 + 10 * k as u64 + i as u64).map_err(|e| e.to_string())?;
            let rel = (mc / p - 1.0).abs();
            worst = worst.max(rel);
            if rel > 0.02 {
                return Err(format!("ruin α={a} i={i}: {mc:.5} vs {p:.5}"));
            }
        }
    }
    Ok(format!("worst relative error {:.3}%", worst * 100.0))
}

fn c10_value_identities() -> Outcome {
    let a = 0.25;
    let rev = rev_sm_closed(a).unwrap();
    const EPISODES: u64 = 400_000;
    let v0 = mc_value(&sm, &named::b0(), rev, a, EPISODES, 1000, DEFAULT_CYCLE_CAP).map_err(|e| e.to_string())?;
    if v0.mean.abs() > 3.0 * v0.stderr {
        return Err(format!("V(B_0) = {:.5} ± {:.5}", v0.mean, v0.stderr));
    }
    let race = || Box::new(SelfishMining::with_node(SmNode::Race)) as Box<dyn Strategy>;
    let mut notes = vec![format!("V(B_0) = {:.5} ± {:.5}", v0.mean, v0.stderr)];
    for (k, lambda) in [a, rev].into_iter().enumerate() {
        let want = (2.0 + a / (1.0 - 2.0 * a)) * (1.0 - lambda);
        let v = mc_value(&race, &named::lead(2), lambda, a, EPISODES, 1001 + k as u64, DEFAULT_CYCLE_CAP)
            .map_err(|e| e.to_string())?;
        if (v.mean - want).abs() > 3.0 * v.stderr {
            return Err(format!("V(B_2,0; λ={lambda:.4}) = {:.5} ± {:.5}, want {want:.5}", v.mean, v.stderr));
        }
        notes.push(format!("V(B_2,0; λ={lambda:.4}) = {:.4} vs {want:.4}", v.mean));
    }
    Ok(notes.join("; "))
}

fn c11_growth_rate() -> Outcome {
    let g = growth_rate_check(&nsm, 0.4, 100_000, 1100).map_err(|e| e.to_string())?;
    if g.tail_min >= 0.59 {
        Ok(format!("tail min h/n = {:.4}", g.tail_min))
    } else {
        Err(format!("tail min h/n = {:.4} < 0.59", g.tail_min))
    }
}

fn c12_dynamic_stake() -> Outcome {
    const ROUNDS: u64 = 1_000_000;
    let f = stake_dynamics(&frontier, 0.33, DEFAULT_COINS, ROUNDS, 1200).map_err(|e| e.to_string())?;
    let up = stake_dynamics(&nsm, 0.34, DEFAULT_COINS, ROUNDS, 1201).map_err(|e| e.to_string())?;
    let low = stake_dynamics(&nsm, 0.30, DEFAULT_COINS, ROUNDS, 1202).map_err(|e| e.to_string())?;
    let summary = format!(
        "frontier 0.33 → {:.4}; nsm 0.34 → {:.4}; nsm 0.30 → {:.4}",
        f.final_stake, up.final_stake, low.final_stake
    );
    let ok = (f.final_stake - 0.33).abs() <= 0.01 && up.final_stake > 0.35 && low.final_stake <= 0.305;
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn c13_monitors(traces: &[(&'static str, f64, u64, Trace)]) -> Outcome {
    let (mut checked, mut skipped) = (0, 0);
    for (name, a, s, t) in traces {
        let fork = fork_ownership_check(t).map_err(|e| e.to_string())?;
        let over = checkpoint_override_check(t).map_err(|e| e.to_string())?;
        for (m, r) in [("fork ownership", &fork), ("checkpoint override", &over)] {
            if !r.verdict.holds() {
                return Err(format!("{name} α={a} seed {s} {m}: {}", r.verdict));
            }
            checked += r.verdict.checked;
            skipped += r.skipped;
        }
    }
    Ok(format!("0 violations in {checked} checked actions ({skipped} outside the override lemma)"))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut run = |n: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        let (tag, msg) = match &out {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        println!("criterion {n:>2} {tag} [{secs:6.1}s] {name}: {msg}");
        results.push((n, name, out, secs));
    };
    run(1, "SM closed form", &c1_sm_closed_form);
    run(2, "NSM threshold", &c2_nsm_threshold);
    run(3, "simulation vs formula", &c3_simulation_vs_formula);
    run(4, "strategy ordering", &c4_strategy_ordering);
    run(5, "checkpoint reproduction", &c5_checkpoints);
    let t = Instant::now();
    let traces = suite_traces();
    let gen = t.elapsed().as_secs_f64();
    println!("   (generated {} suite traces in {gen:.1}s)", traces.len());
    run(6, "classifier suite", &|| c6_classifier_suite(&traces));
    run(7, "orderly reduction equality", &c7_orderly_equality);
    run(8, "LCM reduction dominance", &c8_lcm_dominance);
    run(9, "random-walk oracles", &c9_random_walks);
    run(10, "value identities", &c10_value_identities);
    run(11, "growth rate", &c11_growth_rate);
    run(12, "dynamic stake", &c12_dynamic_stake);
    run(13, "lemma monitors", &|| c13_monitors(&traces));
    let failed: Vec<u32> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
