//! Trace-level classification and lemma monitors.
//!
//! Verdicts are empirical: they cover exactly the rounds in the trace.
//! Finality is judged in hindsight. A block counts as final once a later
//! capitulation puts it at or below the new root.

use std::fmt;

use super::{
    checkpoints, publication_lcm, publication_orderly, publication_timeserving,
    publication_trimmed,
};
use crate::blocktree::{BlockId, GameState, Miner, Publication};
use crate::strategies::{ReplayVisitor, RoundRecord, SimError, Trace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub round: u64,
    pub action: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub checked: u64,
    pub violations: u64,
    pub first: Option<Witness>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    fn check(&mut self, ok: bool, record: &RoundRecord, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(Witness {
                    round: record.round,
                    action: record.miner1_action.to_string(),
                    detail: detail(),
                });
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first {
            None => write!(f, "holds ({} checked)", self.checked),
            Some(w) => write!(
                f,
                "violated {} of {}; first at round {}: {} ({})",
                self.violations, self.checked, w.round, w.action, w.detail
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub rounds: u64,
    pub timeserving: Verdict,
    pub orderly: Verdict,
    pub lcm: Verdict,
    pub trimmed: Verdict,
    pub opportunistic: Verdict,
    pub checkpoint_recurrent: Verdict,
    pub capitulations: u64,
}

impl PropertyReport {
    pub fn entries(&self) -> [(&'static str, &Verdict); 6] {
        [
            ("timeserving", &self.timeserving),
            ("orderly", &self.orderly),
            ("lcm", &self.lcm),
            ("trimmed", &self.trimmed),
            ("opportunistic", &self.opportunistic),
            ("checkpoint_recurrent", &self.checkpoint_recurrent),
        ]
    }
}

/// Checkpoints carried across a capitulation: the new root, then whatever
/// old checkpoints lie above it.
fn reframe(prev: &[BlockId], root: BlockId) -> Vec<BlockId> {
    std::iter::once(root)
        .chain(prev.iter().copied().filter(|&p| p > root))
        .collect()
}

struct Classifier {
    report: PropertyReport,
    /// Half-state facts about the current action, filled in by `half`.
    publication: Publication,
    orderly: bool,
    lcm: bool,
    trimmed: bool,
    all_above_base: bool,
    prev_cps: Vec<BlockId>,
    /// Non-opportunistic publications waiting to see if their top block is finalized.
    pending: Vec<(RoundRecord, BlockId)>,
    pre_cap_cps: Vec<BlockId>,
}

impl Classifier {
    fn new(initial: &GameState) -> Self {
        Classifier {
            report: PropertyReport::default(),
            publication: Publication::default(),
            orderly: true,
            lcm: true,
            trimmed: true,
            all_above_base: true,
            prev_cps: checkpoints(initial),
            pending: Vec::new(),
            pre_cap_cps: Vec::new(),
        }
    }

    fn recurrent(&mut self, record: &RoundRecord, state: &GameState, prev: &[BlockId]) -> Vec<BlockId> {
        let now = checkpoints(state);
        let stable = now.len() >= prev.len() && now[..prev.len()] == *prev;
        let fresh_clean = now[prev.len().min(now.len())..].iter().all(|&p| {
            Miner::BOTH
                .iter()
                .all(|&m| state.unpublished(m).range(p + 1..).next().is_none())
        });
        let detail = || format!("checkpoints {prev:?} became {now:?}");
        self.report
            .checkpoint_recurrent
            .check(stable && fresh_clean, record, detail);
        now
    }
}

impl ReplayVisitor for Classifier {
    fn half(&mut self, record: &RoundRecord, half: &GameState) {
        let p = half
            .validate(Miner::One, &record.miner1_action)
            .expect("trace actions replay");
        self.orderly = publication_orderly(half, &p);
        self.lcm = publication_lcm(half, &p);
        self.trimmed = publication_trimmed(half, &p);
        self.all_above_base = match p.as_path() {
            Some((_, base)) => half.unpublished(Miner::One).range(base + 1..).count() == p.len(),
            None => p.is_empty(),
        };
        self.publication = p;
    }

    fn acted(&mut self, record: &RoundRecord, state: &GameState, p: &Publication) {
        let r = &mut self.report;
        r.timeserving
            .check(publication_timeserving(state, p), record, || "published block off the longest chain".into());
        r.orderly.check(self.orderly, record, || "not the smallest blocks above the base".into());
        r.lcm.check(self.lcm, record, || "base not on the longest chain".into());
        r.trimmed.check(self.trimmed, record, || "forks a Miner-1 chain block".into());
        if !self.all_above_base {
            if let Some(top) = p.max_block() {
                self.pending.push((record.clone(), top));
            }
        }
        let prev = std::mem::take(&mut self.prev_cps);
        self.pre_cap_cps = self.recurrent(record, state, &prev);
        if let Some(c) = record.capitulation {
            // Finalized: at or below the coming root.
            let pending = std::mem::take(&mut self.pending);
            for (rec, top) in pending {
                let final_now = state.on_chain(top) && state.height(top).is_ok_and(|h| h <= c);
                if final_now {
                    self.report
                        .opportunistic
                        .check(false, &rec, || format!("block {top} finalized with own blocks left above the base"));
                } else {
                    self.pending.push((rec, top));
                }
            }
        }
    }

    fn finished(&mut self, record: &RoundRecord, state: &GameState) {
        let pre = std::mem::take(&mut self.pre_cap_cps);
        self.prev_cps = if record.capitulation.is_some() {
            self.pending.retain(|(_, top)| state.contains(*top));
            let reframed = reframe(&pre, state.root());
            self.recurrent(record, state, &reframed)
        } else {
            pre
        };
    }
}

/// Classifies every Miner-1 action of a trace.
pub fn classify_trace(trace: &Trace) -> Result<PropertyReport, SimError> {
    let mut c = Classifier::new(&trace.initial);
    trace.replay(&mut c)?;
    let mut report = c.report;
    report.rounds = trace.records.len() as u64;
    report.capitulations = trace.capitulations() as u64;
    // Opportunistic actions that never became final are fine; count them as checked.
    report.opportunistic.checked += c.pending.len() as u64;
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonitorReport {
    pub verdict: Verdict,
    /// Actions the lemma does not speak about.
    pub skipped: u64,
}

struct ForkOwnership(MonitorReport);

impl ReplayVisitor for ForkOwnership {
    fn acted(&mut self, record: &RoundRecord, state: &GameState, _p: &Publication) {
        let chain = state.chain();
        let mut ok = true;
        let mut detail = String::new();
        for b in state.blocks() {
            let Some(h) = b.height else { continue };
            if state.on_chain(b.id) {
                continue;
            }
            let q = chain[h as usize];
            let ancestors = state.ancestors(b.id).expect("published");
            let r = ancestors
                .iter()
                .rev()
                .find(|&&a| state.on_chain(a))
                .copied()
                .expect("root is shared");
            let hr = state.height(r).expect("published") as usize;
            if let Some(&bad) = chain[hr + 1..=h as usize]
                .iter()
                .find(|&&x| state.creator(x) != Some(Miner::One))
            {
                ok = false;
                detail = format!("fork {} against {q} from {r}: {bad} is Miner 2's", b.id);
                break;
            }
        }
        self.0.verdict.check(ok, record, || detail);
    }
}

/// Whenever a published block shares a height with chain block q, every
/// chain block between their common ancestor and q was created by Miner 1.
pub fn fork_ownership_check(trace: &Trace) -> Result<MonitorReport, SimError> {
    let mut m = ForkOwnership(MonitorReport::default());
    trace.replay(&mut m)?;
    Ok(m.0)
}

#[derive(Default)]
struct Override {
    report: MonitorReport,
    applies: bool,
}

impl ReplayVisitor for Override {
    fn half(&mut self, record: &RoundRecord, half: &GameState) {
        self.applies = false;
        let Ok(p) = half.validate(Miner::One, &record.miner1_action) else {
            return;
        };
        let Some((_, v)) = p.as_path() else {
            if !p.is_empty() {
                self.report.skipped += 1;
            }
            return;
        };
        if !(publication_trimmed(half, &p) && publication_orderly(half, &p)) {
            self.report.skipped += 1;
            return;
        }
        let cps = checkpoints(half);
        let hv = half.height(v).expect("lcm base is on the chain") as usize;
        self.applies = half.chain()[hv..].iter().any(|b| cps.contains(b));
    }

    fn acted(&mut self, record: &RoundRecord, state: &GameState, p: &Publication) {
        if !self.applies {
            return;
        }
        if !publication_timeserving(state, p) {
            self.report.skipped += 1;
            return;
        }
        let tip = state.tip();
        let ok = checkpoints(state).last() == Some(&tip);
        self.report
            .verdict
            .check(ok, record, || format!("tip {tip} is not a checkpoint"));
    }
}

/// A trimmed orderly path whose base or a chain successor of it is a
/// checkpoint must leave a checkpoint at the tip.
pub fn checkpoint_override_check(trace: &Trace) -> Result<MonitorReport, SimError> {
    let mut m = Override::default();
    trace.replay(&mut m)?;
    Ok(m.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{run_game, Frontier, Game, NothingAtStake, Script, Scripted, SelfishMining};

    #[test]
    fn frontier_satisfies_everything() {
        let t = run_game(Box::new(Frontier::new(Miner::One)), 0.35, 3000, 4).unwrap();
        let r = classify_trace(&t).unwrap();
        for (name, v) in r.entries() {
            assert!(v.holds(), "{name}: {v}");
        }
        assert_eq!(r.capitulations, 3000);
        assert!(fork_ownership_check(&t).unwrap().verdict.holds());
        assert!(checkpoint_override_check(&t).unwrap().verdict.holds());
    }

    #[test]
    fn selfish_strategies_classify() {
        for seed in 0..3 {
            let sm = run_game(Box::new(SelfishMining::new()), 0.45, 5000, seed).unwrap();
            let nsm = run_game(Box::new(NothingAtStake::new()), 0.45, 5000, seed).unwrap();
            for t in [&sm, &nsm] {
                let r = classify_trace(t).unwrap();
                for (name, v) in r.entries() {
                    assert!(v.holds(), "{} {name}: {v}", t.strategy);
                }
                assert!(fork_ownership_check(t).unwrap().verdict.holds());
                let o = checkpoint_override_check(t).unwrap();
                assert!(o.verdict.holds(), "{}", o.verdict);
            }
        }
    }

    #[test]
    fn non_orderly_script_is_flagged() {
        let script = Script::parse("creators 1 1 1 2\n4 path[2 3]->0\n", "skip-one").unwrap();
        let creators = script.creators.clone().unwrap();
        let t = Game::with_creators(Box::new(Scripted::new(script)), creators).run(4).unwrap();
        let r = classify_trace(&t).unwrap();
        assert!(r.timeserving.holds());
        assert!(!r.orderly.holds());
        assert_eq!(r.orderly.first.as_ref().unwrap().round, 4);
    }

    #[test]
    fn non_lcm_script_is_flagged() {
        // Miner 1 overtakes Miner 2's block 1, then later builds on the orphaned 1.
        let script = Script::parse(
            "creators 2 1 1 1 1 1 2\n3 path[2 3]->0\n7 path[4 5 6]->1\n",
            "fork-orphan",
        )
        .unwrap();
        let creators = script.creators.clone().unwrap();
        let t = Game::with_creators(Box::new(Scripted::new(script)), creators).run(7).unwrap();
        let r = classify_trace(&t).unwrap();
        assert!(r.timeserving.holds());
        assert!(!r.lcm.holds());
        assert_eq!(r.lcm.first.as_ref().unwrap().round, 7);
    }
}
