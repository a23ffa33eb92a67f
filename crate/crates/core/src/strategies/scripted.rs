//! Replay of a fixed list of Miner-1 actions.
//!
//! ```text
//! # comment
//! creators 1 1 2 1
//! 2 path[1 2]->0
//! 4 wait cap tip
//! ```
//!
//! `creators` is optional and only used to drive a game with fixed draws.
//! A trailing `cap tip` or `cap <h>` capitulates after the action.

use std::fmt::Write as _;

use super::{Capitulation, Decision, Strategy, StrategyError, StrategyId, Trace};
use crate::blocktree::{Action, GameState, Miner};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("script line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Script {
    pub name: String,
    pub creators: Option<Vec<Miner>>,
    /// Strictly increasing rounds.
    pub steps: Vec<(u64, Decision)>,
}

impl Script {
    pub fn new(name: impl Into<String>, steps: Vec<(u64, Decision)>) -> Self {
        Script {
            name: name.into(),
            creators: None,
            steps,
        }
    }

    pub fn parse(text: &str, name: &str) -> Result<Script, ScriptParseError> {
        let mut script = Script::new(name, Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ScriptParseError { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("creators") {
                if script.creators.is_some() {
                    return Err(err("duplicate creators line".into()));
                }
                let creators = rest
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<u8>()
                            .ok()
                            .and_then(Miner::from_number)
                            .ok_or_else(|| err(format!("creator must be 1 or 2, got `{t}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                script.creators = Some(creators);
                continue;
            }
            let (round, rest) = content
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected `<round> <action>`".into()))?;
            let round: u64 = round
                .parse()
                .map_err(|_| err(format!("`{round}` is not a round number")))?;
            if round == 0 {
                return Err(err("rounds start at 1".into()));
            }
            if script.steps.last().is_some_and(|&(r, _)| r >= round) {
                return Err(err(format!("round {round} is not after the previous step")));
            }
            let (action, cap) = match rest.rsplit_once("cap") {
                Some((a, c)) => (a, Some(c.trim())),
                None => (rest, None),
            };
            let action: Action = action.parse().map_err(|e| err(format!("{e}")))?;
            let mut decision = Decision::act(action);
            match cap {
                None => {}
                Some("tip") => decision = decision.then_capitulate(Capitulation::Tip),
                Some(h) => {
                    let h = h.parse().map_err(|_| err(format!("bad capitulation height `{h}`")))?;
                    decision = decision.then_capitulate(Capitulation::Height(h));
                }
            }
            script.steps.push((round, decision));
        }
        Ok(script)
    }

    /// Miner 1's side of a trace: its non-trivial rounds and the draws.
    pub fn from_trace(trace: &Trace, name: &str) -> Script {
        let steps = trace
            .records
            .iter()
            .filter(|r| !r.miner1_action.is_wait() || r.capitulation.is_some())
            .map(|r| {
                let mut d = Decision::act(r.miner1_action.clone());
                d.capitulate = r.capitulation.map(Capitulation::Height);
                (r.round, d)
            })
            .collect();
        Script {
            name: name.to_string(),
            creators: Some(trace.records.iter().map(|r| r.creator).collect()),
            steps,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.creators {
            let list: Vec<String> = c.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(out, "creators {}", list.join(" "));
        }
        for (round, d) in &self.steps {
            let _ = write!(out, "{round} {}", d.action);
            match d.capitulate {
                Some(Capitulation::Tip) => out.push_str(" cap tip"),
                Some(Capitulation::Height(h)) => {
                    let _ = write!(out, " cap {h}");
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Scripted {
    script: Script,
    next: usize,
}

impl Scripted {
    pub fn new(script: Script) -> Self {
        Scripted { script, next: 0 }
    }
}

impl Strategy for Scripted {
    fn id(&self) -> StrategyId {
        StrategyId::Scripted(self.script.name.clone())
    }

    fn decide(&mut self, half: &GameState, _creator: Miner) -> Result<Decision, StrategyError> {
        let round = half.round();
        while self.script.steps.get(self.next).is_some_and(|&(r, _)| r < round) {
            self.next += 1;
        }
        match self.script.steps.get(self.next) {
            Some((r, d)) if *r == round => {
                self.next += 1;
                half.validate(Miner::One, &d.action)
                    .map_err(|source| StrategyError::ScriptMismatch { round, source })?;
                Ok(d.clone())
            }
            _ => Ok(Decision::wait()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{run_game, Frontier, Game};

    #[test]
    fn empty_script_always_waits() {
        let mut g = Game::new(Box::new(Scripted::new(Script::parse("", "empty").unwrap())), 0.4, 2);
        let t = g.run(50).unwrap();
        assert!(t.records.iter().all(|r| r.miner1_action.is_wait()));
        assert_eq!(g.state().chain_count(Miner::One), 0);
    }

    #[test]
    fn frontier_script_reproduces_frontier() {
        let honest = run_game(Box::new(Frontier::new(Miner::One)), 0.3, 300, 5).unwrap();
        let script = Script::from_trace(&honest, "frontier-copy");
        let text = script.to_text();
        let back = Script::parse(&text, "frontier-copy").unwrap();
        assert_eq!(back, script);
        let copy = Game::new(Box::new(Scripted::new(back)), 0.3, 5).run(300).unwrap();
        assert_eq!(copy.records, honest.records);
    }

    #[test]
    fn invalid_step_is_a_mismatch() {
        let script = Script::parse("creators 2\n1 path[1]->0\n", "bad").unwrap();
        let mut g = Game::with_creators(Box::new(Scripted::new(script)), vec![Miner::Two]);
        let err = g.run(1).unwrap_err();
        assert!(matches!(
            err,
            crate::strategies::SimError::Strategy(StrategyError::ScriptMismatch { round: 1, .. })
        ));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = Script::parse("2 wait\n1 wait\n", "x").unwrap_err();
        assert_eq!(e.line, 2);
        let e = Script::parse("\n# c\n3 path[1->0\n", "x").unwrap_err();
        assert_eq!(e.line, 3);
        let e = Script::parse("creators 1 3\n", "x").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn capitulation_suffix() {
        let s = Script::parse("4 wait cap tip\n5 path[5]->0 cap 1\n", "c").unwrap();
        assert_eq!(s.steps[0].1.capitulate, Some(Capitulation::Tip));
        assert_eq!(s.steps[1].1.capitulate, Some(Capitulation::Height(1)));
        assert_eq!(s.steps[1].1.action, Action::path([5], 0));
    }
}
