//! Textual strategy specifications as accepted on the command line:
//! `frontier`, `sm`, `nsm`, `hoarder`, `random:<p>:<seed>`,
//! `scripted:@<path>`, `orderly(<spec>)`, `lcm(<spec>)`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::fuzz::{Hoarder, RandomTimeserving};
use super::{Frontier, NothingAtStake, Script, ScriptParseError, Scripted, SelfishMining, Strategy};
use crate::blocktree::Miner;
use crate::reductions::{LcmReduction, OrderlyReduction};

#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    Frontier,
    Selfish,
    NothingAtStake,
    Hoarder,
    Random { publish_prob: f64, seed: u64 },
    Scripted(PathBuf),
    Orderly(Box<StrategySpec>),
    Lcm(Box<StrategySpec>),
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("bad strategy `{0}`; expected frontier, sm, nsm, hoarder, random:<p>:<seed>, scripted:@<path>, orderly(..) or lcm(..)")]
    Syntax(String),
    #[error("cannot read script {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Script {
        path: PathBuf,
        source: ScriptParseError,
    },
}

impl FromStr for StrategySpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let s = s.trim();
        let bad = || SpecError::Syntax(s.to_string());
        for (prefix, wrap) in [
            ("orderly(", StrategySpec::Orderly as fn(Box<StrategySpec>) -> StrategySpec),
            ("lcm(", StrategySpec::Lcm),
        ] {
            if let Some(rest) = s.strip_prefix(prefix) {
                let inner = rest.strip_suffix(')').ok_or_else(bad)?;
                return Ok(wrap(Box::new(inner.parse()?)));
            }
        }
        match s {
            "frontier" => return Ok(StrategySpec::Frontier),
            "sm" => return Ok(StrategySpec::Selfish),
            "nsm" => return Ok(StrategySpec::NothingAtStake),
            "hoarder" => return Ok(StrategySpec::Hoarder),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let (p, seed) = rest.split_once(':').ok_or_else(bad)?;
            let publish_prob: f64 = p.parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&publish_prob) {
                return Err(bad());
            }
            let seed = seed.parse().map_err(|_| bad())?;
            return Ok(StrategySpec::Random { publish_prob, seed });
        }
        if let Some(path) = s.strip_prefix("scripted:@") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(StrategySpec::Scripted(PathBuf::from(path)));
        }
        Err(bad())
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Frontier => write!(f, "frontier"),
            StrategySpec::Selfish => write!(f, "sm"),
            StrategySpec::NothingAtStake => write!(f, "nsm"),
            StrategySpec::Hoarder => write!(f, "hoarder"),
            StrategySpec::Random { publish_prob, seed } => write!(f, "random:{publish_prob}:{seed}"),
            StrategySpec::Scripted(p) => write!(f, "scripted:@{}", p.display()),
            StrategySpec::Orderly(inner) => write!(f, "orderly({inner})"),
            StrategySpec::Lcm(inner) => write!(f, "lcm({inner})"),
        }
    }
}

impl StrategySpec {
    pub fn load_script(path: &PathBuf) -> Result<Script, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.clone(),
            source,
        })?;
        let name = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        Script::parse(&text, &name).map_err(|source| SpecError::Script {
            path: path.clone(),
            source,
        })
    }

    /// A fresh Miner-1 strategy instance.
    pub fn build(&self) -> Result<Box<dyn Strategy>, SpecError> {
        Ok(match self {
            StrategySpec::Frontier => Box::new(Frontier::new(Miner::One)),
            StrategySpec::Selfish => Box::new(SelfishMining::new()),
            StrategySpec::NothingAtStake => Box::new(NothingAtStake::new()),
            StrategySpec::Hoarder => Box::new(Hoarder),
            StrategySpec::Random { publish_prob, seed } => {
                Box::new(RandomTimeserving::new(*publish_prob, *seed))
            }
            StrategySpec::Scripted(path) => Box::new(Scripted::new(Self::load_script(path)?)),
            StrategySpec::Orderly(inner) => Box::new(OrderlyReduction::new(inner.build()?)),
            StrategySpec::Lcm(inner) => Box::new(LcmReduction::new(inner.build()?)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for s in ["frontier", "sm", "nsm", "hoarder", "random:0.25:7", "lcm(orderly(random:0.5:1))", "scripted:@a/b.txt"] {
            let spec: StrategySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "smm", "random:2:1", "random:0.5", "orderly(sm", "scripted:@", "lcm()"] {
            assert!(s.parse::<StrategySpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn builds_ids() {
        let s: StrategySpec = "orderly(nsm)".parse().unwrap();
        assert_eq!(s.build().unwrap().id().to_string(), "orderly(nsm)");
        assert!("scripted:@/nonexistent/x".parse::<StrategySpec>().unwrap().build().is_err());
    }
}
