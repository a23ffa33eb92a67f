//! Line-oriented statefile format and Graphviz export.
//!
//! ```text
//! posmine-state v1 round <n> offset <k>
//! block <id> creator <0|1|2> parent <id|-> published <round|->
//! ```
//!
//! `offset` names the root. Blank lines and `#` comments are ignored. An
//! optional `base <n1> <n2>` line carries chain blocks already finalized
//! below the root.

use std::fmt::Write as _;

use super::{GameState, Miner, StateBuilder, StateError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatefileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `posmine-state v1` header")]
    MissingHeader,
    #[error(transparent)]
    State(#[from] StateError),
}

pub fn write_statefile(state: &GameState) -> String {
    let mut out = format!("posmine-state v1 round {} offset {}\n", state.round(), state.root());
    let base = state.base();
    if base != [0, 0] {
        let _ = writeln!(out, "base {} {}", base[0], base[1]);
    }
    for b in state.blocks() {
        let creator = b.creator.map_or(0, Miner::number);
        let parent = b.parent.map_or("-".to_string(), |p| p.to_string());
        let published = b.published.map_or("-".to_string(), |s| s.round.to_string());
        let _ = writeln!(out, "block {} creator {creator} parent {parent} published {published}", b.id);
    }
    out
}

fn field<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    key: &str,
    line: usize,
) -> Result<&'a str, StatefileError> {
    let syntax = |message: String| StatefileError::Syntax { line, message };
    match toks.next() {
        Some(k) if k == key => toks.next().ok_or_else(|| syntax(format!("missing value for `{key}`"))),
        Some(k) => Err(syntax(format!("expected `{key}`, found `{k}`"))),
        None => Err(syntax(format!("expected `{key}`"))),
    }
}

fn number(tok: &str, line: usize) -> Result<u64, StatefileError> {
    tok.parse().map_err(|_| StatefileError::Syntax {
        line,
        message: format!("`{tok}` is not a non-negative integer"),
    })
}

fn optional(tok: &str, line: usize) -> Result<Option<u64>, StatefileError> {
    if tok == "-" {
        Ok(None)
    } else {
        number(tok, line).map(Some)
    }
}

pub fn parse_statefile(text: &str) -> Result<GameState, StatefileError> {
    let mut header: Option<(u64, u64)> = None;
    let mut base = [0, 0];
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: String| StatefileError::Syntax { line, message };
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("posmine-state") if header.is_none() => {
                if toks.next() != Some("v1") {
                    return Err(syntax("unsupported statefile version".into()));
                }
                let round = number(field(&mut toks, "round", line)?, line)?;
                let offset = number(field(&mut toks, "offset", line)?, line)?;
                header = Some((round, offset));
            }
            Some(_) if header.is_none() => return Err(StatefileError::MissingHeader),
            Some("base") => {
                let a = number(toks.next().ok_or_else(|| syntax("base needs two counts".into()))?, line)?;
                let b = number(toks.next().ok_or_else(|| syntax("base needs two counts".into()))?, line)?;
                base = [a, b];
            }
            Some("block") => {
                let id = number(toks.next().ok_or_else(|| syntax("missing block id".into()))?, line)?;
                let creator = number(field(&mut toks, "creator", line)?, line)?;
                let creator = match creator {
                    0 => None,
                    c => Some(
                        Miner::from_number(c as u8)
                            .filter(|_| c <= 2)
                            .ok_or_else(|| syntax(format!("creator must be 0, 1 or 2, got {c}")))?,
                    ),
                };
                let parent = optional(field(&mut toks, "parent", line)?, line)?;
                let published = optional(field(&mut toks, "published", line)?, line)?;
                rows.push((line, id, creator, parent, published));
            }
            Some(other) => return Err(syntax(format!("unknown record `{other}`"))),
            None => {}
        }
        if let Some(extra) = toks.next() {
            return Err(syntax(format!("unexpected trailing `{extra}`")));
        }
    }
    let (round, offset) = header.ok_or(StatefileError::MissingHeader)?;
    let mut builder = StateBuilder::new().round(round).base(base);
    let mut saw_root = false;
    for (line, id, creator, parent, published) in rows {
        let syntax = |message: String| StatefileError::Syntax { line, message };
        if id == offset {
            if parent.is_some() {
                return Err(syntax("the root has no parent".into()));
            }
            let at = published.ok_or_else(|| syntax("the root must be published".into()))?;
            builder = builder.root(id, creator, at);
            saw_root = true;
            continue;
        }
        let creator = creator.ok_or_else(|| syntax(format!("block {id} needs creator 1 or 2")))?;
        builder = match (parent, published) {
            (Some(p), Some(r)) => builder.published(id, creator, p, r),
            (None, None) => builder.unpublished(id, creator),
            _ => return Err(syntax("parent and published must both be set or both be `-`".into())),
        };
    }
    if !saw_root && offset != 0 {
        return Err(StatefileError::State(StateError::Malformed(format!(
            "root block {offset} not listed"
        ))));
    }
    Ok(builder.build()?)
}

/// Graphviz digraph: nodes `id/height`, Miner-1 blocks double-circled,
/// longest-path edges bold, unpublished blocks dashed and unattached.
pub fn to_dot(state: &GameState) -> String {
    let mut out = String::from("digraph posmine {\n  rankdir=RL;\n");
    for b in state.blocks() {
        let shape = if b.creator == Some(Miner::One) { "doublecircle" } else { "circle" };
        let (label, style) = match b.height {
            Some(h) => (format!("{}/{h}", b.id), ""),
            None => (format!("{}/-", b.id), ", style=dashed"),
        };
        let _ = writeln!(out, "  n{} [label=\"{label}\", shape={shape}{style}];", b.id);
    }
    for b in state.blocks() {
        if let Some(p) = b.parent {
            let bold = if state.on_chain(b.id) { " [style=bold]" } else { "" };
            let _ = writeln!(out, "  n{} -> n{p}{bold};", b.id);
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocktree::named;

    const FIGURE: &str = "\
posmine-state v1 round 7 offset 0
block 0 creator 0 parent - published 0
block 1 creator 2 parent 0 published 1
block 2 creator 1 parent - published -
block 3 creator 2 parent 1 published 3
block 4 creator 2 parent 3 published 4
block 5 creator 1 parent 4 published 5
block 6 creator 1 parent 4 published 6
block 7 creator 2 parent 5 published 7
";

    #[test]
    fn parses_figure_state() {
        let s = parse_statefile(FIGURE).unwrap();
        assert_eq!(s.chain(), &[0, 1, 3, 4, 5, 7]);
        assert!(!s.on_chain(6));
        assert_eq!(write_statefile(&s), FIGURE);
    }

    #[test]
    fn roundtrip_after_capitulation() {
        let mut s = named::b22();
        s.capitulate(1).unwrap();
        let text = write_statefile(&s);
        let back = parse_statefile(&text).unwrap();
        assert!(back.canonical_equal(&s));
        assert_eq!(back.base(), s.base());
        assert_eq!(back.root(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "posmine-state v1 round 2 offset 0\nblock 0 creator 0 parent - published 0\nblock 1 creator 7 parent 0 published 1\n";
        match parse_statefile(text) {
            Err(StatefileError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_statefile("block 0 creator 0"), Err(StatefileError::MissingHeader)));
    }

    #[test]
    fn dot_marks_miner_one_and_chain() {
        let mut s = named::lead(2);
        s.apply(Miner::One, &crate::blocktree::Action::path([1, 2], 0)).unwrap();
        let dot = to_dot(&s);
        assert!(dot.contains("n2 [label=\"2/2\", shape=doublecircle]"));
        assert!(dot.contains("n2 -> n1 [style=bold]"));
        assert!(dot.starts_with("digraph"));
    }
}
