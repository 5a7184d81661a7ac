//! Relational normal form: each rule flattened into `head`, `guard` and
//! `body` facts.
//!
//! Textual shape, one fact per line:
//!
//! ```text
//! head(sortlist,'list(Index1,V1)',remove).
//! guard(sortlist,'Index1<Index2',0).
//! body(sortlist,'list(Index2,V1)',0).
//! ```
//!
//! Head facts carry no constraint identifier. Guard and body facts carry a
//! 0-based position so that execution order survives the round trip.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::syntax::{
    parse_body_item, parse_constraint, BodyItem, Builtin, Constraint, ParseError, Program, Rule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadMode {
    Keep,
    Remove,
}

impl HeadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HeadMode::Keep => "keep",
            HeadMode::Remove => "remove",
        }
    }
}

impl FromStr for HeadMode {
    type Err = NormalFormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keep" => Ok(HeadMode::Keep),
            "remove" => Ok(HeadMode::Remove),
            other => Err(NormalFormError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NfFact {
    Head { rule: String, constraint: Constraint, mode: HeadMode },
    Guard { rule: String, builtin: Builtin, position: usize },
    Body { rule: String, item: BodyItem, position: usize },
}

impl NfFact {
    pub fn rule(&self) -> &str {
        match self {
            NfFact::Head { rule, .. } | NfFact::Guard { rule, .. } | NfFact::Body { rule, .. } => rule,
        }
    }
}

impl fmt::Display for NfFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NfFact::Head { rule, constraint, mode } => {
                write!(f, "head({rule},'{constraint}',{}).", mode.as_str())
            }
            NfFact::Guard { rule, builtin, position } => {
                write!(f, "guard({rule},'{builtin}',{position}).")
            }
            NfFact::Body { rule, item, position } => write!(f, "body({rule},'{item}',{position})."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalFormError {
    #[error("rule `{0}` has no head facts")]
    NoHeads(String),
    #[error("rule `{rule}`: {section} positions are not contiguous from 0 (expected {expected}, found {found})")]
    PositionGap { rule: String, section: &'static str, expected: usize, found: usize },
    #[error("unknown head mode `{0}`, expected keep or remove")]
    UnknownMode(String),
    #[error("malformed fact `{0}`")]
    Malformed(String),
    #[error("fact `{fact}`: {source}")]
    Term {
        fact: String,
        #[source]
        source: ParseError,
    },
    #[error("guard fact `{0}` does not hold a built-in")]
    NonBuiltinGuard(String),
}

/// Flattens a program: per rule, kept heads, removed heads, guards, body.
pub fn to_normal_form(p: &Program) -> Vec<NfFact> {
    let mut facts = Vec::new();
    for rule in &p.rules {
        let heads = rule
            .kept
            .iter()
            .map(|c| (c, HeadMode::Keep))
            .chain(rule.removed.iter().map(|c| (c, HeadMode::Remove)));
        for (c, mode) in heads {
            facts.push(NfFact::Head { rule: rule.name.clone(), constraint: c.clone(), mode });
        }
        for (position, b) in rule.guard.iter().enumerate() {
            facts.push(NfFact::Guard { rule: rule.name.clone(), builtin: b.clone(), position });
        }
        for (position, item) in rule.body.iter().enumerate() {
            facts.push(NfFact::Body { rule: rule.name.clone(), item: item.clone(), position });
        }
    }
    facts
}

#[derive(Default)]
struct Partial<'a> {
    kept: Vec<Constraint>,
    removed: Vec<Constraint>,
    guard: Vec<(usize, &'a Builtin)>,
    body: Vec<(usize, &'a BodyItem)>,
}

fn ordered<'a, T>(
    rule: &str,
    section: &'static str,
    mut items: Vec<(usize, &'a T)>,
) -> Result<Vec<&'a T>, NormalFormError> {
    items.sort_by_key(|(pos, _)| *pos);
    items
        .into_iter()
        .enumerate()
        .map(|(expected, (found, item))| {
            if expected == found {
                Ok(item)
            } else {
                Err(NormalFormError::PositionGap { rule: rule.to_string(), section, expected, found })
            }
        })
        .collect()
}

/// Rebuilds a program; rules appear in order of first mention.
pub fn from_normal_form(facts: &[NfFact]) -> Result<Program, NormalFormError> {
    let mut order: Vec<&str> = Vec::new();
    let mut partials: HashMap<&str, Partial> = HashMap::new();
    for fact in facts {
        let name = fact.rule();
        let partial = partials.entry(name).or_insert_with(|| {
            order.push(name);
            Partial::default()
        });
        match fact {
            NfFact::Head { constraint, mode: HeadMode::Keep, .. } => partial.kept.push(constraint.clone()),
            NfFact::Head { constraint, mode: HeadMode::Remove, .. } => {
                partial.removed.push(constraint.clone())
            }
            NfFact::Guard { builtin, position, .. } => partial.guard.push((*position, builtin)),
            NfFact::Body { item, position, .. } => partial.body.push((*position, item)),
        }
    }

    let mut rules = Vec::with_capacity(order.len());
    for name in order {
        let partial = partials.remove(name).unwrap_or_default();
        if partial.kept.is_empty() && partial.removed.is_empty() {
            return Err(NormalFormError::NoHeads(name.to_string()));
        }
        let guard = ordered(name, "guard", partial.guard)?.into_iter().cloned().collect();
        let body = ordered(name, "body", partial.body)?.into_iter().cloned().collect();
        rules.push(Rule {
            name: name.to_string(),
            kept: partial.kept,
            removed: partial.removed,
            guard,
            body,
        });
    }
    Ok(Program::new(rules))
}

/// One fact per line, each terminated by `\n`.
pub fn render_facts(facts: &[NfFact]) -> String {
    facts.iter().map(|f| format!("{f}\n")).collect()
}

/// Parses the textual shape produced by [`render_facts`]. Blank lines are
/// skipped.
pub fn parse_facts(text: &str) -> Result<Vec<NfFact>, NormalFormError> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(parse_fact).collect()
}

pub fn parse_fact(line: &str) -> Result<NfFact, NormalFormError> {
    let malformed = || NormalFormError::Malformed(line.to_string());
    let inner = line.trim().strip_suffix(").").ok_or_else(malformed)?;
    let (kind, rest) = inner.split_once('(').ok_or_else(malformed)?;
    let (rule, rest) = rest.split_once(",'").ok_or_else(malformed)?;
    let (quoted, last) = rest.rsplit_once("',").ok_or_else(malformed)?;
    let rule = rule.trim().to_string();
    let term_err = |source| NormalFormError::Term { fact: line.to_string(), source };

    match kind.trim() {
        "head" => Ok(NfFact::Head {
            rule,
            constraint: parse_constraint(quoted).map_err(term_err)?,
            mode: last.trim().parse()?,
        }),
        "guard" => {
            let position = last.trim().parse().map_err(|_| malformed())?;
            match parse_body_item(quoted).map_err(term_err)? {
                BodyItem::Builtin(builtin) => Ok(NfFact::Guard { rule, builtin, position }),
                BodyItem::Constraint(_) => Err(NormalFormError::NonBuiltinGuard(line.to_string())),
            }
        }
        "body" => Ok(NfFact::Body {
            rule,
            item: parse_body_item(quoted).map_err(term_err)?,
            position: last.trim().parse().map_err(|_| malformed())?,
        }),
        _ => Err(malformed()),
    }
}
