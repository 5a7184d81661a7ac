//! CHR surface syntax: terms, constraints, rules and programs.
//!
//! The accepted language is the SWI-Prolog CHR notation restricted to
//! integer arithmetic:
//!
//! ```text
//! name @ Kept \ Removed <=> Guard | Body.
//! name @ Removed <=> Guard | Body.
//! name @ Kept ==> Guard | Body.
//! ```
//!
//! The rule name and the guard are optional. Unnamed rules are given the
//! name `rule_<index>` (1-based position in the program).

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use parser::{parse_body_item, parse_constraint, parse_program, parse_query, parse_term, ParseError};
pub use printer::render_program;

/// A first-order term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Int(i64),
    Atom(String),
    /// `functor(args...)`; arithmetic expressions are compounds whose
    /// functor is one of `+ - * /`.
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Term::Atom(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) | Term::Atom(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Appends every variable name in left-to-right order (duplicates kept).
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Int(_) | Term::Atom(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Replaces bound variables; unbound ones are left in place.
    pub fn substitute(&self, bindings: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Int(_) | Term::Atom(_) => self.clone(),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| a.substitute(bindings)).collect())
            }
        }
    }
}

/// A `name/arity` pair identifying a constraint symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Functor {
    pub name: String,
    pub arity: usize,
}

impl Functor {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Functor { name: name.into(), arity }
    }
}

impl fmt::Display for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid functor `{0}`, expected name/arity")]
pub struct FunctorParseError(String);

impl FromStr for Functor {
    type Err = FunctorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FunctorParseError(s.to_string());
        let (name, arity) = s.trim().rsplit_once('/').ok_or_else(err)?;
        if !lexer::is_atom_name(name) {
            return Err(err());
        }
        let arity = arity.parse().map_err(|_| err())?;
        Ok(Functor::new(name, arity))
    }
}

/// A CHR constraint: a functor applied to argument terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub functor: String,
    pub args: Vec<Term>,
}

impl Constraint {
    pub fn new(functor: impl Into<String>, args: Vec<Term>) -> Self {
        Constraint { functor: functor.into(), args }
    }

    pub fn functor(&self) -> Functor {
        Functor::new(self.functor.clone(), self.args.len())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn substitute(&self, bindings: &BTreeMap<String, Term>) -> Constraint {
        Constraint::new(
            self.functor.clone(),
            self.args.iter().map(|a| a.substitute(bindings)).collect(),
        )
    }

    /// The constraint viewed as a term (an atom when nullary).
    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Atom(self.functor.clone())
        } else {
            Term::Compound(self.functor.clone(), self.args.clone())
        }
    }

    /// Inverse of [`Constraint::to_term`]; fails on variables and integers.
    pub fn from_term(term: &Term) -> Option<Constraint> {
        match term {
            Term::Atom(a) => Some(Constraint::new(a.clone(), vec![])),
            Term::Compound(f, args) => Some(Constraint::new(f.clone(), args.clone())),
            Term::Var(_) | Term::Int(_) => None,
        }
    }
}

/// Comparison operators usable in guards and bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Lt,
    Gt,
    Le,
    Ge,
    ArithEq,
    ArithNe,
    TermEq,
    TermNe,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Le => "=<",
            CompareOp::Ge => ">=",
            CompareOp::ArithEq => "=:=",
            CompareOp::ArithNe => "=\\=",
            CompareOp::TermEq => "==",
            CompareOp::TermNe => "\\==",
        }
    }
}

/// A host-provided constraint, evaluated rather than stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Builtin {
    True,
    Compare { op: CompareOp, lhs: Term, rhs: Term },
}

impl Builtin {
    pub fn compare(op: CompareOp, lhs: Term, rhs: Term) -> Self {
        Builtin::Compare { op, lhs, rhs }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Builtin::Compare { lhs, rhs, .. } = self {
            lhs.collect_vars(out);
            rhs.collect_vars(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyItem {
    Constraint(Constraint),
    Builtin(Builtin),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Simplification,
    Propagation,
    Simpagation,
}

/// `name @ kept \ removed <=> guard | body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub kept: Vec<Constraint>,
    pub removed: Vec<Constraint>,
    pub guard: Vec<Builtin>,
    pub body: Vec<BodyItem>,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        match (self.kept.is_empty(), self.removed.is_empty()) {
            (true, _) => RuleKind::Simplification,
            (false, true) => RuleKind::Propagation,
            (false, false) => RuleKind::Simpagation,
        }
    }

    /// Heads in matching order: kept heads first, then removed heads.
    pub fn heads(&self) -> impl Iterator<Item = &Constraint> {
        self.kept.iter().chain(self.removed.iter())
    }

    pub fn head_count(&self) -> usize {
        self.kept.len() + self.removed.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    /// Every functor used as a CHR constraint in a head or body, in order
    /// of first appearance.
    pub fn declared_constraints(&self) -> Vec<Functor> {
        let mut seen = Vec::new();
        for rule in &self.rules {
            let body = rule.body.iter().filter_map(|item| match item {
                BodyItem::Constraint(c) => Some(c),
                BodyItem::Builtin(_) => None,
            });
            for c in rule.heads().chain(body) {
                let f = c.functor();
                if !seen.contains(&f) {
                    seen.push(f);
                }
            }
        }
        seen
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}
