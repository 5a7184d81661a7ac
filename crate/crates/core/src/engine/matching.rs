use std::collections::BTreeMap;

use crate::syntax::{Builtin, CompareOp, Constraint, Term};

/// Variable bindings produced by one-way matching. Bound values are ground.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn bind(&mut self, var: impl Into<String>, value: Term) {
        self.bindings.insert(var.into(), value);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn bindings(&self) -> &BTreeMap<String, Term> {
        &self.bindings
    }

    pub fn apply(&self, term: &Term) -> Term {
        term.substitute(&self.bindings)
    }

    pub fn apply_constraint(&self, c: &Constraint) -> Constraint {
        c.substitute(&self.bindings)
    }

    /// Extends `self` so that `pattern` instantiates to `value`. On failure the
    /// substitution may hold partial bindings; callers match on a copy.
    fn extend(&mut self, pattern: &Term, value: &Term) -> bool {
        match (pattern, value) {
            (Term::Var(v), _) if v == "_" => true,
            (Term::Var(v), _) => match self.bindings.get(v) {
                Some(bound) => bound == value,
                None => {
                    self.bindings.insert(v.clone(), value.clone());
                    true
                }
            },
            (Term::Int(a), Term::Int(b)) => a == b,
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Compound(f, pargs), Term::Compound(g, vargs)) => {
                f == g
                    && pargs.len() == vargs.len()
                    && pargs.iter().zip(vargs).all(|(p, v)| self.extend(p, v))
            }
            _ => false,
        }
    }

    pub(crate) fn extend_constraint(&mut self, pattern: &Constraint, value: &Constraint) -> bool {
        pattern.functor == value.functor
            && pattern.args.len() == value.args.len()
            && pattern.args.iter().zip(&value.args).all(|(p, v)| self.extend(p, v))
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Substitution { bindings: iter.into_iter().collect() }
    }
}

/// One-way matching of `pattern` against the ground `value`.
pub fn match_terms(pattern: &Term, value: &Term, subst: &Substitution) -> Option<Substitution> {
    let mut out = subst.clone();
    out.extend(pattern, value).then_some(out)
}

pub fn match_constraint(
    pattern: &Constraint,
    value: &Constraint,
    subst: &Substitution,
) -> Option<Substitution> {
    let mut out = subst.clone();
    out.extend_constraint(pattern, value).then_some(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable `{0}` is unbound")]
    Unbound(String),
    #[error("`{0}` is not an integer expression")]
    NonNumeric(String),
    #[error("integer overflow evaluating `{0}`")]
    Overflow(String),
    #[error("division by zero evaluating `{0}`")]
    DivisionByZero(String),
}

/// Evaluates an integer expression built from `+ - * /`.
pub fn eval_arith(term: &Term, subst: &Substitution) -> Result<i64, EvalError> {
    match term {
        Term::Int(i) => Ok(*i),
        Term::Var(v) => match subst.get(v) {
            Some(bound) => eval_arith(bound, &Substitution::new()),
            None => Err(EvalError::Unbound(v.clone())),
        },
        Term::Compound(op, args) if args.len() == 2 && matches!(op.as_str(), "+" | "-" | "*" | "/") => {
            let a = eval_arith(&args[0], subst)?;
            let b = eval_arith(&args[1], subst)?;
            let shown = || subst.apply(term).to_string();
            match op.as_str() {
                "+" => a.checked_add(b).ok_or_else(|| EvalError::Overflow(shown())),
                "-" => a.checked_sub(b).ok_or_else(|| EvalError::Overflow(shown())),
                "*" => a.checked_mul(b).ok_or_else(|| EvalError::Overflow(shown())),
                _ if b == 0 => Err(EvalError::DivisionByZero(shown())),
                _ => a.checked_div(b).ok_or_else(|| EvalError::Overflow(shown())),
            }
        }
        other => Err(EvalError::NonNumeric(subst.apply(other).to_string())),
    }
}

pub fn eval_builtin(b: &Builtin, subst: &Substitution) -> Result<bool, EvalError> {
    let Builtin::Compare { op, lhs, rhs } = b else {
        return Ok(true);
    };
    if matches!(op, CompareOp::TermEq | CompareOp::TermNe) {
        let (l, r) = (subst.apply(lhs), subst.apply(rhs));
        let mut vars = Vec::new();
        l.collect_vars(&mut vars);
        r.collect_vars(&mut vars);
        if let Some(v) = vars.first() {
            return Err(EvalError::Unbound(v.to_string()));
        }
        return Ok((l == r) == (*op == CompareOp::TermEq));
    }
    let (l, r) = (eval_arith(lhs, subst)?, eval_arith(rhs, subst)?);
    Ok(match op {
        CompareOp::Lt => l < r,
        CompareOp::Gt => l > r,
        CompareOp::Le => l <= r,
        CompareOp::Ge => l >= r,
        CompareOp::ArithEq => l == r,
        CompareOp::ArithNe => l != r,
        CompareOp::TermEq | CompareOp::TermNe => unreachable!(),
    })
}

/// Conjunction, evaluated left to right and stopping at the first false
/// conjunct.
pub fn eval_guard(guard: &[Builtin], subst: &Substitution) -> Result<bool, EvalError> {
    for b in guard {
        if !eval_builtin(b, subst)? {
            return Ok(false);
        }
    }
    Ok(true)
}
