//! Source-to-source instrumentation.
//!
//! Every rule `name @ Hk \ Hr <=> G | B` becomes
//! `name @ Hk \ Hr <=> G | communicate_hk(h).., communicate_hr(h).., B`
//! (the kept-head calls only when requested), and one observer rule
//! `f(V0,..,Vn-1) ==> communicate(f(V0,..,Vn-1))` per observed functor is
//! placed before all original rules so that it runs first whenever a
//! constraint enters the store.

use std::collections::HashSet;

use crate::engine::{COMMUNICATE, COMMUNICATE_HK, COMMUNICATE_HR};
use crate::syntax::{BodyItem, Constraint, Functor, Program, Rule, Term};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ObservedFunctors {
    /// Every functor appearing in the program.
    #[default]
    All,
    Only(Vec<Functor>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformOptions {
    pub skip_kept_heads: bool,
    pub observed_functors: ObservedFunctors,
    pub observer_builtin_name: String,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            skip_kept_heads: true,
            observed_functors: ObservedFunctors::All,
            observer_builtin_name: COMMUNICATE.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("rule `{rule}` already uses reserved functor `{functor}`")]
    NameCollision { rule: String, functor: Functor },
    #[error("cannot observe `{0}`: it does not occur in the program")]
    UnknownFunctor(Functor),
}

/// `f(V0,..,Vn-1) ==> builtin(f(V0,..,Vn-1))`, named `observe_f_n`.
pub fn observer_rule(functor: &Functor, builtin: &str) -> Rule {
    let args: Vec<Term> = (0..functor.arity).map(|i| Term::var(format!("V{i}"))).collect();
    let head = Constraint::new(functor.name.clone(), args);
    let call = Constraint::new(builtin, vec![head.to_term()]);
    Rule {
        name: format!("observe_{}_{}", functor.name, functor.arity),
        kept: vec![head],
        removed: Vec::new(),
        guard: Vec::new(),
        body: vec![BodyItem::Constraint(call)],
    }
}

pub fn observer_rules(functors: &[Functor]) -> Vec<Rule> {
    functors.iter().map(|f| observer_rule(f, COMMUNICATE)).collect()
}

fn check_reserved(p: &Program, reserved: &[&str]) -> Result<(), TransformError> {
    for rule in &p.rules {
        let body = rule.body.iter().filter_map(|i| match i {
            BodyItem::Constraint(c) => Some(c),
            BodyItem::Builtin(_) => None,
        });
        if let Some(c) = rule.heads().chain(body).find(|c| reserved.contains(&c.functor.as_str())) {
            return Err(TransformError::NameCollision { rule: rule.name.clone(), functor: c.functor() });
        }
    }
    Ok(())
}

/// Gives every `_` in the heads its own fresh name so that the injected
/// calls are ground when the rule fires.
fn name_anonymous_vars(rule: &mut Rule) {
    let mut vars = Vec::new();
    for h in rule.heads() {
        h.args.iter().for_each(|a| a.collect_vars(&mut vars));
    }
    if !vars.contains(&"_") {
        return;
    }
    let taken: HashSet<String> = vars.iter().map(|v| v.to_string()).collect();
    let mut counter = 0;
    let mut fresh = || loop {
        counter += 1;
        let name = format!("_Anon{counter}");
        if !taken.contains(&name) {
            return name;
        }
    };
    fn rename(t: &mut Term, fresh: &mut dyn FnMut() -> String) {
        match t {
            Term::Var(v) if v == "_" => *v = fresh(),
            Term::Compound(_, args) => args.iter_mut().for_each(|a| rename(a, fresh)),
            _ => {}
        }
    }
    for h in rule.kept.iter_mut().chain(rule.removed.iter_mut()) {
        h.args.iter_mut().for_each(|a| rename(a, &mut fresh));
    }
}

fn instrument(rule: &Rule, skip_kept_heads: bool) -> Rule {
    let mut rule = rule.clone();
    name_anonymous_vars(&mut rule);
    let call = |name: &str, h: &Constraint| BodyItem::Constraint(Constraint::new(name, vec![h.to_term()]));
    let mut body = Vec::with_capacity(rule.head_count() + rule.body.len());
    if !skip_kept_heads {
        body.extend(rule.kept.iter().map(|h| call(COMMUNICATE_HK, h)));
    }
    body.extend(rule.removed.iter().map(|h| call(COMMUNICATE_HR, h)));
    body.append(&mut rule.body);
    rule.body = body;
    rule
}

pub fn transform_program(p: &Program, opts: &TransformOptions) -> Result<Program, TransformError> {
    check_reserved(p, &[COMMUNICATE, COMMUNICATE_HR, COMMUNICATE_HK, &opts.observer_builtin_name])?;

    let declared = p.declared_constraints();
    let observed: Vec<Functor> = match &opts.observed_functors {
        ObservedFunctors::All => declared,
        ObservedFunctors::Only(wanted) => {
            if let Some(missing) = wanted.iter().find(|f| !declared.contains(f)) {
                return Err(TransformError::UnknownFunctor(missing.clone()));
            }
            declared.into_iter().filter(|f| wanted.contains(f)).collect()
        }
    };

    let mut taken: HashSet<String> = p.rules.iter().map(|r| r.name.clone()).collect();
    let mut rules = Vec::with_capacity(observed.len() + p.rules.len());
    for f in &observed {
        let mut rule = observer_rule(f, &opts.observer_builtin_name);
        let base = rule.name.clone();
        let mut suffix = 1;
        while taken.contains(&rule.name) {
            rule.name = format!("{base}_{suffix}");
            suffix += 1;
        }
        taken.insert(rule.name.clone());
        rules.push(rule);
    }
    rules.extend(p.rules.iter().map(|r| instrument(r, opts.skip_kept_heads)));
    Ok(Program::new(rules))
}
