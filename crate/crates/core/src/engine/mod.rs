//! Execution of CHR programs under the refined operational semantics,
//! restricted to ground stores.
//!
//! Query constraints are added left to right and each one is activated
//! before the next is added. An active constraint tries its occurrences in
//! program order (rule by rule, head by head). Partners are searched newest
//! first. Body constraints are added and activated depth-first, so the rest
//! of a body only runs once the activation of the preceding constraint has
//! finished.

mod matching;
mod store;
mod trace;

use std::collections::HashMap;

pub use matching::{
    eval_arith, eval_builtin, eval_guard, match_constraint, match_terms, EvalError, Substitution,
};
pub use store::{PropagationHistory, Store, StoredConstraint};
pub use trace::{event_log_string, read_event_log, write_event_log, EventKind, LogError, TraceEvent};

use crate::syntax::{BodyItem, Constraint, Functor, Program, Rule};

pub const DEFAULT_STEP_LIMIT: u64 = 100_000;

/// Name of the observer builtin that reports a constraint as added.
pub const COMMUNICATE: &str = "communicate";
/// Reports a removed head.
pub const COMMUNICATE_HR: &str = "communicate_hr";
/// Reports a kept head.
pub const COMMUNICATE_HK: &str = "communicate_hk";

pub fn is_communicate_builtin(c: &Constraint) -> bool {
    c.args.len() == 1 && [COMMUNICATE, COMMUNICATE_HR, COMMUNICATE_HK].contains(&c.functor.as_str())
}

/// Which store changes end up in the trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TraceMode {
    /// Only the `communicate` family of builtins emits events.
    #[default]
    CommunicateFamily,
    /// The engine reports every store insertion and removal itself.
    Direct,
    Both,
}

impl TraceMode {
    fn direct(self) -> bool {
        matches!(self, TraceMode::Direct | TraceMode::Both)
    }

    fn communicate(self) -> bool {
        matches!(self, TraceMode::CommunicateFamily | TraceMode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub step_limit: u64,
    pub trace_mode: TraceMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { step_limit: DEFAULT_STEP_LIMIT, trace_mode: TraceMode::default() }
    }
}

impl RunOptions {
    pub fn with_mode(trace_mode: TraceMode) -> Self {
        RunOptions { trace_mode, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    StepLimitExceeded,
    BuiltinFailure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    /// Surviving constraints in ascending id order.
    pub final_store: Vec<StoredConstraint>,
    pub trace: Vec<TraceEvent>,
    pub steps: u64,
    pub status: RunStatus,
}

impl ExecutionResult {
    pub fn final_constraints(&self) -> Vec<Constraint> {
        self.final_store.iter().map(|s| s.constraint.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("query constraint `{0}` is not ground")]
    NonGroundQuery(String),
    #[error("rule `{rule}`: variable `{var}` does not occur in the head")]
    UnboundVariable { rule: String, var: String },
    #[error("rule `{rule}`: {source}")]
    Eval {
        rule: String,
        #[source]
        source: EvalError,
    },
    #[error("rule `{rule}`: argument of `{call}` is not a constraint")]
    BadCommunicateArgument { rule: String, call: String },
}

/// Variables in guards and bodies must be bound by the heads, otherwise a
/// firing would put a non-ground constraint in the store.
fn check_range_restricted(rule: &Rule) -> Result<(), EngineError> {
    let mut bound = Vec::new();
    for head in rule.heads() {
        head.args.iter().for_each(|a| a.collect_vars(&mut bound));
    }
    let mut used = Vec::new();
    for b in &rule.guard {
        b.collect_vars(&mut used);
    }
    for item in &rule.body {
        match item {
            BodyItem::Constraint(c) => c.args.iter().for_each(|a| a.collect_vars(&mut used)),
            BodyItem::Builtin(b) => b.collect_vars(&mut used),
        }
    }
    match used.into_iter().find(|v| *v == "_" || !bound.contains(v)) {
        Some(var) => Err(EngineError::UnboundVariable { rule: rule.name.clone(), var: var.to_string() }),
        None => Ok(()),
    }
}

/// Runs `program` on a ground `query`.
pub fn run(program: &Program, query: &[Constraint], opts: RunOptions) -> Result<ExecutionResult, EngineError> {
    if let Some(c) = query.iter().find(|c| !c.is_ground()) {
        return Err(EngineError::NonGroundQuery(c.to_string()));
    }
    for rule in &program.rules {
        check_range_restricted(rule)?;
    }

    let mut machine = Machine::new(program, opts);
    let mut status = RunStatus::Completed;
    for c in query {
        let id = machine.add(c.clone(), None);
        machine.stack.push(machine.activation(id));
        if let Some(halt) = machine.drive()? {
            status = halt;
            break;
        }
    }
    Ok(ExecutionResult {
        final_store: machine.store.snapshot(),
        trace: machine.trace,
        steps: machine.steps,
        status,
    })
}

enum Frame {
    Activate { id: u64, occurrences: usize, next: usize },
    Body { rule: usize, subst: Substitution, ids: Vec<u64>, reported: Vec<bool>, next: usize },
}

struct Machine<'p> {
    program: &'p Program,
    opts: RunOptions,
    /// Per functor: (rule index, head position) in program order.
    occurrence_lists: Vec<Vec<(usize, usize)>>,
    occurrence_index: HashMap<Functor, usize>,
    store: Store,
    history: PropagationHistory,
    trace: Vec<TraceEvent>,
    steps: u64,
    stack: Vec<Frame>,
}

fn head(rule: &Rule, pos: usize) -> &Constraint {
    if pos < rule.kept.len() {
        &rule.kept[pos]
    } else {
        &rule.removed[pos - rule.kept.len()]
    }
}

impl<'p> Machine<'p> {
    fn new(program: &'p Program, opts: RunOptions) -> Self {
        let mut occurrence_lists: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut occurrence_index = HashMap::new();
        for (r, rule) in program.rules.iter().enumerate() {
            for (pos, h) in rule.heads().enumerate() {
                let slot = *occurrence_index.entry(h.functor()).or_insert_with(|| {
                    occurrence_lists.push(Vec::new());
                    occurrence_lists.len() - 1
                });
                occurrence_lists[slot].push((r, pos));
            }
        }
        Machine {
            program,
            opts,
            occurrence_lists,
            occurrence_index,
            store: Store::new(),
            history: PropagationHistory::default(),
            trace: Vec::new(),
            steps: 0,
            stack: Vec::new(),
        }
    }

    fn emit(&mut self, kind: EventKind, constraint: Constraint, constraint_id: u64, cause: Option<&str>) {
        let seq = self.trace.len() as u64;
        self.trace.push(TraceEvent { seq, kind, constraint, constraint_id, cause: cause.map(String::from) });
    }

    fn add(&mut self, c: Constraint, cause: Option<&str>) -> u64 {
        let id = self.store.insert(c.clone());
        if self.opts.trace_mode.direct() {
            self.emit(EventKind::Add, c, id, cause);
        }
        id
    }

    fn activation(&self, id: u64) -> Frame {
        let functor = self.store.get(id).map(Constraint::functor);
        let occurrences = functor
            .and_then(|f| self.occurrence_index.get(&f).copied())
            .unwrap_or(usize::MAX);
        Frame::Activate { id, occurrences, next: 0 }
    }

    /// Runs until the stack is empty. Returns the halting status if the run
    /// stopped early.
    fn drive(&mut self) -> Result<Option<RunStatus>, EngineError> {
        while let Some(frame) = self.stack.last_mut() {
            match frame {
                Frame::Activate { id, occurrences, next } => {
                    let (id, list) = (*id, *occurrences);
                    let occ = self.occurrence_lists.get(list).and_then(|l| l.get(*next)).copied();
                    let Some((rule, pos)) = occ.filter(|_| self.store.contains(id)) else {
                        self.stack.pop();
                        continue;
                    };
                    match self.find_match(rule, pos, id)? {
                        None => {
                            if let Some(Frame::Activate { next, .. }) = self.stack.last_mut() {
                                *next += 1;
                            }
                        }
                        // The activation frame stays on the stack at the
                        // same occurrence and resumes once the body is done.
                        Some((subst, ids)) => {
                            if self.steps >= self.opts.step_limit {
                                return Ok(Some(RunStatus::StepLimitExceeded));
                            }
                            self.fire(rule, subst, ids);
                        }
                    }
                }
                Frame::Body { rule, next, .. } => {
                    let rule_idx = *rule;
                    let program = self.program;
                    let r = &program.rules[rule_idx];
                    let Some(item) = r.body.get(*next) else {
                        self.stack.pop();
                        continue;
                    };
                    *next += 1;
                    if let Some(halt) = self.exec_body_item(rule_idx, item)? {
                        return Ok(Some(halt));
                    }
                }
            }
        }
        Ok(None)
    }

    fn fire(&mut self, rule_idx: usize, subst: Substitution, ids: Vec<u64>) {
        let program = self.program;
        let rule = &program.rules[rule_idx];
        self.steps += 1;
        if rule.removed.is_empty() {
            self.history.insert(&rule.name, &ids);
        }
        for &id in &ids[rule.kept.len()..] {
            if let Some(c) = self.store.remove(id) {
                if self.opts.trace_mode.direct() {
                    self.emit(EventKind::Remove, c, id, Some(&rule.name));
                }
            }
        }
        let reported = vec![false; ids.len()];
        self.stack.push(Frame::Body { rule: rule_idx, subst, ids, reported, next: 0 });
    }

    fn exec_body_item(&mut self, rule_idx: usize, item: &'p BodyItem) -> Result<Option<RunStatus>, EngineError> {
        let program = self.program;
        let rule = &program.rules[rule_idx];
        let Some(Frame::Body { subst, ids, reported, .. }) = self.stack.last_mut() else {
            unreachable!("body items run inside a body frame");
        };
        let eval_err = |source| EngineError::Eval { rule: rule.name.clone(), source };
        match item {
            BodyItem::Builtin(b) => {
                if !eval_builtin(b, subst).map_err(eval_err)? {
                    return Ok(Some(RunStatus::BuiltinFailure));
                }
            }
            BodyItem::Constraint(c) if is_communicate_builtin(c) => {
                let arg = subst.apply(&c.args[0]);
                let reported_c = match Constraint::from_term(&arg) {
                    Some(rc) if rc.is_ground() => rc,
                    _ => {
                        return Err(EngineError::BadCommunicateArgument {
                            rule: rule.name.clone(),
                            call: subst.apply_constraint(c).to_string(),
                        })
                    }
                };
                let kind = if c.functor == COMMUNICATE_HR { EventKind::Remove } else { EventKind::Add };
                // Attribute the event to the matched head it names, if any.
                let slot = (0..ids.len())
                    .find(|&p| !reported[p] && subst.apply_constraint(head(rule, p)) == reported_c);
                let id = match slot {
                    Some(p) => {
                        reported[p] = true;
                        ids[p]
                    }
                    None => self.store.fresh_id(),
                };
                if self.opts.trace_mode.communicate() {
                    self.emit(kind, reported_c, id, Some(&rule.name));
                }
            }
            BodyItem::Constraint(c) => {
                let instance = subst.apply_constraint(c);
                let id = self.add(instance, Some(&rule.name));
                let frame = self.activation(id);
                self.stack.push(frame);
            }
        }
        Ok(None)
    }

    /// First full match for `rule` with the active constraint at head `pos`:
    /// remaining heads in head order, partners newest first.
    fn find_match(&self, rule_idx: usize, pos: usize, active: u64) -> Result<Option<(Substitution, Vec<u64>)>, EngineError> {
        let rule = &self.program.rules[rule_idx];
        let Some(active_c) = self.store.get(active) else {
            return Ok(None);
        };
        let Some(subst) = match_constraint(head(rule, pos), active_c, &Substitution::new()) else {
            return Ok(None);
        };
        let order: Vec<usize> = (0..rule.head_count()).filter(|&p| p != pos).collect();
        let mut ids = vec![0; rule.head_count()];
        ids[pos] = active;
        self.search(rule, &order, &mut ids, subst)
    }

    fn search(
        &self,
        rule: &Rule,
        order: &[usize],
        ids: &mut Vec<u64>,
        subst: Substitution,
    ) -> Result<Option<(Substitution, Vec<u64>)>, EngineError> {
        let Some((&pos, rest)) = order.split_first() else {
            let holds = eval_guard(&rule.guard, &subst)
                .map_err(|source| EngineError::Eval { rule: rule.name.clone(), source })?;
            if !holds || (rule.removed.is_empty() && self.history.contains(&rule.name, ids)) {
                return Ok(None);
            }
            return Ok(Some((subst, ids.clone())));
        };
        let pattern = head(rule, pos);
        for (id, candidate) in self.store.newest_first() {
            if ids.contains(&id) {
                continue;
            }
            let Some(extended) = match_constraint(pattern, candidate, &subst) else {
                continue;
            };
            ids[pos] = id;
            if let Some(found) = self.search(rule, rest, ids, extended)? {
                return Ok(Some(found));
            }
            ids[pos] = 0;
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests;
