use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::syntax::{parse_program, parse_query, Term};

const SORTLIST: &str = "sortlist @ list(Index1,V1), list(Index2,V2) <=> Index1<Index2 , V1>V2 | list(Index2,V1), list(Index1,V2).";

fn sortlist() -> Program {
    parse_program(SORTLIST).unwrap()
}

fn list(i: i64, v: i64) -> Constraint {
    Constraint::new("list", vec![Term::Int(i), Term::Int(v)])
}

fn set(pairs: &[(i64, i64)]) -> BTreeSet<Constraint> {
    pairs.iter().map(|&(i, v)| list(i, v)).collect()
}

/// Store contents after every add event; removes are folded into the add
/// that follows them, matching the rows of the step-by-step table.
fn snapshots_after_adds(trace: &[TraceEvent]) -> Vec<BTreeSet<Constraint>> {
    let mut live: Vec<(u64, Constraint)> = Vec::new();
    let mut out = Vec::new();
    for e in trace {
        match e.kind {
            EventKind::Add => {
                live.push((e.constraint_id, e.constraint.clone()));
                out.push(live.iter().map(|(_, c)| c.clone()).collect());
            }
            EventKind::Remove => live.retain(|(id, _)| *id != e.constraint_id),
        }
    }
    out
}

fn replay(trace: &[TraceEvent]) -> Vec<Constraint> {
    let mut live: Vec<(u64, Constraint)> = Vec::new();
    for e in trace {
        match e.kind {
            EventKind::Add => live.push((e.constraint_id, e.constraint.clone())),
            EventKind::Remove => live.retain(|(id, _)| *id != e.constraint_id),
        }
    }
    let mut out: Vec<_> = live.into_iter().map(|(_, c)| c).collect();
    out.sort();
    out
}

#[test]
fn sortlist_reproduces_step_table() {
    let query = parse_query("list(0,7), list(1,6), list(2,4)").unwrap();
    let res = run(&sortlist(), &query, RunOptions::with_mode(TraceMode::Direct)).unwrap();
    assert_eq!(res.status, RunStatus::Completed);
    assert_eq!(
        snapshots_after_adds(&res.trace),
        vec![
            set(&[(0, 7)]),
            set(&[(1, 6), (0, 7)]),
            set(&[(1, 7)]),
            set(&[(0, 6), (1, 7)]),
            set(&[(2, 4), (0, 6), (1, 7)]),
            set(&[(2, 6), (1, 7)]),
            set(&[(2, 7)]),
            set(&[(1, 6), (2, 7)]),
            set(&[(0, 4), (1, 6), (2, 7)]),
        ]
    );
    assert_eq!(res.final_constraints(), vec![list(2, 7), list(1, 6), list(0, 4)]);
    assert_eq!(res.steps, 3);
}

#[test]
fn removes_follow_head_order() {
    let query = parse_query("list(0,7), list(1,6), list(2,4)").unwrap();
    let res = run(&sortlist(), &query, RunOptions::with_mode(TraceMode::Direct)).unwrap();
    let removes: Vec<_> = res
        .trace
        .iter()
        .filter(|e| e.kind == EventKind::Remove)
        .map(|e| (e.constraint.clone(), e.cause.as_deref()))
        .collect();
    assert_eq!(
        removes,
        vec![
            (list(0, 7), Some("sortlist")),
            (list(1, 6), Some("sortlist")),
            (list(0, 6), Some("sortlist")),
            (list(2, 4), Some("sortlist")),
            (list(1, 7), Some("sortlist")),
            (list(2, 6), Some("sortlist")),
        ]
    );
}

#[test]
fn empty_query_does_nothing() {
    let res = run(&sortlist(), &[], RunOptions::with_mode(TraceMode::Direct)).unwrap();
    assert!(res.final_store.is_empty());
    assert!(res.trace.is_empty());
    assert_eq!(res.steps, 0);
    assert_eq!(res.status, RunStatus::Completed);
}

#[test]
fn single_constraint_cannot_fire_two_headed_rule() {
    let res = run(&sortlist(), &[list(0, 7)], RunOptions::with_mode(TraceMode::Direct)).unwrap();
    assert_eq!(res.trace.len(), 1);
    assert_eq!(res.steps, 0);
}

#[test]
fn non_ground_query_is_rejected() {
    let q = vec![Constraint::new("list", vec![Term::Int(0), Term::var("X")])];
    assert_eq!(
        run(&sortlist(), &q, RunOptions::default()).unwrap_err(),
        EngineError::NonGroundQuery("list(0,X)".into())
    );
}

#[test]
fn body_variable_not_in_head_is_rejected() {
    let p = parse_program("r @ a(X) <=> b(Y).").unwrap();
    assert_eq!(
        run(&p, &parse_query("a(1)").unwrap(), RunOptions::default()).unwrap_err(),
        EngineError::UnboundVariable { rule: "r".into(), var: "Y".into() }
    );
}

#[test]
fn guard_type_error_is_reported() {
    let p = parse_program("r @ a(X) <=> X > 1 | true.").unwrap();
    let err = run(&p, &parse_query("a(foo)").unwrap(), RunOptions::default()).unwrap_err();
    assert_eq!(err, EngineError::Eval { rule: "r".into(), source: EvalError::NonNumeric("foo".into()) });
}

#[test]
fn step_limit_stops_a_loop() {
    let p = parse_program("spin @ a(X) <=> a(X).").unwrap();
    let opts = RunOptions { step_limit: 50, trace_mode: TraceMode::Direct };
    let res = run(&p, &parse_query("a(1)").unwrap(), opts).unwrap();
    assert_eq!(res.status, RunStatus::StepLimitExceeded);
    assert_eq!(res.steps, 50);
    // one add from the query plus a remove/add pair per firing
    assert_eq!(res.trace.len(), 1 + 2 * 50);
}

#[test]
fn deep_chains_do_not_overflow_the_stack() {
    let p = parse_program("spin @ a(X) <=> a(X).").unwrap();
    let opts = RunOptions { step_limit: 200_000, trace_mode: TraceMode::CommunicateFamily };
    let res = run(&p, &parse_query("a(1)").unwrap(), opts).unwrap();
    assert_eq!(res.status, RunStatus::StepLimitExceeded);
}

#[test]
fn failing_body_builtin_halts() {
    let p = parse_program("r @ a(X) <=> b(X), X > 5, c(X).").unwrap();
    let res = run(&p, &parse_query("a(1), a(9)").unwrap(), RunOptions::with_mode(TraceMode::Direct)).unwrap();
    assert_eq!(res.status, RunStatus::BuiltinFailure);
    assert_eq!(res.final_constraints(), vec![Constraint::new("b", vec![Term::Int(1)])]);
}

#[test]
fn propagation_fires_once_per_tuple() {
    let p = parse_program("pair @ a(X), a(Y) ==> X < Y | lt(X,Y).").unwrap();
    let res = run(&p, &parse_query("a(1), a(2), a(3)").unwrap(), RunOptions::with_mode(TraceMode::Direct)).unwrap();
    let lts: BTreeSet<_> =
        res.final_constraints().into_iter().filter(|c| c.functor == "lt").map(|c| c.to_string()).collect();
    assert_eq!(lts, ["lt(1,2)", "lt(1,3)", "lt(2,3)"].into_iter().map(String::from).collect());
    assert_eq!(res.steps, 3);
}

#[test]
fn simpagation_keeps_maximum() {
    let p = parse_program("keep_max @ mx(X) \\ mx(Y) <=> X >= Y | true.").unwrap();
    let res = run(&p, &parse_query("mx(3), mx(9), mx(1), mx(9)").unwrap(), RunOptions::default()).unwrap();
    assert_eq!(res.final_constraints(), vec![Constraint::new("mx", vec![Term::Int(9)])]);
}

#[test]
fn communicate_builtins_emit_events_without_storing() {
    let p = parse_program(
        "o @ list(V0,V1) ==> communicate(list(V0,V1)).\n\
         sortlist @ list(Index1,V1), list(Index2,V2) <=> Index1<Index2 , V1>V2 | communicate_hr(list(Index1,V1)), communicate_hr(list(Index2,V2)), list(Index2,V1), list(Index1,V2).",
    )
    .unwrap();
    let q = parse_query("list(0,7), list(1,6)").unwrap();
    let res = run(&p, &q, RunOptions::with_mode(TraceMode::CommunicateFamily)).unwrap();
    let shown: Vec<_> = res.trace.iter().map(|e| (e.kind, e.constraint.to_string(), e.constraint_id)).collect();
    assert_eq!(
        shown,
        vec![
            (EventKind::Add, "list(0,7)".into(), 1),
            (EventKind::Add, "list(1,6)".into(), 2),
            (EventKind::Remove, "list(0,7)".into(), 1),
            (EventKind::Remove, "list(1,6)".into(), 2),
            (EventKind::Add, "list(1,7)".into(), 3),
            (EventKind::Add, "list(0,6)".into(), 4),
        ]
    );
    assert!(res.final_store.iter().all(|s| s.constraint.functor == "list"));
    assert_eq!(res.trace[2].cause.as_deref(), Some("sortlist"));
    assert_eq!(res.trace[0].cause.as_deref(), Some("o"));
}

#[test]
fn both_mode_interleaves_engine_and_builtin_events() {
    let p = parse_program("o @ a(X) ==> communicate(a(X)).").unwrap();
    let res = run(&p, &parse_query("a(1)").unwrap(), RunOptions::with_mode(TraceMode::Both)).unwrap();
    assert_eq!(res.trace.len(), 2);
    assert_eq!(res.trace[0].cause, None);
    assert_eq!(res.trace[1].cause.as_deref(), Some("o"));
    assert_eq!(res.trace[0].constraint_id, res.trace[1].constraint_id);
}

#[test]
fn observer_only_program_reports_each_constraint_once() {
    let p = parse_program("o1 @ a(X) ==> communicate(a(X)).\no2 @ b(X,Y) ==> communicate(b(X,Y)).").unwrap();
    let q = parse_query("a(1), b(1,2), a(1), b(3,4), a(2)").unwrap();
    let res = run(&p, &q, RunOptions::default()).unwrap();
    assert_eq!(res.trace.len(), 5);
    let ids: BTreeSet<_> = res.trace.iter().map(|e| e.constraint_id).collect();
    assert_eq!(ids.len(), 5);
}

/// Brute-force reference for the sortlist rule: every ordered pair of
/// distinct store entries, with the active entry in either head, whose
/// values satisfy the guard.
fn brute_force_pairs(store: &[(u64, i64, i64)], active: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for &(a, ia, va) in store {
        for &(b, ib, vb) in store {
            if a != b && (a == active || b == active) && ia < ib && va > vb {
                out.push((a, b));
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn partner_search_agrees_with_brute_force(
        entries in prop::collection::vec((0i64..4, -5i64..5), 1..=4),
        active_pick in 0usize..4,
    ) {
        let program = sortlist();
        let mut machine = Machine::new(&program, RunOptions::default());
        let mut rows = Vec::new();
        for (i, v) in &entries {
            let id = machine.store.insert(list(*i, *v));
            rows.push((id, *i, *v));
        }
        let active = rows[active_pick % rows.len()].0;
        let oracle = brute_force_pairs(&rows, active);
        let found = machine.find_match(0, 0, active).unwrap()
            .or(machine.find_match(0, 1, active).unwrap())
            .map(|(_, ids)| (ids[0], ids[1]));
        match found {
            Some(pair) => prop_assert!(oracle.contains(&pair), "{pair:?} not in {oracle:?}"),
            None => prop_assert!(oracle.is_empty()),
        }
    }

    #[test]
    fn trace_replay_matches_final_store(values in prop::collection::vec(-50i64..=50, 0..=8)) {
        let q: Vec<_> = values.iter().enumerate().map(|(i, v)| list(i as i64, *v)).collect();
        let res = run(&sortlist(), &q, RunOptions::with_mode(TraceMode::Direct)).unwrap();
        prop_assert_eq!(res.status, RunStatus::Completed);
        let mut expected = res.final_constraints();
        expected.sort();
        prop_assert_eq!(replay(&res.trace), expected);

        let mut added = BTreeSet::new();
        let mut removed = BTreeSet::new();
        for (n, e) in res.trace.iter().enumerate() {
            prop_assert_eq!(e.seq, n as u64);
            match e.kind {
                EventKind::Add => { added.insert(e.constraint_id); }
                EventKind::Remove => {
                    prop_assert!(added.contains(&e.constraint_id));
                    prop_assert!(removed.insert(e.constraint_id));
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic(values in prop::collection::vec(-9i64..=9, 0..=6)) {
        let q: Vec<_> = values.iter().enumerate().map(|(i, v)| list(i as i64, *v)).collect();
        let a = run(&sortlist(), &q, RunOptions::with_mode(TraceMode::Both)).unwrap();
        let b = run(&sortlist(), &q, RunOptions::with_mode(TraceMode::Both)).unwrap();
        prop_assert_eq!(event_log_string(&a.trace), event_log_string(&b.trace));
    }
}
