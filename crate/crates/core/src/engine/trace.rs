//! Trace events and their JSON-lines serialization.
//!
//! One JSON object per line, fields in this order:
//!
//! ```text
//! {"seq":0,"kind":"add","functor":"list","arity":2,"args":[0,7],"id":1,"cause":null}
//! ```
//!
//! Integer arguments are JSON numbers; every other argument is the string
//! form of the ground term.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::syntax::{parse_term, Constraint, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub kind: EventKind,
    pub constraint: Constraint,
    pub constraint_id: u64,
    pub cause: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum LogArg {
    Int(i64),
    Str(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogLine {
    seq: u64,
    kind: EventKind,
    functor: String,
    arity: usize,
    args: Vec<LogArg>,
    id: u64,
    cause: Option<String>,
}

impl From<&TraceEvent> for LogLine {
    fn from(e: &TraceEvent) -> Self {
        LogLine {
            seq: e.seq,
            kind: e.kind,
            functor: e.constraint.functor.clone(),
            arity: e.constraint.arity(),
            args: e
                .constraint
                .args
                .iter()
                .map(|a| match a {
                    Term::Int(i) => LogArg::Int(*i),
                    other => LogArg::Str(other.to_string()),
                })
                .collect(),
            id: e.constraint_id,
            cause: e.cause.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

pub fn write_event_log<W: Write>(trace: &[TraceEvent], mut sink: W) -> io::Result<()> {
    for event in trace {
        serde_json::to_writer(&mut sink, &LogLine::from(event))?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

pub fn event_log_string(trace: &[TraceEvent]) -> String {
    let mut buf = Vec::new();
    write_event_log(trace, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Reads a log written by [`write_event_log`]. Blank lines are ignored;
/// sequence numbers must be strictly increasing.
pub fn read_event_log<R: BufRead>(source: R) -> Result<Vec<TraceEvent>, LogError> {
    let mut events: Vec<TraceEvent> = Vec::new();
    for (index, line) in source.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: LogLine =
            serde_json::from_str(&line).map_err(|source| LogError::Json { line: line_no, source })?;
        let invalid = |message: String| LogError::Invalid { line: line_no, message };
        if raw.arity != raw.args.len() {
            return Err(invalid(format!("arity {} but {} arguments", raw.arity, raw.args.len())));
        }
        let mut args = Vec::with_capacity(raw.args.len());
        for arg in raw.args {
            let term = match arg {
                LogArg::Int(i) => Term::Int(i),
                LogArg::Str(s) => {
                    let t = parse_term(&s).map_err(|e| invalid(format!("argument `{s}`: {e}")))?;
                    if !t.is_ground() {
                        return Err(invalid(format!("argument `{s}` is not ground")));
                    }
                    t
                }
            };
            args.push(term);
        }
        if let Some(prev) = events.last() {
            if raw.seq <= prev.seq {
                return Err(invalid(format!("seq {} does not follow {}", raw.seq, prev.seq)));
            }
        }
        events.push(TraceEvent {
            seq: raw.seq,
            kind: raw.kind,
            constraint: Constraint::new(raw.functor, args),
            constraint_id: raw.id,
            cause: raw.cause,
        });
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_constraint;

    fn event(seq: u64, kind: EventKind, c: &str, id: u64, cause: Option<&str>) -> TraceEvent {
        TraceEvent {
            seq,
            kind,
            constraint: parse_constraint(c).unwrap(),
            constraint_id: id,
            cause: cause.map(String::from),
        }
    }

    #[test]
    fn canonical_add_line() {
        let e = event(0, EventKind::Add, "list(0,7)", 1, None);
        assert_eq!(
            event_log_string(std::slice::from_ref(&e)),
            "{\"seq\":0,\"kind\":\"add\",\"functor\":\"list\",\"arity\":2,\"args\":[0,7],\"id\":1,\"cause\":null}\n"
        );
        assert_eq!(read_event_log(event_log_string(std::slice::from_ref(&e)).as_bytes()).unwrap(), vec![e]);
    }

    #[test]
    fn remove_line_names_cause() {
        let e = event(3, EventKind::Remove, "list(0,7)", 1, Some("sortlist"));
        let line = event_log_string(std::slice::from_ref(&e));
        assert!(line.contains("\"kind\":\"remove\""));
        assert!(line.contains("\"cause\":\"sortlist\""));
        assert_eq!(read_event_log(line.as_bytes()).unwrap(), vec![e]);
    }

    #[test]
    fn empty_trace_is_empty_output() {
        assert_eq!(event_log_string(&[]), "");
        assert!(read_event_log("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn non_integer_arguments_roundtrip_as_strings() {
        let e = event(0, EventKind::Add, "edge(a,f(b,-3),x+1,start)", 4, Some("r"));
        let line = event_log_string(std::slice::from_ref(&e));
        assert!(line.contains("\"args\":[\"a\",\"f(b,-3)\",\"x+1\",\"start\"]"), "{line}");
        assert_eq!(read_event_log(line.as_bytes()).unwrap(), vec![e]);
    }

    #[test]
    fn rejects_arity_mismatch_and_variables() {
        let bad = r#"{"seq":0,"kind":"add","functor":"a","arity":2,"args":[1],"id":1,"cause":null}"#;
        assert!(matches!(read_event_log(bad.as_bytes()), Err(LogError::Invalid { line: 1, .. })));
        let var = r#"{"seq":0,"kind":"add","functor":"a","arity":1,"args":["X"],"id":1,"cause":null}"#;
        assert!(matches!(read_event_log(var.as_bytes()), Err(LogError::Invalid { .. })));
        let kind = r#"{"seq":0,"kind":"move","functor":"a","arity":0,"args":[],"id":1,"cause":null}"#;
        assert!(matches!(read_event_log(kind.as_bytes()), Err(LogError::Json { .. })));
    }

    #[test]
    fn rejects_non_increasing_seq() {
        let e = event(0, EventKind::Add, "a", 1, None);
        let text = event_log_string(&[e.clone(), e]);
        assert!(matches!(read_event_log(text.as_bytes()), Err(LogError::Invalid { line: 2, .. })));
    }
}
