//! Builds Jawaa `anim` scripts from a trace and an annotation set.
//!
//! Every annotated add becomes one `delay`/`begin ... end` block; every
//! maximal run of annotated removes becomes one block of `remove` lines.
//! Events for constraints without an annotation are ignored.

use std::collections::HashSet;
use std::fmt::{self, Write};

use crate::annotations::{instantiate, object_names, AnnotationSet, ExprError, Value, VisualObjectSpec};
use crate::engine::{EventKind, TraceEvent};

pub const DEFAULT_DELAY_MS: u64 = 2500;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DrawCommand {
    Node {
        name: String,
        x: i64,
        y: i64,
        width: i64,
        height: i64,
        n: i64,
        data: String,
        color: String,
        bkgrd: String,
        textcolor: String,
        shape: String,
    },
    Text { name: String, x: i64, y: i64, text: String, color: String, size: i64 },
    Remove { name: String },
    /// Any other object kind: `<kind> <name> <params...>`.
    Other { kind: String, name: String, params: Vec<String> },
}

impl DrawCommand {
    /// The object this command introduces, if any.
    pub fn introduced_name(&self) -> Option<&str> {
        match self {
            DrawCommand::Node { name, .. } | DrawCommand::Text { name, .. } | DrawCommand::Other { name, .. } => {
                Some(name)
            }
            DrawCommand::Remove { .. } => None,
        }
    }
}

impl fmt::Display for DrawCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrawCommand::Node { name, x, y, width, height, n, data, color, bkgrd, textcolor, shape } => write!(
                f,
                "node {name} {x} {y} {width} {height} {n} {data} {color} {bkgrd} {textcolor} {shape}"
            ),
            DrawCommand::Text { name, x, y, text, color, size } => {
                write!(f, "text {name} {x} {y} {text} {color} {size}")
            }
            DrawCommand::Remove { name } => write!(f, "remove {name}"),
            DrawCommand::Other { kind, name, params } => {
                write!(f, "{kind} {name}")?;
                params.iter().try_for_each(|p| write!(f, " {p}"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnimCommand {
    Delay(u64),
    Begin(Vec<DrawCommand>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnimScript {
    pub commands: Vec<AnimCommand>,
    pub delay_ms: u64,
}

impl AnimScript {
    pub fn blocks(&self) -> impl Iterator<Item = &[DrawCommand]> {
        self.commands.iter().filter_map(|c| match c {
            AnimCommand::Begin(cmds) => Some(cmds.as_slice()),
            AnimCommand::Delay(_) => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnimOptions {
    pub delay_ms: u64,
}

impl Default for AnimOptions {
    fn default() -> Self {
        AnimOptions { delay_ms: DEFAULT_DELAY_MS }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnimErrorKind {
    #[error("remove of `{0}`, which is not visible")]
    NotVisible(String),
    #[error("`{0}` is already visible")]
    AlreadyVisible(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{kind} object `{name}` lacks parameter `{key}`")]
    MissingParam { kind: String, name: String, key: &'static str },
    #[error("{kind} object `{name}` has unsupported parameter `{key}`")]
    UnexpectedParam { kind: String, name: String, key: String },
    #[error("{kind} object `{name}`: parameter `{key}` must be an integer, got `{value}`")]
    NonInteger { kind: String, name: String, key: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("event seq {seq}: {kind}")]
pub struct AnimError {
    pub seq: u64,
    pub kind: AnimErrorKind,
}

const NODE_KEYS: &[&str] = &["x", "y", "width", "height", "n", "data", "color", "bkgrd", "textcolor", "type"];
const TEXT_KEYS: &[&str] = &["x", "y", "text", "color", "size"];

struct Params<'a> {
    spec: &'a VisualObjectSpec,
}

impl<'a> Params<'a> {
    fn new(spec: &'a VisualObjectSpec, allowed: &[&str]) -> Result<Self, AnimErrorKind> {
        if let Some((key, _)) = spec.params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(AnimErrorKind::UnexpectedParam {
                kind: spec.object_kind.clone(),
                name: spec.name.clone(),
                key: key.clone(),
            });
        }
        Ok(Params { spec })
    }

    fn get(&self, key: &'static str) -> Result<&'a Value, AnimErrorKind> {
        self.spec.param(key).ok_or_else(|| AnimErrorKind::MissingParam {
            kind: self.spec.object_kind.clone(),
            name: self.spec.name.clone(),
            key,
        })
    }

    fn int(&self, key: &'static str) -> Result<i64, AnimErrorKind> {
        match self.get(key)? {
            Value::Int(i) => Ok(*i),
            Value::Text(t) => Err(AnimErrorKind::NonInteger {
                kind: self.spec.object_kind.clone(),
                name: self.spec.name.clone(),
                key: key.to_string(),
                value: t.clone(),
            }),
        }
    }

    fn text(&self, key: &'static str) -> Result<String, AnimErrorKind> {
        Ok(self.get(key)?.to_string())
    }
}

fn draw_command(spec: &VisualObjectSpec) -> Result<DrawCommand, AnimErrorKind> {
    let name = spec.name.clone();
    match spec.object_kind.as_str() {
        "node" => {
            let p = Params::new(spec, NODE_KEYS)?;
            Ok(DrawCommand::Node {
                name,
                x: p.int("x")?,
                y: p.int("y")?,
                width: p.int("width")?,
                height: p.int("height")?,
                n: p.int("n")?,
                data: p.text("data")?,
                color: p.text("color")?,
                bkgrd: p.text("bkgrd")?,
                textcolor: p.text("textcolor")?,
                shape: p.text("type")?,
            })
        }
        "text" => {
            let p = Params::new(spec, TEXT_KEYS)?;
            Ok(DrawCommand::Text {
                name,
                x: p.int("x")?,
                y: p.int("y")?,
                text: p.text("text")?,
                color: p.text("color")?,
                size: p.int("size")?,
            })
        }
        other => Ok(DrawCommand::Other {
            kind: other.to_string(),
            name,
            params: spec.params.iter().map(|(_, v)| v.to_string()).collect(),
        }),
    }
}

pub fn script_from_trace(
    trace: &[TraceEvent],
    annotations: &AnnotationSet,
    opts: AnimOptions,
) -> Result<AnimScript, AnimError> {
    let mut commands = Vec::new();
    let mut visible: HashSet<String> = HashSet::new();
    // Removes collected since the last add; flushed as one block.
    let mut pending: Vec<DrawCommand> = Vec::new();

    let flush = |commands: &mut Vec<AnimCommand>, block: Vec<DrawCommand>| {
        if !block.is_empty() {
            commands.push(AnimCommand::Delay(opts.delay_ms));
            commands.push(AnimCommand::Begin(block));
        }
    };

    for event in trace {
        let Some(annotation) = annotations.lookup(&event.constraint) else {
            continue;
        };
        let err = |kind: AnimErrorKind| AnimError { seq: event.seq, kind };
        match event.kind {
            EventKind::Add => {
                flush(&mut commands, std::mem::take(&mut pending));
                let specs = instantiate(annotation, &event.constraint).map_err(|e| err(e.into()))?;
                let mut block = Vec::with_capacity(specs.len());
                for spec in &specs {
                    if !visible.insert(spec.name.clone()) {
                        return Err(err(AnimErrorKind::AlreadyVisible(spec.name.clone())));
                    }
                    block.push(draw_command(spec).map_err(err)?);
                }
                flush(&mut commands, block);
            }
            EventKind::Remove => {
                for name in object_names(annotation, &event.constraint).map_err(|e| err(e.into()))? {
                    if !visible.remove(&name) {
                        return Err(err(AnimErrorKind::NotVisible(name)));
                    }
                    pending.push(DrawCommand::Remove { name });
                }
            }
        }
    }
    flush(&mut commands, pending);
    Ok(AnimScript { commands, delay_ms: opts.delay_ms })
}

/// `delay`, `begin`, one command per line, `end`; `\n` line endings.
pub fn render_script(script: &AnimScript) -> String {
    let mut out = String::new();
    for cmd in &script.commands {
        match cmd {
            AnimCommand::Delay(ms) => {
                let _ = writeln!(out, "delay {ms}");
            }
            AnimCommand::Begin(draws) => {
                out.push_str("begin\n");
                for d in draws {
                    let _ = writeln!(out, "{d}");
                }
                out.push_str("end\n");
            }
        }
    }
    out
}
