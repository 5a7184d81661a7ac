//! Constraint-to-visual-object annotations.
//!
//! An annotation file maps a constraint pattern to one or more object
//! templates:
//!
//! ```xml
//! <association>
//! <constraint name="list(Index,Value)">
//! <add name="node" parameters="name=nodevalueOf(arg1)#x=valueOf(arg0)*12+2#y=50" type="arg1"/>
//! </constraint>
//! </association>
//! ```
//!
//! Parameter values mix literal text with `valueOf(<selector>)` references
//! and integer arithmetic. A selector is either positional (`arg0`, `arg1`,
//! ...) or the name of a variable in the pattern.

use std::fmt;

use crate::engine::match_constraint;
use crate::engine::Substitution;
use crate::syntax::{parse_constraint, Constraint, Functor, ParseError, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Position(usize),
    Named(String),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Position(k) => write!(f, "arg{k}"),
            Selector::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '+' => ArithOp::Add,
            '-' => ArithOp::Sub,
            '*' => ArithOp::Mul,
            '/' => ArithOp::Div,
            _ => return None,
        })
    }

    fn binds_tighter(self) -> bool {
        matches!(self, ArithOp::Mul | ArithOp::Div)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamExpr {
    Literal(String),
    ValueOf(Selector),
    BinOp { op: ArithOp, lhs: Box<ParamExpr>, rhs: Box<ParamExpr> },
    Concat(Vec<ParamExpr>),
}

impl ParamExpr {
    pub fn literal(s: impl Into<String>) -> Self {
        ParamExpr::Literal(s.into())
    }

    pub fn arg(k: usize) -> Self {
        ParamExpr::ValueOf(Selector::Position(k))
    }

    pub fn named(var: impl Into<String>) -> Self {
        ParamExpr::ValueOf(Selector::Named(var.into()))
    }

    pub fn bin(op: ArithOp, lhs: ParamExpr, rhs: ParamExpr) -> Self {
        ParamExpr::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectTemplate {
    pub object_kind: String,
    pub params: Vec<(String, ParamExpr)>,
    /// The `type` attribute, kept verbatim; evaluation ignores it.
    pub raw_type_attr: String,
}

impl ObjectTemplate {
    pub fn param(&self, key: &str) -> Option<&ParamExpr> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintAnnotation {
    pub pattern: Constraint,
    pub templates: Vec<ObjectTemplate>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    pub entries: Vec<ConstraintAnnotation>,
    /// Non-fatal problems found while loading (duplicate patterns).
    pub warnings: Vec<String>,
}

impl AnnotationSet {
    pub fn lookup(&self, c: &Constraint) -> Option<&ConstraintAnnotation> {
        self.entries
            .iter()
            .find(|e| e.pattern.functor == c.functor && e.pattern.arity() == c.arity())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisualObjectSpec {
    pub object_kind: String,
    pub name: String,
    /// Every parameter except `name`, in declared order.
    pub params: Vec<(String, Value)>,
}

impl VisualObjectSpec {
    pub fn param(&self, key: &str) -> Option<&Value> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("XML error: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("expected root element <association>, found <{0}>")]
    BadRoot(String),
    #[error("unexpected element <{found}> inside <{parent}>")]
    UnexpectedElement { parent: String, found: String },
    #[error("<{element}> is missing the `{attribute}` attribute")]
    MissingAttribute { element: &'static str, attribute: &'static str },
    #[error("constraint pattern `{pattern}`: {source}")]
    Pattern {
        pattern: String,
        #[source]
        source: ParseError,
    },
    #[error("`{pattern}`: malformed parameter entry `{entry}`, expected key=value")]
    MalformedParameter { pattern: String, entry: String },
    #[error("`{pattern}`: parameter `{key}` given twice")]
    DuplicateParameter { pattern: String, key: String },
    #[error("`{pattern}`: unterminated `valueOf(` in `{value}`")]
    UnterminatedValueOf { pattern: String, value: String },
    #[error("`{pattern}`: invalid selector `{selector}`")]
    InvalidSelector { pattern: String, selector: String },
    #[error("`{pattern}`: selector `arg{index}` out of range for arity {arity}")]
    SelectorOutOfRange { pattern: String, index: usize, arity: usize },
    #[error("`{pattern}`: selector `{name}` is not a variable of the pattern")]
    UnknownSelector { pattern: String, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("`{constraint}` does not match annotation pattern `{pattern}`")]
    PatternMismatch { pattern: String, constraint: String },
    #[error("selector `{0}` cannot be resolved")]
    Unresolved(Selector),
    #[error("operand `{0}` is not an integer")]
    NonInteger(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("template `{0}` has no `name` parameter")]
    MissingName(String),
    #[error("template `{0}` evaluates to an empty name")]
    EmptyName(String),
}

// ---------------------------------------------------------------------------
// Parameter expression parsing

enum Piece {
    ValueOf(Selector),
    Int(String),
    Op(char),
    Text(String),
}

fn parse_selector(raw: &str, pattern: &Constraint) -> Result<Selector, AnnotationError> {
    let shown = || pattern.to_string();
    let raw = raw.trim();
    if let Some(digits) = raw.strip_prefix("arg").filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())) {
        let index: usize = digits
            .parse()
            .map_err(|_| AnnotationError::InvalidSelector { pattern: shown(), selector: raw.into() })?;
        if index >= pattern.arity() {
            return Err(AnnotationError::SelectorOutOfRange { pattern: shown(), index, arity: pattern.arity() });
        }
        return Ok(Selector::Position(index));
    }
    let is_var = raw.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
        && raw.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !is_var {
        return Err(AnnotationError::InvalidSelector { pattern: shown(), selector: raw.into() });
    }
    let mut vars = Vec::new();
    pattern.args.iter().for_each(|a| a.collect_vars(&mut vars));
    if raw == "_" || !vars.contains(&raw) {
        return Err(AnnotationError::UnknownSelector { pattern: shown(), name: raw.into() });
    }
    Ok(Selector::Named(raw.to_string()))
}

fn pieces(value: &str, pattern: &Constraint) -> Result<Vec<Piece>, AnnotationError> {
    const VALUE_OF: &str = "valueOf(";
    let mut out = Vec::new();
    let mut rest = value;
    while let Some(c) = rest.chars().next() {
        if let Some(after) = rest.strip_prefix(VALUE_OF) {
            let close = after.find(')').ok_or_else(|| AnnotationError::UnterminatedValueOf {
                pattern: pattern.to_string(),
                value: value.to_string(),
            })?;
            out.push(Piece::ValueOf(parse_selector(&after[..close], pattern)?));
            rest = &after[close + 1..];
        } else if c.is_ascii_digit() {
            let end = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            out.push(Piece::Int(rest[..end].to_string()));
            rest = &rest[end..];
        } else if ArithOp::from_char(c).is_some() {
            out.push(Piece::Op(c));
            rest = &rest[1..];
        } else {
            match out.last_mut() {
                Some(Piece::Text(t)) => t.push(c),
                _ => out.push(Piece::Text(c.to_string())),
            }
            rest = &rest[c.len_utf8()..];
        }
    }
    Ok(out)
}

fn operand(piece: &Piece) -> Option<ParamExpr> {
    match piece {
        Piece::ValueOf(s) => Some(ParamExpr::ValueOf(s.clone())),
        Piece::Int(digits) => Some(ParamExpr::Literal(digits.clone())),
        Piece::Op(_) | Piece::Text(_) => None,
    }
}

/// `operands[0] ops[0] operands[1] ...` with `*` `/` before `+` `-`, all
/// left-associative.
fn fold_arith(operands: Vec<ParamExpr>, ops: Vec<ArithOp>) -> ParamExpr {
    let mut terms = Vec::new();
    let mut additive = Vec::new();
    let mut operands = operands.into_iter();
    let mut current = operands.next().expect("a run starts with an operand");
    for (op, rhs) in ops.into_iter().zip(operands) {
        if op.binds_tighter() {
            current = ParamExpr::bin(op, current, rhs);
        } else {
            terms.push(current);
            additive.push(op);
            current = rhs;
        }
    }
    terms.push(current);
    let mut terms = terms.into_iter();
    let first = terms.next().expect("at least one term");
    additive.into_iter().zip(terms).fold(first, |acc, (op, rhs)| ParamExpr::bin(op, acc, rhs))
}

/// Parses one parameter value against the annotation's pattern.
pub fn parse_param_expr(value: &str, pattern: &Constraint) -> Result<ParamExpr, AnnotationError> {
    let pieces = pieces(value, pattern)?;
    let mut parts: Vec<ParamExpr> = Vec::new();
    let push_text = |parts: &mut Vec<ParamExpr>, text: &str| match parts.last_mut() {
        Some(ParamExpr::Literal(t)) => t.push_str(text),
        _ => parts.push(ParamExpr::Literal(text.to_string())),
    };

    let mut i = 0;
    while i < pieces.len() {
        if let Some(first) = operand(&pieces[i]) {
            let mut operands = vec![first];
            let mut ops = Vec::new();
            let mut j = i;
            while let (Some(Piece::Op(c)), Some(next)) =
                (pieces.get(j + 1), pieces.get(j + 2).and_then(operand))
            {
                ops.push(ArithOp::from_char(*c).expect("Op pieces hold operators"));
                operands.push(next);
                j += 2;
            }
            if ops.is_empty() {
                match operands.pop().expect("one operand") {
                    ParamExpr::Literal(digits) => push_text(&mut parts, &digits),
                    other => parts.push(other),
                }
            } else {
                parts.push(fold_arith(operands, ops));
            }
            i = j + 1;
            continue;
        }
        match &pieces[i] {
            Piece::Op(c) => push_text(&mut parts, &c.to_string()),
            Piece::Text(t) => push_text(&mut parts, t),
            Piece::ValueOf(_) | Piece::Int(_) => unreachable!("handled as operands"),
        }
        i += 1;
    }
    Ok(match parts.len() {
        0 => ParamExpr::Literal(String::new()),
        1 => parts.pop().expect("one part"),
        _ => ParamExpr::Concat(parts),
    })
}

// ---------------------------------------------------------------------------
// XML loading

fn parse_parameters(raw: &str, pattern: &Constraint) -> Result<Vec<(String, ParamExpr)>, AnnotationError> {
    let mut params: Vec<(String, ParamExpr)> = Vec::new();
    for entry in raw.split('#').map(str::trim).filter(|e| !e.is_empty()) {
        let malformed = || AnnotationError::MalformedParameter { pattern: pattern.to_string(), entry: entry.into() };
        let (key, value) = entry.split_once('=').ok_or_else(malformed)?;
        let key = key.trim();
        if key.is_empty() {
            return Err(malformed());
        }
        if params.iter().any(|(k, _)| k == key) {
            return Err(AnnotationError::DuplicateParameter { pattern: pattern.to_string(), key: key.into() });
        }
        params.push((key.to_string(), parse_param_expr(value.trim(), pattern)?));
    }
    Ok(params)
}

pub fn parse_annotations(source: &str) -> Result<AnnotationSet, AnnotationError> {
    let doc = roxmltree::Document::parse(source)?;
    let root = doc.root_element();
    if root.tag_name().name() != "association" {
        return Err(AnnotationError::BadRoot(root.tag_name().name().to_string()));
    }

    let mut set = AnnotationSet::default();
    let mut seen: Vec<Functor> = Vec::new();
    for node in root.children().filter(|n| n.is_element()) {
        if node.tag_name().name() != "constraint" {
            return Err(AnnotationError::UnexpectedElement {
                parent: "association".into(),
                found: node.tag_name().name().into(),
            });
        }
        let raw_pattern = node
            .attribute("name")
            .ok_or(AnnotationError::MissingAttribute { element: "constraint", attribute: "name" })?;
        let pattern = parse_constraint(raw_pattern)
            .map_err(|source| AnnotationError::Pattern { pattern: raw_pattern.into(), source })?;

        let mut templates = Vec::new();
        for add in node.children().filter(|n| n.is_element()) {
            if add.tag_name().name() != "add" {
                return Err(AnnotationError::UnexpectedElement {
                    parent: "constraint".into(),
                    found: add.tag_name().name().into(),
                });
            }
            let kind = add
                .attribute("name")
                .ok_or(AnnotationError::MissingAttribute { element: "add", attribute: "name" })?;
            let parameters = add
                .attribute("parameters")
                .ok_or(AnnotationError::MissingAttribute { element: "add", attribute: "parameters" })?;
            templates.push(ObjectTemplate {
                object_kind: kind.trim().to_string(),
                params: parse_parameters(parameters, &pattern)?,
                raw_type_attr: add.attribute("type").unwrap_or_default().to_string(),
            });
        }

        let functor = pattern.functor();
        if seen.contains(&functor) {
            set.warnings.push(format!("duplicate annotation for {functor}; keeping the first"));
            continue;
        }
        seen.push(functor);
        set.entries.push(ConstraintAnnotation { pattern, templates });
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Evaluation

fn term_value(t: &Term) -> Value {
    match t {
        Term::Int(i) => Value::Int(*i),
        other => Value::Text(other.to_string()),
    }
}

fn int_operand(v: Value) -> Result<i64, ExprError> {
    match v {
        Value::Int(i) => Ok(i),
        Value::Text(t) => Err(ExprError::NonInteger(t)),
    }
}

fn eval_with(e: &ParamExpr, c: &Constraint, bindings: &Substitution) -> Result<Value, ExprError> {
    match e {
        ParamExpr::Literal(text) => Ok(match text.parse::<i64>() {
            Ok(i) if i.to_string() == *text => Value::Int(i),
            _ => Value::Text(text.clone()),
        }),
        ParamExpr::ValueOf(sel) => {
            let term = match sel {
                Selector::Position(k) => c.args.get(*k),
                Selector::Named(n) => bindings.get(n),
            };
            term.map(term_value).ok_or_else(|| ExprError::Unresolved(sel.clone()))
        }
        ParamExpr::BinOp { op, lhs, rhs } => {
            let a = int_operand(eval_with(lhs, c, bindings)?)?;
            let b = int_operand(eval_with(rhs, c, bindings)?)?;
            let r = match op {
                ArithOp::Add => a.checked_add(b),
                ArithOp::Sub => a.checked_sub(b),
                ArithOp::Mul => a.checked_mul(b),
                ArithOp::Div if b == 0 => return Err(ExprError::DivisionByZero),
                ArithOp::Div => a.checked_div(b),
            };
            r.map(Value::Int).ok_or(ExprError::Overflow)
        }
        ParamExpr::Concat(parts) => {
            let mut out = String::new();
            for p in parts {
                out.push_str(&eval_with(p, c, bindings)?.to_string());
            }
            Ok(Value::Text(out))
        }
    }
}

fn bind_pattern(c: &Constraint, pattern: &Constraint) -> Result<Substitution, ExprError> {
    match_constraint(pattern, c, &Substitution::new()).ok_or_else(|| ExprError::PatternMismatch {
        pattern: pattern.to_string(),
        constraint: c.to_string(),
    })
}

/// Evaluates `e` for the ground constraint `c` annotated by `pattern`.
pub fn eval_expr(e: &ParamExpr, c: &Constraint, pattern: &Constraint) -> Result<Value, ExprError> {
    let bindings = bind_pattern(c, pattern)?;
    eval_with(e, c, &bindings)
}

fn eval_name(t: &ObjectTemplate, c: &Constraint, bindings: &Substitution) -> Result<String, ExprError> {
    let expr = t.param("name").ok_or_else(|| ExprError::MissingName(t.object_kind.clone()))?;
    let name = eval_with(expr, c, bindings)?.to_string();
    if name.is_empty() {
        return Err(ExprError::EmptyName(t.object_kind.clone()));
    }
    Ok(name)
}

/// One object per template, parameters evaluated in declared order.
pub fn instantiate(a: &ConstraintAnnotation, c: &Constraint) -> Result<Vec<VisualObjectSpec>, ExprError> {
    let bindings = bind_pattern(c, &a.pattern)?;
    a.templates
        .iter()
        .map(|t| {
            let name = eval_name(t, c, &bindings)?;
            let params = t
                .params
                .iter()
                .filter(|(k, _)| k != "name")
                .map(|(k, e)| Ok((k.clone(), eval_with(e, c, &bindings)?)))
                .collect::<Result<_, ExprError>>()?;
            Ok(VisualObjectSpec { object_kind: t.object_kind.clone(), name, params })
        })
        .collect()
}

/// Only the `name` of each template; what a removal needs.
pub fn object_names(a: &ConstraintAnnotation, c: &Constraint) -> Result<Vec<String>, ExprError> {
    let bindings = bind_pattern(c, &a.pattern)?;
    a.templates.iter().map(|t| eval_name(t, c, &bindings)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_query;

    const NODE_XML: &str = include_str!("../data/node_annotations.xml");
    const TEXT_XML: &str = include_str!("../data/text_annotations.xml");

    fn list(i: i64, v: i64) -> Constraint {
        Constraint::new("list", vec![Term::Int(i), Term::Int(v)])
    }

    fn node_annotation() -> ConstraintAnnotation {
        parse_annotations(NODE_XML).unwrap().entries.remove(0)
    }

    #[test]
    fn parses_node_listing() {
        let set = parse_annotations(NODE_XML).unwrap();
        assert_eq!(set.entries.len(), 1);
        let ann = &set.entries[0];
        assert_eq!(ann.pattern, parse_constraint("list(Index,Value)").unwrap());
        assert_eq!(ann.templates.len(), 1);
        let t = &ann.templates[0];
        assert_eq!(t.object_kind, "node");
        assert_eq!(t.raw_type_attr, "arg1");
        use ArithOp::*;
        let expected = vec![
            ("name", ParamExpr::Concat(vec![ParamExpr::literal("node"), ParamExpr::arg(1)])),
            (
                "x",
                ParamExpr::bin(Add, ParamExpr::bin(Mul, ParamExpr::arg(0), ParamExpr::literal("12")), ParamExpr::literal("2")),
            ),
            ("y", ParamExpr::literal("50")),
            ("width", ParamExpr::literal("10")),
            ("height", ParamExpr::bin(Mul, ParamExpr::arg(1), ParamExpr::literal("5"))),
            ("n", ParamExpr::literal("1")),
            ("data", ParamExpr::named("Value")),
            ("color", ParamExpr::literal("black")),
            ("bkgrd", ParamExpr::literal("green")),
            ("textcolor", ParamExpr::literal("black")),
            ("type", ParamExpr::literal("RECT")),
        ];
        let actual: Vec<_> = t.params.iter().map(|(k, e)| (k.as_str(), e.clone())).collect();
        assert_eq!(actual, expected);
    }

    #[test]
    fn parses_text_listing() {
        let set = parse_annotations(TEXT_XML).unwrap();
        let t = &set.entries[0].templates[0];
        assert_eq!(t.object_kind, "text");
        assert_eq!(t.raw_type_attr, "Object");
        let keys: Vec<_> = t.params.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, ["name", "x", "y", "text", "color", "size"]);
        assert_eq!(t.param("text"), Some(&ParamExpr::arg(1)));
        assert_eq!(t.param("size"), Some(&ParamExpr::literal("30")));
    }

    #[test]
    fn empty_association() {
        assert!(parse_annotations("<association></association>").unwrap().is_empty());
    }

    #[test]
    fn x_coordinates_and_heights() {
        let ann = node_annotation();
        let t = &ann.templates[0];
        let eval = |key: &str, c: &Constraint| eval_expr(t.param(key).unwrap(), c, &ann.pattern).unwrap();
        assert_eq!(eval("x", &list(0, 7)), Value::Int(2));
        assert_eq!(eval("x", &list(1, 6)), Value::Int(14));
        assert_eq!(eval("x", &list(2, 4)), Value::Int(26));
        assert_eq!(eval("height", &list(0, 7)), Value::Int(35));
        assert_eq!(eval("name", &list(0, 7)), Value::Text("node7".into()));
    }

    #[test]
    fn instantiate_node() {
        let specs = instantiate(&node_annotation(), &list(0, 7)).unwrap();
        assert_eq!(specs.len(), 1);
        let s = &specs[0];
        assert_eq!(s.object_kind, "node");
        assert_eq!(s.name, "node7");
        let shown: Vec<_> = s.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        assert_eq!(
            shown,
            [
                "x=2", "y=50", "width=10", "height=35", "n=1", "data=7", "color=black", "bkgrd=green",
                "textcolor=black", "type=RECT"
            ]
        );
        assert_eq!(s.param("x"), Some(&Value::Int(2)));

        let s = &instantiate(&node_annotation(), &list(2, 4)).unwrap()[0];
        assert_eq!(s.name, "node4");
        assert_eq!(s.param("x"), Some(&Value::Int(26)));
        assert_eq!(s.param("height"), Some(&Value::Int(20)));
    }

    #[test]
    fn mismatched_constraint_is_rejected() {
        let err = instantiate(&node_annotation(), &parse_query("edge(1,2)").unwrap()[0]).unwrap_err();
        assert!(matches!(err, ExprError::PatternMismatch { .. }));
    }

    #[test]
    fn precedence_and_division() {
        let pattern = parse_constraint("p(A,B)").unwrap();
        let c = parse_query("p(7,-2)").unwrap().remove(0);
        let eval = |src: &str| eval_expr(&parse_param_expr(src, &pattern).unwrap(), &c, &pattern);
        assert_eq!(eval("valueOf(arg0)*12+2"), Ok(Value::Int(86)));
        assert_eq!(eval("2+valueOf(arg0)*12"), Ok(Value::Int(86)));
        assert_eq!(eval("valueOf(A)-1-1"), Ok(Value::Int(5)));
        assert_eq!(eval("valueOf(A)/valueOf(B)"), Ok(Value::Int(-3)));
        assert_eq!(eval("valueOf(A)/0"), Err(ExprError::DivisionByZero));
        assert_eq!(eval("id-valueOf(B)"), Ok(Value::Text("id--2".into())));
        assert_eq!(eval("-5"), Ok(Value::Int(-5)));
        assert_eq!(eval("007"), Ok(Value::Text("007".into())));
    }

    #[test]
    fn non_integer_operand_is_an_error() {
        let pattern = parse_constraint("p(A)").unwrap();
        let c = parse_query("p(abc)").unwrap().remove(0);
        let e = parse_param_expr("valueOf(A)+1", &pattern).unwrap();
        assert_eq!(eval_expr(&e, &c, &pattern), Err(ExprError::NonInteger("abc".into())));
        let e = parse_param_expr("n_valueOf(A)", &pattern).unwrap();
        assert_eq!(eval_expr(&e, &c, &pattern), Ok(Value::Text("n_abc".into())));
    }

    #[test]
    fn selector_errors() {
        let pattern = parse_constraint("list(Index,Value)").unwrap();
        assert!(matches!(
            parse_param_expr("valueOf(arg2)", &pattern),
            Err(AnnotationError::SelectorOutOfRange { index: 2, arity: 2, .. })
        ));
        assert!(matches!(
            parse_param_expr("valueOf(Other)", &pattern),
            Err(AnnotationError::UnknownSelector { .. })
        ));
        assert!(matches!(parse_param_expr("valueOf(arg0", &pattern), Err(AnnotationError::UnterminatedValueOf { .. })));
        assert!(matches!(parse_param_expr("valueOf(3)", &pattern), Err(AnnotationError::InvalidSelector { .. })));
    }

    #[test]
    fn misspelled_value_of_is_plain_text() {
        let pattern = parse_constraint("list(Index,Value)").unwrap();
        assert_eq!(
            parse_param_expr("valuef(Value)", &pattern).unwrap(),
            ParamExpr::literal("valuef(Value)")
        );
    }

    #[test]
    fn load_errors() {
        assert!(matches!(parse_annotations("<association>"), Err(AnnotationError::Xml(_))));
        assert!(matches!(parse_annotations("<assoc/>"), Err(AnnotationError::BadRoot(_))));
        assert!(matches!(
            parse_annotations(r#"<association><constraint name="list(("/></association>"#),
            Err(AnnotationError::Pattern { .. })
        ));
        assert!(matches!(
            parse_annotations(r#"<association><constraint name="a(X)"><add name="node" parameters="x"/></constraint></association>"#),
            Err(AnnotationError::MalformedParameter { .. })
        ));
        assert!(matches!(
            parse_annotations(r#"<association><constraint name="a(X)"><add name="node" parameters="x=1#x=2"/></constraint></association>"#),
            Err(AnnotationError::DuplicateParameter { .. })
        ));
    }

    #[test]
    fn duplicate_functor_keeps_first_and_warns() {
        let xml = r#"<association>
            <constraint name="a(X)"><add name="text" parameters="name=first"/></constraint>
            <constraint name="a(Y)"><add name="text" parameters="name=second"/></constraint>
        </association>"#;
        let set = parse_annotations(xml).unwrap();
        assert_eq!(set.entries.len(), 1);
        assert_eq!(set.warnings.len(), 1);
        let c = parse_query("a(1)").unwrap().remove(0);
        assert_eq!(object_names(set.lookup(&c).unwrap(), &c).unwrap(), ["first"]);
    }

    #[test]
    fn multiple_templates_and_missing_name() {
        let xml = r#"<association><constraint name="a(X)">
            <add name="node" parameters="name=n_valueOf(X)"/>
            <add name="text" parameters="name=t_valueOf(X)"/>
        </constraint></association>"#;
        let set = parse_annotations(xml).unwrap();
        let c = parse_query("a(3)").unwrap().remove(0);
        assert_eq!(object_names(&set.entries[0], &c).unwrap(), ["n_3", "t_3"]);

        let xml = r#"<association><constraint name="a(X)"><add name="node" parameters="x=1"/></constraint></association>"#;
        let set = parse_annotations(xml).unwrap();
        assert_eq!(instantiate(&set.entries[0], &c).unwrap_err(), ExprError::MissingName("node".into()));
    }
}
