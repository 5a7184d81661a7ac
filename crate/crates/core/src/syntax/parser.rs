use std::collections::HashSet;

use super::lexer::{tokenize, LexError, Pos, Spanned, Tok};
use super::{BodyItem, Builtin, CompareOp, Constraint, Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Lex { line: usize, column: usize, message: String },
    #[error("{line}:{column}: expected {expected}, found {found}")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("{line}:{column}: built-in `{builtin}` is not allowed in a rule head")]
    BuiltinInHead { line: usize, column: usize, builtin: String },
    #[error("{line}:{column}: guard may only contain built-in constraints, found `{found}`")]
    NonBuiltinInGuard { line: usize, column: usize, found: String },
    #[error("duplicate rule name `{0}`")]
    DuplicateRuleName(String),
    #[error("query constraint `{0}` is not ground")]
    NonGroundQuery(String),
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError::Lex { line: e.pos.line, column: e.pos.column, message: e.message }
    }
}

/// A parsed goal before it is classified by position (head, guard, body).
enum Goal {
    Constraint(Constraint),
    Builtin(Builtin),
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src)?, at: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let pos = self.pos();
        ParseError::Syntax {
            line: pos.line,
            column: pos.column,
            expected: expected.into(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut named: Vec<(Option<String>, Rule)> = Vec::new();
        while *self.peek() != Tok::Eof {
            named.push(self.rule()?);
        }

        let mut taken = HashSet::new();
        for name in named.iter().filter_map(|(n, _)| n.as_ref()) {
            if !taken.insert(name.clone()) {
                return Err(ParseError::DuplicateRuleName(name.clone()));
            }
        }
        let mut rules = Vec::with_capacity(named.len());
        for (index, (name, mut rule)) in named.into_iter().enumerate() {
            rule.name = match name {
                Some(name) => name,
                None => {
                    let base = format!("rule_{}", index + 1);
                    let mut candidate = base.clone();
                    let mut suffix = 1;
                    while taken.contains(&candidate) {
                        candidate = format!("{base}_{suffix}");
                        suffix += 1;
                    }
                    taken.insert(candidate.clone());
                    candidate
                }
            };
            rules.push(rule);
        }
        Ok(Program { rules })
    }

    fn rule(&mut self) -> Result<(Option<String>, Rule), ParseError> {
        let name = match (self.peek().clone(), self.peek2()) {
            (Tok::Atom(name), Tok::At) => {
                self.bump();
                self.bump();
                Some(name)
            }
            _ => None,
        };

        let first = self.heads()?;
        let (kept, removed) = match self.peek() {
            Tok::Backslash => {
                self.bump();
                let removed = self.heads()?;
                self.expect(Tok::Simplify, "`<=>`")?;
                (first, removed)
            }
            Tok::Simplify => {
                self.bump();
                (Vec::new(), first)
            }
            Tok::Propagate => {
                self.bump();
                (first, Vec::new())
            }
            _ => return Err(self.error("`,`, `\\`, `<=>` or `==>`")),
        };

        let mut goals = self.goals()?;
        let mut guard = Vec::new();
        if self.eat(&Tok::Pipe) {
            for (pos, goal) in goals {
                match goal {
                    Goal::Builtin(b) => guard.push(b),
                    Goal::Constraint(c) => {
                        return Err(ParseError::NonBuiltinInGuard {
                            line: pos.line,
                            column: pos.column,
                            found: c.to_string(),
                        })
                    }
                }
            }
            goals = self.goals()?;
        }
        self.expect(Tok::Dot, "`.` or `,`")?;

        let body = goals
            .into_iter()
            .map(|(_, g)| match g {
                Goal::Constraint(c) => BodyItem::Constraint(c),
                Goal::Builtin(b) => BodyItem::Builtin(b),
            })
            .collect();
        let rule = Rule { name: String::new(), kept, removed, guard, body };
        Ok((name, rule))
    }

    fn heads(&mut self) -> Result<Vec<Constraint>, ParseError> {
        let mut heads = Vec::new();
        loop {
            let pos = self.pos();
            match self.goal()? {
                Goal::Constraint(c) => heads.push(c),
                Goal::Builtin(b) => {
                    return Err(ParseError::BuiltinInHead {
                        line: pos.line,
                        column: pos.column,
                        builtin: b.to_string(),
                    })
                }
            }
            if !self.eat(&Tok::Comma) {
                return Ok(heads);
            }
        }
    }

    fn goals(&mut self) -> Result<Vec<(Pos, Goal)>, ParseError> {
        let mut goals = Vec::new();
        loop {
            let pos = self.pos();
            goals.push((pos, self.goal()?));
            if !self.eat(&Tok::Comma) {
                return Ok(goals);
            }
        }
    }

    fn goal(&mut self) -> Result<Goal, ParseError> {
        let pos = self.pos();
        let lhs = self.expr()?;
        if let Some(op) = compare_op(self.peek()) {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Goal::Builtin(Builtin::compare(op, lhs, rhs)));
        }
        match lhs {
            Term::Atom(a) if a == "true" => Ok(Goal::Builtin(Builtin::True)),
            Term::Compound(ref f, _) if is_arith_functor(f) => Err(ParseError::Syntax {
                line: pos.line,
                column: pos.column,
                expected: "a constraint or comparison".into(),
                found: format!("arithmetic expression `{lhs}`"),
            }),
            ref t => match Constraint::from_term(t) {
                Some(c) => Ok(Goal::Constraint(c)),
                None => Err(ParseError::Syntax {
                    line: pos.line,
                    column: pos.column,
                    expected: "a constraint or comparison".into(),
                    found: format!("`{t}`"),
                }),
            },
        }
    }

    fn expr(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => "+",
                Tok::Minus => "-",
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Compound(op.into(), vec![lhs, rhs]);
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => "*",
                Tok::Slash => "/",
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.primary()?;
            lhs = Term::Compound(op.into(), vec![lhs, rhs]);
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Tok::Minus if matches!(self.peek2(), Tok::Int(_)) => {
                self.bump();
                match self.bump() {
                    Tok::Int(i) => Ok(Term::Int(-i)),
                    _ => unreachable!(),
                }
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Atom(a) => {
                self.bump();
                if !self.eat(&Tok::LParen) {
                    return Ok(Term::Atom(a));
                }
                let mut args = vec![self.expr()?];
                while self.eat(&Tok::Comma) {
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`,` or `)`")?;
                Ok(Term::Compound(a, args))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error("a term")),
        }
    }
}

fn compare_op(tok: &Tok) -> Option<CompareOp> {
    Some(match tok {
        Tok::Lt => CompareOp::Lt,
        Tok::Gt => CompareOp::Gt,
        Tok::Le => CompareOp::Le,
        Tok::Ge => CompareOp::Ge,
        Tok::ArithEq => CompareOp::ArithEq,
        Tok::ArithNe => CompareOp::ArithNe,
        Tok::TermEq => CompareOp::TermEq,
        Tok::TermNe => CompareOp::TermNe,
        _ => return None,
    })
}

pub(crate) fn is_arith_functor(f: &str) -> bool {
    matches!(f, "+" | "-" | "*" | "/")
}

/// Parses a sequence of `.`-terminated rules.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    Parser::new(source)?.program()
}

/// Parses a comma-separated list of ground constraints with an optional
/// trailing `.`.
pub fn parse_query(source: &str) -> Result<Vec<Constraint>, ParseError> {
    let mut p = Parser::new(source)?;
    if p.eat(&Tok::Eof) || (p.eat(&Tok::Dot) && *p.peek() == Tok::Eof) {
        return Ok(Vec::new());
    }
    let mut query = Vec::new();
    loop {
        let pos = p.pos();
        match p.goal()? {
            Goal::Constraint(c) if c.is_ground() => query.push(c),
            Goal::Constraint(c) => return Err(ParseError::NonGroundQuery(c.to_string())),
            Goal::Builtin(b) => {
                return Err(ParseError::Syntax {
                    line: pos.line,
                    column: pos.column,
                    expected: "a constraint".into(),
                    found: format!("built-in `{b}`"),
                })
            }
        }
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    p.eat(&Tok::Dot);
    p.expect(Tok::Eof, "`,` or end of query")?;
    Ok(query)
}

/// Parses a single term, e.g. an argument read back from an event log.
pub fn parse_term(source: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(source)?;
    let term = p.expr()?;
    p.expect(Tok::Eof, "end of term")?;
    Ok(term)
}

/// Parses one body goal: a constraint or a built-in.
pub fn parse_body_item(source: &str) -> Result<BodyItem, ParseError> {
    let mut p = Parser::new(source)?;
    let goal = p.goal()?;
    p.expect(Tok::Eof, "end of goal")?;
    Ok(match goal {
        Goal::Constraint(c) => BodyItem::Constraint(c),
        Goal::Builtin(b) => BodyItem::Builtin(b),
    })
}

/// Parses a single constraint such as `list(Index,Value)`.
pub fn parse_constraint(source: &str) -> Result<Constraint, ParseError> {
    let mut p = Parser::new(source)?;
    let pos = p.pos();
    let goal = p.goal()?;
    p.expect(Tok::Eof, "end of constraint")?;
    match goal {
        Goal::Constraint(c) => Ok(c),
        Goal::Builtin(b) => Err(ParseError::Syntax {
            line: pos.line,
            column: pos.column,
            expected: "a constraint".into(),
            found: format!("built-in `{b}`"),
        }),
    }
}
