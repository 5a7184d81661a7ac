use std::fmt::{self, Write};

use super::parser::is_arith_functor;
use super::{BodyItem, Builtin, Constraint, Program, Rule, Term};

fn precedence(t: &Term) -> u32 {
    match t {
        Term::Compound(f, args) if args.len() == 2 && is_arith_functor(f) => match f.as_str() {
            "+" | "-" => 500,
            _ => 400,
        },
        _ => 0,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

/// Writes `lhs op rhs`, separating the operator from a leading minus sign on
/// the right operand so that `X - -5` does not lex differently.
fn write_infix(f: &mut fmt::Formatter<'_>, lhs: &str, op: &str, rhs: &str) -> fmt::Result {
    let sep = if rhs.starts_with('-') { " " } else { "" };
    write!(f, "{lhs}{op}{sep}{rhs}")
}

struct Operand<'a>(&'a Term, bool);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_operand(f, self.0, self.1)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Int(i) => write!(f, "{i}"),
            Term::Atom(a) => f.write_str(a),
            Term::Compound(op, args) if args.len() == 2 && is_arith_functor(op) => {
                let prec = precedence(self);
                let lhs = Operand(&args[0], precedence(&args[0]) > prec).to_string();
                let rhs = Operand(&args[1], precedence(&args[1]) >= prec && precedence(&args[1]) > 0)
                    .to_string();
                write_infix(f, &lhs, op, &rhs)
            }
            Term::Compound(functor, args) => {
                write!(f, "{functor}(")?;
                write_args(f, args)?;
                f.write_char(')')
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.functor)?;
        if !self.args.is_empty() {
            f.write_char('(')?;
            write_args(f, &self.args)?;
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::True => f.write_str("true"),
            Builtin::Compare { op, lhs, rhs } => {
                write_infix(f, &lhs.to_string(), op.symbol(), &rhs.to_string())
            }
        }
    }
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Constraint(c) => c.fmt(f),
            BodyItem::Builtin(b) => b.fmt(f),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ ", self.name)?;
        match (self.kept.is_empty(), self.removed.is_empty()) {
            (false, true) => write!(f, "{} ==> ", join(&self.kept))?,
            (true, _) => write!(f, "{} <=> ", join(&self.removed))?,
            (false, false) => write!(f, "{} \\ {} <=> ", join(&self.kept), join(&self.removed))?,
        }
        if !self.guard.is_empty() {
            write!(f, "{} | ", join(&self.guard))?;
        }
        if self.body.is_empty() {
            f.write_str("true.")
        } else {
            write!(f, "{}.", join(&self.body))
        }
    }
}

/// Canonical text for a program: one rule per line, names always printed.
pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for rule in &p.rules {
        let _ = writeln!(out, "{rule}");
    }
    out
}
