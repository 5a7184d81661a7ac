use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Var(String),
    Atom(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    At,
    Backslash,
    Pipe,
    Simplify,
    Propagate,
    Lt,
    Gt,
    Le,
    Ge,
    ArithEq,
    ArithNe,
    TermEq,
    TermNe,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Var(v) => write!(f, "variable `{v}`"),
            Tok::Atom(a) => write!(f, "atom `{a}`"),
            Tok::Int(i) => write!(f, "integer `{i}`"),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", other.symbol()),
        }
    }
}

impl Tok {
    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Backslash => "\\",
            Tok::Pipe => "|",
            Tok::Simplify => "<=>",
            Tok::Propagate => "==>",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "=<",
            Tok::Ge => ">=",
            Tok::ArithEq => "=:=",
            Tok::ArithNe => "=\\=",
            Tok::TermEq => "==",
            Tok::TermNe => "\\==",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Var(_) | Tok::Atom(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub pos: Pos,
    pub message: String,
}

// Longest first so that maximal munch falls out of the scan order.
const SYMBOLS: &[(&str, Tok)] = &[
    ("=\\=", Tok::ArithNe),
    ("=:=", Tok::ArithEq),
    ("\\==", Tok::TermNe),
    ("<=>", Tok::Simplify),
    ("==>", Tok::Propagate),
    ("=<", Tok::Le),
    (">=", Tok::Ge),
    ("==", Tok::TermEq),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    (",", Tok::Comma),
    (".", Tok::Dot),
    ("@", Tok::At),
    ("\\", Tok::Backslash),
    ("|", Tok::Pipe),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
];

pub(crate) fn is_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;

    while i < bytes.len() {
        let pos = Pos { line, column: src[line_start..i].chars().count() + 1 };
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let Some(end) = src[i + 2..].find("*/") else {
                return Err(LexError { pos, message: "unterminated block comment".into() });
            };
            let stop = i + 2 + end + 2;
            for (off, b) in bytes[i..stop].iter().enumerate() {
                if *b == b'\n' {
                    line += 1;
                    line_start = i + off + 1;
                }
            }
            i = stop;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = src[start..i].to_string();
            let tok = if c.is_ascii_lowercase() { Tok::Atom(word) } else { Tok::Var(word) };
            out.push(Spanned { tok, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &src[start..i];
            let value = digits.parse::<i64>().map_err(|_| LexError {
                pos,
                message: format!("integer literal `{digits}` out of range"),
            })?;
            out.push(Spanned { tok: Tok::Int(value), pos });
            continue;
        }
        match SYMBOLS.iter().find(|(s, _)| src[i..].starts_with(s)) {
            Some((s, tok)) => {
                out.push(Spanned { tok: tok.clone(), pos });
                i += s.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(LexError { pos, message: format!("unexpected character `{ch}`") });
            }
        }
    }
    let pos = Pos { line, column: src[line_start..].chars().count() + 1 };
    out.push(Spanned { tok: Tok::Eof, pos });
    Ok(out)
}
