#![allow(dead_code)]

use std::path::PathBuf;

use chrvis::syntax::{Constraint, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SORT_QUERY: &str = "list(0,7), list(1,6), list(2,4)";

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

pub fn sort_source() -> String {
    std::fs::read_to_string(data("sort.chr")).unwrap()
}

/// Lines with trailing whitespace removed and trailing blank lines dropped.
pub fn normalize(text: &str) -> Vec<String> {
    let mut lines: Vec<String> = text.lines().map(|l| l.trim_end().to_string()).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

pub struct CorpusProgram {
    pub name: &'static str,
    pub source: &'static str,
    pub has_kept_heads: bool,
    /// Random ground query for this program; `None` for programs that are
    /// only used by the syntax round trips.
    pub query: Option<fn(&mut ChaCha8Rng) -> Vec<Constraint>>,
}

fn c(name: &str, args: &[i64]) -> Constraint {
    Constraint::new(name, args.iter().map(|&a| Term::Int(a)).collect())
}

pub fn list_query(rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let n = rng.gen_range(0..=8);
    distinct_values(rng, n).into_iter().enumerate().map(|(i, v)| c("list", &[i as i64, v])).collect()
}

pub fn distinct_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    let mut pool: Vec<i64> = (-50..=50).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

fn pair_query(rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let n = rng.gen_range(0..=6);
    (0..n)
        .map(|_| {
            let f = if rng.gen_bool(0.5) { "a" } else { "b" };
            c(f, &[rng.gen_range(-5..=5)])
        })
        .collect()
}

fn max_query(rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let n = rng.gen_range(0..=7);
    (0..n).map(|_| c("mx", &[rng.gen_range(-20..=20)])).collect()
}

fn sum_query(rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let n = rng.gen_range(0..=5);
    (0..n).map(|_| c("n", &[rng.gen_range(0..=6)])).collect()
}

fn colour_query(rng: &mut ChaCha8Rng) -> Vec<Constraint> {
    let names = ["red", "green", "blue"];
    let n = rng.gen_range(0..=6);
    (0..n)
        .map(|_| {
            let name = names.choose(rng).unwrap();
            Constraint::new("paint", vec![Term::Int(rng.gen_range(0..=3)), Term::atom(*name)])
        })
        .collect()
}

pub fn corpus() -> Vec<CorpusProgram> {
    vec![
        CorpusProgram {
            name: "sortlist",
            source: "sortlist @ list(Index1,V1), list(Index2,V2) <=> Index1<Index2 , V1>V2 | list(Index2,V1), list(Index1,V2).",
            has_kept_heads: false,
            query: Some(list_query),
        },
        CorpusProgram {
            name: "pairs",
            source: "pair @ a(X), b(Y) ==> X < Y | c(X,Y).\n\
                     adjacent @ c(X,Y) <=> X + 1 =:= Y | adj(X).",
            has_kept_heads: false,
            query: Some(pair_query),
        },
        CorpusProgram {
            name: "keep_max",
            source: "keep_max @ mx(X) \\ mx(Y) <=> X >= Y | true.",
            has_kept_heads: true,
            query: Some(max_query),
        },
        CorpusProgram {
            name: "sums",
            source: "sum3 @ n(X), n(Y), n(Z) ==> X + Y =:= Z | sum(X,Y,Z).",
            has_kept_heads: false,
            query: Some(sum_query),
        },
        CorpusProgram {
            name: "paint",
            source: "% last colour wins, one per cell\n\
                     repaint @ paint(C,_), paint(C,New) <=> cell(C,New).\n\
                     cell(C,X) \\ cell(C,Y) <=> X \\== Y | clash(C,X,Y).",
            has_kept_heads: true,
            query: Some(colour_query),
        },
        CorpusProgram {
            name: "observer",
            source: "observe_list_2 @ list(V0,V1) ==> communicate(list(V0,V1)).",
            has_kept_heads: false,
            query: None,
        },
        CorpusProgram {
            name: "syntax_variety",
            source: "/* block comment */\n\
                     r1 @ p(X, f(Y, nil)), q(hello, -3) ==> X =< (Y - 1) * 2 | r(g(X), -4), true.\n\
                     p(0, _) <=> true.\n\
                     r3 @ s(A) \\ t(B) <=> A =\\= B, A / 2 >= B - -1 | u(A - B), v.\n\
                     r4 @ w(X, Y) <=> X == Y | eq.",
            has_kept_heads: true,
            query: None,
        },
    ]
}
