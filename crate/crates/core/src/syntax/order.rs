//! A total, well-founded order on closed terms, monotone under replacing a
//! subterm by a smaller one. Used to orient identities.

use std::cmp::Ordering;

use super::{Formula, Name, Term};

#[derive(PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Tok<'a> {
    Param(bool, &'a str),
    Bound(usize),
    Free(&'a str),
    Descr,
    Pred(&'a str, usize),
    Eq,
    Ex,
    Not,
    And,
    All,
}

fn toks_t<'a>(t: &'a Term, env: &mut Vec<&'a Name>, out: &mut Vec<Tok<'a>>) {
    match t {
        Term::Param(a) => out.push(Tok::Param(a.starts_with('_'), a)),
        Term::Var(x) => match env.iter().rev().position(|y| *y == x) {
            Some(i) => out.push(Tok::Bound(i)),
            None => out.push(Tok::Free(x)),
        },
        Term::Descr(x, b) => {
            out.push(Tok::Descr);
            env.push(x);
            toks_f(b, env, out);
            env.pop();
        }
    }
}

fn toks_f<'a>(f: &'a Formula, env: &mut Vec<&'a Name>, out: &mut Vec<Tok<'a>>) {
    match f {
        Formula::Atom(p, ts) => {
            out.push(Tok::Pred(p, ts.len()));
            ts.iter().for_each(|t| toks_t(t, env, out));
        }
        Formula::Eq(a, b) => {
            out.push(Tok::Eq);
            toks_t(a, env, out);
            toks_t(b, env, out);
        }
        Formula::Ex(t) => {
            out.push(Tok::Ex);
            toks_t(t, env, out);
        }
        Formula::Not(g) => {
            out.push(Tok::Not);
            toks_f(g, env, out);
        }
        Formula::And(a, b) => {
            out.push(Tok::And);
            toks_f(a, env, out);
            toks_f(b, env, out);
        }
        Formula::Forall(x, b) => {
            out.push(Tok::All);
            env.push(x);
            toks_f(b, env, out);
            env.pop();
        }
    }
}

fn tokens(t: &Term) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    toks_t(t, &mut Vec::new(), &mut out);
    out
}

pub fn term_size(t: &Term) -> usize {
    tokens(t).len()
}

/// Compare by token count, then token sequence. Parameters precede descriptions,
/// and user parameters precede reserved ones.
pub fn term_cmp(a: &Term, b: &Term) -> Ordering {
    let (ta, tb) = (tokens(a), tokens(b));
    ta.len().cmp(&tb.len()).then_with(|| ta.cmp(&tb))
}
