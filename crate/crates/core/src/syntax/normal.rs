use std::collections::BTreeSet;
use std::sync::Arc;

use indexmap::IndexSet;
use thiserror::Error;

use super::{name, Formula, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("substituted term `{0}` is not closed")]
    OpenTerm(String),
}

const CANON: [&str; 6] = ["x", "y", "z", "w", "v", "u"];

fn canon_candidate(k: usize) -> String {
    match CANON.get(k) {
        Some(s) => s.to_string(),
        None => format!("x{k}"),
    }
}

fn canon_name(index: usize, skip: &BTreeSet<Name>) -> Name {
    let mut seen = 0;
    let mut k = 0;
    loop {
        let c = canon_candidate(k);
        if !skip.iter().any(|s| &**s == c.as_str()) {
            if seen == index {
                return name(&c);
            }
            seen += 1;
        }
        k += 1;
    }
}

fn height_t(t: &Term) -> usize {
    match t {
        Term::Descr(_, b) => height_f(b) + 1,
        _ => 0,
    }
}

fn height_f(f: &Formula) -> usize {
    match f {
        Formula::Atom(_, ts) => ts.iter().map(height_t).max().unwrap_or(0),
        Formula::Eq(a, b) => height_t(a).max(height_t(b)),
        Formula::Ex(t) => height_t(t),
        Formula::Not(g) => height_f(g),
        Formula::And(a, b) => height_f(a).max(height_f(b)),
        Formula::Forall(_, b) => height_f(b) + 1,
    }
}

struct Normalizer {
    skip: BTreeSet<Name>,
    env: Vec<(Name, Name)>,
}

impl Normalizer {
    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Param(_) => t.clone(),
            Term::Var(x) => match self.env.iter().rev().find(|(y, _)| y == x) {
                Some((_, n)) => Term::Var(n.clone()),
                None => t.clone(),
            },
            Term::Descr(x, b) => {
                let n = canon_name(height_f(b), &self.skip);
                self.env.push((x.clone(), n.clone()));
                let body = self.formula(b);
                self.env.pop();
                Term::Descr(n, Arc::new(body))
            }
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(|t| self.term(t)).collect()),
            Formula::Eq(a, b) => Formula::Eq(self.term(a), self.term(b)),
            Formula::Ex(t) => Formula::Ex(self.term(t)),
            Formula::Not(g) => Formula::Not(Arc::new(self.formula(g))),
            Formula::And(a, b) => Formula::And(Arc::new(self.formula(a)), Arc::new(self.formula(b))),
            Formula::Forall(x, b) => {
                let n = canon_name(height_f(b), &self.skip);
                self.env.push((x.clone(), n.clone()));
                let body = self.formula(b);
                self.env.pop();
                Formula::Forall(n, Arc::new(body))
            }
        }
    }
}

/// Rename every binder to the canonical name for its height. Free variables keep
/// their names and are never captured.
pub fn alpha_normalize(f: &Formula) -> Formula {
    Normalizer { skip: free_vars(f), env: Vec::new() }.formula(f)
}

pub fn alpha_normalize_term(t: &Term) -> Term {
    let mut skip = BTreeSet::new();
    free_vars_t(t, &mut Vec::new(), &mut skip);
    Normalizer { skip, env: Vec::new() }.term(t)
}

pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    alpha_normalize(a) == alpha_normalize(b)
}

fn free_vars_t(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Param(_) => {}
        Term::Descr(x, b) => {
            bound.push(x.clone());
            free_vars_f(b, bound, out);
            bound.pop();
        }
    }
}

fn free_vars_f(f: &Formula, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match f {
        Formula::Atom(_, ts) => ts.iter().for_each(|t| free_vars_t(t, bound, out)),
        Formula::Eq(a, b) => {
            free_vars_t(a, bound, out);
            free_vars_t(b, bound, out);
        }
        Formula::Ex(t) => free_vars_t(t, bound, out),
        Formula::Not(g) => free_vars_f(g, bound, out),
        Formula::And(a, b) => {
            free_vars_f(a, bound, out);
            free_vars_f(b, bound, out);
        }
        Formula::Forall(x, b) => {
            bound.push(x.clone());
            free_vars_f(b, bound, out);
            bound.pop();
        }
    }
}

pub fn free_vars(f: &Formula) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    free_vars_f(f, &mut Vec::new(), &mut out);
    out
}

pub fn is_closed_term(t: &Term) -> bool {
    let mut out = BTreeSet::new();
    free_vars_t(t, &mut Vec::new(), &mut out);
    out.is_empty()
}

fn subst_t(t: &Term, x: &Name, s: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => s.clone(),
        Term::Var(_) | Term::Param(_) => t.clone(),
        Term::Descr(y, _) if y == x => t.clone(),
        Term::Descr(y, b) => Term::Descr(y.clone(), Arc::new(subst_f(b, x, s))),
    }
}

fn subst_f(f: &Formula, x: &Name, s: &Term) -> Formula {
    match f {
        Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(|t| subst_t(t, x, s)).collect()),
        Formula::Eq(a, b) => Formula::Eq(subst_t(a, x, s), subst_t(b, x, s)),
        Formula::Ex(t) => Formula::Ex(subst_t(t, x, s)),
        Formula::Not(g) => Formula::Not(Arc::new(subst_f(g, x, s))),
        Formula::And(a, b) => Formula::And(Arc::new(subst_f(a, x, s)), Arc::new(subst_f(b, x, s))),
        Formula::Forall(y, _) if y == x => f.clone(),
        Formula::Forall(y, b) => Formula::Forall(y.clone(), Arc::new(subst_f(b, x, s))),
    }
}

/// Replace the free occurrences of `x` in `f` by the closed term `t`.
pub fn substitute(f: &Formula, x: &Name, t: &Term) -> Result<Formula, SubstError> {
    if !is_closed_term(t) {
        return Err(SubstError::OpenTerm(t.to_string()));
    }
    Ok(subst_f(f, x, t))
}

fn params_t(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Param(a) => {
            out.insert(a.clone());
        }
        Term::Var(_) => {}
        Term::Descr(_, b) => params_f(b, out),
    }
}

fn params_f(f: &Formula, out: &mut BTreeSet<Name>) {
    match f {
        Formula::Atom(_, ts) => ts.iter().for_each(|t| params_t(t, out)),
        Formula::Eq(a, b) => {
            params_t(a, out);
            params_t(b, out);
        }
        Formula::Ex(t) => params_t(t, out),
        Formula::Not(g) | Formula::Forall(_, g) => params_f(g, out),
        Formula::And(a, b) => {
            params_f(a, out);
            params_f(b, out);
        }
    }
}

pub fn params_of_formula(f: &Formula) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    params_f(f, &mut out);
    out
}

pub fn params_of<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for f in fs {
        params_f(f, &mut out);
    }
    out
}

/// Visit closed subterms in prefix order.
fn walk_closed_t(t: &Term, bound: &mut Vec<Name>, visit: &mut dyn FnMut(&Term)) {
    let closed = match t {
        Term::Var(_) => false,
        Term::Param(_) => true,
        Term::Descr(..) => is_closed_term(t),
    };
    if closed {
        visit(t);
    }
    if let Term::Descr(x, b) = t {
        bound.push(x.clone());
        walk_closed_f(b, bound, visit);
        bound.pop();
    }
}

fn walk_closed_f(f: &Formula, bound: &mut Vec<Name>, visit: &mut dyn FnMut(&Term)) {
    match f {
        Formula::Atom(_, ts) => {
            for t in ts {
                walk_closed_t(t, bound, visit);
            }
        }
        Formula::Eq(a, b) => {
            walk_closed_t(a, bound, visit);
            walk_closed_t(b, bound, visit);
        }
        Formula::Ex(t) => {
            walk_closed_t(t, bound, visit);
        }
        Formula::Not(g) => walk_closed_f(g, bound, visit),
        Formula::And(a, b) => {
            walk_closed_f(a, bound, visit);
            walk_closed_f(b, bound, visit);
        }
        Formula::Forall(x, b) => {
            bound.push(x.clone());
            walk_closed_f(b, bound, visit);
            bound.pop();
        }
    }
}

/// All closed terms (parameters and closed descriptions) occurring in `f`,
/// nested ones included, in first-occurrence order.
pub fn closed_subterms(f: &Formula) -> Vec<Term> {
    let mut out: IndexSet<Term> = IndexSet::new();
    walk_closed_f(f, &mut Vec::new(), &mut |t| {
        out.insert(t.clone());
    });
    out.into_iter().collect()
}

/// Closed description subterms of a set of formulas, normalized and deduplicated.
pub fn dd_subterms<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Vec<Term> {
    let mut out: IndexSet<Term> = IndexSet::new();
    for f in fs {
        walk_closed_f(f, &mut Vec::new(), &mut |t| {
            if t.is_descr() {
                out.insert(alpha_normalize_term(t));
            }
        });
    }
    out.into_iter().collect()
}

fn occ_t(t: &Term, target: &Term, count: &mut usize, hit: &mut dyn FnMut(usize) -> Option<Term>) -> Option<Term> {
    if t == target {
        let k = *count;
        *count += 1;
        return hit(k);
    }
    match t {
        Term::Descr(x, b) => occ_f(b, target, count, hit).map(|b| Term::Descr(x.clone(), Arc::new(b))),
        _ => None,
    }
}

fn occ_f(f: &Formula, target: &Term, count: &mut usize, hit: &mut dyn FnMut(usize) -> Option<Term>) -> Option<Formula> {
    match f {
        Formula::Atom(p, ts) => {
            for (i, t) in ts.iter().enumerate() {
                if let Some(r) = occ_t(t, target, count, hit) {
                    let mut ts = ts.clone();
                    ts[i] = r;
                    return Some(Formula::Atom(p.clone(), ts));
                }
            }
            None
        }
        Formula::Eq(a, b) => {
            if let Some(r) = occ_t(a, target, count, hit) {
                return Some(Formula::Eq(r, b.clone()));
            }
            occ_t(b, target, count, hit).map(|r| Formula::Eq(a.clone(), r))
        }
        Formula::Ex(t) => occ_t(t, target, count, hit).map(Formula::Ex),
        Formula::Not(g) => occ_f(g, target, count, hit).map(|g| Formula::Not(Arc::new(g))),
        Formula::And(a, b) => {
            if let Some(r) = occ_f(a, target, count, hit) {
                return Some(Formula::And(Arc::new(r), b.clone()));
            }
            occ_f(b, target, count, hit).map(|r| Formula::And(a.clone(), Arc::new(r)))
        }
        Formula::Forall(x, b) => occ_f(b, target, count, hit).map(|b| Formula::Forall(x.clone(), Arc::new(b))),
    }
}

/// Number of occurrences of the closed term `t` in `f`.
pub fn term_occurrences(f: &Formula, t: &Term) -> usize {
    let mut count = 0;
    occ_f(f, t, &mut count, &mut |_| None);
    count
}

/// Replace the `k`-th occurrence (0-based, prefix order) of the closed term `t` by `s`.
pub fn replace_occurrence(f: &Formula, t: &Term, k: usize, s: &Term) -> Option<Formula> {
    let mut count = 0;
    occ_f(f, t, &mut count, &mut |i| if i == k { Some(s.clone()) } else { None })
}

fn rename_t(t: &Term, from: &Name, to: &Name) -> Term {
    match t {
        Term::Param(a) if a == from => Term::Param(to.clone()),
        Term::Var(_) | Term::Param(_) => t.clone(),
        Term::Descr(x, b) => Term::Descr(x.clone(), Arc::new(rename_param(b, from, to))),
    }
}

/// Replace every occurrence of parameter `from` by `to`.
pub fn rename_param(f: &Formula, from: &Name, to: &Name) -> Formula {
    match f {
        Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(|t| rename_t(t, from, to)).collect()),
        Formula::Eq(a, b) => Formula::Eq(rename_t(a, from, to), rename_t(b, from, to)),
        Formula::Ex(t) => Formula::Ex(rename_t(t, from, to)),
        Formula::Not(g) => Formula::Not(Arc::new(rename_param(g, from, to))),
        Formula::And(a, b) => Formula::And(Arc::new(rename_param(a, from, to)), Arc::new(rename_param(b, from, to))),
        Formula::Forall(x, b) => Formula::Forall(x.clone(), Arc::new(rename_param(b, from, to))),
    }
}
