//! Terms and formulas of the languages L and L⁻.

mod normal;
mod order;
mod parse;
mod print;

use std::fmt;
use std::sync::Arc;

pub use normal::{
    alpha_eq, alpha_normalize, alpha_normalize_term, closed_subterms, dd_subterms, free_vars, is_closed_term,
    params_of, params_of_formula, rename_param, replace_occurrence, substitute, term_occurrences, SubstError,
};
pub use order::{term_cmp, term_size};
pub use parse::{desugar, parse, parse_surface, parse_with, Language, ParseError, ParseOptions};
pub use print::{print, print_term};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Name),
    Param(Name),
    Descr(Name, Arc<Formula>),
}

/// Core formulas. `Ex` is the existence predicate `E!`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    Atom(Name, Vec<Term>),
    Eq(Term, Term),
    Ex(Term),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Forall(Name, Arc<Formula>),
}

/// Parsed formulas before derived connectives are expanded.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Surface {
    Atom(Name, Vec<SurfaceTerm>),
    Eq(SurfaceTerm, SurfaceTerm),
    Neq(SurfaceTerm, SurfaceTerm),
    Ex(SurfaceTerm),
    Not(Box<Surface>),
    And(Box<Surface>, Box<Surface>),
    Or(Box<Surface>, Box<Surface>),
    Implies(Box<Surface>, Box<Surface>),
    Iff(Box<Surface>, Box<Surface>),
    Forall(Name, Box<Surface>),
    Exists(Name, Box<Surface>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SurfaceTerm {
    Var(Name),
    Param(Name),
    Descr(Name, Box<Surface>),
}

impl Term {
    pub fn param(n: &str) -> Term {
        Term::Param(name(n))
    }

    pub fn var(n: &str) -> Term {
        Term::Var(name(n))
    }

    pub fn descr(x: &str, body: Formula) -> Term {
        Term::Descr(name(x), Arc::new(body))
    }

    pub fn is_descr(&self) -> bool {
        matches!(self, Term::Descr(..))
    }

    pub fn as_param(&self) -> Option<&Name> {
        match self {
            Term::Param(a) => Some(a),
            _ => None,
        }
    }
}

impl Formula {
    pub fn atom(p: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(name(p), args)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn forall(x: &str, body: Formula) -> Formula {
        Formula::Forall(name(x), Arc::new(body))
    }

    pub fn exists(x: &str, body: Formula) -> Formula {
        Formula::not(Formula::forall(x, Formula::not(body)))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// The formula with one negation added or removed.
    pub fn complement(&self) -> Formula {
        match self {
            Formula::Not(g) => (**g).clone(),
            f => Formula::not(f.clone()),
        }
    }

    pub fn contains_ex(&self) -> bool {
        fn term(t: &Term) -> bool {
            matches!(t, Term::Descr(_, b) if b.contains_ex())
        }
        match self {
            Formula::Atom(_, ts) => ts.iter().any(term),
            Formula::Eq(a, b) => term(a) || term(b),
            Formula::Ex(_) => true,
            Formula::Not(g) | Formula::Forall(_, g) => g.contains_ex(),
            Formula::And(a, b) => a.contains_ex() || b.contains_ex(),
        }
    }

    /// Predicate symbols with their arities, in first-occurrence order.
    pub fn predicates(&self) -> Vec<(Name, usize)> {
        fn walk(f: &Formula, out: &mut Vec<(Name, usize)>) {
            match f {
                Formula::Atom(p, ts) => {
                    if !out.iter().any(|(q, n)| q == p && *n == ts.len()) {
                        out.push((p.clone(), ts.len()));
                    }
                    ts.iter().for_each(|t| walk_t(t, out));
                }
                Formula::Eq(a, b) => {
                    walk_t(a, out);
                    walk_t(b, out);
                }
                Formula::Ex(t) => walk_t(t, out),
                Formula::Not(g) | Formula::Forall(_, g) => walk(g, out),
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        fn walk_t(t: &Term, out: &mut Vec<(Name, usize)>) {
            if let Term::Descr(_, b) = t {
                walk(b, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}
