//! Finite dual-domain models and the satisfaction relation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Logic;
use crate::syntax::{
    alpha_normalize_term, dd_subterms, free_vars, is_closed_term, name, params_of_formula, parse_with, print_term,
    Formula, Language, Name, ParseOptions, Term,
};

pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("no value for `{0}`")]
    Unbound(String),
    #[error("no outer denotation for improper description `{0}`")]
    MissingOuter(String),
    #[error("malformed model: {0}")]
    Malformed(String),
}

/// Key of an outer denotation: the description with every subterm that mentions
/// no variable bound inside it replaced by a placeholder `_fN`, plus the values
/// of those subterms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OuterKey {
    pub shape: Term,
    pub env: Vec<Elem>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub domain: BTreeSet<Elem>,
    pub existing: BTreeSet<Elem>,
    pub interp: BTreeMap<Name, BTreeSet<Vec<Elem>>>,
    pub outer: BTreeMap<OuterKey, Elem>,
    pub outer_default: Option<Elem>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub params: BTreeMap<Name, Elem>,
    pub vars: BTreeMap<Name, Elem>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_param(mut self, a: &str, e: Elem) -> Self {
        self.params.insert(name(a), e);
        self
    }

    pub fn with_var(mut self, x: &str, e: Elem) -> Self {
        self.vars.insert(name(x), e);
        self
    }
}

fn placeholder(i: usize) -> Name {
    name(&format!("_f{i}"))
}

struct Abstractor {
    inner: Vec<Name>,
    taken: Vec<Term>,
}

impl Abstractor {
    fn mentions_inner(&self, t: &Term) -> bool {
        match t {
            Term::Var(x) => self.inner.contains(x),
            Term::Param(_) => false,
            Term::Descr(x, b) => {
                free_vars(&Formula::Forall(x.clone(), b.clone())).iter().any(|v| self.inner.contains(v))
            }
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        if !self.mentions_inner(t) {
            self.taken.push(t.clone());
            return Term::Param(placeholder(self.taken.len() - 1));
        }
        match t {
            Term::Descr(x, b) => {
                self.inner.push(x.clone());
                let b = self.formula(b);
                self.inner.pop();
                Term::Descr(x.clone(), Arc::new(b))
            }
            _ => t.clone(),
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(|t| self.term(t)).collect()),
            Formula::Eq(a, b) => {
                let a = self.term(a);
                Formula::Eq(a, self.term(b))
            }
            Formula::Ex(t) => Formula::Ex(self.term(t)),
            Formula::Not(g) => Formula::Not(Arc::new(self.formula(g))),
            Formula::And(a, b) => {
                let a = self.formula(a);
                Formula::And(Arc::new(a), Arc::new(self.formula(b)))
            }
            Formula::Forall(x, b) => {
                self.inner.push(x.clone());
                let b = self.formula(b);
                self.inner.pop();
                Formula::Forall(x.clone(), Arc::new(b))
            }
        }
    }
}

/// Split a description into its normalized shape and the abstracted subterms.
pub fn outer_shape(t: &Term) -> (Term, Vec<Term>) {
    match t {
        Term::Descr(x, b) => {
            let mut a = Abstractor { inner: vec![x.clone()], taken: Vec::new() };
            let body = a.formula(b);
            (alpha_normalize_term(&Term::Descr(x.clone(), Arc::new(body))), a.taken)
        }
        _ => (t.clone(), Vec::new()),
    }
}

struct Eval<'m> {
    m: &'m Model,
    logic: Logic,
}

impl Eval<'_> {
    fn term(&self, v: &mut Assignment, t: &Term) -> Result<Elem, SemanticsError> {
        match t {
            Term::Var(x) => v.vars.get(x).copied().ok_or_else(|| SemanticsError::Unbound(x.to_string())),
            Term::Param(a) => v.params.get(a).copied().ok_or_else(|| SemanticsError::Unbound(a.to_string())),
            Term::Descr(x, body) => {
                if let Some(o) = self.witness(v, x, body)? {
                    return Ok(o);
                }
                let key = self.key(v, t)?;
                self.m
                    .outer
                    .get(&key)
                    .copied()
                    .or(self.m.outer_default)
                    .ok_or_else(|| SemanticsError::MissingOuter(print_term(&key.shape)))
            }
        }
    }

    /// The unique existing object satisfying the body, if there is exactly one.
    fn witness(&self, v: &mut Assignment, x: &Name, body: &Formula) -> Result<Option<Elem>, SemanticsError> {
        let saved = v.vars.get(x).copied();
        let mut found = None;
        let mut unique = true;
        for &o in &self.m.existing {
            v.vars.insert(x.clone(), o);
            match self.formula(v, body) {
                Ok(true) => {
                    if found.is_some() {
                        unique = false;
                        break;
                    }
                    found = Some(o);
                }
                Ok(false) => {}
                Err(e) => {
                    restore(v, x, saved);
                    return Err(e);
                }
            }
        }
        restore(v, x, saved);
        Ok(if unique { found } else { None })
    }

    fn key(&self, v: &mut Assignment, t: &Term) -> Result<OuterKey, SemanticsError> {
        let (shape, taken) = outer_shape(t);
        let env = taken.iter().map(|s| self.term(v, s)).collect::<Result<Vec<_>, _>>()?;
        Ok(OuterKey { shape, env })
    }

    fn strict(&self, vals: &[Elem]) -> bool {
        !self.logic.is_negative() || vals.iter().all(|e| self.m.existing.contains(e))
    }

    fn formula(&self, v: &mut Assignment, f: &Formula) -> Result<bool, SemanticsError> {
        Ok(match f {
            Formula::Atom(p, ts) => {
                let vals = ts.iter().map(|t| self.term(v, t)).collect::<Result<Vec<_>, _>>()?;
                self.m.interp.get(p).is_some_and(|r| r.contains(&vals)) && self.strict(&vals)
            }
            Formula::Eq(a, b) => {
                let (a, b) = (self.term(v, a)?, self.term(v, b)?);
                a == b && self.strict(&[a, b])
            }
            Formula::Ex(t) => self.m.existing.contains(&self.term(v, t)?),
            Formula::Not(g) => !self.formula(v, g)?,
            Formula::And(a, b) => self.formula(v, a)? && self.formula(v, b)?,
            Formula::Forall(x, b) => {
                let saved = v.vars.get(x).copied();
                let mut all = Ok(true);
                for &o in &self.m.existing {
                    v.vars.insert(x.clone(), o);
                    match self.formula(v, b) {
                        Ok(true) => {}
                        r => {
                            all = r;
                            break;
                        }
                    }
                }
                restore(v, x, saved);
                all?
            }
        })
    }
}

fn restore(v: &mut Assignment, x: &Name, saved: Option<Elem>) {
    match saved {
        Some(e) => v.vars.insert(x.clone(), e),
        None => v.vars.remove(x),
    };
}

pub fn interpret_term(m: &Model, v: &Assignment, t: &Term, logic: Logic) -> Result<Elem, SemanticsError> {
    Eval { m, logic }.term(&mut v.clone(), t)
}

pub fn eval_formula(m: &Model, v: &Assignment, f: &Formula, logic: Logic) -> Result<bool, SemanticsError> {
    Eval { m, logic }.formula(&mut v.clone(), f)
}

/// The outer-denotation key a description gets under `v`.
pub fn outer_key(m: &Model, v: &Assignment, t: &Term, logic: Logic) -> Result<OuterKey, SemanticsError> {
    Eval { m, logic }.key(&mut v.clone(), t)
}

/// Whether the description has a unique existing witness under `v`.
pub fn proper_witness(m: &Model, v: &Assignment, t: &Term, logic: Logic) -> Result<Option<Elem>, SemanticsError> {
    match t {
        Term::Descr(x, b) => Eval { m, logic }.witness(&mut v.clone(), x, b),
        _ => Ok(None),
    }
}

/// Structural checks, plus outer/uniqueness agreement and totality for the
/// closed descriptions of `formulas`.
pub fn check_model_wellformed(m: &Model, logic: Logic, formulas: &[Formula]) -> Result<(), Vec<String>> {
    let mut issues = Vec::new();
    if let Some(e) = m.existing.iter().find(|e| !m.domain.contains(e)) {
        issues.push(format!("DE is not a subset of D: {e} not in D"));
    }
    let mut arity: BTreeMap<Name, usize> = BTreeMap::new();
    for f in formulas {
        for (p, n) in f.predicates() {
            match arity.get(&p) {
                Some(&k) if k != n => issues.push(format!("predicate {p} used with arities {k} and {n}")),
                _ => {
                    arity.insert(p, n);
                }
            }
        }
    }
    for (p, tuples) in &m.interp {
        let mut lens: BTreeSet<usize> = tuples.iter().map(|t| t.len()).collect();
        if let Some(&n) = arity.get(p) {
            lens.insert(n);
        }
        if lens.len() > 1 {
            issues.push(format!("tuples of I({p}) have inconsistent arity"));
        }
        for t in tuples {
            if t.iter().any(|e| !m.domain.contains(e)) {
                issues.push(format!("tuple {t:?} of I({p}) leaves D"));
            }
        }
    }
    if let Some(d) = m.outer_default {
        if !m.domain.contains(&d) || m.existing.contains(&d) {
            issues.push(format!("outer default {d} is not in D minus DE"));
        }
    }
    for (key, &val) in &m.outer {
        let label = print_term(&key.shape);
        if !m.domain.contains(&val) || m.existing.contains(&val) {
            issues.push(format!("outer value {val} of {label} is not in D minus DE"));
        }
        let mut v = Assignment::new();
        for (i, &e) in key.env.iter().enumerate() {
            v.params.insert(placeholder(i), e);
        }
        match proper_witness(m, &v, &key.shape, logic) {
            Ok(Some(w)) if w != val => {
                issues.push(format!("outer entry for {label} disagrees with its unique witness {w}"))
            }
            Ok(_) => {}
            Err(e) => issues.push(format!("outer entry for {label}: {e}")),
        }
    }
    if issues.is_empty() {
        let v = Assignment::new();
        for d in dd_subterms(formulas) {
            if !params_of_formula(&Formula::Ex(d.clone())).is_empty() {
                continue;
            }
            if let Err(e) = interpret_term(m, &v, &d, logic) {
                issues.push(e.to_string());
            }
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct OuterJson {
    pub descr: String,
    pub env: BTreeMap<String, Elem>,
    pub val: Elem,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct ModelJson {
    #[serde(rename = "D")]
    pub d: Vec<Elem>,
    #[serde(rename = "DE")]
    pub de: Vec<Elem>,
    #[serde(rename = "I")]
    pub i: BTreeMap<String, Vec<Vec<Elem>>>,
    pub outer: Vec<OuterJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_default: Option<Elem>,
}

impl Model {
    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            d: self.domain.iter().copied().collect(),
            de: self.existing.iter().copied().collect(),
            i: self.interp.iter().map(|(p, ts)| (p.to_string(), ts.iter().cloned().collect())).collect(),
            outer: self
                .outer
                .iter()
                .map(|(k, &val)| OuterJson {
                    descr: print_term(&k.shape),
                    env: k.env.iter().enumerate().map(|(i, &e)| (placeholder(i).to_string(), e)).collect(),
                    val,
                })
                .collect(),
            outer_default: self.outer_default,
        }
    }

    pub fn from_json(j: &ModelJson) -> Result<Model, SemanticsError> {
        let mut outer = BTreeMap::new();
        for o in &j.outer {
            let f =
                parse_with(&format!("_q = {}", o.descr), ParseOptions { language: Language::L, allow_reserved: true })
                    .map_err(|e| SemanticsError::Malformed(format!("descr `{}`: {e}", o.descr)))?;
            let t = match f {
                Formula::Eq(_, t @ Term::Descr(..)) => t,
                _ => return Err(SemanticsError::Malformed(format!("`{}` is not a description", o.descr))),
            };
            if !is_closed_term(&t) {
                return Err(SemanticsError::Malformed(format!("`{}` is not closed", o.descr)));
            }
            let (shape, taken) = outer_shape(&t);
            let env = taken
                .iter()
                .map(|s| match s {
                    Term::Param(a) => o
                        .env
                        .get(&**a)
                        .copied()
                        .ok_or_else(|| SemanticsError::Malformed(format!("env of `{}` lacks `{a}`", o.descr))),
                    _ => Err(SemanticsError::Malformed(format!("`{}` contains a non-placeholder subterm", o.descr))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            outer.insert(OuterKey { shape, env }, o.val);
        }
        Ok(Model {
            domain: j.d.iter().copied().collect(),
            existing: j.de.iter().copied().collect(),
            interp: j.i.iter().map(|(p, ts)| (name(p), ts.iter().cloned().collect())).collect(),
            outer,
            outer_default: j.outer_default,
        })
    }
}

pub fn assignment_to_json(v: &Assignment) -> BTreeMap<String, Elem> {
    v.params.iter().map(|(a, &e)| (a.to_string(), e)).collect()
}

pub fn assignment_from_json(j: &BTreeMap<String, Elem>) -> Assignment {
    Assignment { params: j.iter().map(|(a, &e)| (name(a), e)).collect(), vars: BTreeMap::new() }
}
