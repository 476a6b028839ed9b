//! Brute-force model enumeration over small dual-domain models.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{apply_instance, rules_for_logic, Focus, Rule, RuleInstance};
use crate::logic::Logic;
use crate::random::rule_sample;
use crate::semantics::{
    assignment_to_json, eval_formula, outer_key, proper_witness, Assignment, Elem, Model, SemanticsError,
};
use crate::syntax::{dd_subterms, free_vars, name, params_of, print, print_term, term_size, Formula, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("description {0} is not closed; the oracle only handles closed descriptions")]
    OpenDescription(String),
    #[error("formula has free variables: {0}")]
    FreeVariables(String),
    #[error("domain bound must be at least 1")]
    ZeroBound,
    #[error("predicate {0} used with different arities")]
    Arity(String),
    #[error("too many tuples to enumerate for {0}")]
    TooLarge(String),
    #[error("{0} is not a rule of {1}")]
    RuleNotInLogic(Rule, Logic),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Signature and bounds of an enumeration.
#[derive(Clone, Debug)]
pub struct EnumerationSpace {
    pub max_domain: usize,
    pub predicates: Vec<(Name, usize)>,
    pub params: Vec<Name>,
    /// Closed descriptions, innermost first.
    pub dds: Vec<Term>,
    pub logic: Logic,
    /// Only models with a non-empty DE.
    pub nonempty: bool,
}

fn open_descr_t(t: &Term, bound: &mut Vec<Name>) -> Option<Term> {
    match t {
        Term::Descr(x, b) => {
            let fv = free_vars(&Formula::Forall(x.clone(), b.clone()));
            if !fv.is_empty() {
                return Some(t.clone());
            }
            bound.push(x.clone());
            let r = open_descr_f(b, bound);
            bound.pop();
            r
        }
        _ => None,
    }
}

fn open_descr_f(f: &Formula, bound: &mut Vec<Name>) -> Option<Term> {
    match f {
        Formula::Atom(_, ts) => ts.iter().find_map(|t| open_descr_t(t, bound)),
        Formula::Eq(a, b) => open_descr_t(a, bound).or_else(|| open_descr_t(b, bound)),
        Formula::Ex(t) => open_descr_t(t, bound),
        Formula::Not(g) | Formula::Forall(_, g) => open_descr_f(g, bound),
        Formula::And(a, b) => open_descr_f(a, bound).or_else(|| open_descr_f(b, bound)),
    }
}

impl EnumerationSpace {
    pub fn for_formulas(fs: &[Formula], logic: Logic, max_domain: usize) -> Result<Self, OracleError> {
        if max_domain == 0 {
            return Err(OracleError::ZeroBound);
        }
        let mut arity: BTreeMap<Name, usize> = BTreeMap::new();
        for f in fs {
            if let Some(t) = open_descr_f(f, &mut Vec::new()) {
                return Err(OracleError::OpenDescription(print_term(&t)));
            }
            let fv = free_vars(f);
            if !fv.is_empty() {
                return Err(OracleError::FreeVariables(
                    fv.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", "),
                ));
            }
            for (p, n) in f.predicates() {
                if *arity.entry(p.clone()).or_insert(n) != n {
                    return Err(OracleError::Arity(p.to_string()));
                }
            }
        }
        let mut dds = dd_subterms(fs);
        dds.sort_by(|a, b| term_size(a).cmp(&term_size(b)).then_with(|| a.cmp(b)));
        Ok(EnumerationSpace {
            max_domain,
            predicates: arity.into_iter().collect(),
            params: params_of(fs).into_iter().collect(),
            dds,
            logic,
            nonempty: false,
        })
    }

    pub fn with_nonempty(mut self, nonempty: bool) -> Self {
        self.nonempty = nonempty;
        self
    }

    /// Visit every model in enumeration order until `visit` breaks.
    pub fn try_for_each<T>(
        &self,
        mut visit: impl FnMut(&Model, &Assignment) -> ControlFlow<T>,
    ) -> Result<Option<T>, OracleError> {
        for n in 1..=self.max_domain {
            if let ControlFlow::Break(t) = self.size(n as Elem, &mut visit)? {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    fn size<T>(
        &self,
        n: Elem,
        visit: &mut impl FnMut(&Model, &Assignment) -> ControlFlow<T>,
    ) -> Result<ControlFlow<T>, OracleError> {
        for mask in 0u32..(1 << n) {
            let existing: BTreeSet<Elem> = (0..n).filter(|e| mask & (1 << e) != 0).collect();
            if existing.is_empty() && (self.nonempty || (self.logic.is_quasi() && !self.params.is_empty())) {
                continue;
            }
            let mut domain: BTreeSet<Elem> = (0..n).collect();
            if existing.len() == n as usize && !self.dds.is_empty() {
                domain.insert(n);
            }
            let universe: Vec<Elem> = if self.logic.is_negative() {
                existing.iter().copied().collect()
            } else {
                domain.iter().copied().collect()
            };
            let tuples: Vec<Vec<Vec<Elem>>> = self.predicates.iter().map(|(_, k)| tuples_over(&universe, *k)).collect();
            for (i, ts) in tuples.iter().enumerate() {
                if ts.len() > 20 {
                    return Err(OracleError::TooLarge(self.predicates[i].0.to_string()));
                }
            }
            let targets: Vec<Elem> = if self.logic.is_quasi() {
                existing.iter().copied().collect()
            } else {
                domain.iter().copied().collect()
            };
            let base = Model { domain: domain.clone(), existing: existing.clone(), ..Model::default() };
            let mut interp_choice = vec![0u64; self.predicates.len()];
            loop {
                let mut m = base.clone();
                for (i, (p, _)) in self.predicates.iter().enumerate() {
                    let set = tuples[i]
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| interp_choice[i] & (1 << j) != 0)
                        .map(|(_, t)| t.clone())
                        .collect();
                    m.interp.insert(p.clone(), set);
                }
                let mut param_choice = vec![0usize; self.params.len()];
                loop {
                    let mut v = Assignment::new();
                    for (a, &k) in self.params.iter().zip(&param_choice) {
                        v.params.insert(a.clone(), targets[k]);
                    }
                    if let ControlFlow::Break(t) = self.outer(&mut m, &v, 0, visit)? {
                        return Ok(ControlFlow::Break(t));
                    }
                    if !advance(&mut param_choice, |_| targets.len()) {
                        break;
                    }
                }
                if !advance_u64(&mut interp_choice, |i| 1u64 << tuples[i].len()) {
                    break;
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn outer<T>(
        &self,
        m: &mut Model,
        v: &Assignment,
        k: usize,
        visit: &mut impl FnMut(&Model, &Assignment) -> ControlFlow<T>,
    ) -> Result<ControlFlow<T>, OracleError> {
        let Some(d) = self.dds.get(k) else { return Ok(visit(m, v)) };
        if proper_witness(m, v, d, self.logic)?.is_some() {
            return self.outer(m, v, k + 1, visit);
        }
        let key = outer_key(m, v, d, self.logic)?;
        if m.outer.contains_key(&key) {
            return self.outer(m, v, k + 1, visit);
        }
        let choices: Vec<Elem> = m.domain.difference(&m.existing).copied().collect();
        for c in choices {
            m.outer.insert(key.clone(), c);
            let r = self.outer(m, v, k + 1, visit)?;
            m.outer.remove(&key);
            if r.is_break() {
                return Ok(r);
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

fn tuples_over(universe: &[Elem], k: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t| universe.iter().map(move |&e| [t.clone(), vec![e]].concat())).collect();
    }
    out
}

/// Mixed-radix increment; false once every digit wrapped.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn advance_u64(digits: &mut [u64], radix: impl Fn(usize) -> u64) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// All enumerated models, collected. Only sensible for small spaces.
pub fn enumerate_models(space: &EnumerationSpace) -> Result<Vec<(Model, Assignment)>, OracleError> {
    let mut out = Vec::new();
    space.try_for_each::<()>(|m, v| {
        out.push((m.clone(), v.clone()));
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    /// No countermodel with at most this many elements.
    ValidUpTo(usize),
    Countermodel(Model, Assignment),
}

impl OracleVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, OracleVerdict::ValidUpTo(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            OracleVerdict::ValidUpTo(n) => json!({"verdict": "valid-up-to-bound", "bound": n}),
            OracleVerdict::Countermodel(m, v) => json!({
                "verdict": "countermodel",
                "model": m.to_json(),
                "assignment": assignment_to_json(v),
            }),
        }
    }
}

pub fn oracle_validity(f: &Formula, logic: Logic, max_domain: usize) -> Result<OracleVerdict, OracleError> {
    oracle_validity_with(f, logic, max_domain, false)
}

pub fn oracle_validity_with(
    f: &Formula,
    logic: Logic,
    max_domain: usize,
    nonempty: bool,
) -> Result<OracleVerdict, OracleError> {
    let space = EnumerationSpace::for_formulas(std::slice::from_ref(f), logic, max_domain)?.with_nonempty(nonempty);
    let mut err = None;
    let found = space.try_for_each(|m, v| match eval_formula(m, v, f, logic) {
        Ok(true) => ControlFlow::Continue(()),
        Ok(false) => ControlFlow::Break((m.clone(), v.clone())),
        Err(e) => {
            err = Some(e);
            ControlFlow::Break((m.clone(), v.clone()))
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(match found {
        Some((m, v)) => OracleVerdict::Countermodel(m, v),
        None => OracleVerdict::ValidUpTo(max_domain),
    })
}

/// A model of all of `fs` within the bound, if one exists.
pub fn oracle_satisfiable(
    fs: &[Formula],
    logic: Logic,
    max_domain: usize,
    nonempty: bool,
) -> Result<Option<(Model, Assignment)>, OracleError> {
    let space = EnumerationSpace::for_formulas(fs, logic, max_domain)?.with_nonempty(nonempty);
    let mut err = None;
    let found = space.try_for_each(|m, v| {
        for f in fs {
            match eval_formula(m, v, f, logic) {
                Ok(true) => {}
                Ok(false) => return ControlFlow::Continue(()),
                Err(e) => {
                    err = Some(e);
                    return ControlFlow::Break((m.clone(), v.clone()));
                }
            }
        }
        ControlFlow::Break((m.clone(), v.clone()))
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(found)
}

#[derive(Clone, Debug)]
pub struct SoundnessCounterexample {
    pub premises: Vec<Formula>,
    pub conclusions: Vec<Vec<Formula>>,
    /// A model of the premises that no conclusion set extends.
    pub model: Model,
    pub assignment: Assignment,
}

#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub rule: Rule,
    pub logic: Logic,
    pub samples: usize,
    /// Samples whose premises had a model within the bound.
    pub tested: usize,
    pub counterexamples: Vec<SoundnessCounterexample>,
}

/// Sample random instances of `rule` and check that every model of the
/// premises within the bound satisfies some conclusion set, for some value of
/// the fresh parameter. Parameters the instance picks from the branch are
/// interpreted in every model even when no premise mentions them.
pub fn oracle_rule_soundness(
    rule: Rule,
    logic: Logic,
    samples: usize,
    max_domain: usize,
    seed: u64,
) -> Result<SoundnessReport, OracleError> {
    let nonempty = rule == Rule::ExI4;
    let rules = rules_for_logic(logic, nonempty).map_err(|_| OracleError::RuleNotInLogic(rule, logic))?;
    if !rules.contains(&rule) {
        return Err(OracleError::RuleNotInLogic(rule, logic));
    }
    let results: Vec<Result<(bool, Option<SoundnessCounterexample>), OracleError>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let sample = rule_sample(rule, logic, &mut rng);
            check_instance(&sample.instance, sample.premise_set(), logic, max_domain, nonempty)
        })
        .collect();
    let mut report = SoundnessReport { rule, logic, samples, tested: 0, counterexamples: Vec::new() };
    for r in results {
        let (tested, cex) = r?;
        report.tested += tested as usize;
        report.counterexamples.extend(cex);
    }
    Ok(report)
}

fn check_instance(
    instance: &RuleInstance,
    premises: Vec<Formula>,
    logic: Logic,
    max_domain: usize,
    nonempty: bool,
) -> Result<(bool, Option<SoundnessCounterexample>), OracleError> {
    let mut fresh = Vec::new();
    let sets = apply_instance(instance, &mut || {
        let a = name(&format!("_n{}", fresh.len() + 1));
        fresh.push(a.clone());
        a
    })
    .expect("sampled instance matches its schema");
    let mut all: Vec<Formula> = premises.clone();
    all.extend(sets.iter().flatten().cloned());
    let mut space = EnumerationSpace::for_formulas(&all, logic, max_domain)?.with_nonempty(nonempty);
    space.params.retain(|a| !fresh.contains(a));
    if let Focus::Param(a) | Focus::Pair(a, _) = &instance.focus {
        if !space.params.contains(a) {
            space.params.push(a.clone());
            space.params.sort();
        }
    }
    let holds = |m: &Model, v: &Assignment, fs: &[Formula]| -> Result<bool, SemanticsError> {
        for f in fs {
            if !eval_formula(m, v, f, logic)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut tested = false;
    let mut err = None;
    let found = space.try_for_each(|m, v| {
        let r = (|| -> Result<bool, SemanticsError> {
            if !holds(m, v, &premises)? {
                return Ok(true);
            }
            tested = true;
            let targets: Vec<Elem> = if logic.is_quasi() {
                m.existing.iter().copied().collect()
            } else {
                m.domain.iter().copied().collect()
            };
            for set in &sets {
                if fresh.is_empty() {
                    if holds(m, v, set)? {
                        return Ok(true);
                    }
                    continue;
                }
                let mut choice = vec![0usize; fresh.len()];
                if targets.is_empty() {
                    continue;
                }
                loop {
                    let mut w = v.clone();
                    for (a, &k) in fresh.iter().zip(&choice) {
                        w.params.insert(a.clone(), targets[k]);
                    }
                    if holds(m, &w, set)? {
                        return Ok(true);
                    }
                    if !advance(&mut choice, |_| targets.len()) {
                        break;
                    }
                }
            }
            Ok(false)
        })();
        match r {
            Ok(true) => ControlFlow::Continue(()),
            Ok(false) => ControlFlow::Break((m.clone(), v.clone())),
            Err(e) => {
                err = Some(e);
                ControlFlow::Break((m.clone(), v.clone()))
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    let cex =
        found.map(|(model, assignment)| SoundnessCounterexample { premises, conclusions: sets, model, assignment });
    Ok((tested, cex))
}

impl SoundnessCounterexample {
    pub fn describe(&self) -> String {
        let p: Vec<String> = self.premises.iter().map(print).collect();
        let c: Vec<String> =
            self.conclusions.iter().map(|s| s.iter().map(print).collect::<Vec<_>>().join(", ")).collect();
        format!("{} / {}", p.join(", "), c.join(" | "))
    }
}
