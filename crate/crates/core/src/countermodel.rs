//! Models read off open saturated branches.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::TermClasses;
use crate::logic::Logic;
use crate::semantics::{
    assignment_to_json, check_model_wellformed, eval_formula, interpret_term, outer_shape, Assignment, Elem, Model,
    OuterKey, SemanticsError,
};
use crate::syntax::{print, print_term, Formula, Term};

#[derive(Clone, Debug)]
pub struct ExtractedModel {
    pub model: Model,
    pub assignment: Assignment,
    pub classes: TermClasses,
    /// Element of each term class, keyed by term.
    pub elem_of: HashMap<Term, Elem>,
    pub class_reps: BTreeMap<Elem, Term>,
    /// The extra element o.
    pub outside: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountermodelError {
    #[error("branch is closed: contains {0} and its negation")]
    Closed(String),
    #[error("descriptions {0} and {1} share an outer key but lie in different classes")]
    OuterConflict(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("model is not well-formed: {}", .0.join("; "))]
    Malformed(Vec<String>),
    #[error("branch formula not satisfied: {0}")]
    Unsatisfied(String),
    #[error("{descr} denotes {got}, expected its class {expected}")]
    Denotation { descr: String, expected: Elem, got: Elem },
    #[error("{descr} and parameter {param}: denotation and branch identities disagree")]
    Claim { descr: String, param: String },
    #[error("existing element {0} is not the class of any parameter")]
    NamelessExisting(Elem),
    #[error("evaluation failed: {0}")]
    Eval(#[from] SemanticsError),
}

pub fn extract_model(formulas: &[Formula], logic: Logic) -> Result<ExtractedModel, CountermodelError> {
    let on: HashSet<&Formula> = formulas.iter().collect();
    if let Some(f) = formulas.iter().find(|f| matches!(f, Formula::Not(g) if on.contains(&**g))) {
        return Err(CountermodelError::Closed(print(&f.complement())));
    }
    let classes = TermClasses::from_formulas(formulas);
    let mut elem_of = HashMap::new();
    let mut class_reps = BTreeMap::new();
    for (k, class) in classes.classes().into_iter().enumerate() {
        let e = k as Elem;
        class_reps.insert(e, class[0].clone());
        for t in class {
            elem_of.insert(t, e);
        }
    }
    let outside = class_reps.len() as Elem;
    let mut model = Model { outer_default: Some(outside), ..Model::default() };
    model.domain = (0..=outside).collect();
    model.existing = match logic {
        Logic::NqflMinus => elem_of.iter().filter(|(t, _)| matches!(t, Term::Param(_))).map(|(_, &e)| e).collect(),
        _ => formulas
            .iter()
            .filter_map(|f| match f {
                Formula::Ex(t) => elem_of.get(t).copied(),
                _ => None,
            })
            .collect(),
    };
    for f in formulas {
        for (p, _) in f.predicates() {
            model.interp.entry(p).or_default();
        }
        if let Formula::Atom(p, ts) = f {
            let tuple = ts.iter().map(|t| elem_of[t]).collect();
            model.interp.entry(p.clone()).or_default().insert(tuple);
        }
    }
    let mut assignment = Assignment::new();
    for (t, &e) in &elem_of {
        if let Term::Param(a) = t {
            assignment.params.insert(a.clone(), e);
        }
    }
    let mut owner: BTreeMap<OuterKey, Term> = BTreeMap::new();
    let mut descrs: Vec<&Term> = elem_of.keys().filter(|t| t.is_descr()).collect();
    descrs.sort();
    for d in descrs {
        let e = elem_of[d];
        if model.existing.contains(&e) {
            continue;
        }
        let (shape, taken) = outer_shape(d);
        let env = taken.iter().map(|s| elem_of[s]).collect();
        let key = OuterKey { shape, env };
        if let Some(prev) = owner.get(&key) {
            if elem_of[prev] != e {
                return Err(CountermodelError::OuterConflict(print_term(prev), print_term(d)));
            }
            continue;
        }
        owner.insert(key.clone(), d.clone());
        model.outer.insert(key, e);
    }
    Ok(ExtractedModel { model, assignment, classes, elem_of, class_reps, outside })
}

/// Check every branch formula, the denotation of every description, and the
/// parameter/description identity claim.
pub fn verify_model(e: &ExtractedModel, formulas: &[Formula], logic: Logic) -> Result<(), VerifyError> {
    check_model_wellformed(&e.model, logic, formulas).map_err(VerifyError::Malformed)?;
    let (m, v) = (&e.model, &e.assignment);
    for f in formulas {
        if !eval_formula(m, v, f, logic)? {
            return Err(VerifyError::Unsatisfied(print(f)));
        }
    }
    let mut terms: Vec<&Term> = e.elem_of.keys().collect();
    terms.sort();
    for t in &terms {
        let expected = e.elem_of[*t];
        let got = interpret_term(m, v, t, logic)?;
        if got != expected {
            return Err(VerifyError::Denotation { descr: print_term(t), expected, got });
        }
    }
    let params: Vec<&Term> = terms.iter().copied().filter(|t| matches!(t, Term::Param(_))).collect();
    let on: HashSet<&Formula> = formulas.iter().collect();
    for d in terms.iter().filter(|t| t.is_descr()) {
        let den = interpret_term(m, v, d, logic)?;
        for a in &params {
            let ea = e.elem_of[*a];
            if !m.existing.contains(&ea) {
                continue;
            }
            if (den == ea) != e.classes.same(d, a) {
                return Err(VerifyError::Claim { descr: print_term(d), param: print_term(a) });
            }
        }
        if m.existing.contains(&den) {
            let rep = &e.class_reps[&den];
            let linked = rep == *d
                || on.contains(&Formula::Eq((*d).clone(), rep.clone()))
                || on.contains(&Formula::Eq(rep.clone(), (*d).clone()));
            if !linked {
                return Err(VerifyError::Claim { descr: print_term(d), param: print_term(rep) });
            }
        }
    }
    let named: BTreeSet<Elem> = params.iter().map(|a| e.elem_of[*a]).collect();
    if let Some(&x) = m.existing.iter().find(|x| !named.contains(x)) {
        return Err(VerifyError::NamelessExisting(x));
    }
    Ok(())
}

impl ExtractedModel {
    pub fn to_json(&self) -> Value {
        let mut j = serde_json::to_value(self.model.to_json()).expect("model serializes");
        j["assignment"] = json!(assignment_to_json(&self.assignment));
        let mut reps: BTreeMap<String, String> =
            self.class_reps.iter().map(|(e, t)| (e.to_string(), print_term(t))).collect();
        reps.insert(self.outside.to_string(), "o".into());
        j["class_reps"] = json!(reps);
        j
    }
}
