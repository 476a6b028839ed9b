//! Independent replay of a proof tree against the rule schemas.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::calculus::{rules_for_logic, Rule};
use crate::logic::Logic;
use crate::syntax::{
    alpha_normalize, closed_subterms, params_of_formula, replace_occurrence, substitute, term_occurrences, Formula,
    Name, Term,
};

use super::tree::{NodeStatus, ProofTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {node}: {message}")]
pub struct CheckError {
    pub node: usize,
    pub message: String,
}

fn fail<T>(node: usize, message: impl Into<String>) -> Result<T, CheckError> {
    Err(CheckError { node, message: message.into() })
}

fn inst(body: &Formula, x: &Name, t: &Term) -> Formula {
    alpha_normalize(&substitute(body, x, t).expect("closed instance"))
}

fn not(f: Formula) -> Formula {
    Formula::Not(f.into())
}

fn p(a: &Name) -> Term {
    Term::Param(a.clone())
}

fn args(f: &Formula) -> Vec<&Term> {
    match f {
        Formula::Atom(_, ts) => ts.iter().collect(),
        Formula::Eq(a, b) => vec![a, b],
        _ => vec![],
    }
}

fn param_and_descr(f: &Formula) -> Option<(Name, Name, &Formula)> {
    match f {
        Formula::Eq(Term::Param(b), Term::Descr(x, body)) | Formula::Eq(Term::Descr(x, body), Term::Param(b)) => {
            Some((b.clone(), x.clone(), body))
        }
        _ => None,
    }
}

/// Every conclusion list the schema allows for these premises, with side
/// choices drawn from `params` and `terms`. Fresh-parameter rules report the
/// parameter they used.
fn candidates(rule: Rule, prem: &[Formula], params: &[Name], terms: &[Term]) -> Vec<(Vec<Vec<Formula>>, Option<Name>)> {
    use Rule::*;
    let mut out: Vec<(Vec<Vec<Formula>>, Option<Name>)> = Vec::new();
    let ex_param = |f: Option<&Formula>| match f {
        Some(Formula::Ex(Term::Param(b))) => Some(b.clone()),
        _ => None,
    };
    match (rule, prem) {
        (NegNegE, [Formula::Not(g)]) => {
            if let Formula::Not(h) = &**g {
                out.push((vec![vec![(**h).clone()]], None));
            }
        }
        (AndE, [Formula::And(a, b)]) => out.push((vec![vec![(**a).clone(), (**b).clone()]], None)),
        (NegAndE, [Formula::Not(g)]) => {
            if let Formula::And(a, b) = &**g {
                out.push((vec![vec![not((**a).clone())], vec![not((**b).clone())]], None));
            }
        }
        (ForallE1, [Formula::Forall(x, body)]) => {
            for b in params {
                out.push((vec![vec![inst(body, x, &p(b))]], None));
            }
        }
        (ForallE2, [Formula::Forall(x, body), e]) => {
            if let Some(b) = ex_param(Some(e)) {
                out.push((vec![vec![inst(body, x, &p(&b))]], None));
            }
        }
        (NegForallE1 | NegForallE2, [Formula::Not(g)]) => {
            if let Formula::Forall(x, body) = &**g {
                for a in params {
                    let mut set = vec![];
                    if rule == NegForallE2 {
                        set.push(Formula::Ex(p(a)));
                    }
                    set.push(not(inst(body, x, &p(a))));
                    out.push((vec![set], Some(a.clone())));
                }
            }
        }
        (EqE, [Formula::Eq(s, t), g]) => {
            for (from, to) in [(s, t), (t, s)] {
                for k in 0..term_occurrences(g, from) {
                    if let Some(r) = replace_occurrence(g, from, k, to) {
                        out.push((vec![vec![alpha_normalize(&r)]], None));
                    }
                }
            }
        }
        (EqI1, [f @ Formula::Atom(..)]) | (EqI2, [f @ Formula::Eq(..)]) => {
            for t in args(f).into_iter().filter(|t| t.is_descr()) {
                for a in params {
                    out.push((vec![vec![Formula::Eq(p(a), t.clone())]], Some(a.clone())));
                }
            }
        }
        (ExI1, [f @ Formula::Atom(..)]) | (ExI2, [f @ Formula::Eq(..)]) => {
            for t in args(f) {
                out.push((vec![vec![Formula::Ex(t.clone())]], None));
            }
        }
        (Cut1, []) => {
            for b in params {
                for t in terms.iter().filter(|t| t.is_descr()) {
                    let e = Formula::Eq(p(b), t.clone());
                    out.push((vec![vec![e.clone()], vec![not(e)]], None));
                }
            }
        }
        (Cut2, [e]) => {
            if let Some(b) = ex_param(Some(e)) {
                for t in terms.iter().filter(|t| t.is_descr()) {
                    let e = Formula::Eq(p(&b), t.clone());
                    out.push((vec![vec![e.clone()], vec![not(e)]], None));
                }
            }
        }
        (ExE1, [Formula::Ex(t @ Term::Descr(..))]) => {
            for a in params {
                out.push((vec![vec![Formula::Eq(p(a), t.clone())]], Some(a.clone())));
            }
        }
        (ExE2, [Formula::Ex(t)]) => out.push((vec![vec![Formula::Eq(t.clone(), t.clone())]], None)),
        (ExI3, []) => {
            for b in params {
                out.push((vec![vec![Formula::Ex(p(b))]], None));
            }
        }
        (ExI4, []) => {
            for a in params {
                out.push((vec![vec![Formula::Ex(p(a))]], Some(a.clone())));
            }
        }
        (IotaE1 | IotaE2, [id, rest @ ..]) => {
            if let Some((b1, x, body)) = param_and_descr(id) {
                let b2s: Vec<Name> = match (rule, rest) {
                    (IotaE1, []) => params.to_vec(),
                    (IotaE2, [e1, e2]) if ex_param(Some(e1)).as_ref() == Some(&b1) => {
                        ex_param(Some(e2)).into_iter().collect()
                    }
                    _ => vec![],
                };
                for b2 in b2s {
                    let phi1 = inst(body, &x, &p(&b1));
                    out.push((
                        vec![vec![phi1.clone(), not(inst(body, &x, &p(&b2)))], vec![Formula::Eq(p(&b1), p(&b2)), phi1]],
                        None,
                    ));
                }
            }
        }
        (NegIotaE1 | NegIotaE2, [Formula::Not(g), rest @ ..]) => {
            if let Some((b, x, body)) = param_and_descr(g) {
                let ok = match (rule, rest) {
                    (NegIotaE1, []) => true,
                    (NegIotaE2, [e]) => ex_param(Some(e)).as_ref() == Some(&b),
                    _ => false,
                };
                if ok {
                    for a in params {
                        let mut right = vec![not(Formula::Eq(p(a), p(&b))), inst(body, &x, &p(a))];
                        if rule == NegIotaE2 {
                            right.push(Formula::Ex(p(a)));
                        }
                        out.push((vec![vec![not(inst(body, &x, &p(&b)))], right], Some(a.clone())));
                    }
                }
            }
        }
        _ => {}
    }
    out
}

fn same_sets(a: &[Vec<Formula>], b: &[Vec<Formula>]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            let x: HashSet<&Formula> = x.iter().collect();
            let y: HashSet<&Formula> = y.iter().collect();
            x == y
        })
}

struct Replay<'a> {
    tree: &'a ProofTree,
    logic: Logic,
    rules: std::collections::BTreeSet<Rule>,
    origin: HashMap<Formula, usize>,
    param_count: HashMap<Name, usize>,
}

impl Replay<'_> {
    fn push(&mut self, node: usize) -> Vec<Formula> {
        let mut added = Vec::new();
        for f in &self.tree.nodes[node].formulas_added {
            if self.origin.contains_key(f) {
                continue;
            }
            self.origin.insert(f.clone(), node);
            for a in params_of_formula(f) {
                *self.param_count.entry(a).or_default() += 1;
            }
            added.push(f.clone());
        }
        added
    }

    fn pop(&mut self, added: Vec<Formula>) {
        for f in added {
            self.origin.remove(&f);
            for a in params_of_formula(&f) {
                let c = self.param_count.get_mut(&a).expect("counted");
                *c -= 1;
                if *c == 0 {
                    self.param_count.remove(&a);
                }
            }
        }
    }

    fn check_children(&self, id: usize) -> Result<(), CheckError> {
        let node = &self.tree.nodes[id];
        let children: Vec<_> = node.children.iter().map(|&c| &self.tree.nodes[c]).collect();
        let Some(first) = children.first() else {
            return match node.status {
                NodeStatus::Closed if node.rule.is_some_and(|r| r.is_closure()) => Ok(()),
                NodeStatus::Closed => fail(id, "closed leaf without a closure rule"),
                _ => Ok(()),
            };
        };
        let Some(rule) = first.rule else { return fail(first.id, "non-root node without a rule") };
        if children.iter().any(|c| c.rule != Some(rule) || c.premises != first.premises) {
            return fail(id, "children disagree on rule or premises");
        }
        if !self.rules.contains(&rule) {
            return fail(first.id, format!("{rule} is not a rule of {}", self.logic.display_name()));
        }
        for (src, f) in &first.premises {
            if self.origin.get(f) != Some(src) {
                return fail(first.id, format!("premise {f} is not introduced at node {src} on this branch"));
            }
        }
        let prem: Vec<Formula> = first.premises.iter().map(|(_, f)| f.clone()).collect();
        if rule.is_closure() {
            if children.len() != 1 || !first.formulas_added.is_empty() || !first.children.is_empty() {
                return fail(first.id, "closure node must be a single empty leaf");
            }
            let ok = match (rule, prem.as_slice()) {
                (Rule::Bot1, [g, Formula::Not(h)]) => **h == *g,
                (Rule::Bot2, [Formula::Not(h)]) => matches!(&**h, Formula::Eq(s, t) if s == t),
                (Rule::Bot3, [Formula::Not(h)]) => matches!(&**h, Formula::Eq(s @ Term::Param(_), t) if s == t),
                _ => false,
            };
            return if ok { Ok(()) } else { fail(first.id, format!("premises do not close by {rule}")) };
        }
        let sets: Vec<Vec<Formula>> = children.iter().map(|c| c.formulas_added.clone()).collect();
        let mut params: Vec<Name> = self.param_count.keys().cloned().collect();
        let mut terms: Vec<Term> = Vec::new();
        for f in sets.iter().flatten() {
            params.extend(params_of_formula(f));
            terms.extend(closed_subterms(f));
        }
        params.sort();
        params.dedup();
        for (expected, fresh) in candidates(rule, &prem, &params, &terms) {
            if !same_sets(&expected, &sets) {
                continue;
            }
            if let Some(a) = fresh {
                if self.param_count.contains_key(&a) {
                    return fail(first.id, format!("parameter {a} introduced by {rule} is not fresh"));
                }
            }
            if rule == Rule::ExI4 && !self.param_count.is_empty() {
                return fail(first.id, "ex_I4 applied on a branch with parameters");
            }
            return Ok(());
        }
        fail(first.id, format!("conclusions do not match the schema of {rule}"))
    }
}

/// Replay `tree` from `root`, checking every step against the rules of `logic`.
pub fn check_tree(tree: &ProofTree, root: &Formula, logic: Logic, nonempty: bool) -> Result<(), CheckError> {
    let rules = rules_for_logic(logic, nonempty).map_err(|e| CheckError { node: 0, message: e.to_string() })?;
    let top = tree.root();
    if top.rule.is_some() || top.formulas_added != [alpha_normalize(root)] {
        return fail(0, "root does not hold the expected formula");
    }
    let mut r = Replay { tree, logic, rules, origin: HashMap::new(), param_count: HashMap::new() };
    enum Visit {
        Enter(usize),
        Leave(Vec<Formula>),
    }
    let mut stack = vec![Visit::Enter(0)];
    while let Some(v) = stack.pop() {
        match v {
            Visit::Enter(id) => {
                let added = r.push(id);
                r.check_children(id)?;
                stack.push(Visit::Leave(added));
                for &c in tree.nodes[id].children.iter().rev() {
                    stack.push(Visit::Enter(c));
                }
            }
            Visit::Leave(added) => r.pop(added),
        }
    }
    Ok(())
}
