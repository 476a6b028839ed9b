//! Rule schemas and per-logic rule tables.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;
use thiserror::Error;

pub use crate::logic::Logic;
use crate::syntax::{
    alpha_normalize, dd_subterms, params_of, replace_occurrence, substitute, term_cmp, term_occurrences, Formula, Name,
    Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    NegNegE,
    AndE,
    NegAndE,
    Bot1,
    Bot2,
    Bot3,
    ForallE1,
    NegForallE1,
    ForallE2,
    NegForallE2,
    EqE,
    EqI1,
    EqI2,
    Cut1,
    Cut2,
    ExE1,
    ExE2,
    ExI1,
    ExI2,
    ExI3,
    ExI4,
    IotaE1,
    NegIotaE1,
    IotaE2,
    NegIotaE2,
}

impl Rule {
    pub const ALL: [Rule; 25] = [
        Rule::NegNegE,
        Rule::AndE,
        Rule::NegAndE,
        Rule::Bot1,
        Rule::Bot2,
        Rule::Bot3,
        Rule::ForallE1,
        Rule::NegForallE1,
        Rule::ForallE2,
        Rule::NegForallE2,
        Rule::EqE,
        Rule::EqI1,
        Rule::EqI2,
        Rule::Cut1,
        Rule::Cut2,
        Rule::ExE1,
        Rule::ExE2,
        Rule::ExI1,
        Rule::ExI2,
        Rule::ExI3,
        Rule::ExI4,
        Rule::IotaE1,
        Rule::NegIotaE1,
        Rule::IotaE2,
        Rule::NegIotaE2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::NegNegE => "neg_neg_E",
            Rule::AndE => "and_E",
            Rule::NegAndE => "neg_and_E",
            Rule::Bot1 => "bot1",
            Rule::Bot2 => "bot2",
            Rule::Bot3 => "bot3",
            Rule::ForallE1 => "forall_E1",
            Rule::NegForallE1 => "neg_forall_E1",
            Rule::ForallE2 => "forall_E2",
            Rule::NegForallE2 => "neg_forall_E2",
            Rule::EqE => "eq_E",
            Rule::EqI1 => "eq_I1",
            Rule::EqI2 => "eq_I2",
            Rule::Cut1 => "cut1",
            Rule::Cut2 => "cut2",
            Rule::ExE1 => "ex_E1",
            Rule::ExE2 => "ex_E2",
            Rule::ExI1 => "ex_I1",
            Rule::ExI2 => "ex_I2",
            Rule::ExI3 => "ex_I3",
            Rule::ExI4 => "ex_I4",
            Rule::IotaE1 => "iota_E1",
            Rule::NegIotaE1 => "neg_iota_E1",
            Rule::IotaE2 => "iota_E2",
            Rule::NegIotaE2 => "neg_iota_E2",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.iter().copied().find(|r| r.name() == s)
    }

    pub fn is_closure(self) -> bool {
        matches!(self, Rule::Bot1 | Rule::Bot2 | Rule::Bot3)
    }

    pub fn is_branching(self) -> bool {
        matches!(
            self,
            Rule::NegAndE | Rule::Cut1 | Rule::Cut2 | Rule::IotaE1 | Rule::IotaE2 | Rule::NegIotaE1 | Rule::NegIotaE2
        )
    }

    pub fn introduces_fresh(self) -> bool {
        matches!(
            self,
            Rule::NegForallE1
                | Rule::NegForallE2
                | Rule::ExE1
                | Rule::ExI4
                | Rule::EqI1
                | Rule::EqI2
                | Rule::NegIotaE1
                | Rule::NegIotaE2
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("the non-empty domain assumption is only available for PFL and NFL")]
    NonemptyQuasi,
    #[error("rule instance already applied on this branch")]
    AlreadyApplied,
    #[error("premises do not match the schema of {0}")]
    Mismatch(Rule),
}

pub fn rules_for_logic(logic: Logic, nonempty: bool) -> Result<BTreeSet<Rule>, CalculusError> {
    use Rule::*;
    if nonempty && logic.is_quasi() {
        return Err(CalculusError::NonemptyQuasi);
    }
    let mut rules: BTreeSet<Rule> = [NegNegE, AndE, NegAndE, Bot1, EqE].into_iter().collect();
    let extra: &[Rule] = match logic {
        Logic::Pfl => &[Bot2, ForallE2, NegForallE2, Cut2, ExE1, IotaE2, NegIotaE2],
        Logic::Pqfl => &[Bot2, ForallE1, NegForallE1, Cut2, ExE1, ExI3, IotaE1, NegIotaE1],
        Logic::Nfl => &[ExE2, ForallE2, NegForallE2, Cut2, ExE1, ExI1, ExI2, IotaE2, NegIotaE2],
        Logic::Nqfl => &[Bot3, ForallE1, NegForallE1, Cut2, ExE1, ExI1, ExI2, ExI3, IotaE1, NegIotaE1],
        Logic::NqflMinus => &[Bot3, ForallE1, NegForallE1, Cut1, EqI1, EqI2, IotaE1, NegIotaE1],
    };
    rules.extend(extra.iter().copied());
    if nonempty {
        rules.insert(ExI4);
    }
    Ok(rules)
}

/// Auxiliary data singling out one instance among those sharing premises.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Focus {
    None,
    /// The parameter instantiated by (∀E₁), (𝙴I₃), or the b₂ of (ιE₁).
    Param(Name),
    /// The description of (cut₂).
    Term(Term),
    /// The argument position of (𝙴I₁), (𝙴I₂), (=I₁), (=I₂).
    Position(usize),
    /// One occurrence of `from` replaced by `to` for (=E).
    Occurrence {
        from: Term,
        to: Term,
        index: usize,
    },
    /// The parameter and description of (cut₁).
    Pair(Name, Term),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleInstance {
    pub rule: Rule,
    pub premises: Vec<Formula>,
    pub focus: Focus,
}

impl RuleInstance {
    pub fn new(rule: Rule, premises: Vec<Formula>, focus: Focus) -> Self {
        RuleInstance { rule, premises, focus }
    }
}

/// Orient an identity: the larger side is rewritten to the smaller one.
pub fn orient(s: &Term, t: &Term) -> Option<(Term, Term)> {
    match term_cmp(s, t) {
        std::cmp::Ordering::Greater => Some((s.clone(), t.clone())),
        std::cmp::Ordering::Less => Some((t.clone(), s.clone())),
        std::cmp::Ordering::Equal => None,
    }
}

/// The parameter and description of an identity between them, in either orientation.
pub fn param_descr(s: &Term, t: &Term) -> Option<(Name, Term)> {
    match (s, t) {
        (Term::Param(b), d @ Term::Descr(..)) | (d @ Term::Descr(..), Term::Param(b)) => Some((b.clone(), d.clone())),
        _ => None,
    }
}

/// Positions of an atom or identity eligible for the existence/identity introduction rules.
pub fn intro_positions(f: &Formula, descr_only: bool) -> Vec<usize> {
    let args: Vec<&Term> = match f {
        Formula::Atom(_, ts) => ts.iter().collect(),
        Formula::Eq(a, b) => vec![a, b],
        _ => return vec![],
    };
    args.iter().enumerate().filter(|(_, t)| !descr_only || t.is_descr()).map(|(i, _)| i).collect()
}

fn arg(f: &Formula, i: usize) -> Option<&Term> {
    match f {
        Formula::Atom(_, ts) => ts.get(i),
        Formula::Eq(a, b) => [a, b].get(i).copied(),
        _ => None,
    }
}

/// A branch as a plain set of formulas.
#[derive(Clone, Debug, Default)]
pub struct BranchSnapshot {
    pub formulas: Vec<Formula>,
}

impl BranchSnapshot {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        let set: IndexSet<Formula> = formulas.into_iter().map(|f| alpha_normalize(&f)).collect();
        BranchSnapshot { formulas: set.into_iter().collect() }
    }
}

/// Every instance of the logic's rules over the snapshot, minus those in `applied`.
pub fn applicable_instances(
    b: &BranchSnapshot,
    logic: Logic,
    nonempty: bool,
    applied: &HashSet<RuleInstance>,
) -> Result<Vec<RuleInstance>, CalculusError> {
    use Rule::*;
    let rules = rules_for_logic(logic, nonempty)?;
    let on: HashSet<&Formula> = b.formulas.iter().collect();
    let params: Vec<Name> = params_of(&b.formulas).into_iter().collect();
    let dds = dd_subterms(&b.formulas);
    let existing: Vec<Name> =
        params.iter().filter(|p| on.contains(&Formula::Ex(Term::Param((*p).clone())))).cloned().collect();
    let ex = |p: &Name| Formula::Ex(Term::Param(p.clone()));
    let mut out = Vec::new();
    let mut push = |r: Rule, premises: Vec<Formula>, focus: Focus| {
        if rules.contains(&r) {
            out.push(RuleInstance::new(r, premises, focus));
        }
    };

    for f in &b.formulas {
        let one = || vec![f.clone()];
        match f {
            Formula::Not(g) => {
                if on.contains(&**g) {
                    push(Bot1, vec![(**g).clone(), f.clone()], Focus::None);
                }
                match &**g {
                    Formula::Not(_) => push(NegNegE, one(), Focus::None),
                    Formula::And(..) => push(NegAndE, one(), Focus::None),
                    Formula::Forall(..) => {
                        push(NegForallE1, one(), Focus::None);
                        push(NegForallE2, one(), Focus::None);
                    }
                    Formula::Eq(s, t) => {
                        if s == t {
                            push(Bot2, one(), Focus::None);
                            if matches!(s, Term::Param(_)) {
                                push(Bot3, one(), Focus::None);
                            }
                        }
                        if let Some((p, _)) = param_descr(s, t) {
                            push(NegIotaE1, one(), Focus::None);
                            if existing.contains(&p) {
                                push(NegIotaE2, vec![f.clone(), ex(&p)], Focus::None);
                            }
                        }
                    }
                    _ => {}
                }
            }
            Formula::And(..) => push(AndE, one(), Focus::None),
            Formula::Forall(..) => {
                for p in &params {
                    push(ForallE1, one(), Focus::Param(p.clone()));
                }
                for p in &existing {
                    push(ForallE2, vec![f.clone(), ex(p)], Focus::None);
                }
            }
            Formula::Ex(t) => {
                if t.is_descr() {
                    push(ExE1, one(), Focus::None);
                }
                push(ExE2, one(), Focus::None);
            }
            Formula::Atom(..) | Formula::Eq(..) => {
                let (ex_rule, eq_rule) = if matches!(f, Formula::Atom(..)) { (ExI1, EqI1) } else { (ExI2, EqI2) };
                for i in intro_positions(f, false) {
                    push(ex_rule, one(), Focus::Position(i));
                }
                for i in intro_positions(f, true) {
                    push(eq_rule, one(), Focus::Position(i));
                }
                if let Formula::Eq(s, t) = f {
                    if let Some((p, _)) = param_descr(s, t) {
                        for q in &params {
                            push(IotaE1, one(), Focus::Param(q.clone()));
                        }
                        if existing.contains(&p) {
                            for q in &existing {
                                push(IotaE2, vec![f.clone(), ex(&p), ex(q)], Focus::None);
                            }
                        }
                    }
                    if let Some((from, to)) = orient(s, t) {
                        for g in &b.formulas {
                            for index in 0..term_occurrences(g, &from) {
                                push(
                                    EqE,
                                    vec![f.clone(), g.clone()],
                                    Focus::Occurrence { from: from.clone(), to: to.clone(), index },
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    for p in &params {
        if !existing.contains(p) {
            push(ExI3, vec![], Focus::Param(p.clone()));
        }
        for d in &dds {
            push(Cut1, vec![], Focus::Pair(p.clone(), d.clone()));
        }
    }
    for p in &existing {
        for d in &dds {
            push(Cut2, vec![ex(p)], Focus::Term(d.clone()));
        }
    }
    if params.is_empty() {
        push(ExI4, vec![], Focus::None);
    }
    out.retain(|i| !applied.contains(i));
    Ok(out)
}

fn inst(f: &Formula, x: &Name, t: &Term) -> Formula {
    alpha_normalize(&substitute(f, x, t).expect("instantiation with a closed term"))
}

fn neg(f: Formula) -> Formula {
    Formula::Not(Arc::new(f))
}

fn param(a: &Name) -> Term {
    Term::Param(a.clone())
}

/// Conclusion sets of an instance; an empty list means the branch closes.
/// `fresh` supplies new parameters where the schema demands them.
pub fn apply_instance(i: &RuleInstance, fresh: &mut dyn FnMut() -> Name) -> Result<Vec<Vec<Formula>>, CalculusError> {
    use Rule::*;
    let bad = || CalculusError::Mismatch(i.rule);
    let p0 = i.premises.first();
    let sets = match (i.rule, p0) {
        (Bot1 | Bot2 | Bot3, _) => vec![],
        (NegNegE, Some(Formula::Not(g))) => match &**g {
            Formula::Not(h) => vec![vec![(**h).clone()]],
            _ => return Err(bad()),
        },
        (AndE, Some(Formula::And(a, b))) => vec![vec![(**a).clone(), (**b).clone()]],
        (NegAndE, Some(Formula::Not(g))) => match &**g {
            Formula::And(a, b) => vec![vec![neg((**a).clone())], vec![neg((**b).clone())]],
            _ => return Err(bad()),
        },
        (ForallE1, Some(Formula::Forall(x, body))) => match &i.focus {
            Focus::Param(b) => vec![vec![inst(body, x, &param(b))]],
            _ => return Err(bad()),
        },
        (ForallE2, Some(Formula::Forall(x, body))) => match i.premises.get(1) {
            Some(Formula::Ex(b @ Term::Param(_))) => vec![vec![inst(body, x, b)]],
            _ => return Err(bad()),
        },
        (NegForallE1 | NegForallE2, Some(Formula::Not(g))) => match &**g {
            Formula::Forall(x, body) => {
                let a = param(&fresh());
                let mut set = vec![];
                if i.rule == NegForallE2 {
                    set.push(Formula::Ex(a.clone()));
                }
                set.push(neg(inst(body, x, &a)));
                vec![set]
            }
            _ => return Err(bad()),
        },
        (EqE, Some(Formula::Eq(s, t))) => match (&i.focus, i.premises.get(1)) {
            (Focus::Occurrence { from, to, index }, Some(g)) if (s == from && t == to) || (s == to && t == from) => {
                let r = replace_occurrence(g, from, *index, to).ok_or_else(bad)?;
                vec![vec![alpha_normalize(&r)]]
            }
            _ => return Err(bad()),
        },
        (EqI1 | EqI2, Some(f)) => match &i.focus {
            Focus::Position(k) => match arg(f, *k) {
                Some(t @ Term::Descr(..)) => vec![vec![Formula::Eq(param(&fresh()), t.clone())]],
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        },
        (ExI1 | ExI2, Some(f)) => match &i.focus {
            Focus::Position(k) => vec![vec![Formula::Ex(arg(f, *k).ok_or_else(bad)?.clone())]],
            _ => return Err(bad()),
        },
        (Cut1, _) => match &i.focus {
            Focus::Pair(b, t) => {
                let e = Formula::Eq(param(b), t.clone());
                vec![vec![e.clone()], vec![neg(e)]]
            }
            _ => return Err(bad()),
        },
        (Cut2, Some(Formula::Ex(b @ Term::Param(_)))) => match &i.focus {
            Focus::Term(t) => {
                let e = Formula::Eq(b.clone(), t.clone());
                vec![vec![e.clone()], vec![neg(e)]]
            }
            _ => return Err(bad()),
        },
        (ExE1, Some(Formula::Ex(t @ Term::Descr(..)))) => vec![vec![Formula::Eq(param(&fresh()), t.clone())]],
        (ExE2, Some(Formula::Ex(t))) => vec![vec![Formula::Eq(t.clone(), t.clone())]],
        (ExI3, _) => match &i.focus {
            Focus::Param(b) => vec![vec![Formula::Ex(param(b))]],
            _ => return Err(bad()),
        },
        (ExI4, _) => vec![vec![Formula::Ex(param(&fresh()))]],
        (IotaE1 | IotaE2, Some(Formula::Eq(s, t))) => {
            let (b1, d) = param_descr(s, t).ok_or_else(bad)?;
            let b2 = match (i.rule, &i.focus, i.premises.get(2)) {
                (IotaE1, Focus::Param(b2), _) => b2.clone(),
                (IotaE2, _, Some(Formula::Ex(Term::Param(b2)))) => b2.clone(),
                _ => return Err(bad()),
            };
            let Term::Descr(x, body) = &d else { unreachable!() };
            let phi1 = inst(body, x, &param(&b1));
            let phi2 = inst(body, x, &param(&b2));
            vec![vec![phi1.clone(), neg(phi2)], vec![Formula::Eq(param(&b1), param(&b2)), phi1]]
        }
        (NegIotaE1 | NegIotaE2, Some(Formula::Not(g))) => match &**g {
            Formula::Eq(s, t) => {
                let (b, d) = param_descr(s, t).ok_or_else(bad)?;
                let Term::Descr(x, body) = &d else { unreachable!() };
                let a = param(&fresh());
                let mut right = vec![neg(Formula::Eq(a.clone(), param(&b))), inst(body, x, &a)];
                if i.rule == NegIotaE2 {
                    right.push(Formula::Ex(a));
                }
                vec![vec![neg(inst(body, x, &param(&b)))], right]
            }
            _ => return Err(bad()),
        },
        _ => return Err(bad()),
    };
    Ok(sets.into_iter().map(|s| s.iter().map(alpha_normalize).collect::<IndexSet<_>>().into_iter().collect()).collect())
}

/// Apply an instance unless it was already applied, recording it.
pub fn apply_once(
    applied: &mut HashSet<RuleInstance>,
    i: &RuleInstance,
    fresh: &mut dyn FnMut() -> Name,
) -> Result<Vec<Vec<Formula>>, CalculusError> {
    if applied.contains(i) {
        return Err(CalculusError::AlreadyApplied);
    }
    let out = apply_instance(i, fresh)?;
    applied.insert(i.clone());
    Ok(out)
}
