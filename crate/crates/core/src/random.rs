//! Seeded random formulas, models and rule instances for testing.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::calculus::{orient, Focus, Rule, RuleInstance};
use crate::logic::Logic;
use crate::semantics::{outer_key, outer_shape, proper_witness, Assignment, Elem, Model, OuterKey};
use crate::syntax::{alpha_normalize, closed_subterms, dd_subterms, name, term_occurrences, Formula, Name, Term};

#[derive(Clone, Debug)]
pub struct GenOptions {
    pub max_depth: usize,
    pub predicates: Vec<(Name, usize)>,
    pub params: Vec<Name>,
    /// Whether `E!` may appear.
    pub existence: bool,
    /// Chance that a term position holds a description.
    pub descr_rate: f64,
    /// Let description bodies mention variables bound outside them.
    pub open_descr: bool,
}

impl GenOptions {
    pub fn for_logic(logic: Logic) -> Self {
        GenOptions {
            max_depth: 3,
            predicates: vec![(name("P"), 1), (name("Q"), 1)],
            params: vec![name("a"), name("b")],
            existence: logic != Logic::NqflMinus,
            descr_rate: 0.25,
            open_descr: false,
        }
    }

    pub fn with_binary(mut self) -> Self {
        self.predicates[1] = (name("R"), 2);
        self
    }
}

pub struct Generator<'r, R: Rng> {
    pub rng: &'r mut R,
    pub opts: GenOptions,
    next_var: usize,
}

impl<'r, R: Rng> Generator<'r, R> {
    pub fn new(rng: &'r mut R, opts: GenOptions) -> Self {
        Generator { rng, opts, next_var: 0 }
    }

    fn var(&mut self) -> Name {
        self.next_var += 1;
        name(&format!("v{}", self.next_var))
    }

    fn param(&mut self) -> Term {
        Term::Param(self.opts.params.choose(self.rng).expect("some parameter").clone())
    }

    /// A term over `scope`; descriptions are closed.
    pub fn term(&mut self, scope: &[Name], descr_depth: usize) -> Term {
        if descr_depth > 0 && self.rng.gen_bool(self.opts.descr_rate) {
            let outer = if self.opts.open_descr { scope } else { &[] };
            return self.descr_in(descr_depth - 1, outer);
        }
        if !scope.is_empty() && (self.opts.params.is_empty() || self.rng.gen_bool(0.6)) {
            return Term::Var(scope.choose(self.rng).unwrap().clone());
        }
        if self.opts.params.is_empty() {
            return self.descr(0);
        }
        self.param()
    }

    /// A closed description whose body has at most `depth` connectives.
    pub fn descr(&mut self, depth: usize) -> Term {
        self.descr_in(depth, &[])
    }

    fn descr_in(&mut self, depth: usize, outer: &[Name]) -> Term {
        let x = self.var();
        let mut scope = vec![x.clone()];
        scope.extend(outer.iter().cloned());
        let body = self.formula_with(depth.min(1), &scope, depth, true);
        Term::Descr(x, body.into())
    }

    fn atomic(&mut self, scope: &[Name], descr_depth: usize, want_var: bool) -> Formula {
        let kind = self.rng.gen_range(0..if self.opts.existence { 6 } else { 5 });
        let pick = |g: &mut Self| {
            if want_var && !scope.is_empty() && g.rng.gen_bool(0.7) {
                Term::Var(scope[0].clone())
            } else {
                g.term(scope, descr_depth)
            }
        };
        match kind {
            0..=2 => {
                let (p, n) = self.opts.predicates.choose(self.rng).unwrap().clone();
                let args = (0..n).map(|_| pick(self)).collect();
                Formula::Atom(p, args)
            }
            3 | 4 => {
                let s = pick(self);
                let t = self.term(scope, descr_depth);
                Formula::Eq(s, t)
            }
            _ => Formula::Ex(pick(self)),
        }
    }

    fn formula_with(&mut self, depth: usize, scope: &[Name], descr_depth: usize, want_var: bool) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.atomic(scope, descr_depth, want_var);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => Formula::not(self.formula_with(d, scope, descr_depth, want_var)),
            1 => {
                let a = self.formula_with(d, scope, descr_depth, want_var);
                Formula::and(a, self.formula_with(d, scope, descr_depth, false))
            }
            2 => {
                let a = self.formula_with(d, scope, descr_depth, want_var);
                Formula::or(a, self.formula_with(d, scope, descr_depth, false))
            }
            3 => {
                let a = self.formula_with(d, scope, descr_depth, want_var);
                Formula::implies(a, self.formula_with(d, scope, descr_depth, false))
            }
            4 => {
                let a = self.formula_with(d, scope, descr_depth, want_var);
                Formula::iff(a, self.formula_with(d, scope, descr_depth, false))
            }
            5 | 6 => {
                let x = self.var();
                let mut inner = vec![x.clone()];
                inner.extend(scope.iter().cloned());
                let body = self.formula_with(d, &inner, descr_depth, true);
                if self.rng.gen_bool(0.5) {
                    Formula::Forall(x, body.into())
                } else {
                    Formula::exists(&x, body)
                }
            }
            _ => self.atomic(scope, descr_depth, want_var),
        }
    }

    /// A closed, alpha-normal sentence with connective depth at most `max_depth`.
    pub fn sentence(&mut self) -> Formula {
        let depth = self.opts.max_depth;
        alpha_normalize(&self.formula_with(depth, &[], 1, false))
    }

    /// A formula whose only free variable (if any) is `x`.
    pub fn open_formula(&mut self, x: &Name) -> Formula {
        let depth = self.opts.max_depth.min(2);
        self.formula_with(depth, std::slice::from_ref(x), 1, true)
    }

    /// A closed term: a parameter or a closed description.
    pub fn closed_term(&mut self) -> Term {
        if self.opts.params.is_empty() || self.rng.gen_bool(0.5) {
            alpha_normalize_t(self.descr(1))
        } else {
            self.param()
        }
    }
}

/// A random sentence for `logic` from a fixed seed stream.
pub fn random_sentence<R: Rng>(rng: &mut R, opts: &GenOptions) -> Formula {
    Generator::new(rng, opts.clone()).sentence()
}

/// A random model over `predicates` with at most `max_size` core elements and
/// outer denotations for the closed descriptions of `fs`. Vars are unassigned.
pub fn random_model<R: Rng>(
    rng: &mut R,
    fs: &[Formula],
    predicates: &[(Name, usize)],
    params: &[Name],
    logic: Logic,
    max_size: usize,
) -> (Model, Assignment) {
    let n = rng.gen_range(1..=max_size) as Elem;
    let mut m = Model {
        domain: (0..=n).collect(),
        existing: (0..n).filter(|_| rng.gen_bool(0.7)).collect(),
        ..Model::default()
    };
    let quasi_needs = logic.is_quasi() && !params.is_empty();
    if m.existing.is_empty() && (quasi_needs || rng.gen_bool(0.5)) {
        m.existing.insert(0);
    }
    m.outer_default = Some(n);
    for (p, k) in predicates {
        let mut set = BTreeSet::new();
        let mut tuple = vec![0; *k];
        loop {
            if rng.gen_bool(0.4) {
                set.insert(tuple.clone());
            }
            let mut i = 0;
            while i < *k {
                tuple[i] += 1;
                if tuple[i] <= n {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
            if i == *k {
                break;
            }
        }
        m.interp.insert(p.clone(), set);
    }
    let targets: Vec<Elem> =
        if logic.is_quasi() { m.existing.iter().copied().collect() } else { m.domain.iter().copied().collect() };
    let mut v = Assignment::new();
    for a in params {
        v.params.insert(a.clone(), *targets.choose(rng).expect("non-empty targets"));
    }
    let outside: Vec<Elem> = m.domain.difference(&m.existing).copied().collect();
    let mut dds = dd_subterms(fs);
    dds.sort_by_key(crate::syntax::term_size);
    for d in dds {
        if let (Ok(None), Ok(key)) = (proper_witness(&m, &v, &d, logic), outer_key(&m, &v, &d, logic)) {
            let val = *outside.choose(rng).unwrap();
            m.outer.entry(key).or_insert(val);
        }
    }
    let mut shapes = BTreeSet::new();
    for f in fs {
        descriptions(f, &mut shapes);
    }
    for d in shapes {
        let (shape, taken) = outer_shape(&d);
        for _ in 0..3 {
            let env = taken.iter().map(|_| rng.gen_range(0..=n)).collect();
            let val = *outside.choose(rng).unwrap();
            m.outer.entry(OuterKey { shape: shape.clone(), env }).or_insert(val);
        }
    }
    let proper: Vec<OuterKey> = m
        .outer
        .keys()
        .filter(|k| {
            let mut w = Assignment::new();
            for (i, &e) in k.env.iter().enumerate() {
                w.params.insert(name(&format!("_f{i}")), e);
            }
            !matches!(proper_witness(&m, &w, &k.shape, logic), Ok(None))
        })
        .cloned()
        .collect();
    for k in proper {
        m.outer.remove(&k);
    }
    (m, v)
}

/// Every description subterm, open ones included.
pub fn descriptions(f: &Formula, out: &mut BTreeSet<Term>) {
    let term = |t: &Term, out: &mut BTreeSet<Term>| {
        if let Term::Descr(_, b) = t {
            out.insert(t.clone());
            descriptions(b, out);
        }
    };
    match f {
        Formula::Atom(_, ts) => ts.iter().for_each(|t| term(t, out)),
        Formula::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Formula::Ex(t) => term(t, out),
        Formula::Not(g) | Formula::Forall(_, g) => descriptions(g, out),
        Formula::And(a, b) => {
            descriptions(a, out);
            descriptions(b, out);
        }
    }
}

/// Premises of a rule instance plus side formulas that make the premise set
/// a more typical branch fragment.
#[derive(Clone, Debug)]
pub struct RuleSample {
    pub instance: RuleInstance,
    pub context: Vec<Formula>,
}

impl RuleSample {
    pub fn premise_set(&self) -> Vec<Formula> {
        let mut out = self.instance.premises.clone();
        for f in &self.context {
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        out
    }
}

fn neg(f: Formula) -> Formula {
    Formula::not(f)
}

/// A random instance of `rule` whose premises fit its schema in `logic`.
pub fn rule_sample<R: Rng>(rule: Rule, logic: Logic, rng: &mut R) -> RuleSample {
    use Rule::*;
    let mut opts = GenOptions::for_logic(logic);
    opts.max_depth = 2;
    if rule == ExI4 {
        opts.params = vec![];
    }
    let mut g = Generator::new(rng, opts);
    let sentence = |g: &mut Generator<R>| g.sentence();
    let ex = |t: &Term| Formula::Ex(t.clone());
    let pick_param = |g: &mut Generator<R>| g.param();
    let body = |g: &mut Generator<R>| {
        let x = name("x");
        (x.clone(), g.open_formula(&x))
    };
    let n = |f: Formula| alpha_normalize(&f);
    let (premises, focus): (Vec<Formula>, Focus) = match rule {
        NegNegE => (vec![neg(neg(sentence(&mut g)))], Focus::None),
        AndE => (vec![Formula::and(sentence(&mut g), sentence(&mut g))], Focus::None),
        NegAndE => (vec![neg(Formula::and(sentence(&mut g), sentence(&mut g)))], Focus::None),
        Bot1 => {
            let f = sentence(&mut g);
            (vec![f.clone(), neg(f)], Focus::None)
        }
        Bot2 => {
            let t = g.closed_term();
            (vec![neg(Formula::Eq(t.clone(), t))], Focus::None)
        }
        Bot3 => {
            let b = pick_param(&mut g);
            (vec![neg(Formula::Eq(b.clone(), b))], Focus::None)
        }
        ForallE1 => {
            let (x, b) = body(&mut g);
            let Term::Param(p) = pick_param(&mut g) else { unreachable!() };
            (vec![Formula::Forall(x, b.into())], Focus::Param(p))
        }
        ForallE2 => {
            let (x, b) = body(&mut g);
            let p = pick_param(&mut g);
            (vec![Formula::Forall(x, b.into()), ex(&p)], Focus::None)
        }
        NegForallE1 | NegForallE2 => {
            let (x, b) = body(&mut g);
            (vec![neg(Formula::Forall(x, b.into()))], Focus::None)
        }
        EqE => loop {
            let h = sentence(&mut g);
            let subs = closed_subterms(&h);
            let Some(s) = subs.choose(g.rng).cloned() else { continue };
            let t = g.closed_term();
            let Some((from, to)) = orient(&s, &t) else { continue };
            let e =
                if g.rng.gen_bool(0.5) { Formula::Eq(s.clone(), t.clone()) } else { Formula::Eq(t.clone(), s.clone()) };
            let count = term_occurrences(&h, &from);
            if count == 0 {
                continue;
            }
            let index = g.rng.gen_range(0..count);
            break (vec![n(e), h], Focus::Occurrence { from, to, index });
        },
        EqI1 | ExI1 => {
            let d = g.descr(1);
            let other = g.closed_term();
            let (p, k) = g.opts.predicates.choose(g.rng).unwrap().clone();
            let mut args = vec![other; k];
            let pos = g.rng.gen_range(0..k);
            args[pos] = d;
            let f = n(Formula::Atom(p, args));
            let pos = if rule == ExI1 { g.rng.gen_range(0..k) } else { pos };
            (vec![f], Focus::Position(pos))
        }
        EqI2 | ExI2 => {
            let d = g.descr(1);
            let other = g.closed_term();
            let swap = g.rng.gen_bool(0.5);
            let f = if swap { Formula::Eq(other, d) } else { Formula::Eq(d, other) };
            let f = n(f);
            let descr_pos: Vec<usize> = crate::calculus::intro_positions(&f, true);
            let pos = if rule == ExI2 { g.rng.gen_range(0..2) } else { *descr_pos.choose(g.rng).unwrap() };
            (vec![f], Focus::Position(pos))
        }
        Cut1 => {
            let Term::Param(b) = pick_param(&mut g) else { unreachable!() };
            let d = alpha_normalize_t(g.descr(1));
            (vec![], Focus::Pair(b, d))
        }
        Cut2 => {
            let b = pick_param(&mut g);
            let d = alpha_normalize_t(g.descr(1));
            (vec![ex(&b)], Focus::Term(d))
        }
        ExE1 => (vec![n(ex(&g.descr(1)))], Focus::None),
        ExE2 => {
            let t = g.closed_term();
            (vec![n(ex(&t))], Focus::None)
        }
        ExI3 => {
            let Term::Param(b) = pick_param(&mut g) else { unreachable!() };
            (vec![], Focus::Param(b))
        }
        ExI4 => (vec![], Focus::None),
        IotaE1 | IotaE2 | NegIotaE1 | NegIotaE2 => {
            let b1 = pick_param(&mut g);
            let d = g.descr(1);
            let id = n(if g.rng.gen_bool(0.5) { Formula::Eq(b1.clone(), d) } else { Formula::Eq(d, b1.clone()) });
            match rule {
                IotaE1 => {
                    let Term::Param(b2) = pick_param(&mut g) else { unreachable!() };
                    (vec![id], Focus::Param(b2))
                }
                IotaE2 => {
                    let b2 = pick_param(&mut g);
                    (vec![id, ex(&b1), ex(&b2)], Focus::None)
                }
                NegIotaE1 => (vec![neg(id)], Focus::None),
                _ => (vec![neg(id), ex(&b1)], Focus::None),
            }
        }
    };
    let context = if g.rng.gen_bool(0.5) { vec![g.sentence()] } else { vec![] };
    RuleSample { instance: RuleInstance::new(rule, premises.into_iter().map(n).collect(), focus), context }
}

fn alpha_normalize_t(t: Term) -> Term {
    crate::syntax::alpha_normalize_term(&t)
}
