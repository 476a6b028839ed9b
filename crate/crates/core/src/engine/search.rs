use std::collections::{HashMap, HashSet, VecDeque};

use im::{HashMap as PMap, HashSet as PSet, Vector};
use std::sync::Arc;

use indexmap::IndexSet;

use crate::calculus::{
    applicable_instances, apply_instance, intro_positions, orient, param_descr, rules_for_logic, BranchSnapshot, Focus,
    Rule, RuleInstance,
};
use crate::countermodel::{extract_model, verify_model};
use crate::logic::Logic;
use crate::syntax::{
    alpha_normalize, closed_subterms, name, params_of_formula, rename_param, term_occurrences, Formula, Name, Term,
};

use super::tree::{NodeStatus, ProofNode, ProofTree};
use super::{BudgetReport, EngineError, Mode, Problem, Proof, Refutation, SearchResult, Stats};

type Fid = u32;
type Tid = u32;
type Kid = u32;

/// Steps a branch runs before the next open branch gets a turn.
const SLICE: usize = 64;
/// The second queue gets one slot in this many steps even when the first is busy.
const SECOND_TIER_PERIOD: usize = 8;
/// Same for the queue of rules that introduce fresh parameters.
const FRESH_TIER_PERIOD: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum FocusKey {
    None,
    Param(Tid),
    Term(Tid),
    Position(u32),
    Occurrence(Tid, Tid, u32),
    Pair(Tid, Tid),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    rule: Rule,
    premises: Vec<Fid>,
    focus: FocusKey,
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    key: Kid,
    enqueued_at: usize,
    deadline: usize,
}

#[derive(Default)]
struct Interner {
    formulas: IndexSet<Formula>,
    terms_of: Vec<Vec<Tid>>,
    terms: IndexSet<Term>,
}

impl Interner {
    fn formula(&mut self, f: Formula) -> Fid {
        if let Some(i) = self.formulas.get_index_of(&f) {
            return i as Fid;
        }
        let ts = closed_subterms(&f).into_iter().map(|t| self.term(t)).collect();
        let (i, _) = self.formulas.insert_full(f);
        self.terms_of.push(ts);
        i as Fid
    }

    fn term(&mut self, t: Term) -> Tid {
        self.terms.insert_full(t).0 as Tid
    }

    fn get_formula(&self, f: &Formula) -> Option<Fid> {
        self.formulas.get_index_of(f).map(|i| i as Fid)
    }

    fn f(&self, i: Fid) -> &Formula {
        &self.formulas[i as usize]
    }

    fn t(&self, i: Tid) -> &Term {
        &self.terms[i as usize]
    }
}

/// Branch state is persistent so that splitting shares structure with the parent.
#[derive(Clone, Default)]
struct Branch {
    formulas: Vector<Fid>,
    origin: PMap<Fid, usize>,
    seen: PSet<Kid>,
    q0: Vector<Pending>,
    q1: Vector<Pending>,
    q2: Vector<Pending>,
    q3: Vector<Pending>,
    params: Vector<Tid>,
    existing: Vector<Tid>,
    dds: Vector<Tid>,
    known_terms: PSet<Tid>,
    universals: Vector<Fid>,
    iota: Vector<(Fid, Tid)>,
    neg_iota: Vector<(Fid, Tid)>,
    rewrites: Vector<(Fid, Tid, Tid)>,
    leaf: usize,
    local_step: usize,
    closed: bool,
}

impl Branch {
    fn on(&self, f: Fid) -> bool {
        self.origin.contains_key(&f)
    }
}

enum Step {
    Continue,
    Idle,
    Budget,
}

pub(super) struct Search {
    logic: Logic,
    mode: Mode,
    rules: [bool; 25],
    nonempty: bool,
    budget: usize,
    int: Interner,
    keys: IndexSet<Key>,
    /// Conclusions of deterministic instances, computed once per key.
    cached: HashMap<Kid, Vec<Vec<Fid>>>,
    nodes: Vec<ProofNode>,
    node_formulas: Vec<Vec<Fid>>,
    node_premises: Vec<Vec<(usize, Fid)>>,
    next_fresh: usize,
    stats: Stats,
    ex_cache: HashMap<Tid, Fid>,
}

fn rule_index(r: Rule) -> usize {
    Rule::ALL.iter().position(|&q| q == r).expect("listed rule")
}

fn precomputable(r: Rule) -> bool {
    matches!(
        r,
        Rule::NegNegE
            | Rule::AndE
            | Rule::ForallE1
            | Rule::ForallE2
            | Rule::ExE2
            | Rule::ExI1
            | Rule::ExI2
            | Rule::ExI3
    )
}

fn second_tier(r: Rule) -> bool {
    matches!(r, Rule::Cut1 | Rule::Cut2 | Rule::EqE)
}

impl Search {
    pub(super) fn new(p: &Problem) -> Result<Self, EngineError> {
        if p.budget == 0 {
            return Err(EngineError::ZeroBudget);
        }
        if p.logic == Logic::NqflMinus && p.goal.contains_ex() {
            return Err(EngineError::InvalidProblem("existence predicate not in L⁻".into()));
        }
        let table = rules_for_logic(p.logic, p.nonempty).map_err(|e| EngineError::InvalidProblem(e.to_string()))?;
        let mut rules = [false; 25];
        for r in table {
            rules[rule_index(r)] = true;
        }
        let next_fresh = params_of_formula(&p.goal)
            .iter()
            .filter_map(|a| a.strip_prefix("_k").and_then(|n| n.parse::<usize>().ok()))
            .max()
            .unwrap_or(0)
            + 1;
        Ok(Search {
            logic: p.logic,
            mode: p.mode,
            rules,
            nonempty: p.nonempty,
            budget: p.budget,
            int: Interner::default(),
            keys: IndexSet::new(),
            cached: HashMap::new(),
            nodes: Vec::new(),
            node_formulas: Vec::new(),
            node_premises: Vec::new(),
            next_fresh,
            stats: Stats::default(),
            ex_cache: HashMap::new(),
        })
    }

    fn has(&self, r: Rule) -> bool {
        self.rules[rule_index(r)]
    }

    fn new_node(
        &mut self,
        parent: Option<usize>,
        rule: Option<Rule>,
        premises: Vec<(usize, Fid)>,
        added: Vec<Fid>,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(ProofNode {
            id,
            rule,
            premises: Vec::new(),
            formulas_added: Vec::new(),
            children: Vec::new(),
            status: NodeStatus::Pending,
        });
        self.node_formulas.push(added);
        self.node_premises.push(premises);
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
            self.nodes[p].status = NodeStatus::Interior;
        }
        id
    }

    fn ex_of(&mut self, t: Tid) -> Fid {
        if let Some(&f) = self.ex_cache.get(&t) {
            return f;
        }
        let f = self.int.formula(Formula::Ex(self.int.t(t).clone()));
        self.ex_cache.insert(t, f);
        f
    }

    pub(super) fn run(mut self, root: Formula) -> Result<SearchResult, EngineError> {
        let root = alpha_normalize(&root);
        let rid = self.int.formula(root);
        let node = self.new_node(None, None, vec![], vec![rid]);
        let mut b = Branch { leaf: node, ..Branch::default() };
        self.stats.branches = 1;
        self.add(&mut b, rid, node);
        if self.has(Rule::ExI4) {
            self.enqueue(&mut b, Key { rule: Rule::ExI4, premises: vec![], focus: FocusKey::None });
        }
        let mut open: VecDeque<Branch> = VecDeque::new();
        if !b.closed {
            open.push_back(b);
        }
        while let Some(mut b) = open.pop_front() {
            let mut steps_here = 0;
            while !b.closed && steps_here < SLICE {
                match self.step(&mut b, &mut open)? {
                    Step::Continue => steps_here += 1,
                    Step::Budget => {
                        open.push_front(b);
                        return Ok(self.unknown(open));
                    }
                    Step::Idle => {
                        let missing = self.missing_instances(&b)?;
                        if missing.is_empty() {
                            return self.refuted(b, open);
                        }
                        self.stats.regenerated += missing.len();
                        for k in missing {
                            if let Some(id) = self.keys.get_index_of(&k) {
                                b.seen.remove(&(id as Kid));
                            }
                            self.enqueue(&mut b, k);
                        }
                    }
                }
            }
            if b.closed {
                self.stats.closed_branches += 1;
            } else {
                open.push_back(b);
            }
            self.stats.max_open = self.stats.max_open.max(open.len());
        }
        Ok(self.proved())
    }

    fn pop(&mut self, b: &mut Branch) -> Option<Pending> {
        if let Some(p) = b.q0.pop_front() {
            return Some(p);
        }
        let fresh_turn = b.local_step % FRESH_TIER_PERIOD == FRESH_TIER_PERIOD / 2 + 3;
        if fresh_turn && !b.q3.is_empty() {
            return b.q3.pop_front();
        }
        let second_turn = b.local_step % SECOND_TIER_PERIOD == SECOND_TIER_PERIOD - 1;
        if !b.q2.is_empty() && (b.q1.is_empty() || second_turn) {
            return b.q2.pop_front();
        }
        b.q1.pop_front().or_else(|| b.q3.pop_front())
    }

    fn step(&mut self, b: &mut Branch, open: &mut VecDeque<Branch>) -> Result<Step, EngineError> {
        let Some(p) = self.pop(b) else { return Ok(Step::Idle) };
        b.local_step += 1;
        let wait = b.local_step - p.enqueued_at;
        self.stats.max_wait = self.stats.max_wait.max(wait);
        if b.local_step > p.deadline {
            self.stats.fairness_violations += 1;
        }
        let key = self.keys[p.key as usize].clone();
        if key.rule == Rule::ExI4 && !b.params.is_empty() {
            self.stats.dismissed += 1;
            return Ok(Step::Continue);
        }
        let (sets, fresh) = match self.cached.get(&p.key) {
            Some(sets) => (sets.clone(), None),
            None => self.conclusions(&key)?,
        };
        if self.subsumed(b, &sets, fresh.as_ref()) {
            if fresh.is_some() {
                self.next_fresh -= 1;
            }
            self.stats.dismissed += 1;
            return Ok(Step::Continue);
        }
        if self.stats.steps >= self.budget {
            if fresh.is_some() {
                self.next_fresh -= 1;
            }
            b.q0.push_front(p);
            return Ok(Step::Budget);
        }
        self.stats.steps += 1;
        let premises: Vec<(usize, Fid)> = key.premises.iter().map(|&f| (b.origin[&f], f)).collect();
        let parent = b.leaf;
        let mut children = Vec::new();
        for set in &sets {
            children.push(self.new_node(Some(parent), Some(key.rule), premises.clone(), set.clone()));
        }
        self.stats.branches += sets.len() - 1;
        let fresh = fresh.map(|a| self.int.term(Term::Param(a)));
        let mut siblings = Vec::new();
        for (i, set) in sets.iter().enumerate().skip(1) {
            let mut c = b.clone();
            c.leaf = children[i];
            for &f in set {
                self.add(&mut c, f, children[i]);
                if c.closed {
                    break;
                }
            }
            self.introduced(&mut c, fresh);
            if c.closed {
                self.stats.closed_branches += 1;
            } else {
                siblings.push(c);
            }
        }
        b.leaf = children[0];
        for &f in &sets[0] {
            self.add(b, f, children[0]);
            if b.closed {
                break;
            }
        }
        self.introduced(b, fresh);
        for c in siblings.into_iter().rev() {
            open.push_front(c);
        }
        Ok(Step::Continue)
    }

    /// Conclusion sets of an instance as interned ids, with the fresh parameter used.
    fn conclusions(&mut self, k: &Key) -> Result<(Vec<Vec<Fid>>, Option<Name>), EngineError> {
        let inst = self.instance(k);
        let mut used = None;
        let counter = &mut self.next_fresh;
        let sets = apply_instance(&inst, &mut || {
            let a = name(&format!("_k{}", *counter));
            *counter += 1;
            used = Some(a.clone());
            a
        })
        .map_err(|e| EngineError::Invariant(format!("{e} for {}", k.rule)))?;
        let ids = sets.into_iter().map(|s| s.into_iter().map(|f| self.int.formula(f)).collect()).collect();
        Ok((ids, used))
    }

    /// On the branch, possibly with the sides of an identity swapped.
    fn on_mirror(&self, b: &Branch, f: &Formula) -> bool {
        if self.int.get_formula(f).is_some_and(|g| b.on(g)) {
            return true;
        }
        let flip = |g: &Formula| match g {
            Formula::Eq(s, t) => Some(Formula::Eq(t.clone(), s.clone())),
            _ => None,
        };
        let g = match f {
            Formula::Not(h) => flip(h).map(Formula::not),
            g => flip(g),
        };
        g.and_then(|g| self.int.get_formula(&g)).is_some_and(|g| b.on(g))
    }

    fn subsumed(&mut self, b: &Branch, sets: &[Vec<Fid>], fresh: Option<&Name>) -> bool {
        for set in sets {
            if set.iter().all(|&f| b.on(f) || self.on_mirror(b, self.int.f(f))) {
                return true;
            }
            let Some(a) = fresh else { continue };
            for &p in &b.params {
                let Term::Param(c) = self.int.t(p).clone() else { continue };
                let hit = set.iter().all(|&f| {
                    let g = alpha_normalize(&rename_param(self.int.f(f), a, &c));
                    self.on_mirror(b, &g)
                });
                if hit {
                    return true;
                }
            }
        }
        false
    }

    fn instance(&self, k: &Key) -> RuleInstance {
        let t = |i: &Tid| self.int.t(*i).clone();
        let pname = |i: &Tid| match self.int.t(*i) {
            Term::Param(a) => a.clone(),
            _ => unreachable!("parameter focus"),
        };
        let focus = match &k.focus {
            FocusKey::None => Focus::None,
            FocusKey::Param(p) => Focus::Param(pname(p)),
            FocusKey::Term(d) => Focus::Term(t(d)),
            FocusKey::Position(i) => Focus::Position(*i as usize),
            FocusKey::Occurrence(from, to, index) => {
                Focus::Occurrence { from: t(from), to: t(to), index: *index as usize }
            }
            FocusKey::Pair(p, d) => Focus::Pair(pname(p), t(d)),
        };
        RuleInstance::new(k.rule, k.premises.iter().map(|&f| self.int.f(f).clone()).collect(), focus)
    }

    fn key_of(&mut self, i: &RuleInstance) -> Key {
        let mut t = |x: &Term| self.int.term(x.clone());
        let p = |a: &Name| Term::Param(a.clone());
        let focus = match &i.focus {
            Focus::None => FocusKey::None,
            Focus::Param(a) => FocusKey::Param(t(&p(a))),
            Focus::Term(d) => FocusKey::Term(t(d)),
            Focus::Position(k) => FocusKey::Position(*k as u32),
            Focus::Occurrence { from, to, index } => FocusKey::Occurrence(t(from), t(to), *index as u32),
            Focus::Pair(a, d) => FocusKey::Pair(t(&p(a)), t(d)),
        };
        let premises = i.premises.iter().map(|f| self.int.formula(f.clone())).collect();
        Key { rule: i.rule, premises, focus }
    }

    fn closes(&self, b: &Branch, f: Fid) -> bool {
        let g = self.int.f(f);
        if self.int.get_formula(&g.complement()).is_some_and(|c| b.on(c)) {
            return true;
        }
        if let Formula::Not(h) = g {
            if let Formula::Eq(s, t) = &**h {
                return s == t && (self.has(Rule::Bot2) || (self.has(Rule::Bot3) && matches!(s, Term::Param(_))));
            }
        }
        false
    }

    fn enqueue(&mut self, b: &mut Branch, k: Key) {
        if !self.has(k.rule) {
            return;
        }
        let rule = k.rule;
        let (id, new) = self.keys.insert_full(k);
        let id = id as Kid;
        if b.seen.contains(&id) {
            return;
        }
        b.seen.insert(id);
        if new && precomputable(rule) {
            let k = self.keys[id as usize].clone();
            match self.conclusions(&k) {
                Ok((sets, _)) => {
                    self.cached.insert(id, sets);
                }
                Err(_) => {
                    self.stats.dismissed += 1;
                    return;
                }
            }
        } else if precomputable(rule) && !self.cached.contains_key(&id) {
            self.stats.dismissed += 1;
            return;
        }
        let mut urgent = false;
        if let Some(sets) = self.cached.get(&id) {
            if sets[0].iter().all(|&f| b.on(f)) {
                self.stats.dismissed += 1;
                return;
            }
            urgent = sets[0].iter().any(|&f| self.closes(b, f));
        }
        let now = b.local_step;
        let pending = |deadline| Pending { key: id, enqueued_at: now, deadline };
        if urgent {
            b.q0.push_back(pending(usize::MAX));
        } else if second_tier(rule) {
            let ahead = b.q2.len() + 1;
            b.q2.push_back(pending(now + SECOND_TIER_PERIOD * (ahead + 1)));
        } else if rule.introduces_fresh() {
            let ahead = b.q3.len() + 1;
            b.q3.push_back(pending(now + FRESH_TIER_PERIOD * (ahead + 1)));
        } else {
            let ahead = b.q1.len() + 1;
            b.q1.push_back(pending(now + 2 * ahead + 2));
        }
    }

    fn close(&mut self, b: &mut Branch, rule: Rule, premises: Vec<Fid>) {
        let prem = premises.iter().map(|&f| (b.origin[&f], f)).collect();
        let id = self.new_node(Some(b.leaf), Some(rule), prem, vec![]);
        self.nodes[id].status = NodeStatus::Closed;
        b.leaf = id;
        b.closed = true;
        b.q0 = Vector::new();
        b.q1 = Vector::new();
        b.q2 = Vector::new();
        b.q3 = Vector::new();
    }

    fn add(&mut self, b: &mut Branch, f: Fid, node: usize) {
        if b.closed || b.on(f) {
            return;
        }
        b.origin.insert(f, node);
        b.formulas.push_back(f);
        let formula = self.int.f(f).clone();

        if let Some(c) = self.int.get_formula(&formula.complement()).filter(|&c| b.on(c)) {
            let (pos, neg) = if matches!(formula, Formula::Not(_)) { (c, f) } else { (f, c) };
            self.close(b, Rule::Bot1, vec![pos, neg]);
            return;
        }
        if let Formula::Not(g) = &formula {
            if let Formula::Eq(s, t) = &**g {
                if s == t {
                    if self.has(Rule::Bot2) {
                        self.close(b, Rule::Bot2, vec![f]);
                        return;
                    }
                    if self.has(Rule::Bot3) && matches!(s, Term::Param(_)) {
                        self.close(b, Rule::Bot3, vec![f]);
                        return;
                    }
                }
            }
        }

        let terms = self.int.terms_of[f as usize].clone();
        let fresh_terms: Vec<Tid> = terms.iter().copied().filter(|t| !b.known_terms.contains(t)).collect();
        for &t in &fresh_terms {
            b.known_terms.insert(t);
        }
        for &t in &fresh_terms {
            if matches!(self.int.t(t), Term::Param(_)) {
                self.new_param(b, t);
            } else {
                self.new_dd(b, t);
            }
        }

        let rewrites = b.rewrites.clone();
        for (e, from, to) in rewrites {
            if terms.contains(&from) {
                self.rewrite_instances(b, e, from, to, f);
            }
        }

        let one = vec![f];
        let key = |rule, premises: Vec<Fid>, focus| Key { rule, premises, focus };
        match &formula {
            Formula::Not(g) => match &**g {
                Formula::Not(_) => self.enqueue(b, key(Rule::NegNegE, one, FocusKey::None)),
                Formula::And(..) => self.enqueue(b, key(Rule::NegAndE, one, FocusKey::None)),
                Formula::Forall(..) => {
                    self.enqueue(b, key(Rule::NegForallE1, one.clone(), FocusKey::None));
                    self.enqueue(b, key(Rule::NegForallE2, one, FocusKey::None));
                }
                Formula::Eq(s, t) => {
                    if let Some((p, _)) = param_descr(s, t) {
                        let pt = self.int.term(Term::Param(p));
                        b.neg_iota.push_back((f, pt));
                        self.enqueue(b, key(Rule::NegIotaE1, one, FocusKey::None));
                        if b.existing.contains(&pt) {
                            let e = self.ex_of(pt);
                            self.enqueue(b, key(Rule::NegIotaE2, vec![f, e], FocusKey::None));
                        }
                    }
                }
                _ => {}
            },
            Formula::And(..) => self.enqueue(b, key(Rule::AndE, one, FocusKey::None)),
            Formula::Forall(..) => {
                b.universals.push_back(f);
                for p in b.params.clone() {
                    self.enqueue(b, key(Rule::ForallE1, one.clone(), FocusKey::Param(p)));
                }
                for p in b.existing.clone() {
                    let e = self.ex_of(p);
                    self.enqueue(b, key(Rule::ForallE2, vec![f, e], FocusKey::None));
                }
            }
            Formula::Ex(t) => {
                if t.is_descr() {
                    self.enqueue(b, key(Rule::ExE1, one.clone(), FocusKey::None));
                }
                self.enqueue(b, key(Rule::ExE2, one, FocusKey::None));
                if matches!(t, Term::Param(_)) {
                    let pt = self.int.term(t.clone());
                    self.ex_cache.insert(pt, f);
                    self.new_existing(b, pt, f);
                }
            }
            Formula::Atom(..) | Formula::Eq(..) => {
                let (ex_rule, eq_rule) = if matches!(formula, Formula::Atom(..)) {
                    (Rule::ExI1, Rule::EqI1)
                } else {
                    (Rule::ExI2, Rule::EqI2)
                };
                for i in intro_positions(&formula, false) {
                    self.enqueue(b, key(ex_rule, one.clone(), FocusKey::Position(i as u32)));
                }
                for i in intro_positions(&formula, true) {
                    self.enqueue(b, key(eq_rule, one.clone(), FocusKey::Position(i as u32)));
                }
                if let Formula::Eq(s, t) = &formula {
                    if let Some((p, _)) = param_descr(s, t) {
                        let pt = self.int.term(Term::Param(p));
                        b.iota.push_back((f, pt));
                        for q in b.params.clone() {
                            self.enqueue(b, key(Rule::IotaE1, one.clone(), FocusKey::Param(q)));
                        }
                        if b.existing.contains(&pt) {
                            let e1 = self.ex_of(pt);
                            for q in b.existing.clone() {
                                let e2 = self.ex_of(q);
                                self.enqueue(b, key(Rule::IotaE2, vec![f, e1, e2], FocusKey::None));
                            }
                        }
                    }
                    if let Some((from, to)) = orient(s, t) {
                        let (from, to) = (self.int.term(from), self.int.term(to));
                        b.rewrites.push_back((f, from, to));
                        for g in b.formulas.clone() {
                            if self.int.terms_of[g as usize].contains(&from) {
                                self.rewrite_instances(b, f, from, to, g);
                            }
                        }
                    }
                }
            }
        }
    }

    fn rewrite_instances(&mut self, b: &mut Branch, e: Fid, from: Tid, to: Tid, g: Fid) {
        let n = term_occurrences(self.int.f(g), self.int.t(from));
        for k in 0..n {
            self.enqueue(
                b,
                Key { rule: Rule::EqE, premises: vec![e, g], focus: FocusKey::Occurrence(from, to, k as u32) },
            );
        }
    }

    /// A fresh parameter belongs to the branch even when no conclusion mentions it.
    fn introduced(&mut self, b: &mut Branch, fresh: Option<Tid>) {
        if let Some(p) = fresh {
            if !b.closed && !b.known_terms.contains(&p) {
                b.known_terms.insert(p);
                self.new_param(b, p);
            }
        }
    }

    fn new_param(&mut self, b: &mut Branch, p: Tid) {
        b.params.push_back(p);
        for u in b.universals.clone() {
            self.enqueue(b, Key { rule: Rule::ForallE1, premises: vec![u], focus: FocusKey::Param(p) });
        }
        self.enqueue(b, Key { rule: Rule::ExI3, premises: vec![], focus: FocusKey::Param(p) });
        for d in b.dds.clone() {
            self.enqueue(b, Key { rule: Rule::Cut1, premises: vec![], focus: FocusKey::Pair(p, d) });
        }
        for (id, _) in b.iota.clone() {
            self.enqueue(b, Key { rule: Rule::IotaE1, premises: vec![id], focus: FocusKey::Param(p) });
        }
    }

    fn new_dd(&mut self, b: &mut Branch, d: Tid) {
        b.dds.push_back(d);
        for p in b.params.clone() {
            self.enqueue(b, Key { rule: Rule::Cut1, premises: vec![], focus: FocusKey::Pair(p, d) });
        }
        for p in b.existing.clone() {
            let e = self.ex_of(p);
            self.enqueue(b, Key { rule: Rule::Cut2, premises: vec![e], focus: FocusKey::Term(d) });
        }
    }

    fn new_existing(&mut self, b: &mut Branch, p: Tid, ex: Fid) {
        b.existing.push_back(p);
        for u in b.universals.clone() {
            self.enqueue(b, Key { rule: Rule::ForallE2, premises: vec![u, ex], focus: FocusKey::None });
        }
        for d in b.dds.clone() {
            self.enqueue(b, Key { rule: Rule::Cut2, premises: vec![ex], focus: FocusKey::Term(d) });
        }
        for (id, b1) in b.iota.clone() {
            if b1 == p {
                for q in b.existing.clone() {
                    let e2 = self.ex_of(q);
                    self.enqueue(b, Key { rule: Rule::IotaE2, premises: vec![id, ex, e2], focus: FocusKey::None });
                }
            } else if b.existing.contains(&b1) {
                let e1 = self.ex_of(b1);
                self.enqueue(b, Key { rule: Rule::IotaE2, premises: vec![id, e1, ex], focus: FocusKey::None });
            }
        }
        for (nf, q) in b.neg_iota.clone() {
            if q == p {
                self.enqueue(b, Key { rule: Rule::NegIotaE2, premises: vec![nf, ex], focus: FocusKey::None });
            }
        }
    }

    fn snapshot(&self, b: &Branch) -> Vec<Formula> {
        b.formulas.iter().map(|&f| self.int.f(f).clone()).collect()
    }

    /// Instances the full recomputation finds that incremental generation never saw.
    fn missing_instances(&mut self, b: &Branch) -> Result<Vec<Key>, EngineError> {
        let applied: HashSet<RuleInstance> =
            b.seen.iter().map(|&k| self.instance(&self.keys[k as usize].clone())).collect();
        let snap = BranchSnapshot { formulas: self.snapshot(b) };
        let all = applicable_instances(&snap, self.logic, self.nonempty, &applied)
            .map_err(|e| EngineError::Invariant(e.to_string()))?;
        Ok(all.iter().filter(|i| !(i.rule == Rule::ExI4 && !b.params.is_empty())).map(|i| self.key_of(i)).collect())
    }

    fn finish_tree(&mut self) -> ProofTree {
        for i in 0..self.nodes.len() {
            self.nodes[i].formulas_added = self.node_formulas[i].iter().map(|&f| self.int.f(f).clone()).collect();
            self.nodes[i].premises = self.node_premises[i].iter().map(|&(n, f)| (n, self.int.f(f).clone())).collect();
        }
        ProofTree { nodes: std::mem::take(&mut self.nodes) }
    }

    fn proved(mut self) -> SearchResult {
        let tree = self.finish_tree();
        SearchResult::Proved(Proof { tree: Arc::new(tree), stats: self.stats })
    }

    fn unknown(mut self, open: VecDeque<Branch>) -> SearchResult {
        let open_branches = open.len();
        let tree = self.finish_tree();
        SearchResult::Unknown(BudgetReport {
            tree: Arc::new(tree),
            open_branches,
            budget: self.budget,
            stats: self.stats,
        })
    }

    fn refuted(mut self, b: Branch, open: VecDeque<Branch>) -> Result<SearchResult, EngineError> {
        let branch = self.snapshot(&b);
        let model = extract_model(&branch, self.logic).map_err(|e| EngineError::Invariant(e.to_string()))?;
        verify_model(&model, &branch, self.logic)
            .map_err(|e| EngineError::Invariant(format!("countermodel rejected: {e}")))?;
        self.nodes[b.leaf].status = NodeStatus::Saturated;
        self.stats.max_open = self.stats.max_open.max(open.len() + 1);
        let _ = self.mode;
        let tree = self.finish_tree();
        Ok(SearchResult::Refuted(Refutation { tree: Arc::new(tree), leaf: b.leaf, branch, model, stats: self.stats }))
    }
}
