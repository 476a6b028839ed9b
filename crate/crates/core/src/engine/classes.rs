use std::collections::HashMap;

use crate::semantics::outer_shape;
use crate::syntax::{closed_subterms, term_cmp, Formula, Term};

/// Union-find over the closed terms of a branch. Identities on the branch are
/// merged, then descriptions with the same shape over merged arguments.
#[derive(Clone, Debug)]
pub struct TermClasses {
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
    parent: Vec<usize>,
}

impl TermClasses {
    pub fn new() -> Self {
        TermClasses { terms: Vec::new(), index: HashMap::new(), parent: Vec::new() }
    }

    pub fn add(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), i);
        self.parent.push(i);
        i
    }

    fn root(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    /// Merge two classes, keeping the least term as root.
    pub fn union(&mut self, a: &Term, b: &Term) -> bool {
        let (i, j) = (self.add(a), self.add(b));
        let (ri, rj) = (self.root(i), self.root(j));
        if ri == rj {
            return false;
        }
        if term_cmp(&self.terms[ri], &self.terms[rj]).is_le() {
            self.parent[rj] = ri;
        } else {
            self.parent[ri] = rj;
        }
        true
    }

    pub fn from_formulas(fs: &[Formula]) -> Self {
        let mut c = TermClasses::new();
        for f in fs {
            for t in closed_subterms(f) {
                c.add(&t);
            }
        }
        for f in fs {
            if let Formula::Eq(s, t) = f {
                if c.index.contains_key(s) && c.index.contains_key(t) {
                    c.union(s, t);
                }
            }
        }
        c.close_congruence();
        c
    }

    fn close_congruence(&mut self) {
        let descrs: Vec<usize> = (0..self.terms.len()).filter(|&i| self.terms[i].is_descr()).collect();
        let mut shapes: Vec<(usize, Term, Vec<usize>)> = Vec::new();
        for i in descrs {
            let (shape, taken) = outer_shape(&self.terms[i]);
            let args = taken.iter().map(|t| self.add(t)).collect();
            shapes.push((i, shape, args));
        }
        loop {
            let mut seen: HashMap<(Term, Vec<usize>), usize> = HashMap::new();
            let mut merges = Vec::new();
            for (i, shape, args) in &shapes {
                let sig = (shape.clone(), args.iter().map(|&a| self.root(a)).collect());
                match seen.get(&sig) {
                    Some(&j) => merges.push((*i, j)),
                    None => {
                        seen.insert(sig, *i);
                    }
                }
            }
            let mut changed = false;
            for (i, j) in merges {
                let (a, b) = (self.terms[i].clone(), self.terms[j].clone());
                changed |= self.union(&a, &b);
            }
            if !changed {
                break;
            }
        }
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    /// The least term of `t`'s class.
    pub fn rep(&self, t: &Term) -> Option<&Term> {
        self.index.get(t).map(|&i| &self.terms[self.root(i)])
    }

    pub fn same(&self, a: &Term, b: &Term) -> bool {
        a == b || matches!((self.index.get(a), self.index.get(b)), (Some(&i), Some(&j)) if self.root(i) == self.root(j))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Classes ordered by representative, members in term order.
    pub fn classes(&self) -> Vec<Vec<Term>> {
        let mut by_root: HashMap<usize, Vec<Term>> = HashMap::new();
        for (i, t) in self.terms.iter().enumerate() {
            by_root.entry(self.root(i)).or_default().push(t.clone());
        }
        let mut out: Vec<Vec<Term>> = by_root.into_values().collect();
        for c in &mut out {
            c.sort_by(term_cmp);
        }
        out.sort_by(|a, b| term_cmp(&a[0], &b[0]));
        out
    }
}

impl Default for TermClasses {
    fn default() -> Self {
        Self::new()
    }
}

pub fn term_classes(fs: &[Formula]) -> TermClasses {
    TermClasses::from_formulas(fs)
}
