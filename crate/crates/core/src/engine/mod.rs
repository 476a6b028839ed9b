//! Tableau construction and proof search.

mod check;
mod classes;
mod search;
mod tree;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::calculus::{applicable_instances, BranchSnapshot, CalculusError, RuleInstance};
use crate::countermodel::ExtractedModel;
use crate::logic::Logic;
use crate::syntax::{free_vars, Formula};

pub use check::{check_tree, CheckError};
pub use classes::{term_classes, TermClasses};
pub use tree::{NodeStatus, ProofNode, ProofTree};

pub const DEFAULT_BUDGET: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Root is the negated goal; a closed tableau is a proof.
    Prove,
    /// Root is the goal itself; an open saturated branch is a model.
    Satisfy,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub logic: Logic,
    pub goal: Formula,
    pub mode: Mode,
    pub nonempty: bool,
    /// Maximum number of rule applications.
    pub budget: usize,
}

impl Problem {
    pub fn prove(logic: Logic, goal: Formula) -> Self {
        Problem { logic, goal, mode: Mode::Prove, nonempty: false, budget: DEFAULT_BUDGET }
    }

    pub fn satisfy(logic: Logic, goal: Formula) -> Self {
        Problem { mode: Mode::Satisfy, ..Problem::prove(logic, goal) }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_nonempty(mut self, nonempty: bool) -> Self {
        self.nonempty = nonempty;
        self
    }

    pub fn root(&self) -> Formula {
        match self.mode {
            Mode::Prove => Formula::not(self.goal.clone()),
            Mode::Satisfy => self.goal.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Rule applications that extended the tree.
    pub steps: usize,
    pub branches: usize,
    pub closed_branches: usize,
    pub max_open: usize,
    /// Instances marked applied without extending the tree because a conclusion set was already present.
    pub dismissed: usize,
    /// Instances found by the full recomputation at saturation that incremental generation missed.
    pub regenerated: usize,
    /// Instances applied later than their scheduled deadline.
    pub fairness_violations: usize,
    pub max_wait: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Proof {
    pub tree: Arc<ProofTree>,
    pub stats: Stats,
}

#[derive(Clone, Debug)]
pub struct Refutation {
    pub tree: Arc<ProofTree>,
    /// Leaf node of the open saturated branch.
    pub leaf: usize,
    pub branch: Vec<Formula>,
    pub model: ExtractedModel,
    pub stats: Stats,
}

#[derive(Clone, Debug)]
pub struct BudgetReport {
    pub tree: Arc<ProofTree>,
    pub open_branches: usize,
    pub budget: usize,
    pub stats: Stats,
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum SearchResult {
    Proved(Proof),
    Refuted(Refutation),
    Unknown(BudgetReport),
}

impl SearchResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, SearchResult::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, SearchResult::Refuted(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, SearchResult::Unknown(_))
    }

    pub fn tree(&self) -> &ProofTree {
        match self {
            SearchResult::Proved(p) => &p.tree,
            SearchResult::Refuted(r) => &r.tree,
            SearchResult::Unknown(u) => &u.tree,
        }
    }

    pub fn stats(&self) -> &Stats {
        match self {
            SearchResult::Proved(p) => &p.stats,
            SearchResult::Refuted(r) => &r.stats,
            SearchResult::Unknown(u) => &u.stats,
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            SearchResult::Proved(_) => "proved",
            SearchResult::Refuted(_) => "refuted",
            SearchResult::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub fn prove(problem: &Problem) -> Result<SearchResult, EngineError> {
    let fv = free_vars(&problem.goal);
    if !fv.is_empty() {
        let names: Vec<&str> = fv.iter().map(|n| &**n).collect();
        return Err(EngineError::InvalidProblem(format!("goal has free variables: {}", names.join(", "))));
    }
    let start = Instant::now();
    let mut result = search::Search::new(problem)?.run(problem.root())?;
    let elapsed = start.elapsed();
    match &mut result {
        SearchResult::Proved(p) => p.stats.elapsed = elapsed,
        SearchResult::Refuted(r) => r.stats.elapsed = elapsed,
        SearchResult::Unknown(u) => u.stats.elapsed = elapsed,
    }
    Ok(result)
}

/// Whether no rule instance outside `applied` applies to the branch.
pub fn saturated(
    b: &BranchSnapshot,
    logic: Logic,
    nonempty: bool,
    applied: &HashSet<RuleInstance>,
) -> Result<bool, CalculusError> {
    let on: HashSet<&Formula> = b.formulas.iter().collect();
    if b.formulas.iter().any(|f| matches!(f, Formula::Not(g) if on.contains(&**g))) {
        return Ok(true);
    }
    Ok(applicable_instances(b, logic, nonempty, applied)?.is_empty())
}
