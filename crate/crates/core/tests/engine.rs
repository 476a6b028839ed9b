use std::collections::HashSet;

use freedesc::calculus::{BranchSnapshot, Focus, Rule, RuleInstance};
use freedesc::engine::{check_tree, prove, saturated, term_classes, EngineError, NodeStatus, Problem, SearchResult};
use freedesc::syntax::{parse, Formula, Language, Term};
use freedesc::Logic;

fn p(s: &str) -> Formula {
    parse(s, Language::L).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn run(logic: Logic, s: &str) -> SearchResult {
    prove(&Problem::prove(logic, parse(s, logic.language()).unwrap())).unwrap()
}

const THEOREMS: &[(&str, &[Logic])] = &[
    ("P(a) -> P(a)", &Logic::ALL),
    ("~(P(a) & ~P(a))", &Logic::ALL),
    ("(forall x. (P(x) & Q(x))) -> forall x. P(x)", &Logic::ALL),
    ("a = b & b = c -> a = c", &Logic::ALL),
    ("a = b & P(a) -> P(b)", &Logic::ALL),
    ("(forall x. P(x)) -> P(a)", &[Logic::Pqfl, Logic::Nqfl, Logic::NqflMinus]),
    ("E!(a) -> ((forall x. P(x)) -> P(a))", &[Logic::Pfl, Logic::Nfl, Logic::Pqfl, Logic::Nqfl]),
    ("P(a) -> E!(a)", &[Logic::Nfl, Logic::Nqfl]),
    ("E!(a)", &[Logic::Pqfl, Logic::Nqfl]),
];

#[test]
fn proofs_replay() {
    for (s, logics) in THEOREMS {
        for &logic in *logics {
            match run(logic, s) {
                SearchResult::Proved(pr) => {
                    let root = Formula::not(parse(s, logic.language()).unwrap());
                    check_tree(&pr.tree, &root, logic, false).unwrap_or_else(|e| panic!("{s} in {logic}: {e}"));
                    assert!(pr.tree.is_closed());
                    assert_eq!(pr.stats.regenerated, 0, "{s} in {logic}");
                }
                other => panic!("{s} in {logic}: {}", other.verdict()),
            }
        }
    }
}

#[test]
fn non_theorems_are_refuted() {
    let cases: &[(&str, Logic)] = &[
        ("(forall x. P(x)) -> P(a)", Logic::Pfl),
        ("P(a) -> E!(a)", Logic::Pfl),
        ("E!(a)", Logic::Nfl),
        ("exists x. (x = x)", Logic::Pfl),
        ("P(the x. (Q(x))) -> exists y. Q(y)", Logic::Pqfl),
    ];
    for &(s, logic) in cases {
        match run(logic, s) {
            SearchResult::Refuted(r) => {
                let root = Formula::not(p(s));
                check_tree(&r.tree, &root, logic, false).unwrap_or_else(|e| panic!("{s} in {logic}: {e}"));
                assert_eq!(r.tree.nodes[r.leaf].status, NodeStatus::Saturated);
                assert_eq!(r.stats.regenerated, 0);
                assert_eq!(r.stats.fairness_violations, 0);
            }
            other => panic!("{s} in {logic}: {}", other.verdict()),
        }
    }
}

#[test]
fn search_is_deterministic() {
    let s = "forall x. ((the y. (Q(y)) = x) <-> forall z. (Q(z) <-> z = x))";
    for logic in [Logic::Pfl, Logic::Nqfl] {
        let a = run(logic, s);
        let b = run(logic, s);
        assert_eq!(a.tree().to_json(), b.tree().to_json(), "{logic}");
        assert_eq!(a.stats().steps, b.stats().steps);
    }
}

#[test]
fn self_distinctness_closes_by_bot3() {
    let r = prove(&Problem::satisfy(Logic::Nqfl, p("a != a"))).unwrap();
    let SearchResult::Proved(pr) = r else { panic!("{}", r.verdict()) };
    assert!(pr.tree.nodes.iter().any(|n| n.closure() == Some(Rule::Bot3)));
}

#[test]
fn improper_self_distinctness_stays_open() {
    let f = p("the x. (P(x)) != the x. (P(x))");
    let r = prove(&Problem::satisfy(Logic::Nqfl, f)).unwrap();
    assert!(r.is_refuted(), "{}", r.verdict());
}

#[test]
fn nonempty_domain_assumption() {
    let f = p("exists x. (x = x)");
    let r = prove(&Problem::prove(Logic::Pfl, f.clone()).with_nonempty(true)).unwrap();
    let SearchResult::Proved(pr) = r else { panic!("{}", r.verdict()) };
    check_tree(&pr.tree, &Formula::not(f.clone()), Logic::Pfl, true).unwrap();
    assert!(check_tree(&pr.tree, &Formula::not(f.clone()), Logic::Pfl, false).is_err());
    assert!(prove(&Problem::prove(Logic::Pqfl, f).with_nonempty(true)).is_err());
}

#[test]
fn budget_and_problem_errors() {
    let s = "forall x. ((the y. (Q(y)) = x) <-> forall z. (Q(z) <-> z = x))";
    let r = prove(&Problem::prove(Logic::Pfl, p(s)).with_budget(3)).unwrap();
    let SearchResult::Unknown(u) = r else { panic!("{}", r.verdict()) };
    assert_eq!(u.budget, 3);
    assert!(u.open_branches > 0);
    assert_eq!(prove(&Problem::prove(Logic::Pfl, p(s)).with_budget(0)).unwrap_err(), EngineError::ZeroBudget);
    let open = Formula::atom("P", vec![Term::var("x")]);
    assert!(matches!(prove(&Problem::prove(Logic::Pfl, open)), Err(EngineError::InvalidProblem(_))));
}

#[test]
fn tampered_proof_fails_replay() {
    let SearchResult::Proved(pr) = run(Logic::Pfl, "P(a) -> P(a)") else { panic!() };
    let root = Formula::not(p("P(a) -> P(a)"));
    let mut tree = (*pr.tree).clone();
    tree.nodes[1].formulas_added = vec![p("Q(b)")];
    assert!(check_tree(&tree, &root, Logic::Pfl, false).is_err());
    assert!(check_tree(&pr.tree, &Formula::not(p("P(b) -> P(b)")), Logic::Pfl, false).is_err());
}

#[test]
fn saturation() {
    let none = HashSet::new();
    let closed = BranchSnapshot::new([p("P(a)"), p("~P(a)")]);
    assert!(saturated(&closed, Logic::Pfl, false, &none).unwrap());

    let b = BranchSnapshot::new([p("P(a)")]);
    assert!(saturated(&b, Logic::Pfl, false, &none).unwrap());
    assert!(!saturated(&b, Logic::Nfl, false, &none).unwrap());
    let applied: HashSet<RuleInstance> =
        [RuleInstance::new(Rule::ExI1, vec![p("P(a)")], Focus::Position(0))].into_iter().collect();
    assert!(saturated(&b, Logic::Nfl, false, &applied).unwrap());
}

#[test]
fn identity_classes() {
    let fs = [p("a = b"), p("b = c"), p("P(d)")];
    let tc = term_classes(&fs);
    let (a, c, d) = (Term::param("a"), Term::param("c"), Term::param("d"));
    assert!(tc.same(&a, &c));
    assert!(!tc.same(&a, &d));
    assert!(tc.contains(&d));
    let classes = tc.classes();
    assert_eq!(classes.iter().filter(|k| k.len() == 3).count(), 1);
}

#[test]
fn identity_classes_are_congruent() {
    let fs = [p("a = b"), p("c = the x. (R(x, a))"), p("d = the x. (R(x, b))")];
    let tc = term_classes(&fs);
    assert!(tc.same(&Term::param("c"), &Term::param("d")));
}

#[test]
fn open_branches_are_in_normal_form() {
    // Every identity on an open saturated branch is between members of one class, and no
    // formula appears with its complement.
    for (s, logic) in [("P(the x. (Q(x))) -> exists y. Q(y)", Logic::Pqfl), ("a = b -> P(a)", Logic::Nfl)] {
        let SearchResult::Refuted(r) = run(logic, s) else { panic!("{s}") };
        let tc = term_classes(&r.branch);
        let on: HashSet<&Formula> = r.branch.iter().collect();
        for f in &r.branch {
            assert!(!on.contains(&f.complement()), "{s}: {f:?}");
            if let Formula::Eq(x, y) = f {
                assert!(tc.same(x, y));
            }
        }
    }
}
