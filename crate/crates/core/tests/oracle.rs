use freedesc::calculus::Rule;
use freedesc::oracle::{
    enumerate_models, oracle_rule_soundness, oracle_satisfiable, oracle_validity, oracle_validity_with,
    EnumerationSpace, OracleError, OracleVerdict,
};
use freedesc::semantics::{eval_formula, interpret_term};
use freedesc::syntax::{parse, Formula, Language, Term};
use freedesc::Logic;

fn p(s: &str) -> Formula {
    parse(s, Language::L).unwrap_or_else(|e| panic!("{s}: {e}"))
}

#[test]
fn self_identity_valid_in_pqfl() {
    assert_eq!(oracle_validity(&p("a = a"), Logic::Pqfl, 3).unwrap(), OracleVerdict::ValidUpTo(3));
}

#[test]
fn self_identity_fails_in_nfl() {
    let OracleVerdict::Countermodel(m, v) = oracle_validity(&p("a = a"), Logic::Nfl, 2).unwrap() else { panic!() };
    assert!(!m.existing.contains(&v.params["a"]));
}

#[test]
fn improper_self_identity_fails_in_nqfl() {
    let f = p("the x. (P(x)) = the x. (P(x))");
    let OracleVerdict::Countermodel(m, v) = oracle_validity(&f, Logic::Nqfl, 2).unwrap() else { panic!() };
    let t = Term::descr("x", Formula::atom("P", vec![Term::var("x")]));
    assert!(!m.existing.contains(&interpret_term(&m, &v, &t, Logic::Nqfl).unwrap()));
    assert!(m.interp.get("P").is_none_or(|ts| ts.len() != 1));
}

#[test]
fn validity_is_monotone_in_the_bound() {
    for s in ["(forall x. P(x)) -> P(a)", "E!(a) | ~E!(a)", "exists x. (x = x)", "P(the x. (Q(x))) -> Q(the x. (Q(x)))"]
    {
        for logic in [Logic::Pfl, Logic::Nfl, Logic::Pqfl, Logic::Nqfl] {
            let verdicts: Vec<bool> = (1..=3).map(|n| oracle_validity(&p(s), logic, n).unwrap().is_valid()).collect();
            assert!(verdicts.windows(2).all(|w| w[0] || !w[1]), "{s} in {logic}: {verdicts:?}");
        }
    }
}

#[test]
fn nonempty_restricts_models() {
    let f = p("exists x. (x = x)");
    assert!(!oracle_validity(&f, Logic::Pfl, 2).unwrap().is_valid());
    assert!(oracle_validity_with(&f, Logic::Pfl, 2, true).unwrap().is_valid());
}

#[test]
fn enumeration_counts() {
    // One monadic predicate, no parameters, PFL: every D of size n, every DE, every I(P).
    let space = EnumerationSpace::for_formulas(&[p("forall x. P(x)")], Logic::Pfl, 2).unwrap();
    let models = enumerate_models(&space).unwrap();
    assert!(!models.is_empty());
    for (m, _) in &models {
        assert!(m.existing.is_subset(&m.domain));
        assert!(m.domain.len() <= 2);
    }
    let sizes: Vec<usize> = models.iter().map(|(m, _)| m.domain.len()).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));

    // Quasi logics send parameters into DE.
    let space = EnumerationSpace::for_formulas(&[p("P(a)")], Logic::Pqfl, 2).unwrap();
    for (m, v) in enumerate_models(&space).unwrap() {
        assert!(m.existing.contains(&v.params["a"]));
    }
}

#[test]
fn enumeration_rejects_open_input() {
    let open = p("forall x. P(the y. (R(x, y)))");
    assert!(matches!(oracle_validity(&open, Logic::Pfl, 2), Err(OracleError::OpenDescription(_))));
    assert_eq!(oracle_validity(&p("P(a)"), Logic::Pfl, 0), Err(OracleError::ZeroBound));
}

#[test]
fn satisfiable_sets() {
    let fs = [p("P(a)"), p("~P(b)")];
    let (m, v) = oracle_satisfiable(&fs, Logic::Pqfl, 2, false).unwrap().unwrap();
    for f in &fs {
        assert!(eval_formula(&m, &v, f, Logic::Pqfl).unwrap());
    }
    assert!(oracle_satisfiable(&[p("P(a)"), p("~P(a)")], Logic::Pqfl, 3, false).unwrap().is_none());
}

#[test]
fn rule_soundness_samples() {
    for (rule, logic) in [(Rule::AndE, Logic::Pfl), (Rule::IotaE1, Logic::Pqfl), (Rule::ExE2, Logic::Nfl)] {
        let report = oracle_rule_soundness(rule, logic, 20, 2, 7).unwrap();
        assert_eq!(report.samples, 20);
        assert!(report.tested > 0, "{rule} in {logic}");
        assert!(report.counterexamples.is_empty(), "{rule} in {logic}: {}", report.counterexamples[0].describe());
    }
    assert!(matches!(oracle_rule_soundness(Rule::ExE2, Logic::Pfl, 5, 2, 0), Err(OracleError::RuleNotInLogic(..))));
}
