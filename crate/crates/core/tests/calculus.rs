use std::collections::HashSet;

use freedesc::calculus::{
    applicable_instances, apply_instance, rules_for_logic, BranchSnapshot, CalculusError, Focus, Rule, RuleInstance,
};
use freedesc::syntax::{name, parse, Formula, Language, Name, Term};
use freedesc::Logic;

fn p(s: &str) -> Formula {
    parse(s, Language::L).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn no_fresh() -> impl FnMut() -> Name {
    || panic!("no fresh parameter expected")
}

fn counter() -> impl FnMut() -> Name {
    let mut k = 0;
    move || {
        k += 1;
        name(&format!("_n{k}"))
    }
}

#[test]
fn rule_tables() {
    let nqflm = rules_for_logic(Logic::NqflMinus, false).unwrap();
    assert!(nqflm.contains(&Rule::Cut1) && !nqflm.contains(&Rule::Cut2));
    assert!(nqflm.contains(&Rule::EqI1) && nqflm.contains(&Rule::EqI2));
    assert!(!nqflm.iter().any(|r| matches!(r, Rule::ExE1 | Rule::ExI1 | Rule::ExI3)));

    let nfl = rules_for_logic(Logic::Nfl, false).unwrap();
    assert!(nfl.contains(&Rule::ExE2));
    assert!(!nfl.contains(&Rule::Bot2) && !nfl.contains(&Rule::Bot3));

    let pfl = rules_for_logic(Logic::Pfl, false).unwrap();
    let pfl_ne = rules_for_logic(Logic::Pfl, true).unwrap();
    assert!(pfl.is_subset(&pfl_ne));
    assert_eq!(pfl_ne.difference(&pfl).copied().collect::<Vec<_>>(), [Rule::ExI4]);

    for logic in Logic::ALL {
        let rules = rules_for_logic(logic, false).unwrap();
        assert!(rules.contains(&Rule::Bot1) && rules.contains(&Rule::EqE), "{logic}");
        assert_eq!(rules.contains(&Rule::ForallE1), logic.is_quasi(), "{logic}");
    }
    assert_eq!(rules_for_logic(Logic::Pqfl, true), Err(CalculusError::NonemptyQuasi));
}

#[test]
fn rule_names_round_trip() {
    for r in Rule::ALL {
        assert_eq!(Rule::from_name(r.name()), Some(r));
    }
}

#[test]
fn negated_conjunction_branches() {
    let i = RuleInstance::new(Rule::NegAndE, vec![p("~(P(a) & Q(a))")], Focus::None);
    assert_eq!(apply_instance(&i, &mut no_fresh()).unwrap(), vec![vec![p("~P(a)")], vec![p("~Q(a)")]]);
}

#[test]
fn description_elimination_with_equal_parameters() {
    let i = RuleInstance::new(Rule::IotaE1, vec![p("a = the y. (F(a, y))")], Focus::Param(name("a")));
    let got = apply_instance(&i, &mut no_fresh()).unwrap();
    assert_eq!(got, vec![vec![p("F(a, a)"), p("~F(a, a)")], vec![p("a = a"), p("F(a, a)")]]);
}

#[test]
fn description_elimination_needs_existing_parameter_in_pfl() {
    let i = RuleInstance::new(Rule::IotaE2, vec![p("b = the x. (P(x))"), p("E!(b)"), p("E!(c)")], Focus::None);
    let got = apply_instance(&i, &mut no_fresh()).unwrap();
    assert_eq!(got, vec![vec![p("P(b)"), p("~P(c)")], vec![p("b = c"), p("P(b)")]]);
}

#[test]
fn identity_elimination_rewrites_one_occurrence() {
    let focus = Focus::Occurrence { from: Term::param("a"), to: Term::param("b"), index: 0 };
    let i = RuleInstance::new(Rule::EqE, vec![p("a = b"), p("P(a)")], focus);
    assert_eq!(apply_instance(&i, &mut no_fresh()).unwrap(), vec![vec![p("P(b)")]]);
}

#[test]
fn negated_universal_introduces_fresh_parameter() {
    let i = RuleInstance::new(Rule::NegForallE2, vec![p("~forall x. P(x)")], Focus::None);
    let got = apply_instance(&i, &mut counter()).unwrap();
    let a = Term::param("_n1");
    assert_eq!(got, vec![vec![Formula::Ex(a.clone()), Formula::not(Formula::atom("P", vec![a]))]]);
}

#[test]
fn mismatched_premises_are_rejected() {
    let i = RuleInstance::new(Rule::AndE, vec![p("P(a)")], Focus::None);
    assert_eq!(apply_instance(&i, &mut no_fresh()), Err(CalculusError::Mismatch(Rule::AndE)));
}

#[test]
fn instances_on_a_small_branch() {
    let b = BranchSnapshot::new([p("forall x. P(x)"), p("Q(a)"), p("~~R(a)")]);
    let all = applicable_instances(&b, Logic::Pqfl, false, &HashSet::new()).unwrap();
    let forall_a = RuleInstance::new(Rule::ForallE1, vec![p("forall x. P(x)")], Focus::Param(name("a")));
    assert!(all.contains(&forall_a), "{all:?}");
    assert!(all.iter().any(|i| i.rule == Rule::NegNegE));
    assert!(all.iter().any(|i| i.rule == Rule::ExI3));

    let applied: HashSet<RuleInstance> = [forall_a.clone()].into_iter().collect();
    let rest = applicable_instances(&b, Logic::Pqfl, false, &applied).unwrap();
    assert!(!rest.contains(&forall_a));
    assert_eq!(rest.len() + 1, all.len());

    // PFL instantiates only at parameters known to exist.
    let pfl = applicable_instances(&b, Logic::Pfl, false, &HashSet::new()).unwrap();
    assert!(!pfl.iter().any(|i| matches!(i.rule, Rule::ForallE1 | Rule::ForallE2)));
}

#[test]
fn closure_detected() {
    let b = BranchSnapshot::new([p("P(a)"), p("~P(a)")]);
    let all = applicable_instances(&b, Logic::Pfl, false, &HashSet::new()).unwrap();
    assert!(all.iter().any(|i| i.rule == Rule::Bot1));

    let b = BranchSnapshot::new([p("a != a")]);
    let all = applicable_instances(&b, Logic::Nqfl, false, &HashSet::new()).unwrap();
    assert!(all.iter().any(|i| i.rule == Rule::Bot3));
}
