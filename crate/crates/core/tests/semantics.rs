use std::collections::BTreeMap;

use freedesc::semantics::{
    check_model_wellformed, eval_formula, interpret_term, Assignment, Model, ModelJson, OuterJson,
};
use freedesc::syntax::{parse, Formula, Language, Term};
use freedesc::Logic;

fn p(s: &str) -> Formula {
    parse(s, Language::L).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn descr(s: &str) -> Term {
    match p(&format!("z = {s}")) {
        Formula::Eq(_, t) => t,
        _ => unreachable!(),
    }
}

fn model(d: &[u32], de: &[u32], interp: &[(&str, &[&[u32]])], outer: &[(&str, u32)], default: Option<u32>) -> Model {
    let j = ModelJson {
        d: d.to_vec(),
        de: de.to_vec(),
        i: interp.iter().map(|(p, ts)| (p.to_string(), ts.iter().map(|t| t.to_vec()).collect())).collect(),
        outer: outer.iter().map(|(s, v)| OuterJson { descr: s.to_string(), env: BTreeMap::new(), val: *v }).collect(),
        outer_default: default,
    };
    Model::from_json(&j).unwrap()
}

#[test]
fn single_element_model() {
    let m = model(&[0], &[0], &[("F", &[&[0, 0]])], &[], None);
    let v = Assignment::new().with_param("a", 0);
    let t = descr("the y. (F(a, y))");
    assert_eq!(interpret_term(&m, &v, &t, Logic::Pqfl).unwrap(), 0);
    assert!(eval_formula(&m, &v, &p("forall x. (a = the y. (F(x, y)))"), Logic::Pqfl).unwrap());
}

#[test]
fn improper_description_takes_outer_value() {
    let m = model(&[0, 1], &[0], &[("P", &[])], &[("the x. (P(x))", 1)], None);
    let v = Assignment::new().with_param("a", 0);
    assert_eq!(interpret_term(&m, &v, &descr("the x. (P(x))"), Logic::Pfl).unwrap(), 1);
    assert!(!eval_formula(&m, &v, &p("E!(the x. (P(x)))"), Logic::Pfl).unwrap());
}

#[test]
fn improper_self_identity_by_logic() {
    let m = model(&[0, 1], &[0], &[("P", &[])], &[], Some(1));
    let v = Assignment::new().with_param("a", 0);
    let f = p("the x. (P(x)) = the x. (P(x))");
    assert!(eval_formula(&m, &v, &f, Logic::Pfl).unwrap());
    assert!(eval_formula(&m, &v, &f, Logic::Pqfl).unwrap());
    assert!(!eval_formula(&m, &v, &f, Logic::Nfl).unwrap());
    assert!(!eval_formula(&m, &v, &f, Logic::Nqfl).unwrap());
}

#[test]
fn negative_atoms_are_strict() {
    let m = model(&[0, 1], &[0], &[("P", &[&[1]])], &[], None);
    let v = Assignment::new().with_param("a", 1);
    assert!(eval_formula(&m, &v, &p("P(a)"), Logic::Pfl).unwrap());
    assert!(!eval_formula(&m, &v, &p("P(a)"), Logic::Nfl).unwrap());
    assert!(!eval_formula(&m, &v, &p("a = a"), Logic::Nfl).unwrap());
    assert!(eval_formula(&m, &v, &p("E!(a) -> a = a"), Logic::Nfl).unwrap());
}

#[test]
fn quantifiers_range_over_existing_objects() {
    let m = model(&[0], &[], &[("P", &[])], &[], None);
    let v = Assignment::new();
    assert!(eval_formula(&m, &v, &p("forall x. P(x)"), Logic::Pfl).unwrap());
    assert!(!eval_formula(&m, &v, &p("exists x. (x = x)"), Logic::Pfl).unwrap());
}

#[test]
fn proper_description_denotes_its_witness() {
    let m = model(&[0, 1, 2], &[0, 1], &[("P", &[&[1]])], &[], Some(2));
    let v = Assignment::new().with_param("a", 1);
    for logic in Logic::ALL {
        let f = Formula::eq(Term::param("a"), descr("the x. (P(x))"));
        assert!(eval_formula(&m, &v, &f, logic).unwrap(), "{logic}");
    }
}

#[test]
fn non_unique_description_is_improper() {
    let m = model(&[0, 1, 2], &[0, 1], &[("P", &[&[0], &[1]])], &[], Some(2));
    let v = Assignment::new();
    assert_eq!(interpret_term(&m, &v, &descr("the x. (P(x))"), Logic::Pfl).unwrap(), 2);
}

#[test]
fn wellformedness_violations() {
    let mut m = model(&[0], &[0], &[], &[], None);
    m.existing.insert(5);
    let issues = check_model_wellformed(&m, Logic::Pfl, &[]).unwrap_err();
    assert!(issues.iter().any(|s| s.contains("DE is not a subset")), "{issues:?}");

    let m = model(&[0, 1], &[0], &[("P", &[&[0]])], &[("the x. (P(x))", 1)], None);
    let issues = check_model_wellformed(&m, Logic::Pfl, &[p("P(the x. (P(x)))")]).unwrap_err();
    assert!(issues.iter().any(|s| s.contains("unique witness")), "{issues:?}");

    let m = model(&[0, 1], &[0], &[("P", &[])], &[("the x. (P(x))", 0)], None);
    assert!(check_model_wellformed(&m, Logic::Pfl, &[]).is_err());

    let m = model(&[0, 1], &[0], &[("P", &[])], &[("the x. (P(x))", 1)], None);
    assert!(check_model_wellformed(&m, Logic::Pfl, &[p("P(the x. (P(x)))")]).is_ok());
}

#[test]
fn missing_outer_value_is_reported() {
    let m = model(&[0], &[0], &[("P", &[])], &[], None);
    assert!(check_model_wellformed(&m, Logic::Pfl, &[p("P(the x. (P(x)))")]).is_err());
}

#[test]
fn json_round_trip() {
    let m = model(&[0, 1], &[0], &[("P", &[&[0]]), ("R", &[&[0, 1]])], &[("the x. (R(x, x))", 1)], Some(1));
    let text = serde_json::to_string(&m.to_json()).unwrap();
    let back: ModelJson = serde_json::from_str(&text).unwrap();
    assert_eq!(Model::from_json(&back).unwrap(), m);
    assert!(text.contains("\"D\"") && text.contains("\"DE\"") && text.contains("\"I\""));
}
