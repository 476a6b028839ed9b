use freedesc::countermodel::{extract_model, verify_model, CountermodelError, VerifyError};
use freedesc::engine::{prove, Problem, SearchResult};
use freedesc::semantics::eval_formula;
use freedesc::syntax::{parse, Formula, Language, Term};
use freedesc::Logic;

fn p(s: &str) -> Formula {
    parse(s, Language::L).unwrap_or_else(|e| panic!("{s}: {e}"))
}

#[test]
fn single_atom_in_pqfl() {
    let SearchResult::Refuted(r) = prove(&Problem::satisfy(Logic::Pqfl, p("P(a)"))).unwrap() else { panic!() };
    let (e, branch) = (r.model, r.branch);
    assert!(branch.contains(&p("E!(a)")));
    assert_eq!(e.model.domain.len(), 2);
    assert_eq!(e.model.existing.len(), 1);
    let a = e.elem_of[&Term::param("a")];
    assert!(e.model.existing.contains(&a));
    assert!(!e.model.existing.contains(&e.outside));
    assert_eq!(e.assignment.params.get("a").copied(), Some(a));
    verify_model(&e, &branch, Logic::Pqfl).unwrap();
}

#[test]
fn non_existing_parameter_in_pfl() {
    let branch = [p("P(a)"), p("~E!(a)")];
    let e = extract_model(&branch, Logic::Pfl).unwrap();
    assert!(e.model.existing.is_empty());
    verify_model(&e, &branch, Logic::Pfl).unwrap();
}

#[test]
fn dropping_a_tuple_is_caught() {
    let branch = [p("P(a)"), p("R(a, b)"), p("~P(b)"), p("E!(a)"), p("E!(b)")];
    let e = extract_model(&branch, Logic::Pqfl).unwrap();
    verify_model(&e, &branch, Logic::Pqfl).unwrap();
    let mut broken = e.clone();
    broken.model.interp.get_mut("R").unwrap().clear();
    assert!(matches!(verify_model(&broken, &branch, Logic::Pqfl), Err(VerifyError::Unsatisfied(_))));
}

#[test]
fn closed_branch_has_no_model() {
    let err = extract_model(&[p("P(a)"), p("~P(a)")], Logic::Pfl).unwrap_err();
    assert!(matches!(err, CountermodelError::Closed(_)));
}

#[test]
fn improper_description_in_nqfl() {
    let f = p("the x. (P(x)) != the x. (P(x))");
    let SearchResult::Refuted(r) = prove(&Problem::satisfy(Logic::Nqfl, f.clone())).unwrap() else { panic!() };
    verify_model(&r.model, &r.branch, Logic::Nqfl).unwrap();
    assert!(eval_formula(&r.model.model, &r.model.assignment, &f, Logic::Nqfl).unwrap());
    let t = r.model.elem_of.get(&match &f {
        Formula::Not(g) => match &**g {
            Formula::Eq(t, _) => t.clone(),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    });
    if let Some(v) = t {
        assert!(!r.model.model.existing.contains(v));
    }
}

#[test]
fn one_element_model_for_a_description_equation() {
    let f = p("forall x. (a = the y. (F(x, y)))");
    let SearchResult::Refuted(r) = prove(&Problem::satisfy(Logic::Pqfl, f.clone())).unwrap() else { panic!() };
    verify_model(&r.model, &r.branch, Logic::Pqfl).unwrap();
    assert_eq!(r.model.model.existing.len(), 1);
    let a = r.model.elem_of[&Term::param("a")];
    assert!(r.model.model.interp["F"].contains(&vec![a, a]));
}

#[test]
fn json_lists_class_representatives() {
    let branch = [p("P(a)"), p("a = b"), p("E!(a)"), p("E!(b)")];
    let e = extract_model(&branch, Logic::Pqfl).unwrap();
    verify_model(&e, &branch, Logic::Pqfl).unwrap();
    let j = e.to_json();
    assert_eq!(j["D"].as_array().unwrap().len(), 2);
    assert_eq!(j["class_reps"][e.outside.to_string()], "o");
    assert_eq!(j["assignment"]["a"], j["assignment"]["b"]);
}
