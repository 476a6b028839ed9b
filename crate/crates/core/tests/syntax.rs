use freedesc::random::{GenOptions, Generator};
use freedesc::syntax::{
    alpha_eq, alpha_normalize, alpha_normalize_term, dd_subterms, desugar, free_vars, name, params_of,
    params_of_formula, parse, parse_surface, print, print_term, substitute, Formula, Language, ParseOptions, Term,
};
use freedesc::Logic;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> Formula {
    parse(s, Language::L).unwrap_or_else(|e| panic!("{s}: {e}"))
}

#[test]
fn derived_connectives_expand_to_core() {
    let (pa, qa) = (p("P(a)"), p("Q(a)"));
    assert_eq!(p("P(a) -> Q(a)"), Formula::not(Formula::and(pa.clone(), Formula::not(qa.clone()))));
    assert_eq!(p("P(a) | Q(a)"), Formula::not(Formula::and(Formula::not(pa.clone()), Formula::not(qa.clone()))));
    assert_eq!(p("P(a) <-> Q(a)"), Formula::and(p("P(a) -> Q(a)"), p("Q(a) -> P(a)")));
    assert_eq!(
        p("exists x. P(x)"),
        Formula::not(Formula::forall("x", Formula::not(Formula::atom("P", vec![Term::var("x")]))))
    );
    assert_eq!(p("a != b"), Formula::not(p("a = b")));
}

#[test]
fn surface_keeps_sugar_until_desugared() {
    let s = parse_surface("P(a) -> exists x. Q(x)", ParseOptions::default()).unwrap();
    assert_eq!(desugar(&s), p("~(P(a) & ~~forall x. ~Q(x))"));
}

#[test]
fn printer_resugars() {
    for s in ["P(a) -> Q(a)", "P(a) | Q(a)", "P(a) <-> Q(a)", "exists x. P(x)", "a != b", "E!(the x. (P(x)))"] {
        assert_eq!(p(&print(&p(s))), p(s), "{s}");
    }
    assert_eq!(print(&p("P(a) -> Q(a)")), "P(a) -> Q(a)");
}

#[test]
fn rebinding_in_scope_is_rejected() {
    assert!(parse("forall x. forall x. P(x)", Language::L).is_err());
    assert!(parse("forall x. P(the x. (Q(x)))", Language::L).is_err());
    assert!(parse("(forall x. P(x)) & forall x. Q(x)", Language::L).is_ok());
}

#[test]
fn existence_predicate_is_not_in_l_minus() {
    assert!(parse("E!(a)", Language::LMinus).is_err());
    assert!(parse("E!(a)", Language::L).is_ok());
    assert!(parse("a = the x. (P(x))", Language::LMinus).is_ok());
}

#[test]
fn reserved_names_need_opt_in() {
    assert!(parse("P(_n0)", Language::L).is_err());
    let opts = ParseOptions { language: Language::L, allow_reserved: true };
    assert!(parse_surface("P(_n0)", opts).is_ok());
}

#[test]
fn arity_must_be_consistent() {
    assert!(parse("P(a) & P(a, b)", Language::L).is_err());
}

#[test]
fn alpha_normalization() {
    let a = p("forall x. P(x)");
    let b = p("forall y. P(y)");
    assert_ne!(a, b);
    assert!(alpha_eq(&a, &b));
    assert_eq!(alpha_normalize(&a), alpha_normalize(&b));
    let c = p("P(the x. (Q(x))) & P(the z. (Q(z)))");
    let n = alpha_normalize(&c);
    assert_eq!(alpha_normalize(&n), n);
    assert!(!alpha_eq(&p("forall x. R(x, a)"), &p("forall x. R(a, x)")));
}

#[test]
fn substitution_into_descriptions() {
    let body = p("forall x. (a = the y. (F(x, y)))");
    let Formula::Forall(x, inner) = &body else { panic!() };
    let got = substitute(inner, x, &Term::param("a")).unwrap();
    assert_eq!(got, p("a = the y. (F(a, y))"));
    let t = Term::descr("z", Formula::atom("Q", vec![Term::var("z")]));
    let got = substitute(inner, x, &t).unwrap();
    assert_eq!(got, p("a = the y. (F(the z. (Q(z)), y))"));
    assert!(free_vars(&got).is_empty());
}

#[test]
fn substitution_leaves_bound_occurrences() {
    let f = p("forall x. P(x)");
    assert_eq!(substitute(&f, &name("x"), &Term::param("b")).unwrap(), f);
}

#[test]
fn closed_descriptions_collected() {
    let f = p("P(the x. (Q(x, the y. (R(y)))))");
    let dds = dd_subterms([&f]);
    let shown: Vec<String> = dds.iter().map(print_term).collect();
    assert_eq!(shown.len(), 2, "{shown:?}");
    let inner = alpha_normalize_term(&Term::descr("y", Formula::atom("R", vec![Term::var("y")])));
    assert!(dds.contains(&inner), "{shown:?}");
    // An open description is not closed and is not listed.
    let g = p("forall z. P(the x. (Q(x, z)))");
    assert!(dd_subterms([&g]).is_empty());
}

#[test]
fn parameters_collected() {
    let f = p("P(a) & forall x. R(x, the y. (S(y, b)))");
    let got: Vec<String> = params_of_formula(&f).iter().map(|n| n.to_string()).collect();
    assert_eq!(got, ["a", "b"]);
    let g = p("Q(c)");
    assert_eq!(params_of([&f, &g]).len(), 3);
}

proptest! {
    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), which in 0usize..5) {
        let logic = Logic::ALL[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Generator::new(&mut rng, GenOptions::for_logic(logic).with_binary()).sentence();
        let back = parse(&print(&f), logic.language()).unwrap();
        prop_assert!(alpha_eq(&back, &f), "{} reparsed as {}", print(&f), print(&back));
    }

    #[test]
    fn alpha_normalize_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Generator::new(&mut rng, GenOptions::for_logic(Logic::Pqfl)).sentence();
        let n = alpha_normalize(&f);
        prop_assert_eq!(alpha_normalize(&n), n.clone());
        prop_assert!(alpha_eq(&n, &f));
    }
}
