use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use freedesc::calculus::{rules_for_logic, Rule};
use freedesc::countermodel::verify_model;
use freedesc::engine::{check_tree, prove, Problem, SearchResult};
use freedesc::oracle::{oracle_rule_soundness, oracle_validity};
use freedesc::random::{random_model, GenOptions, Generator};
use freedesc::semantics::{eval_formula, interpret_term};
use freedesc::syntax::{name, params_of_formula, parse, print_term, substitute, Formula, Name};
use freedesc::Logic;

const LAMBERT: &str = "forall x. ((the y.(Q(y)) = x) <-> forall z. (Q(z) <-> z = x))";
const RUSSELL_LR: &str = "P(the x.(Q(x))) -> exists y. ((forall x. (Q(x) <-> x = y)) & P(y))";
const RUSSELL_RL: &str = "(exists y. ((forall x. (Q(x) <-> x = y)) & P(y))) -> P(the x.(Q(x)))";

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn formula(text: &str, logic: Logic) -> Formula {
    parse(text, logic.language()).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn run(logic: Logic, text: &str) -> SearchResult {
    prove(&Problem::prove(logic, formula(text, logic))).unwrap_or_else(|e| panic!("{text} in {logic}: {e}"))
}

fn expect_proved(logic: Logic, text: &str) -> Result<SearchResult, String> {
    let r = run(logic, text);
    match &r {
        SearchResult::Proved(p) => {
            let root = Formula::not(formula(text, logic));
            check_tree(&p.tree, &root, logic, false).map_err(|e| format!("{text} in {logic}: replay failed: {e}"))?;
            Ok(r)
        }
        other => Err(format!("{text} in {logic}: {}", other.verdict())),
    }
}

/// Refuted, with the model re-verified against the branch and falsifying the goal.
fn expect_refuted(logic: Logic, text: &str) -> Check {
    let goal = formula(text, logic);
    match run(logic, text) {
        SearchResult::Refuted(r) => {
            verify_model(&r.model, &r.branch, logic).map_err(|e| format!("{text} in {logic}: {e}"))?;
            let holds = eval_formula(&r.model.model, &r.model.assignment, &goal, logic).map_err(|e| e.to_string())?;
            if holds {
                return Err(format!("{text} in {logic}: countermodel satisfies the goal"));
            }
            Ok(format!("{logic} refuted, |D|={}", r.model.model.domain.len()))
        }
        other => Err(format!("{text} in {logic}: {}", other.verdict())),
    }
}

fn lambert() -> Check {
    let mut parts = Vec::new();
    for logic in Logic::ALL {
        let start = Instant::now();
        let r = expect_proved(logic, LAMBERT)?;
        let elapsed = start.elapsed();
        let steps = r.stats().steps;
        if steps > 50_000 || elapsed > Duration::from_secs(10) {
            return Err(format!("{logic}: {steps} steps in {elapsed:?}"));
        }
        parts.push(format!("{logic} {steps} steps"));
    }
    Ok(parts.join(", "))
}

fn russell() -> Check {
    for logic in Logic::ALL {
        expect_proved(logic, RUSSELL_RL)?;
    }
    for logic in [Logic::Nfl, Logic::Nqfl, Logic::NqflMinus] {
        expect_proved(logic, RUSSELL_LR)?;
    }
    let mut parts = vec!["right-to-left proved in all five".to_string()];
    for logic in [Logic::Pfl, Logic::Pqfl] {
        parts.push(expect_refuted(logic, RUSSELL_LR)?);
    }
    Ok(parts.join(", "))
}

fn single_element_model() -> Check {
    let logic = Logic::Pqfl;
    let f = formula("forall x. (a = the y.(F(x,y)))", logic);
    match prove(&Problem::satisfy(logic, f.clone())).map_err(|e| e.to_string())? {
        SearchResult::Refuted(r) => {
            verify_model(&r.model, &r.branch, logic).map_err(|e| e.to_string())?;
            if !eval_formula(&r.model.model, &r.model.assignment, &f, logic).map_err(|e| e.to_string())? {
                return Err("model does not satisfy the formula".into());
            }
            match r.model.model.existing.len() {
                1 => Ok(format!("open after {} steps, |DE|=1", r.stats.steps)),
                n => Err(format!("|DE|={n}")),
            }
        }
        other => Err(other.verdict().to_string()),
    }
}

fn identity_profile() -> Check {
    for logic in [Logic::Pfl, Logic::Pqfl, Logic::Nqfl, Logic::NqflMinus] {
        expect_proved(logic, "b = b")?;
    }
    let nfl = run(Logic::Nfl, "b = b");
    if nfl.is_proved() {
        return Err("b = b proved in NFL".into());
    }
    let oracle = oracle_validity(&formula("b = b", Logic::Nfl), Logic::Nfl, 2).map_err(|e| e.to_string())?;
    if oracle.is_valid() {
        return Err("oracle found no falsifier of b = b in NFL at bound 2".into());
    }
    expect_proved(Logic::Nfl, "E!(a) -> a = a")?;
    expect_proved(Logic::Nfl, "E!(the x.(P(x))) -> the x.(P(x)) = the x.(P(x))")?;
    let descr = expect_refuted(Logic::Nqfl, "the x.(P(x)) = the x.(P(x))")?;
    Ok(format!("NFL b = b {} with oracle falsifier; {descr}", nfl.verdict()))
}

fn existence_definable() -> Check {
    for logic in [Logic::Pfl, Logic::Nfl, Logic::Pqfl, Logic::Nqfl] {
        expect_proved(logic, "E!(a) <-> exists y. (y = a)")?;
    }
    Ok("proved in PFL, NFL, PQFL, NQFL".into())
}

fn symmetry() -> Check {
    for logic in Logic::ALL {
        expect_proved(logic, "a = b -> b = a")?;
    }
    Ok("proved in all five".into())
}

fn corpus() -> Check {
    let per_logic = 60;
    let mut lines = Vec::new();
    for logic in Logic::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ logic as u64);
        let opts = GenOptions::for_logic(logic);
        let sentences: Vec<Formula> =
            (0..per_logic).map(|_| Generator::new(&mut rng, opts.clone()).sentence()).collect();
        let outcomes: Vec<Result<&'static str, String>> = sentences
            .par_iter()
            .map(|f| {
                let r =
                    prove(&Problem::prove(logic, f.clone()).with_budget(20_000)).map_err(|e| format!("{f}: {e}"))?;
                match &r {
                    SearchResult::Proved(_) => {
                        let v = oracle_validity(f, logic, 3).map_err(|e| e.to_string())?;
                        if !v.is_valid() {
                            return Err(format!("{f} proved in {logic} but the oracle falsifies it"));
                        }
                        Ok("proved")
                    }
                    SearchResult::Refuted(m) => {
                        verify_model(&m.model, &m.branch, logic).map_err(|e| format!("{f}: {e}"))?;
                        let holds =
                            eval_formula(&m.model.model, &m.model.assignment, f, logic).map_err(|e| e.to_string())?;
                        if holds {
                            return Err(format!("{f}: countermodel satisfies the goal in {logic}"));
                        }
                        Ok("refuted")
                    }
                    SearchResult::Unknown(_) => Ok("unknown"),
                }
            })
            .collect();
        let mut counts = [0usize; 3];
        for o in outcomes {
            match o? {
                "proved" => counts[0] += 1,
                "refuted" => counts[1] += 1,
                _ => counts[2] += 1,
            }
        }
        lines.push(format!("{logic} {}/{}/{}", counts[0], counts[1], counts[2]));
    }
    Ok(format!("{per_logic} sentences per logic, proved/refuted/unknown: {}", lines.join(", ")))
}

fn soundness() -> Check {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for logic in Logic::ALL {
        let mut rules = rules_for_logic(logic, false).expect("table");
        if !logic.is_quasi() {
            rules.insert(Rule::ExI4);
        }
        jobs.extend(rules.into_iter().map(|r| (r, logic)));
    }
    let mut tested = 0;
    for (i, (rule, logic)) in jobs.iter().enumerate() {
        let report = oracle_rule_soundness(*rule, *logic, 200, 3, 1000 + i as u64).map_err(|e| e.to_string())?;
        if let Some(c) = report.counterexamples.first() {
            return Err(format!("{rule} in {logic}: {}", c.describe()));
        }
        if report.tested == 0 && !rule.is_closure() {
            return Err(format!("{rule} in {logic}: no satisfiable premise set sampled"));
        }
        tested += report.tested;
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(600) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{} rule/logic pairs, 200 samples each, {tested} with satisfiable premises, 0 counterexamples, {:.1}s",
        jobs.len(),
        elapsed.as_secs_f64()
    ))
}

fn lemmas() -> Check {
    let cases = 1000;
    let x: Name = name("x");
    let mut checked = [0usize; 2];
    for i in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + i as u64);
        let logic = Logic::ALL[i % 5];
        let mut opts = GenOptions::for_logic(logic).with_binary();
        opts.open_descr = true;
        opts.params = vec![name("a"), name("b"), name("c")];
        let (phi, t) = {
            let mut g = Generator::new(&mut rng, opts.clone());
            (g.open_formula(&x), g.closed_term())
        };
        let inst = substitute(&phi, &x, &t).map_err(|e| e.to_string())?;
        let fs = [phi.clone(), inst.clone()];
        let (m, v) = random_model(&mut rng, &fs, &opts.predicates, &opts.params, logic, 3);
        let d: Vec<u32> = m.domain.iter().copied().collect();

        // Coincidence: change what phi does not mention.
        let mut v1 = v.clone();
        v1.vars.insert(x.clone(), d[rng.gen_range(0..d.len())]);
        let mut v2 = v1.clone();
        v2.vars.insert(name("unused"), d[rng.gen_range(0..d.len())]);
        let mentioned = params_of_formula(&phi);
        for a in &opts.params {
            if !mentioned.contains(a) {
                let targets: Vec<u32> = if logic.is_quasi() { m.existing.iter().copied().collect() } else { d.clone() };
                v2.params.insert(a.clone(), targets[rng.gen_range(0..targets.len())]);
            }
        }
        let (l, r) = (eval_formula(&m, &v1, &phi, logic), eval_formula(&m, &v2, &phi, logic));
        if l != r {
            return Err(format!("coincidence fails for {phi} in {logic}: {l:?} vs {r:?}"));
        }
        checked[0] += 1;

        // Substitution: phi[x/t] against phi with x valued at t.
        let val = interpret_term(&m, &v, &t, logic).map_err(|e| e.to_string())?;
        let lhs = eval_formula(&m, &v, &inst, logic).map_err(|e| e.to_string())?;
        let rhs = eval_formula(&m, &v.clone().with_var("x", val), &phi, logic).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!("substitution fails for {phi} with x := {} in {logic}", print_term(&t)));
        }
        checked[1] += 1;
    }
    Ok(format!("coincidence {} cases, substitution {} cases, models of size <= 3", checked[0], checked[1]))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 Lambert axiom proved in all logics within budget", lambert),
        ("2 Russellian discriminators", russell),
        ("3 single-element model for a description equation", single_element_model),
        ("4 identity profile per logic", identity_profile),
        ("5 existence definable by quantification", existence_definable),
        ("6 symmetry of identity", symmetry),
        ("7 random corpus agrees with verify_model and the oracle", corpus),
        ("8 rule soundness by brute force", soundness),
        ("9 coincidence and substitution lemmas", lemmas),
    ];
    let mut failed = 0;
    for (label, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {label} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {label} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
