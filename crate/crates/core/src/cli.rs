//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::engine::{prove, EngineError, Problem, SearchResult, Stats, DEFAULT_BUDGET};
use crate::logic::Logic;
use crate::oracle::{oracle_validity_with, OracleVerdict};
use crate::semantics::{assignment_from_json, eval_formula, Model, ModelJson};
use crate::syntax::{parse, print, Formula};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Parser, Debug)]
#[command(name = "freedesc", version, about = "Tableau prover for free logics with definite descriptions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// pfl, nfl, pqfl, nqfl or nqflm
    #[arg(long, default_value = "pqfl")]
    pub logic: Logic,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Read the formula from a file instead of the command line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    pub formula: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Assume a non-empty domain of existing objects (PFL and NFL only).
    #[arg(long)]
    pub nonempty: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for a tableau proof.
    Prove(SearchArgs),
    /// Search for a model.
    Sat(SearchArgs),
    /// Check validity by enumerating small models.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        oracle_bound: u32,
        #[arg(long)]
        nonempty: bool,
        /// Worker threads for enumeration.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evaluate a formula in a model given as JSON.
    CheckModel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn failure(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn read_formula(c: &Common) -> Result<Formula, Failure> {
    let text = match (&c.file, &c.formula) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| failure(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?,
        (None, Some(s)) => s.clone(),
        (Some(_), Some(_)) => return Err(failure(EXIT_USAGE, "give either --file or a formula, not both")),
        (None, None) => return Err(failure(EXIT_USAGE, "no formula given")),
    };
    parse(text.trim(), c.logic.language()).map_err(|e| failure(EXIT_PARSE, e.to_string()))
}

fn stats_json(s: &Stats) -> Value {
    json!({
        "steps": s.steps,
        "branches": s.branches,
        "closed_branches": s.closed_branches,
        "dismissed": s.dismissed,
        "max_wait": s.max_wait,
    })
}

fn search(args: &SearchArgs, satisfy: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let c = &args.common;
    let goal = read_formula(c)?;
    if args.nonempty && c.logic.is_quasi() {
        return Err(failure(EXIT_USAGE, "--nonempty is only available for pfl and nfl"));
    }
    let base = if satisfy { Problem::satisfy(c.logic, goal.clone()) } else { Problem::prove(c.logic, goal.clone()) };
    let problem = base.with_budget(args.budget).with_nonempty(args.nonempty);
    let result = prove(&problem).map_err(|e| match e {
        EngineError::Invariant(_) => failure(EXIT_INTERNAL, e.to_string()),
        _ => failure(EXIT_USAGE, e.to_string()),
    })?;
    if let SearchResult::Refuted(r) = &result {
        let v = &r.model.assignment;
        let holds =
            eval_formula(&r.model.model, v, &goal, c.logic).map_err(|e| failure(EXIT_INTERNAL, e.to_string()))?;
        if holds != satisfy {
            return Err(failure(EXIT_INTERNAL, "extracted model disagrees with the goal"));
        }
    }
    let code = match &result {
        SearchResult::Proved(_) => 0,
        SearchResult::Refuted(_) => 1,
        SearchResult::Unknown(_) => 2,
    };
    let verdict = match (&result, satisfy) {
        (SearchResult::Proved(_), false) => "proved",
        (SearchResult::Refuted(_), false) => "refuted",
        (SearchResult::Proved(_), true) => "unsatisfiable",
        (SearchResult::Refuted(_), true) => "satisfiable",
        (SearchResult::Unknown(_), _) => "unknown",
    };
    let w =
        |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(|e| failure(EXIT_INTERNAL, e.to_string()));
    match c.format {
        Format::Dot => w(out, result.tree().to_dot())?,
        Format::Json => {
            let mut j = json!({
                "verdict": verdict,
                "logic": c.logic.name(),
                "formula": print(&goal),
                "stats": stats_json(result.stats()),
                "tree": result.tree().to_json(),
            });
            match &result {
                SearchResult::Refuted(r) => j["model"] = r.model.to_json(),
                SearchResult::Unknown(u) => {
                    j["budget"] = json!(u.budget);
                    j["open_branches"] = json!(u.open_branches);
                }
                SearchResult::Proved(_) => {}
            }
            w(out, format!("{}\n", serde_json::to_string_pretty(&j).expect("json")))?;
        }
        Format::Text => {
            let s = result.stats();
            let mut text =
                format!("{verdict} in {} ({} steps, {} branches)\n", c.logic.display_name(), s.steps, s.branches);
            match &result {
                SearchResult::Proved(p) => text.push_str(&p.tree.to_text()),
                SearchResult::Refuted(r) => {
                    text.push_str("model:\n");
                    text.push_str(&serde_json::to_string_pretty(&r.model.to_json()).expect("json"));
                    text.push('\n');
                }
                SearchResult::Unknown(u) => text
                    .push_str(&format!("budget of {} steps exhausted, {} open branches\n", u.budget, u.open_branches)),
            }
            w(out, text)?;
        }
    }
    Ok(code)
}

fn oracle(
    common: &Common,
    bound: u32,
    nonempty: bool,
    jobs: Option<usize>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let f = read_formula(common)?;
    let run = || oracle_validity_with(&f, common.logic, bound as usize, nonempty);
    let verdict = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| failure(EXIT_USAGE, e.to_string()))?
            .install(run),
        None => run(),
    }
    .map_err(|e| failure(EXIT_USAGE, e.to_string()))?;
    let text = match common.format {
        Format::Json => {
            let mut j = verdict.to_json();
            j["logic"] = json!(common.logic.name());
            j["formula"] = json!(print(&f));
            format!("{}\n", serde_json::to_string_pretty(&j).expect("json"))
        }
        _ => match &verdict {
            OracleVerdict::ValidUpTo(n) => format!("no countermodel with at most {n} elements\n"),
            OracleVerdict::Countermodel(..) => {
                format!("countermodel:\n{}\n", serde_json::to_string_pretty(&verdict.to_json()).expect("json"))
            }
        },
    };
    out.write_all(text.as_bytes()).map_err(|e| failure(EXIT_INTERNAL, e.to_string()))?;
    Ok(if verdict.is_valid() { 0 } else { 1 })
}

fn check_model(common: &Common, model: &PathBuf, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = read_formula(common)?;
    let raw = std::fs::read_to_string(model)
        .map_err(|e| failure(EXIT_USAGE, format!("cannot read {}: {e}", model.display())))?;
    let value: Value = serde_json::from_str(&raw).map_err(|e| failure(EXIT_PARSE, format!("model json: {e}")))?;
    let mj: ModelJson =
        serde_json::from_value(value.clone()).map_err(|e| failure(EXIT_PARSE, format!("model json: {e}")))?;
    let m = Model::from_json(&mj).map_err(|e| failure(EXIT_PARSE, e.to_string()))?;
    let v = match value.get("assignment") {
        Some(a) => assignment_from_json(
            &serde_json::from_value(a.clone()).map_err(|e| failure(EXIT_PARSE, format!("assignment: {e}")))?,
        ),
        None => Default::default(),
    };
    let issues = crate::semantics::check_model_wellformed(&m, common.logic, std::slice::from_ref(&f)).err();
    let holds = match &issues {
        None => Some(eval_formula(&m, &v, &f, common.logic).map_err(|e| failure(EXIT_USAGE, e.to_string()))?),
        Some(_) => None,
    };
    let text = match common.format {
        Format::Json => {
            let j = json!({
                "formula": print(&f),
                "logic": common.logic.name(),
                "wellformed": issues.is_none(),
                "issues": issues.clone().unwrap_or_default(),
                "holds": holds,
            });
            format!("{}\n", serde_json::to_string_pretty(&j).expect("json"))
        }
        _ => match (&issues, holds) {
            (Some(is), _) => format!("model is not well-formed:\n  {}\n", is.join("\n  ")),
            (None, Some(true)) => "formula holds in the model\n".to_string(),
            _ => "formula is false in the model\n".to_string(),
        },
    };
    out.write_all(text.as_bytes()).map_err(|e| failure(EXIT_INTERNAL, e.to_string()))?;
    Ok(match (issues, holds) {
        (Some(_), _) => EXIT_PARSE,
        (None, Some(true)) => 0,
        _ => 1,
    })
}

/// Run the CLI on `argv` (program name first), writing results to `out` and
/// diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let r = match &cli.command {
        Command::Prove(a) => search(a, false, out),
        Command::Sat(a) => search(a, true, out),
        Command::Oracle { common, oracle_bound, nonempty, jobs } => {
            oracle(common, *oracle_bound, *nonempty, *jobs, out)
        }
        Command::CheckModel { common, model } => check_model(common, model, out),
    };
    match r {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
