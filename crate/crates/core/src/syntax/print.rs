use std::collections::BTreeSet;

use super::{params_of_formula, Formula, Name, Term};

enum View<'a> {
    Iff(&'a Formula, &'a Formula),
    Implies(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    Exists(&'a Name, &'a Formula),
    Neq(&'a Term, &'a Term),
    Core,
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Formula::And(l, r) => match (&**l, &**r) {
            (Formula::Not(l), Formula::Not(r)) => match (&**l, &**r) {
                (Formula::And(a, nb), Formula::And(b2, na2)) => match (&**nb, &**na2) {
                    (Formula::Not(b), Formula::Not(a2)) if b == b2 && a == a2 => View::Iff(a, b),
                    _ => View::Core,
                },
                _ => View::Core,
            },
            _ => View::Core,
        },
        Formula::Not(g) => match &**g {
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Not(a), Formula::Not(b)) => View::Or(a, b),
                (a, Formula::Not(b)) => View::Implies(a, b),
                _ => View::Core,
            },
            Formula::Forall(x, body) => match &**body {
                Formula::Not(b) => View::Exists(x, b),
                _ => View::Core,
            },
            Formula::Eq(s, t) => View::Neq(s, t),
            _ => View::Core,
        },
        _ => View::Core,
    }
}

struct Printer {
    avoid: BTreeSet<String>,
    env: Vec<(Name, String)>,
}

impl Printer {
    fn bind(&mut self, x: &Name) -> String {
        let taken = |s: &str, p: &Printer| p.avoid.contains(s) || p.env.iter().any(|(_, d)| d == s);
        let mut shown = x.to_string();
        let mut k = 1;
        while taken(&shown, self) {
            shown = format!("{x}{k}");
            k += 1;
        }
        self.env.push((x.clone(), shown.clone()));
        shown
    }

    fn term(&mut self, t: &Term, out: &mut String) {
        match t {
            Term::Param(a) => out.push_str(a),
            Term::Var(x) => match self.env.iter().rev().find(|(y, _)| y == x) {
                Some((_, d)) => out.push_str(d),
                None => out.push_str(x),
            },
            Term::Descr(x, body) => {
                let shown = self.bind(x);
                out.push_str("the ");
                out.push_str(&shown);
                out.push_str(". (");
                self.formula(body, 0, true, out);
                out.push(')');
                self.env.pop();
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn binary(
        &mut self,
        op: &str,
        prec: u8,
        l: &Formula,
        lp: u8,
        r: &Formula,
        rp: u8,
        ctx: u8,
        rightmost: bool,
        out: &mut String,
    ) {
        let paren = prec < ctx;
        if paren {
            out.push('(');
        }
        self.formula(l, lp, false, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        self.formula(r, rp, paren || rightmost, out);
        if paren {
            out.push(')');
        }
    }

    fn quant(&mut self, kw: &str, x: &Name, body: &Formula, rightmost: bool, out: &mut String) {
        if !rightmost {
            out.push('(');
        }
        let shown = self.bind(x);
        out.push_str(kw);
        out.push(' ');
        out.push_str(&shown);
        out.push_str(". ");
        self.formula(body, 0, true, out);
        self.env.pop();
        if !rightmost {
            out.push(')');
        }
    }

    fn formula(&mut self, f: &Formula, ctx: u8, rightmost: bool, out: &mut String) {
        match view(f) {
            View::Iff(a, b) => return self.binary("<->", 1, a, 1, b, 2, ctx, rightmost, out),
            View::Implies(a, b) => return self.binary("->", 2, a, 3, b, 2, ctx, rightmost, out),
            View::Or(a, b) => return self.binary("|", 3, a, 3, b, 4, ctx, rightmost, out),
            View::Exists(x, b) => return self.quant("exists", x, b, rightmost, out),
            View::Neq(s, t) => {
                self.term(s, out);
                out.push_str(" != ");
                self.term(t, out);
                return;
            }
            View::Core => {}
        }
        match f {
            Formula::Atom(p, ts) => {
                out.push_str(p);
                if !ts.is_empty() {
                    out.push('(');
                    for (i, t) in ts.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        self.term(t, out);
                    }
                    out.push(')');
                }
            }
            Formula::Eq(s, t) => {
                self.term(s, out);
                out.push_str(" = ");
                self.term(t, out);
            }
            Formula::Ex(t) => {
                out.push_str("E!(");
                self.term(t, out);
                out.push(')');
            }
            Formula::Not(g) => {
                out.push('~');
                self.formula(g, 5, rightmost, out);
            }
            Formula::And(a, b) => self.binary("&", 4, a, 4, b, 5, ctx, rightmost, out),
            Formula::Forall(x, b) => self.quant("forall", x, b, rightmost, out),
        }
    }
}

fn printer_for(f: Option<&Formula>) -> Printer {
    let avoid = f.map(|f| params_of_formula(f).iter().map(|a| a.to_string()).collect()).unwrap_or_default();
    Printer { avoid, env: Vec::new() }
}

pub fn print(f: &Formula) -> String {
    let mut p = printer_for(Some(f));
    let mut out = String::new();
    p.formula(f, 0, true, &mut out);
    out
}

pub fn print_term(t: &Term) -> String {
    let mut p = match t {
        Term::Descr(x, body) => printer_for(Some(&Formula::Forall(x.clone(), body.clone()))),
        _ => printer_for(None),
    };
    let mut out = String::new();
    p.term(t, &mut out);
    out
}
