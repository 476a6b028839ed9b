use std::collections::BTreeMap;

use thiserror::Error;

use super::{name, Formula, Name, Surface, SurfaceTerm, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Language {
    /// Full language with the existence predicate.
    L,
    /// The language of NQFL⁻, without `E!`.
    LMinus,
}

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    pub language: Language,
    /// Accept identifiers in the reserved `_` namespace (fresh parameters, placeholders).
    pub allow_reserved: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { language: Language::L, allow_reserved: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Neq,
    ExPred,
    Forall,
    Exists,
    The,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Not => "`~`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Implies => "`->`".into(),
        Tok::Iff => "`<->`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Neq => "`!=`".into(),
        Tok::ExPred => "`E!`".into(),
        Tok::Forall => "`forall`".into(),
        Tok::Exists => "`exists`".into(),
        Tok::The => "`the`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let err = |pos: usize, m: String| ParseError { pos, message: m };
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|p| p.1);
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Implies,
            '↔' => Tok::Iff,
            '=' => Tok::Eq,
            '≠' => Tok::Neq,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            'ι' => Tok::The,
            '-' if next == Some('>') => {
                i += 1;
                Tok::Implies
            }
            '<' if next == Some('-') && chars.get(i + 2).map(|p| p.1) == Some('>') => {
                i += 2;
                Tok::Iff
            }
            '!' if next == Some('=') => {
                i += 1;
                Tok::Neq
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|p| p.1).collect();
                let after = chars.get(i).map(|p| p.1);
                let after2 = chars.get(i + 1).map(|p| p.1);
                let tok = match word.as_str() {
                    "E" if after == Some('!') && after2 != Some('=') => {
                        i += 1;
                        Tok::ExPred
                    }
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    "the" => Tok::The,
                    _ => Tok::Ident(word),
                };
                out.push((tok, pos));
                continue;
            }
            c => return Err(err(pos, format!("unexpected character `{c}`"))),
        };
        out.push((tok, pos));
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    scope: Vec<Name>,
    opts: ParseOptions,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), message: message.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {}, found {}", describe(&t), describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                if s.starts_with('_') && !self.opts.allow_reserved {
                    return self.fail(format!("identifier `{s}` is in the reserved `_` namespace"));
                }
                self.bump();
                Ok(s)
            }
            t => self.fail(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn iff(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            lhs = Surface::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Surface, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Surface::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Surface::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Surface::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn binder(&mut self) -> Result<Name, ParseError> {
        let pos = self.pos();
        let x = self.ident()?;
        if self.scope.iter().any(|y| &**y == x.as_str()) {
            return Err(ParseError { pos, message: format!("rebinding bound variable `{x}` inside its own scope") });
        }
        Ok(name(&x))
    }

    fn unary(&mut self) -> Result<Surface, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Surface::Not(Box::new(self.unary()?)))
            }
            Tok::Forall | Tok::Exists => {
                let universal = self.bump() == Tok::Forall;
                let x = self.binder()?;
                self.expect(Tok::Dot)?;
                self.scope.push(x.clone());
                let body = self.iff();
                self.scope.pop();
                let body = Box::new(body?);
                Ok(if universal { Surface::Forall(x, body) } else { Surface::Exists(x, body) })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::ExPred => {
                if self.opts.language == Language::LMinus {
                    return self.fail("existence predicate not in L⁻");
                }
                self.bump();
                self.expect(Tok::LParen)?;
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Surface::Ex(t))
            }
            Tok::Ident(p) if *self.peek2() == Tok::LParen => {
                let pos = self.pos();
                self.ident()?;
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                }
                self.expect(Tok::RParen)?;
                self.check_arity(&p, args.len(), pos)?;
                Ok(Surface::Atom(name(&p), args))
            }
            Tok::Ident(p) if !matches!(self.peek2(), Tok::Eq | Tok::Neq) => {
                let pos = self.pos();
                self.ident()?;
                self.check_arity(&p, 0, pos)?;
                Ok(Surface::Atom(name(&p), vec![]))
            }
            Tok::Ident(_) | Tok::The => {
                let lhs = self.term()?;
                match self.bump() {
                    Tok::Eq => Ok(Surface::Eq(lhs, self.term()?)),
                    Tok::Neq => Ok(Surface::Neq(lhs, self.term()?)),
                    t => {
                        self.at -= 1;
                        self.fail(format!("expected `=` or `!=`, found {}", describe(&t)))
                    }
                }
            }
            t => self.fail(format!("expected a formula, found {}", describe(&t))),
        }
    }

    fn check_arity(&mut self, p: &str, n: usize, pos: usize) -> Result<(), ParseError> {
        match self.arities.get(p) {
            Some(&m) if m != n => {
                Err(ParseError { pos, message: format!("predicate `{p}` used with arity {n} and {m}") })
            }
            _ => {
                self.arities.insert(p.to_string(), n);
                Ok(())
            }
        }
    }

    fn term(&mut self) -> Result<SurfaceTerm, ParseError> {
        match self.peek() {
            Tok::The => {
                self.bump();
                let x = self.binder()?;
                self.expect(Tok::Dot)?;
                self.expect(Tok::LParen)?;
                self.scope.push(x.clone());
                let body = self.iff();
                self.scope.pop();
                let body = body?;
                self.expect(Tok::RParen)?;
                Ok(SurfaceTerm::Descr(x, Box::new(body)))
            }
            _ => {
                let s = self.ident()?;
                if self.scope.iter().any(|y| &**y == s.as_str()) {
                    Ok(SurfaceTerm::Var(name(&s)))
                } else {
                    Ok(SurfaceTerm::Param(name(&s)))
                }
            }
        }
    }
}

/// Parse into the surface syntax, keeping derived connectives.
pub fn parse_surface(text: &str, opts: ParseOptions) -> Result<Surface, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0, scope: Vec::new(), opts, arities: BTreeMap::new() };
    let f = p.iff()?;
    if *p.peek() != Tok::Eof {
        return p.fail(format!("unexpected {} after formula", describe(p.peek())));
    }
    Ok(f)
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<Formula, ParseError> {
    Ok(desugar(&parse_surface(text, opts)?))
}

pub fn parse(text: &str, language: Language) -> Result<Formula, ParseError> {
    parse_with(text, ParseOptions { language, allow_reserved: false })
}

pub fn desugar(s: &Surface) -> Formula {
    let d = |b: &Surface| desugar(b);
    match s {
        Surface::Atom(p, ts) => Formula::Atom(p.clone(), ts.iter().map(desugar_term).collect()),
        Surface::Eq(a, b) => Formula::Eq(desugar_term(a), desugar_term(b)),
        Surface::Neq(a, b) => Formula::neq(desugar_term(a), desugar_term(b)),
        Surface::Ex(t) => Formula::Ex(desugar_term(t)),
        Surface::Not(a) => Formula::not(d(a)),
        Surface::And(a, b) => Formula::and(d(a), d(b)),
        Surface::Or(a, b) => Formula::or(d(a), d(b)),
        Surface::Implies(a, b) => Formula::implies(d(a), d(b)),
        Surface::Iff(a, b) => Formula::iff(d(a), d(b)),
        Surface::Forall(x, b) => Formula::Forall(x.clone(), d(b).into()),
        Surface::Exists(x, b) => Formula::not(Formula::Forall(x.clone(), Formula::not(d(b)).into())),
    }
}

fn desugar_term(t: &SurfaceTerm) -> Term {
    match t {
        SurfaceTerm::Var(x) => Term::Var(x.clone()),
        SurfaceTerm::Param(a) => Term::Param(a.clone()),
        SurfaceTerm::Descr(x, b) => Term::Descr(x.clone(), desugar(b).into()),
    }
}
