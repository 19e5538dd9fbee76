//! The `.trs` text format: lexer, parser and printer.
//!
//! ```text
//! constructors: 0/0, s/1
//! defined: double/1
//! interpret 0() = 1
//! interpret s(x) = x + 1
//! interpret double(x) = 2 * x
//! rules:
//!   double(0) -> 0
//!   double(s(x)) -> s(s(double(x)))
//! ```
//!
//! Sections may come in any order and repeat. An identifier without
//! arguments is a constant if declared, a variable otherwise.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use num_bigint::BigUint;
use thiserror::Error;

use crate::lpo::{Precedence, PrecedenceError};
use crate::program::{Program, Rule, RuleError};
use crate::qi::{Interpretation, QiExpr, QiTable};
use crate::term::{Signature, SignatureError, Symbol, SymbolKind, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` takes {expected} arguments, found {found}")]
    Arity { symbol: String, expected: usize, found: usize },
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("duplicate interpretation for `{0}`")]
    DuplicateInterpretation(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Precedence(#[from] PrecedenceError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn error(self, kind: impl Into<ParseErrorKind>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            kind: kind.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    LParen,
    RParen,
    Comma,
    Slash,
    Less,
    Arrow,
    Equals,
    Plus,
    Star,
    Colon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Less => f.write_str("`<`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos { line: l + 1, column: i + 1 };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Word(chars[start..i].iter().collect()), pos));
                continue;
            }
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '/' => Tok::Slash,
                '<' => Tok::Less,
                '=' => Tok::Equals,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                ':' => Tok::Colon,
                '-' if chars.get(i + 1) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                other => return Err(pos.error(ParseErrorKind::BadChar(other))),
            };
            i += 1;
            out.push((tok, pos));
        }
    }
    let end = Pos {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

/// A term before symbol resolution.
#[derive(Debug)]
struct RawTerm {
    name: String,
    pos: Pos,
    args: Option<Vec<RawTerm>>,
}

#[derive(Debug)]
enum RawQi {
    Num(String, Pos),
    Name(String, Pos),
    Add(Box<RawQi>, Box<RawQi>),
    Mul(Box<RawQi>, Box<RawQi>),
    Max(Vec<RawQi>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const SECTIONS: [&str; 4] = ["constructors", "defined", "precedence", "rules"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.pos().error(ParseErrorKind::Unexpected {
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                let pos = self.bump().1;
                Ok((w, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn at_section(&self) -> bool {
        match self.peek() {
            Tok::Word(w) if SECTIONS.contains(&w.as_str()) => *self.peek_at(1) == Tok::Colon,
            Tok::Word(w) if w == "interpret" => {
                matches!(self.peek_at(1), Tok::Word(_)) && *self.peek_at(2) == Tok::LParen
            }
            Tok::Eof => true,
            _ => false,
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let (name, pos) = self.word("a term")?;
        if *self.peek() != Tok::LParen {
            return Ok(RawTerm { name, pos, args: None });
        }
        self.bump();
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(RawTerm {
            name,
            pos,
            args: Some(args),
        })
    }

    fn qi_sum(&mut self) -> Result<RawQi, ParseError> {
        let mut e = self.qi_product()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            e = RawQi::Add(Box::new(e), Box::new(self.qi_product()?));
        }
        Ok(e)
    }

    fn qi_product(&mut self) -> Result<RawQi, ParseError> {
        let mut e = self.qi_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            e = RawQi::Mul(Box::new(e), Box::new(self.qi_atom()?));
        }
        Ok(e)
    }

    fn qi_atom(&mut self) -> Result<RawQi, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.qi_sum()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Word(w) if w == "max" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let mut es = vec![self.qi_sum()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    es.push(self.qi_sum()?);
                }
                self.expect(Tok::RParen)?;
                Ok(RawQi::Max(es))
            }
            Tok::Word(w) => {
                let pos = self.bump().1;
                if w.chars().all(|c| c.is_ascii_digit()) {
                    Ok(RawQi::Num(w, pos))
                } else {
                    Ok(RawQi::Name(w, pos))
                }
            }
            _ => Err(self.unexpected("an interpretation expression")),
        }
    }
}

fn resolve_term(sig: &Signature, raw: &RawTerm) -> Result<Term, ParseError> {
    match (&raw.args, sig.get(&raw.name)) {
        (None, None) => Ok(Term::var(&raw.name)),
        (Some(_), None) => Err(raw.pos.error(ParseErrorKind::UnknownSymbol(raw.name.clone()))),
        (args, Some(f)) => {
            // Arguments first, so the innermost mistake is reported.
            let args = args
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|a| resolve_term(sig, a))
                .collect::<Result<Vec<_>, _>>()?;
            if args.len() != f.arity() {
                return Err(raw.pos.error(ParseErrorKind::Arity {
                    symbol: raw.name.clone(),
                    expected: f.arity(),
                    found: args.len(),
                }));
            }
            Ok(Term::app(f.clone(), args))
        }
    }
}

fn resolve_qi(params: &[String], raw: &RawQi) -> Result<QiExpr, ParseError> {
    Ok(match raw {
        RawQi::Num(n, pos) => QiExpr::Const(
            n.parse::<BigUint>()
                .map_err(|_| pos.error(ParseErrorKind::BadNumber(n.clone())))?,
        ),
        RawQi::Name(x, pos) => QiExpr::Param(
            params
                .iter()
                .position(|p| p == x)
                .ok_or_else(|| pos.error(ParseErrorKind::UnknownParameter(x.clone())))?,
        ),
        RawQi::Add(l, r) => QiExpr::plus(resolve_qi(params, l)?, resolve_qi(params, r)?),
        RawQi::Mul(l, r) => QiExpr::times(resolve_qi(params, l)?, resolve_qi(params, r)?),
        RawQi::Max(es) => QiExpr::Max(es.iter().map(|e| resolve_qi(params, e)).collect::<Result<_, _>>()?),
    })
}

/// Parses and validates a whole program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut decls: Vec<(String, usize, SymbolKind, Pos)> = Vec::new();
    let mut prec: Vec<(String, String, Pos)> = Vec::new();
    let mut interps: Vec<(String, Pos, Vec<String>, RawQi)> = Vec::new();
    let mut rules: Vec<(RawTerm, RawTerm)> = Vec::new();

    if *p.peek() == Tok::Eof {
        return Err(p.unexpected("a section"));
    }
    while *p.peek() != Tok::Eof {
        let (head, head_pos) = p.word("a section")?;
        match head.as_str() {
            "constructors" | "defined" => {
                p.expect(Tok::Colon)?;
                let kind = if head == "defined" { SymbolKind::Defined } else { SymbolKind::Constructor };
                loop {
                    let (name, pos) = p.word("a symbol name")?;
                    p.expect(Tok::Slash)?;
                    let (n, npos) = p.word("an arity")?;
                    let arity = n.parse().map_err(|_| npos.error(ParseErrorKind::BadNumber(n.clone())))?;
                    decls.push((name, arity, kind, pos));
                    if *p.peek() != Tok::Comma {
                        break;
                    }
                    p.bump();
                }
            }
            "precedence" => {
                p.expect(Tok::Colon)?;
                loop {
                    let (f, pos) = p.word("a symbol name")?;
                    p.expect(Tok::Less)?;
                    let (g, _) = p.word("a symbol name")?;
                    prec.push((f, g, pos));
                    if *p.peek() != Tok::Comma {
                        break;
                    }
                    p.bump();
                }
            }
            "interpret" => {
                let (name, pos) = p.word("a symbol name")?;
                p.expect(Tok::LParen)?;
                let mut params = Vec::new();
                if *p.peek() != Tok::RParen {
                    params.push(p.word("a parameter")?.0);
                    while *p.peek() == Tok::Comma {
                        p.bump();
                        params.push(p.word("a parameter")?.0);
                    }
                }
                p.expect(Tok::RParen)?;
                p.expect(Tok::Equals)?;
                let body = p.qi_sum()?;
                interps.push((name, pos, params, body));
            }
            "rules" => {
                p.expect(Tok::Colon)?;
                loop {
                    let lhs = p.term()?;
                    p.expect(Tok::Arrow)?;
                    let rhs = p.term()?;
                    rules.push((lhs, rhs));
                    if p.at_section() {
                        break;
                    }
                }
            }
            _ => {
                return Err(head_pos.error(ParseErrorKind::Unexpected {
                    expected: "a section".into(),
                    found: format!("`{head}`"),
                }))
            }
        }
        if !p.at_section() {
            return Err(p.unexpected("a section"));
        }
    }

    let first_decl = decls.first().map_or_else(Pos::default, |d| d.3);
    let mut seen: HashMap<&str, Pos> = HashMap::new();
    for (name, _, _, pos) in &decls {
        if seen.insert(name, *pos).is_some() {
            return Err(pos.error(SignatureError::Duplicate(name.clone())));
        }
    }
    let signature = Signature::new(decls.iter().map(|(n, a, k, _)| Symbol::new(n.clone(), *a, *k)))
        .map_err(|e| first_decl.error(e))?;

    let mut pairs = Vec::new();
    for (f, g, pos) in &prec {
        pairs.push((f.clone(), g.clone()));
        Precedence::new(&signature, pairs.clone()).map_err(|e| pos.error(e))?;
    }
    let precedence = Precedence::new(&signature, pairs).expect("validated incrementally");

    let interpretation = if interps.is_empty() {
        None
    } else {
        let mut table = QiTable::new();
        for (name, pos, params, body) in &interps {
            let Some(f) = signature.get(name) else {
                return Err(pos.error(ParseErrorKind::UnknownSymbol(name.clone())));
            };
            if f.arity() != params.len() {
                return Err(pos.error(ParseErrorKind::Arity {
                    symbol: name.clone(),
                    expected: f.arity(),
                    found: params.len(),
                }));
            }
            if table.get(name).is_some() {
                return Err(pos.error(ParseErrorKind::DuplicateInterpretation(name.clone())));
            }
            table.insert(name.clone(), Interpretation::new(params.clone(), resolve_qi(params, body)?));
        }
        Some(table)
    };

    let mut resolved = Vec::new();
    for (lhs, rhs) in &rules {
        let rule = Rule::new(resolve_term(&signature, lhs)?, resolve_term(&signature, rhs)?);
        crate::program::validate_rule(&signature, &rule).map_err(|e| lhs.pos.error(e))?;
        resolved.push(rule);
    }
    Ok(Program::new(signature, resolved, precedence, interpretation).expect("rules validated"))
}

/// Parses a term over `sig`. Undeclared nullary names become variables.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let raw = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    resolve_term(sig, &raw)
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Prints a program in the same format `parse_program` reads.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    let decls = |kind: SymbolKind| {
        p.signature
            .symbols()
            .iter()
            .filter(|s| s.kind() == kind)
            .map(|s| format!("{}/{}", s.name(), s.arity()))
            .collect::<Vec<_>>()
    };
    let cons = decls(SymbolKind::Constructor);
    let defs = decls(SymbolKind::Defined);
    // Keep declaration order when kinds interleave.
    let interleaved = {
        let kinds: Vec<SymbolKind> = p.signature.symbols().iter().map(Symbol::kind).collect();
        kinds.windows(2).filter(|w| w[0] != w[1]).count() > 1
    };
    if interleaved {
        for s in p.signature.symbols() {
            let head = if s.is_constructor() { "constructors" } else { "defined" };
            let _ = writeln!(out, "{head}: {}/{}", s.name(), s.arity());
        }
    } else {
        let first_defined = p.signature.symbols().first().is_some_and(Symbol::is_defined);
        let c = (!cons.is_empty()).then(|| format!("constructors: {}\n", cons.join(", ")));
        let d = (!defs.is_empty()).then(|| format!("defined: {}\n", defs.join(", ")));
        let (first, second) = if first_defined { (d, c) } else { (c, d) };
        out.extend(first);
        out.extend(second);
    }
    if !p.precedence.declared().is_empty() {
        let pairs: Vec<String> = p.precedence.declared().iter().map(|(f, g)| format!("{f} < {g}")).collect();
        let _ = writeln!(out, "precedence: {}", pairs.join(", "));
    }
    if let Some(q) = &p.interpretation {
        for (name, interp) in q.entries() {
            let _ = writeln!(out, "interpret {name}({}) = {interp}", interp.params.join(", "));
        }
    }
    if !p.rules.is_empty() {
        out.push_str("rules:\n");
        for r in &p.rules {
            let _ = writeln!(out, "  {r}");
        }
    }
    out
}
