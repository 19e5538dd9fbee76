//! First-order terms over a signature of constructors and defined symbols.
//!
//! Terms are immutable and cheap to clone: argument lists live behind an
//! `Arc`, so rebuilding a spine after a replacement shares every untouched
//! sibling with the original.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether a symbol builds values or names a function to be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Constructor,
    Defined,
}

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct SymbolData {
    name: String,
    arity: usize,
    kind: SymbolKind,
}

/// A function symbol with a fixed arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<SymbolData>);

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize, kind: SymbolKind) -> Symbol {
        Symbol(Arc::new(SymbolData {
            name: name.into(),
            arity,
            kind,
        }))
    }

    pub fn constructor(name: impl Into<String>, arity: usize) -> Symbol {
        Symbol::new(name, arity, SymbolKind::Constructor)
    }

    pub fn defined(name: impl Into<String>, arity: usize) -> Symbol {
        Symbol::new(name, arity, SymbolKind::Defined)
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn kind(&self) -> SymbolKind {
        self.0.kind
    }

    pub fn is_constructor(&self) -> bool {
        self.0.kind == SymbolKind::Constructor
    }

    pub fn is_defined(&self) -> bool {
        self.0.kind == SymbolKind::Defined
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name(), self.arity())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("symbol names must be nonempty")]
    EmptyName,
    #[error("symbol `{0}` declared more than once")]
    Duplicate(String),
    #[error("the signature needs at least one constructor constant")]
    NoConstant,
}

/// The disjoint union of constructors and defined symbols, in declaration order.
#[derive(Clone, Debug)]
pub struct Signature {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, usize>,
}

impl Signature {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Result<Signature, SignatureError> {
        let symbols: Vec<Symbol> = symbols.into_iter().collect();
        let mut by_name = HashMap::new();
        for (i, sym) in symbols.iter().enumerate() {
            if sym.name().is_empty() {
                return Err(SignatureError::EmptyName);
            }
            if by_name.insert(sym.name().to_string(), i).is_some() {
                return Err(SignatureError::Duplicate(sym.name().to_string()));
            }
        }
        if !symbols.iter().any(|s| s.is_constructor() && s.arity() == 0) {
            return Err(SignatureError::NoConstant);
        }
        Ok(Signature { symbols, by_name })
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.by_name.get(name).map(|&i| &self.symbols[i])
    }

    pub fn index_of(&self, sym: &Symbol) -> Option<usize> {
        self.by_name
            .get(sym.name())
            .copied()
            .filter(|&i| self.symbols[i] == *sym)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn constructors(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.is_constructor())
    }

    pub fn defined(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.is_defined())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl PartialEq for Signature {
    fn eq(&self, other: &Signature) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Signature {}

/// A variable, identified by its name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Coarse shape of a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermClass {
    /// No defined symbol occurs.
    ConstructorTerm,
    /// A defined symbol applied to constructor terms.
    BasicTerm,
    GeneralTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{symbol}` expects {expected} arguments, got {found}")]
pub struct ArityError {
    pub symbol: String,
    pub expected: usize,
    pub found: usize,
}

/// Path from the root to a subterm, as zero-based argument indices.
pub type Position = Vec<usize>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(Symbol, Arc<[Term]>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn try_app(symbol: Symbol, args: Vec<Term>) -> Result<Term, ArityError> {
        if symbol.arity() != args.len() {
            return Err(ArityError {
                symbol: symbol.name().to_string(),
                expected: symbol.arity(),
                found: args.len(),
            });
        }
        Ok(Term::App(symbol, args.into()))
    }

    /// Panics when the argument count does not match the arity.
    pub fn app(symbol: Symbol, args: Vec<Term>) -> Term {
        match Term::try_app(symbol, args) {
            Ok(t) => t,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn constant(symbol: Symbol) -> Term {
        Term::app(symbol, Vec::new())
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Height of the term tree; constants and variables have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    pub fn is_constructor_term(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(f, args) => f.is_constructor() && args.iter().all(Term::is_constructor_term),
        }
    }

    pub fn is_basic(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(f, args) => f.is_defined() && args.iter().all(Term::is_constructor_term),
        }
    }

    pub fn classify(&self) -> TermClass {
        if self.is_constructor_term() {
            TermClass::ConstructorTerm
        } else if self.is_basic() {
            TermClass::BasicTerm
        } else {
            TermClass::GeneralTerm
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Number of occurrences of defined symbols.
    pub fn defined_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(f, args) => {
                usize::from(f.is_defined()) + args.iter().map(Term::defined_count).sum::<usize>()
            }
        }
    }

    /// All subterms in leftmost-innermost (post-) order, including `self` last.
    pub fn subterms_postorder(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.push_postorder(&mut out);
        out
    }

    fn push_postorder<'a>(&'a self, out: &mut Vec<&'a Term>) {
        for a in self.args() {
            a.push_postorder(out);
        }
        out.push(self);
    }

    /// Basic subterms in leftmost-innermost order, duplicates kept.
    pub fn basic_subterms(&self) -> Vec<Term> {
        self.subterms_postorder()
            .into_iter()
            .filter(|t| t.is_basic())
            .cloned()
            .collect()
    }

    /// The first basic subterm in leftmost-innermost order.
    pub fn first_basic_subterm(&self) -> Option<&Term> {
        match self {
            Term::Var(_) => None,
            Term::App(f, args) => {
                let mut all_constructor = true;
                for a in args.iter() {
                    if let Some(b) = a.first_basic_subterm() {
                        return Some(b);
                    }
                    all_constructor &= a.is_constructor_term();
                }
                (f.is_defined() && all_constructor).then_some(self)
            }
        }
    }

    pub fn contains(&self, other: &Term) -> bool {
        self == other || self.args().iter().any(|a| a.contains(other))
    }

    pub fn subterm_at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.subterm_at(rest),
        }
    }

    /// Replaces the subterm at `pos`; `None` when the position does not exist.
    pub fn replace_at(&self, pos: &[usize], new: Term) -> Option<Term> {
        match pos.split_first() {
            None => Some(new),
            Some((&i, rest)) => match self {
                Term::Var(_) => None,
                Term::App(f, args) => {
                    let child = args.get(i)?.replace_at(rest, new)?;
                    let mut v = args.to_vec();
                    v[i] = child;
                    Some(Term::App(f.clone(), v.into()))
                }
            },
        }
    }

    /// `t[new/old]`: replaces the leftmost-innermost occurrence of `old`.
    /// Returns an unchanged copy when `old` does not occur.
    pub fn replace_first(&self, new: &Term, old: &Term) -> Term {
        self.try_replace_first(new, old).unwrap_or_else(|| self.clone())
    }

    fn try_replace_first(&self, new: &Term, old: &Term) -> Option<Term> {
        if let Term::App(f, args) = self {
            for (i, a) in args.iter().enumerate() {
                if let Some(child) = a.try_replace_first(new, old) {
                    let mut v = args.to_vec();
                    v[i] = child;
                    return Some(Term::App(f.clone(), v.into()));
                }
            }
        }
        (self == old).then(|| new.clone())
    }

    /// Homomorphic replacement of bound variables; unbound ones stay put.
    pub fn apply(&self, theta: &Substitution) -> Term {
        match self {
            Term::Var(x) => theta.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => {
                if args.is_empty() {
                    return self.clone();
                }
                Term::App(f.clone(), args.iter().map(|a| a.apply(theta)).collect())
            }
        }
    }

    /// Finds `theta` with `self.apply(theta) == subject`. Repeated pattern
    /// variables must be bound to equal subterms.
    pub fn matches(&self, subject: &Term) -> Option<Substitution> {
        let mut theta = Substitution::new();
        self.match_into(subject, &mut theta).then_some(theta)
    }

    fn match_into(&self, subject: &Term, theta: &mut Substitution) -> bool {
        match (self, subject) {
            (Term::Var(x), _) => match theta.get(x) {
                Some(bound) => bound == subject,
                None => {
                    theta.insert(x.clone(), subject.clone());
                    true
                }
            },
            (Term::App(f, ps), Term::App(g, ss)) => {
                f == g && ps.iter().zip(ss.iter()).all(|(p, s)| p.match_into(s, theta))
            }
            (Term::App(..), Term::Var(_)) => false,
        }
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(sym, args) => {
                f.write_str(sym.name())?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite map from variables to terms.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution(BTreeMap::new())
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, t: Term) -> Option<Term> {
        self.0.insert(x, t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    /// Keeps only the bindings of `vars`.
    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution(
            self.0
                .iter()
                .filter(|(x, _)| vars.contains(x))
                .map(|(x, t)| (x.clone(), t.clone()))
                .collect(),
        )
    }

    /// True when every bound term is a closed constructor term.
    pub fn is_constructor_substitution(&self) -> bool {
        self.0.values().all(|t| t.is_closed() && t.is_constructor_term())
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Substitution {
        Substitution(iter.into_iter().collect())
    }
}

impl Serialize for Substitution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.0.iter().map(|(x, t)| (x.name(), t.to_string())))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} -> {t}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
