//! Compact binary codes for terms over a fixed signature and variable pool.
//!
//! A code is laid out as
//!
//! ```text
//! 1^|t| 0 | gamma(N) | node_1 ... node_N
//! ```
//!
//! where `N` is the number of distinct subterms (the nodes of the term's
//! minimal DAG), `gamma` is the Elias gamma code, and each node is its
//! symbol index in `w_sym` bits followed by one `w_idx`-bit reference per
//! argument to an earlier node. Nodes appear in order of first completion in
//! a leftmost-innermost traversal, so the root is last.
//!
//! The unary size prefix makes the code length dominate `|t|` and grow
//! strictly from a proper subterm to its superterm, while the DAG body keeps
//! the total within a quadratic of `|t|`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::term::{Signature, Symbol, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("symbol `{0}` is not in the signature")]
    UnknownSymbol(String),
    #[error("variable `{0}` is not in the variable pool")]
    UnknownVariable(String),
    #[error("malformed code: {0}")]
    Malformed(&'static str),
}

/// A bit string, most significant bit first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Code(Vec<bool>);

impl Code {
    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({self})")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Letter {
    Sym(Symbol),
    Var(Var),
}

/// Encoder for `T(F, V)` with `F` a signature and `V` a finite variable pool.
#[derive(Clone, Debug)]
pub struct Encoder {
    alphabet: Vec<Letter>,
    symbol_index: HashMap<Symbol, usize>,
    var_index: HashMap<Var, usize>,
    symbol_width: usize,
}

fn bit_width(max_value: usize) -> usize {
    (usize::BITS - max_value.leading_zeros()).max(1) as usize
}

impl Encoder {
    pub fn new(signature: &Signature, variables: &[Var]) -> Encoder {
        let mut alphabet: Vec<Letter> = signature.symbols().iter().cloned().map(Letter::Sym).collect();
        let mut var_index = HashMap::new();
        for x in variables {
            if !var_index.contains_key(x) {
                var_index.insert(x.clone(), alphabet.len());
                alphabet.push(Letter::Var(x.clone()));
            }
        }
        let symbol_index = signature
            .symbols()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let symbol_width = bit_width(alphabet.len().saturating_sub(1));
        Encoder {
            alphabet,
            symbol_index,
            var_index,
            symbol_width,
        }
    }

    fn letter_of(&self, t: &Term) -> Result<usize, EncodeError> {
        match t {
            Term::Var(x) => self
                .var_index
                .get(x)
                .copied()
                .ok_or_else(|| EncodeError::UnknownVariable(x.name().to_string())),
            Term::App(f, _) => self
                .symbol_index
                .get(f)
                .copied()
                .ok_or_else(|| EncodeError::UnknownSymbol(f.name().to_string())),
        }
    }

    pub fn encode(&self, t: &Term) -> Result<Code, EncodeError> {
        // Minimal DAG: each distinct subterm gets one node id.
        let mut ids: HashMap<&Term, usize> = HashMap::new();
        let mut nodes: Vec<(usize, Vec<usize>)> = Vec::new();
        for sub in t.subterms_postorder() {
            if ids.contains_key(sub) {
                continue;
            }
            let letter = self.letter_of(sub)?;
            let children = sub.args().iter().map(|a| ids[a]).collect();
            ids.insert(sub, nodes.len());
            nodes.push((letter, children));
        }

        let mut bits = Vec::new();
        bits.extend(std::iter::repeat_n(true, t.size()));
        bits.push(false);
        push_gamma(&mut bits, nodes.len());
        let index_width = bit_width(nodes.len() - 1);
        for (letter, children) in &nodes {
            push_fixed(&mut bits, *letter, self.symbol_width);
            for &c in children {
                push_fixed(&mut bits, c, index_width);
            }
        }
        Ok(Code(bits))
    }

    pub fn decode(&self, code: &Code) -> Result<Term, EncodeError> {
        let mut r = BitReader { bits: code.bits(), pos: 0 };
        let mut size = 0usize;
        while r.next()? {
            size += 1;
        }
        let n = r.gamma()?;
        if n == 0 || n > size {
            return Err(EncodeError::Malformed("node count out of range"));
        }
        let index_width = bit_width(n - 1);
        let mut built: Vec<Term> = Vec::with_capacity(n);
        for _ in 0..n {
            let letter = r.fixed(self.symbol_width)?;
            let term = match self.alphabet.get(letter) {
                Some(Letter::Var(x)) => Term::Var(x.clone()),
                Some(Letter::Sym(f)) => {
                    let mut args = Vec::with_capacity(f.arity());
                    for _ in 0..f.arity() {
                        let c = r.fixed(index_width)?;
                        if c >= built.len() {
                            return Err(EncodeError::Malformed("forward node reference"));
                        }
                        args.push(built[c].clone());
                    }
                    Term::app(f.clone(), args)
                }
                None => return Err(EncodeError::Malformed("letter out of range")),
            };
            built.push(term);
        }
        if r.pos != code.len() {
            return Err(EncodeError::Malformed("trailing bits"));
        }
        let root = built.pop().expect("n >= 1");
        if root.size() != size {
            return Err(EncodeError::Malformed("size prefix disagrees with body"));
        }
        Ok(root)
    }
}

fn push_fixed(bits: &mut Vec<bool>, value: usize, width: usize) {
    for i in (0..width).rev() {
        bits.push((value >> i) & 1 == 1);
    }
}

fn push_gamma(bits: &mut Vec<bool>, n: usize) {
    debug_assert!(n >= 1);
    let width = bit_width(n);
    bits.extend(std::iter::repeat_n(false, width - 1));
    push_fixed(bits, n, width);
}

struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    fn next(&mut self) -> Result<bool, EncodeError> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or(EncodeError::Malformed("unexpected end of code"))?;
        self.pos += 1;
        Ok(b)
    }

    fn fixed(&mut self, width: usize) -> Result<usize, EncodeError> {
        let mut v = 0usize;
        for _ in 0..width {
            v = (v << 1) | usize::from(self.next()?);
        }
        Ok(v)
    }

    fn gamma(&mut self) -> Result<usize, EncodeError> {
        let mut zeros = 0;
        while !self.next()? {
            zeros += 1;
            if zeros >= usize::BITS as usize {
                return Err(EncodeError::Malformed("gamma prefix too long"));
            }
        }
        let rest = self.fixed(zeros)?;
        Ok((1 << zeros) | rest)
    }
}
