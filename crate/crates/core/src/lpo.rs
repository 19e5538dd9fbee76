//! Lexicographic path order with derivation witnesses.
//!
//! `s < t` is decided by the three rules
//!
//! 1. `s <= t_i` for some argument `t_i` of `t = g(t_1, ..., t_l)`;
//! 2. `s = f(s_1, ..., s_k)` with `f` below `g` in the precedence and every
//!    `s_j < t`;
//! 3. `s = f(s_1, ..., s_k)`, `t = f(t_1, ..., t_k)` with `f` defined, equal
//!    arguments before some index `i`, `s_i < t_i`, and `s_j < t` after it.
//!
//! Constructors sit below every defined symbol and are pairwise
//! incomparable; variables only lie below terms that contain them.
//! Every search memoizes on pairs of subterm occurrences, so one call does at
//! most `|s| * |t|` pair evaluations.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::program::Program;
use crate::term::{Signature, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrecedenceError {
    #[error("precedence mentions unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("precedence may only relate defined symbols, `{0}` is a constructor")]
    NotDefined(String),
    #[error("precedence pair `{0} < {0}` is reflexive")]
    Reflexive(String),
    #[error("precedence is cyclic through `{0}`")]
    Cyclic(String),
}

/// A strict order on defined symbols, with every constructor below every
/// defined symbol.
#[derive(Clone, Debug, Default)]
pub struct Precedence {
    declared: Vec<(String, String)>,
    // g -> every defined f with f < g, transitively closed.
    below: HashMap<String, HashSet<String>>,
}

impl PartialEq for Precedence {
    fn eq(&self, other: &Precedence) -> bool {
        self.declared == other.declared
    }
}

impl Eq for Precedence {}

impl Precedence {
    pub fn empty() -> Precedence {
        Precedence::default()
    }

    /// Builds the closure of `pairs`, each read as `smaller < greater`.
    pub fn new(sig: &Signature, pairs: Vec<(String, String)>) -> Result<Precedence, PrecedenceError> {
        for (f, g) in &pairs {
            for name in [f, g] {
                match sig.get(name) {
                    None => return Err(PrecedenceError::UnknownSymbol(name.clone())),
                    Some(s) if s.is_constructor() => return Err(PrecedenceError::NotDefined(name.clone())),
                    Some(_) => {}
                }
            }
            if f == g {
                return Err(PrecedenceError::Reflexive(f.clone()));
            }
        }
        let mut below: HashMap<String, HashSet<String>> = HashMap::new();
        for (f, g) in &pairs {
            below.entry(g.clone()).or_default().insert(f.clone());
        }
        loop {
            let mut changed = false;
            let keys: Vec<String> = below.keys().cloned().collect();
            for g in &keys {
                let direct: Vec<String> = below[g].iter().cloned().collect();
                for f in direct {
                    if let Some(more) = below.get(&f).cloned() {
                        let set = below.get_mut(g).expect("key present");
                        for h in more {
                            changed |= set.insert(h);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut cyclic: Vec<&String> = below.iter().filter(|(g, set)| set.contains(*g)).map(|(g, _)| g).collect();
        cyclic.sort();
        if let Some(g) = cyclic.first() {
            return Err(PrecedenceError::Cyclic((*g).clone()));
        }
        Ok(Precedence { declared: pairs, below })
    }

    /// The pairs as written, before closure.
    pub fn declared(&self) -> &[(String, String)] {
        &self.declared
    }

    /// `f < g`.
    pub fn lt(&self, f: &Symbol, g: &Symbol) -> bool {
        if !g.is_defined() {
            return false;
        }
        f.is_constructor() || self.below.get(g.name()).is_some_and(|set| set.contains(f.name()))
    }

    /// Length of the longest descending chain below `f`, counting the
    /// constructor layer: constructors get 0, minimal defined symbols 1.
    /// `f < g` implies `rank(f) < rank(g)`.
    pub fn rank(&self, f: &Symbol) -> usize {
        if f.is_constructor() {
            return 0;
        }
        self.rank_by_name(f.name())
    }

    fn rank_by_name(&self, name: &str) -> usize {
        1 + self
            .below
            .get(name)
            .map(|set| set.iter().map(|h| self.rank_by_name(h)).max().unwrap_or(0))
            .unwrap_or(0)
    }
}

/// Which of the three rules concludes a derivation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpoRule {
    Subterm = 1,
    Precedence = 2,
    Lexicographic = 3,
}

impl Serialize for LpoRule {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(*self as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Premise {
    /// Syntactic identity `s = t`.
    Equal { term: Term },
    Strict { derivation: Arc<Derivation> },
}

/// A derivation tree concluding `smaller < greater`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub smaller: Term,
    pub greater: Term,
    pub rule: LpoRule,
    pub premises: Vec<Premise>,
}

impl Derivation {
    /// Nodes in the tree, equality leaves included.
    pub fn node_count(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(|p| match p {
                Premise::Equal { .. } => 1,
                Premise::Strict { derivation } => derivation.node_count(),
            })
            .sum::<usize>()
    }

    /// Re-checks every step against the rule it claims, independently of
    /// the search that built the tree.
    pub fn check(&self, prec: &Precedence) -> bool {
        let (s, t) = (&self.smaller, &self.greater);
        let Term::App(g, targs) = t else {
            return false;
        };
        let strict_ok = |p: &Premise, want_s: &Term, want_t: &Term| match p {
            Premise::Strict { derivation } => {
                &derivation.smaller == want_s && &derivation.greater == want_t && derivation.check(prec)
            }
            Premise::Equal { .. } => false,
        };
        match self.rule {
            LpoRule::Subterm => {
                let [p] = self.premises.as_slice() else {
                    return false;
                };
                targs.iter().any(|ti| match p {
                    Premise::Equal { term } => term == s && term == ti,
                    Premise::Strict { .. } => strict_ok(p, s, ti),
                })
            }
            LpoRule::Precedence => {
                let Term::App(f, sargs) = s else {
                    return false;
                };
                prec.lt(f, g)
                    && sargs.len() == self.premises.len()
                    && sargs.iter().zip(&self.premises).all(|(sj, p)| strict_ok(p, sj, t))
            }
            LpoRule::Lexicographic => {
                let Term::App(f, sargs) = s else {
                    return false;
                };
                if f != g || !g.is_defined() || self.premises.len() != sargs.len() {
                    return false;
                }
                let Some(i) = sargs.iter().zip(targs.iter()).position(|(a, b)| a != b) else {
                    return false;
                };
                self.premises.iter().enumerate().all(|(j, p)| match j.cmp(&i) {
                    std::cmp::Ordering::Less => matches!(p, Premise::Equal { term } if term == &sargs[j]),
                    std::cmp::Ordering::Equal => strict_ok(p, &sargs[i], &targs[i]),
                    std::cmp::Ordering::Greater => strict_ok(p, &sargs[j], t),
                })
            }
        }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(
            f,
            "{:indent$}{} <{} {}",
            "",
            self.smaller,
            self.rule as u8,
            self.greater,
            indent = depth * 2
        )?;
        for p in &self.premises {
            match p {
                Premise::Equal { term } => writeln!(f, "{:indent$}{term} = {term}", "", indent = depth * 2 + 2)?,
                Premise::Strict { derivation } => derivation.write_indented(f, depth + 1)?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

struct Flat<'a> {
    nodes: Vec<&'a Term>,
    children: Vec<Vec<usize>>,
}

impl<'a> Flat<'a> {
    fn new(t: &'a Term) -> Flat<'a> {
        let mut flat = Flat {
            nodes: Vec::new(),
            children: Vec::new(),
        };
        flat.push(t);
        flat
    }

    // Preorder; the root gets id 0.
    fn push(&mut self, t: &'a Term) -> usize {
        let id = self.nodes.len();
        self.nodes.push(t);
        self.children.push(Vec::new());
        let kids: Vec<usize> = t.args().iter().map(|a| self.push(a)).collect();
        self.children[id] = kids;
        id
    }
}

struct Search<'a> {
    prec: &'a Precedence,
    s: Flat<'a>,
    t: Flat<'a>,
    memo: Vec<Option<Option<Arc<Derivation>>>>,
}

impl<'a> Search<'a> {
    fn lt(&mut self, i: usize, j: usize) -> Option<Arc<Derivation>> {
        let key = i * self.t.nodes.len() + j;
        if let Some(done) = &self.memo[key] {
            return done.clone();
        }
        let result = self.compute(i, j).map(Arc::new);
        self.memo[key] = Some(result.clone());
        result
    }

    fn node(&self, i: usize, j: usize, rule: LpoRule, premises: Vec<Premise>) -> Derivation {
        Derivation {
            smaller: self.s.nodes[i].clone(),
            greater: self.t.nodes[j].clone(),
            rule,
            premises,
        }
    }

    fn compute(&mut self, i: usize, j: usize) -> Option<Derivation> {
        let (s, t) = (self.s.nodes[i], self.t.nodes[j]);
        let Term::App(g, _) = t else {
            return None;
        };

        for tk in self.t.children[j].clone() {
            if s == self.t.nodes[tk] {
                return Some(self.node(i, j, LpoRule::Subterm, vec![Premise::Equal { term: s.clone() }]));
            }
            if let Some(d) = self.lt(i, tk) {
                return Some(self.node(i, j, LpoRule::Subterm, vec![Premise::Strict { derivation: d }]));
            }
        }

        let Term::App(f, _) = s else {
            return None;
        };

        if self.prec.lt(f, g) {
            let mut premises = Vec::new();
            for sj in self.s.children[i].clone() {
                premises.push(Premise::Strict { derivation: self.lt(sj, j)? });
            }
            return Some(self.node(i, j, LpoRule::Precedence, premises));
        }

        if f == g && g.is_defined() {
            let (sk, tk) = (self.s.children[i].clone(), self.t.children[j].clone());
            let pivot = (0..sk.len()).find(|&q| self.s.nodes[sk[q]] != self.t.nodes[tk[q]])?;
            let mut premises: Vec<Premise> = sk[..pivot]
                .iter()
                .map(|&q| Premise::Equal {
                    term: self.s.nodes[q].clone(),
                })
                .collect();
            premises.push(Premise::Strict {
                derivation: self.lt(sk[pivot], tk[pivot])?,
            });
            for &q in &sk[pivot + 1..] {
                premises.push(Premise::Strict { derivation: self.lt(q, j)? });
            }
            return Some(self.node(i, j, LpoRule::Lexicographic, premises));
        }
        None
    }
}

/// A witness for `s < t`, or `None` when the order does not relate them.
pub fn lpo_gt(prec: &Precedence, s: &Term, t: &Term) -> Option<Derivation> {
    let s_flat = Flat::new(s);
    let t_flat = Flat::new(t);
    let cells = s_flat.nodes.len() * t_flat.nodes.len();
    let mut search = Search {
        prec,
        s: s_flat,
        t: t_flat,
        memo: vec![None; cells],
    };
    search.lt(0, 0).map(|d| Arc::try_unwrap(d).unwrap_or_else(|d| (*d).clone()))
}

/// `T_ell`: closed constructor terms of size at most `ell`.
pub fn in_constructor_budget(ell: usize, t: &Term) -> bool {
    t.is_closed() && t.is_constructor_term() && t.size() <= ell
}

/// `B_ell`: closed basic terms whose arguments have size at most `ell`.
pub fn in_basic_budget(ell: usize, t: &Term) -> bool {
    t.is_closed() && t.is_basic() && t.args().iter().all(|a| a.size() <= ell)
}

/// `s <_ell t`: the order restricted to `s` within the size budget.
pub fn lpo_gt_bounded(prec: &Precedence, ell: usize, s: &Term, t: &Term) -> bool {
    (in_constructor_budget(ell, s) || in_basic_budget(ell, s)) && lpo_gt(prec, s, t).is_some()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot compare argument tuples of lengths {0} and {1}")]
pub struct LengthMismatch(pub usize, pub usize);

/// Lexicographic extension of `<_ell` to tuples of constructor terms.
pub fn lex_gt(prec: &Precedence, ell: usize, ss: &[Term], ts: &[Term]) -> Result<bool, LengthMismatch> {
    if ss.len() != ts.len() {
        return Err(LengthMismatch(ss.len(), ts.len()));
    }
    // Only the first differing position can carry the strict comparison.
    let Some(i) = ss.iter().zip(ts).position(|(s, t)| s != t) else {
        return Ok(false);
    };
    let head = in_constructor_budget(ell, &ss[i])
        && lpo_gt(prec, &ss[i], &ts[i]).is_some_and(|d| d.rule == LpoRule::Subterm);
    Ok(head && ss[i + 1..].iter().all(|s| in_constructor_budget(ell, s)))
}

/// Verdict for one rule `l -> r`: a witness of `r < l` or nothing.
#[derive(Debug, Clone, Serialize)]
pub struct RuleOrientation {
    pub index: usize,
    pub rule: String,
    pub oriented: bool,
    pub witness: Option<Derivation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrientationReport {
    pub rules: Vec<RuleOrientation>,
    pub oriented: bool,
    pub first_failure: Option<usize>,
}

pub fn orient_program(p: &Program) -> OrientationReport {
    let rules: Vec<RuleOrientation> = p
        .rules
        .iter()
        .enumerate()
        .map(|(index, rule)| {
            let witness = lpo_gt(&p.precedence, &rule.rhs, &rule.lhs);
            RuleOrientation {
                index,
                rule: rule.to_string(),
                oriented: witness.is_some(),
                witness,
            }
        })
        .collect();
    let first_failure = rules.iter().position(|r| !r.oriented);
    OrientationReport {
        oriented: first_failure.is_none(),
        first_failure,
        rules,
    }
}
