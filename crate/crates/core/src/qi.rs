//! Polynomial quasi-interpretations built from constants, parameters, `+`,
//! `*` and `max`, evaluated over arbitrary-precision naturals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::program::Program;
use crate::sorts::{all_constructor_terms, Sorts};
use crate::term::{Signature, Symbol, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QiError {
    #[error("expected {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("parameter #{0} is out of range")]
    ParamOutOfRange(usize),
    #[error("term `{0}` is not closed")]
    OpenTerm(String),
    #[error("no interpretation for symbol `{0}`")]
    Missing(String),
    #[error("term `{0}` is not a closed basic term")]
    NotBasic(String),
}

/// An interpreting polynomial in max-plus-times form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QiExpr {
    Const(BigUint),
    Param(usize),
    Add(Box<QiExpr>, Box<QiExpr>),
    Mul(Box<QiExpr>, Box<QiExpr>),
    Max(Vec<QiExpr>),
}

impl QiExpr {
    pub fn constant(n: u64) -> QiExpr {
        QiExpr::Const(BigUint::from(n))
    }

    pub fn plus(l: QiExpr, r: QiExpr) -> QiExpr {
        QiExpr::Add(Box::new(l), Box::new(r))
    }

    pub fn times(l: QiExpr, r: QiExpr) -> QiExpr {
        QiExpr::Mul(Box::new(l), Box::new(r))
    }

    pub fn eval(&self, env: &[BigUint]) -> Result<BigUint, QiError> {
        Ok(match self {
            QiExpr::Const(c) => c.clone(),
            QiExpr::Param(i) => env.get(*i).cloned().ok_or(QiError::ParamOutOfRange(*i))?,
            QiExpr::Add(l, r) => l.eval(env)? + r.eval(env)?,
            QiExpr::Mul(l, r) => l.eval(env)? * r.eval(env)?,
            QiExpr::Max(es) => {
                let mut best = BigUint::zero();
                for e in es {
                    best = best.max(e.eval(env)?);
                }
                best
            }
        })
    }

    /// Largest parameter index plus one.
    pub fn param_bound(&self) -> usize {
        match self {
            QiExpr::Const(_) => 0,
            QiExpr::Param(i) => i + 1,
            QiExpr::Add(l, r) | QiExpr::Mul(l, r) => l.param_bound().max(r.param_bound()),
            QiExpr::Max(es) => es.iter().map(QiExpr::param_bound).max().unwrap_or(0),
        }
    }

    pub fn mentions(&self, param: usize) -> bool {
        match self {
            QiExpr::Const(_) => false,
            QiExpr::Param(i) => *i == param,
            QiExpr::Add(l, r) | QiExpr::Mul(l, r) => l.mentions(param) || r.mentions(param),
            QiExpr::Max(es) => es.iter().any(|e| e.mentions(param)),
        }
    }

    /// Sum-of-monomials normal form, or `None` when a `max` is involved.
    fn polynomial(&self, arity: usize) -> Option<Poly> {
        Some(match self {
            QiExpr::Const(c) => Poly::constant(arity, c.clone()),
            QiExpr::Param(i) => Poly::param(arity, *i),
            QiExpr::Add(l, r) => l.polynomial(arity)?.add(&r.polynomial(arity)?),
            QiExpr::Mul(l, r) => l.polynomial(arity)?.mul(&r.polynomial(arity)?),
            QiExpr::Max(_) => return None,
        })
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[String], level: u8, right: bool) -> fmt::Result {
        let param = |i: usize| names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
        match self {
            QiExpr::Const(c) => write!(f, "{c}"),
            QiExpr::Param(i) => f.write_str(&param(*i)),
            QiExpr::Max(es) => {
                f.write_str("max(")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    e.write(f, names, 0, false)?;
                }
                f.write_str(")")
            }
            QiExpr::Add(l, r) | QiExpr::Mul(l, r) => {
                let (own, op) = if matches!(self, QiExpr::Add(..)) { (1, " + ") } else { (2, " * ") };
                let parens = level > own || (level == own && right);
                if parens {
                    f.write_str("(")?;
                }
                l.write(f, names, own, false)?;
                f.write_str(op)?;
                r.write(f, names, own, true)?;
                if parens {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, BigUint>,
}

impl Poly {
    fn constant(arity: usize, c: BigUint) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; arity], c);
        }
        Poly { arity, terms }
    }

    fn param(arity: usize, i: usize) -> Poly {
        let mut exps = vec![0; arity];
        exps[i] = 1;
        Poly {
            arity,
            terms: BTreeMap::from([(exps, BigUint::one())]),
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(BigUint::zero) += c;
        }
        Poly { arity: self.arity, terms }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut terms: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Vec<u32> = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                *terms.entry(m).or_insert_with(BigUint::zero) += c1 * c2;
            }
        }
        Poly { arity: self.arity, terms }
    }

    /// `d + x_1 + ... + x_k` with `d > 0`.
    fn is_additive(&self) -> bool {
        let constant = self.terms.get(&vec![0; self.arity]);
        if !constant.is_some_and(|d| !d.is_zero()) {
            return false;
        }
        let linear = (0..self.arity).all(|i| {
            let mut e = vec![0; self.arity];
            e[i] = 1;
            self.terms.get(&e).is_some_and(|c| c.is_one())
        });
        linear && self.terms.len() == self.arity + 1
    }
}

/// The interpretation of one symbol: named parameters and a body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub params: Vec<String>,
    pub body: QiExpr,
}

impl Interpretation {
    pub fn new(params: Vec<String>, body: QiExpr) -> Interpretation {
        Interpretation { params, body }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn eval(&self, env: &[BigUint]) -> Result<BigUint, QiError> {
        if env.len() != self.params.len() {
            return Err(QiError::Arity {
                expected: self.params.len(),
                found: env.len(),
            });
        }
        self.body.eval(env)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.write(f, &self.params, 0, false)
    }
}

/// Symbol name to interpreting polynomial, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QiTable {
    entries: Vec<(String, Interpretation)>,
    index: HashMap<String, usize>,
}

impl QiTable {
    pub fn new() -> QiTable {
        QiTable::default()
    }

    /// Adds or replaces the entry for `symbol`.
    pub fn insert(&mut self, symbol: impl Into<String>, interp: Interpretation) {
        let symbol = symbol.into();
        match self.index.get(&symbol) {
            Some(&i) => self.entries[i].1 = interp,
            None => {
                self.index.insert(symbol.clone(), self.entries.len());
                self.entries.push((symbol, interp));
            }
        }
    }

    pub fn get(&self, symbol: &str) -> Option<&Interpretation> {
        self.index.get(symbol).map(|&i| &self.entries[i].1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Interpretation)> {
        self.entries.iter().map(|(s, i)| (s.as_str(), i))
    }

    fn apply(&self, f: &Symbol, env: &[BigUint]) -> Result<BigUint, QiError> {
        self.get(f.name())
            .ok_or_else(|| QiError::Missing(f.name().to_string()))?
            .eval(env)
    }

    /// `[[t]]` for a closed term.
    pub fn eval_term(&self, t: &Term) -> Result<BigUint, QiError> {
        if !t.is_closed() {
            return Err(QiError::OpenTerm(t.to_string()));
        }
        self.eval_open(t, &HashMap::new())
    }

    /// `[[t]]` with variables valued by `env`.
    pub fn eval_open(&self, t: &Term, env: &HashMap<Var, BigUint>) -> Result<BigUint, QiError> {
        match t {
            Term::Var(x) => env.get(x).cloned().ok_or_else(|| QiError::OpenTerm(t.to_string())),
            Term::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_open(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(f, &vals)
            }
        }
    }
}

pub fn qi_eval_term(q: &QiTable, t: &Term) -> Result<BigUint, QiError> {
    q.eval_term(t)
}

pub fn qi_eval_expr(e: &Interpretation, env: &[BigUint]) -> Result<BigUint, QiError> {
    e.eval(env)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<usize>,
    pub point: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub condition: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl ConditionResult {
    fn new(condition: &str, counterexample: Option<Counterexample>) -> ConditionResult {
        ConditionResult {
            condition: condition.to_string(),
            status: if counterexample.is_some() { Status::Fail } else { Status::Pass },
            counterexample,
        }
    }
}

/// One instance where `[[r theta]] > [[l theta]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleViolation {
    pub rule: usize,
    pub theta: String,
    pub lhs_value: String,
    pub rhs_value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub conditions: Vec<ConditionResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<RuleViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.status == Status::Pass)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == name)
    }
}

pub const COND_TOTAL: &str = "(i) total";
pub const COND_MONOTONE: &str = "(ii) monotone";
pub const COND_DOMINATING: &str = "(iii) dominates arguments";
pub const COND_POSITIVE: &str = "(iv) positive constants";
pub const COND_RULES: &str = "rule inequalities";

fn grid_points(arity: usize, bound: u64) -> impl Iterator<Item = Vec<u64>> {
    let total = (bound + 1).pow(arity as u32);
    (0..total).map(move |mut n| {
        let mut p = vec![0; arity];
        for slot in p.iter_mut().rev() {
            *slot = n % (bound + 1);
            n /= bound + 1;
        }
        p
    })
}

fn big(point: &[u64]) -> Vec<BigUint> {
    point.iter().map(|&v| BigUint::from(v)).collect()
}

fn strings(point: &[u64]) -> Vec<String> {
    point.iter().map(u64::to_string).collect()
}

/// Checks the four quasi-interpretation conditions on every symbol of `sig`.
///
/// Positivity of constants is decided exactly. Monotonicity holds for every
/// expression of the grammar; domination needs each parameter to occur.
/// Both are additionally tested on the grid `{0..=grid_bound}^k`.
pub fn validate_qi(q: &QiTable, sig: &Signature, grid_bound: u64) -> ValidationReport {
    let mut total = None;
    for (name, interp) in q.entries() {
        match sig.get(name) {
            None => {
                total.get_or_insert(Counterexample {
                    symbol: Some(name.to_string()),
                    rule: None,
                    point: vec![],
                    detail: "interpreted symbol is not in the signature".into(),
                });
            }
            Some(f) if f.arity() != interp.arity() || interp.body.param_bound() > interp.arity() => {
                total.get_or_insert(Counterexample {
                    symbol: Some(name.to_string()),
                    rule: None,
                    point: vec![],
                    detail: format!("arity {} but {} parameters", f.arity(), interp.arity()),
                });
            }
            Some(_) => {}
        }
    }
    for f in sig.symbols() {
        if q.get(f.name()).is_none() {
            total.get_or_insert(Counterexample {
                symbol: Some(f.name().to_string()),
                rule: None,
                point: vec![],
                detail: "symbol has no interpretation".into(),
            });
        }
    }

    let mut monotone = None;
    let mut dominating = None;
    let mut positive = None;
    for f in sig.symbols() {
        let Some(interp) = q.get(f.name()).filter(|i| i.arity() == f.arity()) else {
            continue;
        };
        let k = f.arity();
        if k == 0 {
            if interp.eval(&[]).map_or(true, |v| v.is_zero()) {
                positive.get_or_insert(Counterexample {
                    symbol: Some(f.name().to_string()),
                    rule: None,
                    point: vec![],
                    detail: "constant interpreted as 0".into(),
                });
            }
            continue;
        }
        if let Some(j) = (0..k).find(|&j| !interp.body.mentions(j)) {
            dominating.get_or_insert(Counterexample {
                symbol: Some(f.name().to_string()),
                rule: None,
                point: vec![],
                detail: format!("parameter `{}` does not occur", interp.params[j]),
            });
        }
        for point in grid_points(k, grid_bound) {
            let Ok(value) = interp.eval(&big(&point)) else {
                continue;
            };
            if dominating.is_none() {
                if let Some(j) = (0..k).find(|&j| BigUint::from(point[j]) > value) {
                    dominating = Some(Counterexample {
                        symbol: Some(f.name().to_string()),
                        rule: None,
                        point: strings(&point),
                        detail: format!("argument {} = {} exceeds value {}", j + 1, point[j], value),
                    });
                }
            }
            if monotone.is_none() {
                for j in 0..k {
                    if point[j] >= grid_bound {
                        continue;
                    }
                    let mut up = point.clone();
                    up[j] += 1;
                    if let Ok(next) = interp.eval(&big(&up)) {
                        if next < value {
                            monotone = Some(Counterexample {
                                symbol: Some(f.name().to_string()),
                                rule: None,
                                point: strings(&point),
                                detail: format!("value drops from {value} to {next} when argument {} grows", j + 1),
                            });
                            break;
                        }
                    }
                }
            }
        }
    }

    ValidationReport {
        conditions: vec![
            ConditionResult::new(COND_TOTAL, total),
            ConditionResult::new(COND_MONOTONE, monotone),
            ConditionResult::new(COND_DOMINATING, dominating),
            ConditionResult::new(COND_POSITIVE, positive),
        ],
        violations: Vec::new(),
        caveat: Some(format!("monotonicity and domination grid-tested on arguments <= {grid_bound}")),
    }
}

/// Every constructor is interpreted as `d + x_1 + ... + x_k` with `d > 0`.
pub fn is_kind_zero(q: &QiTable, sig: &Signature) -> bool {
    sig.constructors().all(|c| {
        q.get(c.name())
            .filter(|i| i.arity() == c.arity())
            .and_then(|i| i.body.polynomial(c.arity()))
            .is_some_and(|p| p.is_additive())
    })
}

/// Checks `[[r theta]] <= [[l theta]]` for every rule and every constructor
/// substitution binding the rule's variables to closed constructor terms of
/// size at most `subst_size_bound`.
///
/// Since `[[t theta]]` depends on `theta` only through the values of the
/// bound terms, substitutions are enumerated up to equal values: each
/// variable ranges over the distinct values of its candidate terms, keeping
/// the first candidate as the representative. Candidates of the variable's
/// inferred sort come first.
pub fn check_rule_inequalities(q: &QiTable, p: &Program, subst_size_bound: usize) -> ValidationReport {
    let sorts = Sorts::infer(p);
    let candidates = all_constructor_terms(&p.signature, subst_size_bound);
    let mut violations = Vec::new();
    let mut eval_error = None;

    for (index, rule) in p.rules.iter().enumerate() {
        let vars = rule.lhs.vars();
        let classes: Vec<Vec<(BigUint, Term)>> = vars
            .iter()
            .map(|x| {
                let mut ordered: Vec<&Term> = candidates.iter().filter(|t| sorts.var_has_sort(index, x, t)).collect();
                ordered.extend(candidates.iter().filter(|t| !sorts.var_has_sort(index, x, t)));
                let mut seen: Vec<(BigUint, Term)> = Vec::new();
                for t in ordered {
                    if let Ok(v) = q.eval_term(t) {
                        if !seen.iter().any(|(w, _)| *w == v) {
                            seen.push((v, t.clone()));
                        }
                    }
                }
                seen
            })
            .collect();
        if classes.iter().any(Vec::is_empty) {
            continue;
        }
        let mut choice = vec![0usize; vars.len()];
        loop {
            let env: HashMap<Var, BigUint> = vars
                .iter()
                .zip(&choice)
                .enumerate()
                .map(|(v, (x, &c))| (x.clone(), classes[v][c].0.clone()))
                .collect();
            match (q.eval_open(&rule.lhs, &env), q.eval_open(&rule.rhs, &env)) {
                (Ok(lv), Ok(rv)) => {
                    if rv > lv {
                        let theta: crate::term::Substitution = vars
                            .iter()
                            .zip(&choice)
                            .enumerate()
                            .map(|(v, (x, &c))| (x.clone(), classes[v][c].1.clone()))
                            .collect();
                        violations.push(RuleViolation {
                            rule: index,
                            theta: theta.to_string(),
                            lhs_value: lv.to_string(),
                            rhs_value: rv.to_string(),
                        });
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    eval_error.get_or_insert(Counterexample {
                        symbol: None,
                        rule: Some(index),
                        point: vec![],
                        detail: e.to_string(),
                    });
                    break;
                }
            }
            // Odometer over the value classes.
            let mut pos = 0;
            loop {
                if pos == choice.len() {
                    break;
                }
                choice[pos] += 1;
                if choice[pos] < classes[pos].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == choice.len() {
                break;
            }
        }
    }

    let first = eval_error.or_else(|| {
        violations.first().map(|v| Counterexample {
            symbol: None,
            rule: Some(v.rule),
            point: vec![v.theta.clone()],
            detail: format!("rhs value {} exceeds lhs value {}", v.rhs_value, v.lhs_value),
        })
    });
    ValidationReport {
        conditions: vec![ConditionResult::new(COND_RULES, first)],
        violations,
        caveat: Some(format!(
            "verified for constructor substitutions of size <= {subst_size_bound} only"
        )),
    }
}

/// The size budget for evaluating `t0`: its interpretation `[[t0]]`.
pub fn derive_ell(q: &QiTable, t0: &Term) -> Result<BigUint, QiError> {
    if !t0.is_closed() || !t0.is_basic() {
        return Err(QiError::NotBasic(t0.to_string()));
    }
    q.eval_term(t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn interp(params: &[&str], body: QiExpr) -> Interpretation {
        Interpretation::new(params.iter().map(|s| s.to_string()).collect(), body)
    }

    #[test]
    fn expression_evaluation() {
        let max = interp(&["x", "y"], QiExpr::Max(vec![QiExpr::Param(0), QiExpr::Param(1)]));
        assert_eq!(max.eval(&[n(3), n(5)]).unwrap(), n(5));
        let sum = interp(&["x", "y"], QiExpr::plus(QiExpr::Param(0), QiExpr::Param(1)));
        assert_eq!(sum.eval(&[n(0), n(0)]).unwrap(), n(0));
        let succ = interp(&["x"], QiExpr::plus(QiExpr::constant(1), QiExpr::Param(0)));
        assert_eq!(succ.eval(&[n(7)]).unwrap(), n(8));
        assert_eq!(succ.eval(&[]), Err(QiError::Arity { expected: 1, found: 0 }));
    }

    #[test]
    fn large_values_do_not_overflow() {
        let sq = interp(&["x"], QiExpr::times(QiExpr::Param(0), QiExpr::Param(0)));
        let big_in = BigUint::from(u64::MAX);
        assert_eq!(sq.eval(std::slice::from_ref(&big_in)).unwrap(), &big_in * &big_in);
    }

    #[test]
    fn domination_counterexample() {
        let sig = Signature::new([Symbol::constructor("c", 0), Symbol::defined("f", 2)]).unwrap();
        let mut q = QiTable::new();
        q.insert("c", interp(&[], QiExpr::constant(1)));
        q.insert("f", interp(&["x", "y"], QiExpr::Param(0)));
        let report = validate_qi(&q, &sig, 2);
        let dom = report.condition(COND_DOMINATING).unwrap();
        assert_eq!(dom.status, Status::Fail);
        assert_eq!(report.condition(COND_MONOTONE).unwrap().status, Status::Pass);
        assert_eq!(report.condition(COND_POSITIVE).unwrap().status, Status::Pass);
    }

    #[test]
    fn grid_finds_the_first_point() {
        let sig = Signature::new([Symbol::constructor("c", 0), Symbol::defined("f", 2)]).unwrap();
        let mut q = QiTable::new();
        q.insert("c", interp(&[], QiExpr::constant(1)));
        // Mentions y but multiplies it away.
        q.insert(
            "f",
            interp(
                &["x", "y"],
                QiExpr::plus(QiExpr::Param(0), QiExpr::times(QiExpr::constant(0), QiExpr::Param(1))),
            ),
        );
        let report = validate_qi(&q, &sig, 2);
        let ce = report.condition(COND_DOMINATING).unwrap().counterexample.clone().unwrap();
        assert_eq!(ce.point, vec!["0", "1"]);
    }

    #[test]
    fn zero_constant_and_missing_symbols() {
        let sig = Signature::new([Symbol::constructor("c", 0), Symbol::defined("f", 1)]).unwrap();
        let mut q = QiTable::new();
        q.insert("c", interp(&[], QiExpr::constant(0)));
        let report = validate_qi(&q, &sig, 2);
        assert_eq!(report.condition(COND_POSITIVE).unwrap().status, Status::Fail);
        assert_eq!(report.condition(COND_TOTAL).unwrap().status, Status::Fail);
    }

    #[test]
    fn additive_shape() {
        let sig = Signature::new([Symbol::constructor("z", 0), Symbol::constructor("c", 1)]).unwrap();
        let mut q = QiTable::new();
        q.insert("z", interp(&[], QiExpr::constant(1)));
        q.insert("c", interp(&["x"], QiExpr::times(QiExpr::constant(2), QiExpr::Param(0))));
        assert!(!is_kind_zero(&q, &sig));
        q.insert("c", interp(&["x"], QiExpr::plus(QiExpr::Param(0), QiExpr::constant(3))));
        assert!(is_kind_zero(&q, &sig));
        q.insert("c", interp(&["x"], QiExpr::Max(vec![QiExpr::Param(0)])));
        assert!(!is_kind_zero(&q, &sig));
        q.insert("c", interp(&["x"], QiExpr::Param(0)));
        assert!(!is_kind_zero(&q, &sig));
    }

    #[test]
    fn printing_keeps_structure() {
        let e = QiExpr::times(
            QiExpr::plus(QiExpr::Param(0), QiExpr::constant(1)),
            QiExpr::plus(QiExpr::Param(1), QiExpr::plus(QiExpr::Param(0), QiExpr::Param(1))),
        );
        assert_eq!(interp(&["x", "y"], e).to_string(), "(x + 1) * (y + (x + y))");
    }

    #[test]
    fn ell_needs_closed_basic_input() {
        let c = Symbol::constructor("c", 0);
        let f = Symbol::defined("f", 1);
        let mut q = QiTable::new();
        q.insert("c", interp(&[], QiExpr::constant(1)));
        q.insert("f", interp(&["x"], QiExpr::Param(0)));
        let t = Term::app(f.clone(), vec![Term::constant(c.clone())]);
        assert_eq!(derive_ell(&q, &t).unwrap(), n(1));
        assert!(derive_ell(&q, &Term::constant(c)).is_err());
        assert!(derive_ell(&q, &Term::app(f, vec![Term::var("x")])).is_err());
    }
}
