//! Innermost rewriting: the deterministic reference evaluator, an
//! exhaustive search over all innermost reductions, and the
//! quasi-reducibility check.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::program::Program;
use crate::sorts::{product, Sorts};
use crate::term::{Position, Substitution, Term};

/// Steps allowed when no explicit limit is given.
pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;

/// Environment variable overriding [`DEFAULT_STEP_LIMIT`].
pub const STEP_LIMIT_ENV: &str = "TRSTOOL_STEP_LIMIT";

/// The default limit, or the value of `TRSTOOL_STEP_LIMIT` when it parses.
pub fn default_step_limit() -> usize {
    std::env::var(STEP_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STEP_LIMIT)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub position: Position,
    pub rule: usize,
    pub theta: Substitution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepTrace {
    pub steps: Vec<StepRecord>,
    pub final_term: Term,
}

impl StepTrace {
    pub fn count(&self) -> usize {
        self.steps.len()
    }

    /// One JSON object per line: `{"step", "position", "rule"}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let line = serde_json::json!({ "step": i + 1, "position": s.position, "rule": s.rule });
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("step limit {limit} exceeded")]
    LimitExceeded { limit: usize, trace: Box<StepTrace> },
    #[error("step limit {limit} exceeded")]
    CountLimitExceeded { limit: usize, partial: Term },
    #[error("term `{0}` is not closed")]
    OpenTerm(String),
    #[error("search explored more than {0} terms")]
    SearchLimitExceeded(usize),
}

/// Rewrites below `t` at the leftmost-innermost redex; `pos` is filled in
/// reverse (innermost index first).
fn step_at(p: &Program, t: &Term, pos: &mut Vec<usize>) -> Option<(Term, usize, Substitution)> {
    let Term::App(f, args) = t else { return None };
    for (i, a) in args.iter().enumerate() {
        if let Some((new, rule, theta)) = step_at(p, a, pos) {
            pos.push(i);
            let mut v = args.to_vec();
            v[i] = new;
            return Some((Term::App(f.clone(), v.into()), rule, theta));
        }
    }
    if f.is_defined() && args.iter().all(Term::is_constructor_term) {
        let (rule, theta) = p.first_match(t)?;
        return Some((p.rules[rule].rhs.apply(&theta), rule, theta));
    }
    None
}

/// One leftmost-innermost step with the first matching rule, or `None` for
/// a normal form.
pub fn innermost_step(p: &Program, t: &Term) -> Option<(Term, StepRecord)> {
    let mut pos = Vec::new();
    let (next, rule, theta) = step_at(p, t, &mut pos)?;
    pos.reverse();
    Some((
        next,
        StepRecord {
            position: pos,
            rule,
            theta,
        },
    ))
}

/// Rewrites `t` to normal form, recording every step.
pub fn normalize(p: &Program, t: &Term, step_limit: usize) -> Result<(Term, StepTrace), RewriteError> {
    if !t.is_closed() {
        return Err(RewriteError::OpenTerm(t.to_string()));
    }
    let mut steps = Vec::new();
    let mut cur = t.clone();
    while let Some((next, record)) = innermost_step(p, &cur) {
        if steps.len() == step_limit {
            return Err(RewriteError::LimitExceeded {
                limit: step_limit,
                trace: Box::new(StepTrace { steps, final_term: cur }),
            });
        }
        steps.push(record);
        cur = next;
    }
    let trace = StepTrace {
        steps,
        final_term: cur.clone(),
    };
    Ok((cur, trace))
}

/// [`normalize`] without the trace: the normal form and the step count.
pub fn normalize_counting(p: &Program, t: &Term, step_limit: usize) -> Result<(Term, usize), RewriteError> {
    if !t.is_closed() {
        return Err(RewriteError::OpenTerm(t.to_string()));
    }
    let mut count = 0;
    let mut cur = t.clone();
    let mut pos = Vec::new();
    while let Some((next, _, _)) = step_at(p, &cur, &mut pos) {
        pos.clear();
        if count == step_limit {
            return Err(RewriteError::CountLimitExceeded {
                limit: step_limit,
                partial: cur,
            });
        }
        count += 1;
        cur = next;
    }
    Ok((cur, count))
}

fn collect_redexes(p: &Program, t: &Term, pos: &mut Vec<usize>, out: &mut Vec<(Position, usize, Substitution)>) {
    let Term::App(f, args) = t else { return };
    for (i, a) in args.iter().enumerate() {
        pos.push(i);
        collect_redexes(p, a, pos, out);
        pos.pop();
    }
    if f.is_defined() && args.iter().all(Term::is_constructor_term) {
        for (k, rule) in p.rules.iter().enumerate() {
            if let Some(theta) = rule.lhs.matches(t) {
                out.push((pos.clone(), k, theta));
            }
        }
    }
}

/// Every term reachable by one innermost step, any redex and any rule.
pub fn innermost_successors(p: &Program, t: &Term) -> Vec<Term> {
    let mut redexes = Vec::new();
    collect_redexes(p, t, &mut Vec::new(), &mut redexes);
    redexes
        .into_iter()
        .map(|(pos, k, theta)| {
            t.replace_at(&pos, p.rules[k].rhs.apply(&theta))
                .expect("redex position exists")
        })
        .collect()
}

/// All normal forms reachable from `t` by innermost reduction, exploring
/// every choice of redex and rule. Fails after visiting `state_limit` terms.
pub fn innermost_normal_forms(p: &Program, t: &Term, state_limit: usize) -> Result<Vec<Term>, RewriteError> {
    let mut seen: HashSet<Term> = HashSet::from([t.clone()]);
    let mut queue = VecDeque::from([t.clone()]);
    let mut normal = Vec::new();
    while let Some(cur) = queue.pop_front() {
        let next = innermost_successors(p, &cur);
        if next.is_empty() {
            normal.push(cur);
            continue;
        }
        for n in next {
            if seen.insert(n.clone()) {
                if seen.len() > state_limit {
                    return Err(RewriteError::SearchLimitExceeded(state_limit));
                }
                queue.push_back(n);
            }
        }
    }
    Ok(normal)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolCoverage {
    pub symbol: String,
    pub pattern_depth: usize,
    pub tuples_checked: usize,
    pub uncovered: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub quasi_reducible: bool,
    pub witness: Option<Term>,
    pub symbols: Vec<SymbolCoverage>,
}

fn pattern_depth(t: &Term) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::App(_, args) => 1 + args.iter().map(pattern_depth).max().unwrap_or(0),
    }
}

/// Checks that every closed basic term matches some rule.
///
/// For each defined `f` whose rules nest constructors at most `D` deep
/// below the root, every well-sorted argument tuple of constructor depth at
/// most `D + 1` is tried. Tuples are enumerated in declaration order, so
/// the first uncovered one is a smallest witness. For left-linear patterns
/// this is complete; with repeated variables it is a bounded check.
pub fn check_quasi_reducible(p: &Program) -> CoverageReport {
    let sorts = Sorts::infer(p);
    let mut symbols = Vec::new();
    for f in p.signature.defined() {
        let depth = p
            .rules
            .iter()
            .filter(|r| r.lhs.root() == Some(f))
            .flat_map(|r| r.lhs.args().iter().map(pattern_depth))
            .max()
            .unwrap_or(0);
        let pools: Vec<Vec<Term>> = sorts
            .arg_sorts(f)
            .expect("own symbol")
            .iter()
            .map(|&s| sorts.layered_terms(s, depth + 1))
            .collect();
        let refs: Vec<&[Term]> = pools.iter().map(Vec::as_slice).collect();
        let mut checked = 0;
        let mut uncovered = Vec::new();
        product(&refs, &mut |args| {
            checked += 1;
            let t = Term::app(f.clone(), args.to_vec());
            if p.first_match(&t).is_none() {
                uncovered.push(t);
            }
        });
        symbols.push(SymbolCoverage {
            symbol: f.name().to_string(),
            pattern_depth: depth,
            tuples_checked: checked,
            uncovered,
        });
    }
    let witness = symbols.iter().find_map(|s| s.uncovered.first().cloned());
    CoverageReport {
        quasi_reducible: witness.is_none(),
        witness,
        symbols,
    }
}
