//! Memoized evaluation of closed basic terms into a minimal function graph,
//! and an independent checker for such graphs.
//!
//! Evaluating `t` picks the first rule `l -> r` with `t = l theta`, then
//! repeatedly evaluates the leftmost-innermost basic subterm `u` of the
//! current term and substitutes its normal form for it, until a constructor
//! term remains. Every pair `<t, normal form>` is cached for the duration of
//! one top-level call. Two guards hold throughout: each `u` lies strictly
//! below `t` in the size-bounded path order, and at most `|r|` replacements
//! happen per entry.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lpo::{in_basic_budget, in_constructor_budget, lpo_gt_bounded};
use crate::program::Program;
use crate::qi::{derive_ell, QiError, QiTable};
use crate::rewrite::{normalize_counting, RewriteError};
use crate::syntax::{parse_term, ParseError};
use crate::term::{Substitution, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphEntry {
    pub normal_form: Term,
    pub rule: usize,
    pub theta: Substitution,
    /// `(basic term, its normal form)` in replacement order.
    pub sub_calls: Vec<(Term, Term)>,
}

/// Basic terms and their normal forms, in order of completion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    entries: Vec<(Term, GraphEntry)>,
    index: HashMap<Term, usize>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: &Term) -> Option<&GraphEntry> {
        self.index.get(t).map(|&i| &self.entries[i].1)
    }

    pub fn get_mut(&mut self, t: &Term) -> Option<&mut GraphEntry> {
        self.index.get(t).map(|&i| &mut self.entries[i].1)
    }

    /// Adds an entry, replacing any previous one for `t` in place.
    pub fn insert(&mut self, t: Term, entry: GraphEntry) {
        match self.index.get(&t) {
            Some(&i) => self.entries[i].1 = entry,
            None => {
                self.index.insert(t.clone(), self.entries.len());
                self.entries.push((t, entry));
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &GraphEntry)> {
        self.entries.iter().map(|(t, e)| (t, e))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvalStats {
    pub distinct_calls: usize,
    pub cache_hits: usize,
    pub max_stack_depth: usize,
    pub max_intermediate_arg_size: usize,
    /// The size budget, saturated at `usize::MAX`.
    pub ell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MfgError {
    #[error("`{0}` is not a closed basic term")]
    NotBasic(String),
    #[error("no rule matches `{0}`")]
    NoRule(String),
    #[error("order guard: `{callee}` is not below `{caller}` within size budget {ell}")]
    OrderGuard { caller: String, callee: String, ell: usize },
    #[error("count guard: evaluating `{term}` needs more than {limit} replacements")]
    CountGuard { term: String, limit: usize },
    #[error("rule {rule} left `{term}` without a constructor normal form")]
    Stuck { rule: usize, term: String },
    #[error(transparent)]
    Qi(#[from] QiError),
}

struct Evaluator<'a> {
    p: &'a Program,
    ell: usize,
    graph: Graph,
    stats: EvalStats,
}

impl Evaluator<'_> {
    fn eval(&mut self, t: &Term, depth: usize) -> Result<Term, MfgError> {
        self.stats.max_stack_depth = self.stats.max_stack_depth.max(depth);
        let widest = t.args().iter().map(Term::size).max().unwrap_or(0);
        self.stats.max_intermediate_arg_size = self.stats.max_intermediate_arg_size.max(widest);
        if let Some(e) = self.graph.get(t) {
            self.stats.cache_hits += 1;
            return Ok(e.normal_form.clone());
        }
        self.stats.distinct_calls += 1;
        let (rule, theta) = self
            .p
            .first_match(t)
            .ok_or_else(|| MfgError::NoRule(t.to_string()))?;
        let rhs = &self.p.rules[rule].rhs;
        let limit = rhs.size();
        let mut w = rhs.apply(&theta);
        let mut sub_calls = Vec::new();
        // The loop ends once w is a constructor term; no padding steps are
        // needed to reach exactly |r| replacements.
        while let Some(u) = w.first_basic_subterm().cloned() {
            if sub_calls.len() == limit {
                return Err(MfgError::CountGuard {
                    term: t.to_string(),
                    limit,
                });
            }
            if !lpo_gt_bounded(&self.p.precedence, self.ell, &u, t) {
                return Err(MfgError::OrderGuard {
                    caller: t.to_string(),
                    callee: u.to_string(),
                    ell: self.ell,
                });
            }
            let s = self.eval(&u, depth + 1)?;
            w = w.replace_first(&s, &u);
            sub_calls.push((u, s));
        }
        if !w.is_constructor_term() {
            return Err(MfgError::Stuck {
                rule,
                term: w.to_string(),
            });
        }
        self.graph.insert(
            t.clone(),
            GraphEntry {
                normal_form: w.clone(),
                rule,
                theta,
                sub_calls,
            },
        );
        Ok(w)
    }
}

fn saturate(n: &BigUint) -> usize {
    n.to_usize().unwrap_or(usize::MAX)
}

/// Evaluates the closed basic term `t0` with budget `ell = [[t0]]`.
pub fn mfg_eval(p: &Program, q: &QiTable, t0: &Term) -> Result<(Term, Graph, EvalStats), MfgError> {
    if !t0.is_closed() || !t0.is_basic() {
        return Err(MfgError::NotBasic(t0.to_string()));
    }
    let ell = saturate(&derive_ell(q, t0)?);
    let mut ev = Evaluator {
        p,
        ell,
        graph: Graph::new(),
        stats: EvalStats {
            ell,
            ..EvalStats::default()
        },
    };
    let nf = ev.eval(t0, 1)?;
    Ok((nf, ev.graph, ev.stats))
}

/// The certificate clause a graph fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    RootMissing,
    RootMismatch,
    KeyBudget,
    ValueBudget,
    QiBound,
    RuleIndex,
    LhsMismatch,
    SubstitutionBudget,
    TooManySubCalls,
    SubCallMissing,
    SubCallMismatch,
    FoldMismatch,
    NotClosedUnderGamma,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{clause:?} at `{term}`: {detail}")]
pub struct Violation {
    pub clause: Clause,
    pub term: String,
    pub detail: String,
}

fn violation(clause: Clause, t: &Term, detail: impl fmt::Display) -> Violation {
    Violation {
        clause,
        term: t.to_string(),
        detail: detail.to_string(),
    }
}

/// Re-checks a graph from scratch: `<root, s>` is an entry, every key is in
/// `B_ell` and every value in `T_ell`, `[[value]] <= [[key]] <= ell`, each
/// entry instantiates its rule with a substitution into `T_ell`, has at most
/// `|r|` sub-calls that are themselves entries, and folding the sub-calls
/// into `r theta` yields the recorded value.
pub fn verify_graph(p: &Program, q: &QiTable, g: &Graph, ell: usize, root: &Term, s: &Term) -> Result<(), Violation> {
    match g.get(root) {
        None => return Err(violation(Clause::RootMissing, root, "no entry for the root")),
        Some(e) if &e.normal_form != s => {
            return Err(violation(
                Clause::RootMismatch,
                root,
                format!("entry holds `{}`, expected `{s}`", e.normal_form),
            ))
        }
        Some(_) => {}
    }
    let bound = BigUint::from(ell);
    for (t, e) in g.iter() {
        if !in_basic_budget(ell, t) {
            return Err(violation(Clause::KeyBudget, t, format!("not in B_{ell}")));
        }
        if !in_constructor_budget(ell, &e.normal_form) {
            return Err(violation(Clause::ValueBudget, t, format!("`{}` not in T_{ell}", e.normal_form)));
        }
        let qt = q.eval_term(t).map_err(|err| violation(Clause::QiBound, t, err))?;
        let qs = q
            .eval_term(&e.normal_form)
            .map_err(|err| violation(Clause::QiBound, t, err))?;
        if qs > qt || qt > bound {
            return Err(violation(
                Clause::QiBound,
                t,
                format!("[[s]] = {qs}, [[t]] = {qt}, ell = {ell}"),
            ));
        }
        let Some(rule) = p.rules.get(e.rule) else {
            return Err(violation(Clause::RuleIndex, t, format!("no rule {}", e.rule)));
        };
        if rule.lhs.apply(&e.theta) != *t {
            return Err(violation(Clause::LhsMismatch, t, format!("`{}` under {}", rule.lhs, e.theta)));
        }
        if let Some((x, u)) = e.theta.iter().find(|(_, u)| !in_constructor_budget(ell, u)) {
            return Err(violation(
                Clause::SubstitutionBudget,
                t,
                format!("{x} -> {u} not in T_{ell}"),
            ));
        }
        if e.sub_calls.len() > rule.rhs.size() {
            return Err(violation(
                Clause::TooManySubCalls,
                t,
                format!("{} sub-calls, |r| = {}", e.sub_calls.len(), rule.rhs.size()),
            ));
        }
        let mut w = rule.rhs.apply(&e.theta);
        for (u, su) in &e.sub_calls {
            match g.get(u) {
                None => return Err(violation(Clause::SubCallMissing, t, format!("`{u}` has no entry"))),
                Some(ue) if ue.normal_form != *su => {
                    return Err(violation(
                        Clause::SubCallMismatch,
                        t,
                        format!("`{u}` recorded as `{su}`, entry holds `{}`", ue.normal_form),
                    ))
                }
                Some(_) => {}
            }
            w = w.replace_first(su, u);
        }
        if w != e.normal_form {
            return Err(violation(
                Clause::FoldMismatch,
                t,
                format!("fold gives `{w}`, entry holds `{}`", e.normal_form),
            ));
        }
    }
    Ok(())
}

/// Reads every defined-symbol node of the closed term `w` off the graph,
/// bottom-up, without consulting recorded sub-calls.
fn close_under(g: &Graph, w: &Term) -> Option<Term> {
    match w {
        Term::Var(_) => None,
        Term::App(f, args) => {
            let args = args.iter().map(|a| close_under(g, a)).collect::<Option<Vec<_>>>()?;
            let t = Term::app(f.clone(), args);
            if f.is_defined() {
                g.get(&t).map(|e| e.normal_form.clone())
            } else {
                Some(t)
            }
        }
    }
}

/// One application of the graph operator reproduces every entry: some rule
/// `l -> r` with `t = l theta` exists such that evaluating `r theta` by
/// graph lookups alone gives the entry's value.
pub fn check_gamma_closed(p: &Program, g: &Graph) -> Result<(), Violation> {
    for (t, e) in g.iter() {
        let reproduced = p.rules.iter().any(|rule| {
            rule.lhs
                .matches(t)
                .and_then(|theta| close_under(g, &rule.rhs.apply(&theta)))
                .is_some_and(|s| s == e.normal_form)
        });
        if !reproduced {
            return Err(violation(
                Clause::NotClosedUnderGamma,
                t,
                format!("no rule reproduces `{}`", e.normal_form),
            ));
        }
    }
    Ok(())
}

/// Results of the reference evaluator and the graph evaluator on one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRecord {
    pub term: Term,
    /// `None` when the reference evaluator ran out of steps.
    pub naive_normal_form: Option<Term>,
    pub naive_steps: usize,
    pub naive_limit_exceeded: bool,
    pub mfg_normal_form: Term,
    pub equal: bool,
    pub stats: EvalStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Mfg(#[from] MfgError),
}

/// Runs both evaluators on `t0`. Exceeding the step limit is recorded in the
/// result rather than reported as an error.
pub fn compare_strategies(p: &Program, q: &QiTable, t0: &Term, step_limit: usize) -> Result<ComparisonRecord, CompareError> {
    let (mfg_nf, _, stats) = mfg_eval(p, q, t0)?;
    let (naive_nf, steps, exceeded) = match normalize_counting(p, t0, step_limit) {
        Ok((nf, steps)) => (Some(nf), steps, false),
        Err(RewriteError::CountLimitExceeded { limit, .. }) => (None, limit, true),
        Err(e) => return Err(e.into()),
    };
    Ok(ComparisonRecord {
        term: t0.clone(),
        equal: naive_nf.as_ref() == Some(&mfg_nf),
        naive_normal_form: naive_nf,
        naive_steps: steps,
        naive_limit_exceeded: exceeded,
        mfg_normal_form: mfg_nf,
        stats,
    })
}

/// Serialized form of a graph with its root, value and budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub root: String,
    pub normal_form: String,
    pub ell: usize,
    pub entries: Vec<EntryDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDocument {
    pub term: String,
    pub normal_form: String,
    pub rule: usize,
    pub theta: BTreeMap<String, String>,
    pub sub_calls: Vec<SubCallDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCallDocument {
    pub term: String,
    pub normal_form: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid graph document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad term `{text}`: {source}")]
    Term { text: String, source: ParseError },
}

impl GraphDocument {
    pub fn new(graph: &Graph, root: &Term, normal_form: &Term, ell: usize) -> GraphDocument {
        GraphDocument {
            root: root.to_string(),
            normal_form: normal_form.to_string(),
            ell,
            entries: graph
                .iter()
                .map(|(t, e)| EntryDocument {
                    term: t.to_string(),
                    normal_form: e.normal_form.to_string(),
                    rule: e.rule,
                    theta: e.theta.iter().map(|(x, u)| (x.name().to_string(), u.to_string())).collect(),
                    sub_calls: e
                        .sub_calls
                        .iter()
                        .map(|(u, s)| SubCallDocument {
                            term: u.to_string(),
                            normal_form: s.to_string(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<GraphDocument, LoadError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves the document against `p`'s signature: `(graph, root, value, ell)`.
    pub fn resolve(&self, p: &Program) -> Result<(Graph, Term, Term, usize), LoadError> {
        let term = |text: &str| {
            parse_term(text, &p.signature).map_err(|source| LoadError::Term {
                text: text.to_string(),
                source,
            })
        };
        let mut graph = Graph::new();
        for e in &self.entries {
            let theta = e
                .theta
                .iter()
                .map(|(x, u)| Ok((Var::new(x), term(u)?)))
                .collect::<Result<Substitution, LoadError>>()?;
            let sub_calls = e
                .sub_calls
                .iter()
                .map(|c| Ok((term(&c.term)?, term(&c.normal_form)?)))
                .collect::<Result<Vec<_>, LoadError>>()?;
            graph.insert(
                term(&e.term)?,
                GraphEntry {
                    normal_form: term(&e.normal_form)?,
                    rule: e.rule,
                    theta,
                    sub_calls,
                },
            );
        }
        Ok((graph, term(&self.root)?, term(&self.normal_form)?, self.ell))
    }
}
