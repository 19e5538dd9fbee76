//! Constructor programs: a signature, rewrite rules, a precedence and an
//! optional quasi-interpretation.

use std::fmt;

use thiserror::Error;

use crate::lpo::Precedence;
use crate::qi::QiTable;
use crate::term::{Signature, Term, Var};

/// A rewrite rule `lhs -> rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term) -> Rule {
        Rule { lhs, rhs }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("left-hand side `{0}` is not a basic term")]
    LhsNotBasic(String),
    #[error("variable `{var}` of the right-hand side does not occur in `{lhs}`")]
    UnboundVariable { var: String, lhs: String },
    #[error("symbol `{0}` does not belong to the signature")]
    ForeignSymbol(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    pub precedence: Precedence,
    pub interpretation: Option<QiTable>,
}

fn check_symbols(sig: &Signature, t: &Term) -> Result<(), RuleError> {
    if let Term::App(f, args) = t {
        if sig.index_of(f).is_none() {
            return Err(RuleError::ForeignSymbol(f.name().to_string()));
        }
        for a in args.iter() {
            check_symbols(sig, a)?;
        }
    }
    Ok(())
}

/// Checks the shape every program rule must have.
pub fn validate_rule(sig: &Signature, rule: &Rule) -> Result<(), RuleError> {
    check_symbols(sig, &rule.lhs)?;
    check_symbols(sig, &rule.rhs)?;
    if !rule.lhs.is_basic() {
        return Err(RuleError::LhsNotBasic(rule.lhs.to_string()));
    }
    let bound = rule.lhs.vars();
    if let Some(x) = rule.rhs.vars().into_iter().find(|x| !bound.contains(x)) {
        return Err(RuleError::UnboundVariable {
            var: x.to_string(),
            lhs: rule.lhs.to_string(),
        });
    }
    Ok(())
}

impl Program {
    pub fn new(
        signature: Signature,
        rules: Vec<Rule>,
        precedence: Precedence,
        interpretation: Option<QiTable>,
    ) -> Result<Program, RuleError> {
        for rule in &rules {
            validate_rule(&signature, rule)?;
        }
        Ok(Program {
            signature,
            rules,
            precedence,
            interpretation,
        })
    }

    /// The variables occurring in some rule, in order of first occurrence.
    pub fn variables(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for rule in &self.rules {
            for x in rule.lhs.vars() {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// The first rule (in file order) whose left-hand side matches `t`.
    pub fn first_match(&self, t: &Term) -> Option<(usize, crate::term::Substitution)> {
        self.rules
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.lhs.matches(t).map(|theta| (i, theta)))
    }

    /// A copy without the rule at `index`.
    pub fn without_rule(&self, index: usize) -> Program {
        let mut p = self.clone();
        p.rules.remove(index);
        p
    }
}
