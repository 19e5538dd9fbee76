//! Bundled example programs.

use crate::program::Program;
use crate::syntax::parse_program;

pub const LCS: &str = include_str!("../corpus/lcs.trs");
pub const LCS_BROKEN: &str = include_str!("../corpus/lcs_broken.trs");
pub const QBF: &str = include_str!("../corpus/qbf.trs");

/// Longest common subsequence length over strings of `a` and `b`.
pub fn lcs() -> Program {
    parse_program(LCS).expect("bundled lcs program parses")
}

/// [`lcs`] without its precedence, so one rule cannot be oriented.
pub fn lcs_broken() -> Program {
    parse_program(LCS_BROKEN).expect("bundled lcs_broken program parses")
}

/// Truth of quantified Boolean formulas.
pub fn qbf() -> Program {
    parse_program(QBF).expect("bundled qbf program parses")
}
