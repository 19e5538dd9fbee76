//! Constructor term rewriting: terms and their binary codes, a text format,
//! lexicographic path orders with derivation witnesses, polynomial
//! quasi-interpretations, innermost rewriting, and a memoized evaluator
//! whose call graph can be checked independently.

pub mod corpus;
pub mod encode;
pub mod families;
pub mod lpo;
pub mod mfg;
pub mod program;
pub mod qi;
pub mod rewrite;
pub mod sorts;
pub mod syntax;
pub mod term;

pub use lpo::{lpo_gt, orient_program, Derivation, LpoRule, Precedence};
pub use mfg::{compare_strategies, mfg_eval, verify_graph, Graph, GraphEntry};
pub use program::{Program, Rule};
pub use qi::{QiExpr, QiTable};
pub use rewrite::{innermost_step, normalize};
pub use syntax::{parse_program, parse_term, print_program, print_term};
pub use term::{Signature, Substitution, Symbol, SymbolKind, Term, TermClass, Var};
