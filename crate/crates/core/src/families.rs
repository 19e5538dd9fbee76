//! Input families for the bundled programs and reference oracles that do
//! not go through rewriting.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Signature, Symbol, Term, Var};

fn sym(sig: &Signature, name: &str) -> Symbol {
    sig.get(name)
        .unwrap_or_else(|| panic!("signature lacks `{name}`"))
        .clone()
}

/// The string `u` over `{a, b}` as a term built from `a`, `b` and `eps`.
pub fn string_term(sig: &Signature, u: &str) -> Term {
    let mut t = Term::constant(sym(sig, "eps"));
    for c in u.chars().rev() {
        let f = match c {
            'a' => sym(sig, "a"),
            'b' => sym(sig, "b"),
            other => panic!("letter `{other}` outside {{a, b}}"),
        };
        t = Term::app(f, vec![t]);
    }
    t
}

pub fn nat_term(sig: &Signature, n: usize) -> Term {
    let s = sym(sig, "s");
    (0..n).fold(Term::constant(sym(sig, "0")), |t, _| Term::app(s.clone(), vec![t]))
}

/// Reads `s^n(0)` back as `n`.
pub fn nat_value(t: &Term) -> Option<usize> {
    match t.root()?.name() {
        "0" if t.args().is_empty() => Some(0),
        "s" if t.args().len() == 1 => nat_value(&t.args()[0]).map(|n| n + 1),
        _ => None,
    }
}

pub fn bool_value(t: &Term) -> Option<bool> {
    match t.root()?.name() {
        "top" => Some(true),
        "bot" => Some(false),
        _ => None,
    }
}

/// Textbook dynamic-programming LCS length.
pub fn lcs_dp(u: &str, v: &str) -> usize {
    let (u, v): (Vec<char>, Vec<char>) = (u.chars().collect(), v.chars().collect());
    let mut row = vec![0usize; v.len() + 1];
    for &cu in &u {
        let mut diag = 0;
        for (j, &cv) in v.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if cu == cv { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[v.len()]
}

/// Every string over `{a, b}` of length at most `max_len`, shortest first.
pub fn all_strings(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut level = vec![String::new()];
    for _ in 0..max_len {
        level = level
            .iter()
            .flat_map(|s| [format!("{s}a"), format!("{s}b")])
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

pub fn lcs_term(sig: &Signature, u: &str, v: &str) -> Term {
    Term::app(sym(sig, "lcs"), vec![string_term(sig, u), string_term(sig, v)])
}

/// `lcs(a^n, b^n)`: no common letter, so every branch is explored.
pub fn square(sig: &Signature, n: usize) -> Term {
    lcs_term(sig, &"a".repeat(n), &"b".repeat(n))
}

/// Two seeded random strings of length `n`.
pub fn random_strings(seed: u64, n: usize) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word = || -> String {
        (0..n)
            .map(|_| if rng.random_bool(0.5) { 'a' } else { 'b' })
            .collect()
    };
    let u = word();
    (u, word())
}

/// A quantified Boolean formula with variables numbered from 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(usize),
    Neg(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(usize, Box<Formula>),
}

impl Formula {
    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 1,
            Formula::Neg(f) | Formula::Exists(_, f) => 1 + f.depth(),
            Formula::Or(f, g) => 1 + f.depth().max(g.depth()),
        }
    }

    /// Truth under `assignment`, unlisted variables being false.
    pub fn holds(&self, assignment: &mut Vec<bool>) -> bool {
        match self {
            Formula::Var(x) => assignment.get(*x).copied().unwrap_or(false),
            Formula::Neg(f) => !f.holds(assignment),
            Formula::Or(f, g) => f.holds(assignment) || g.holds(assignment),
            Formula::Exists(x, f) => {
                if assignment.len() <= *x {
                    assignment.resize(*x + 1, false);
                }
                let saved = assignment[*x];
                let mut any = false;
                for v in [true, false] {
                    assignment[*x] = v;
                    any |= f.holds(assignment);
                }
                assignment[*x] = saved;
                any
            }
        }
    }

    /// Truth of the formula with free variables false.
    pub fn truth(&self) -> bool {
        self.holds(&mut Vec::new())
    }

    /// Whether some `exists x` occurs inside the scope of another
    /// `exists x`. The list-based program only adds variables to the true
    /// list, so it cannot reset an outer binding to false.
    pub fn requantifies(&self) -> bool {
        fn go(f: &Formula, bound: &mut Vec<usize>) -> bool {
            match f {
                Formula::Var(_) => false,
                Formula::Neg(g) => go(g, bound),
                Formula::Or(g, h) => go(g, bound) || go(h, bound),
                Formula::Exists(x, g) => {
                    if bound.contains(x) {
                        return true;
                    }
                    bound.push(*x);
                    let r = go(g, bound);
                    bound.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn to_term(&self, sig: &Signature) -> Term {
        match self {
            Formula::Var(x) => Term::app(sym(sig, "var"), vec![nat_term(sig, *x)]),
            Formula::Neg(f) => Term::app(sym(sig, "neg"), vec![f.to_term(sig)]),
            Formula::Or(f, g) => Term::app(sym(sig, "or_c"), vec![f.to_term(sig), g.to_term(sig)]),
            Formula::Exists(x, f) => Term::app(sym(sig, "exists_c"), vec![nat_term(sig, *x), f.to_term(sig)]),
        }
    }

    /// `qbf(phi)`.
    pub fn qbf_term(&self, sig: &Signature) -> Term {
        Term::app(sym(sig, "qbf"), vec![self.to_term(sig)])
    }
}

/// Every formula of depth at most `max_depth` over variables `0..vars`.
pub fn all_formulas(vars: usize, max_depth: usize) -> Vec<Formula> {
    let mut by_depth: Vec<Vec<Formula>> = vec![Vec::new(), (0..vars).map(Formula::Var).collect()];
    for d in 2..=max_depth {
        let below: Vec<Formula> = by_depth[1..d].iter().flatten().cloned().collect();
        let exact = &by_depth[d - 1];
        let mut level = Vec::new();
        for f in exact {
            level.push(Formula::Neg(Box::new(f.clone())));
        }
        for f in &below {
            for g in &below {
                if f.depth() == d - 1 || g.depth() == d - 1 {
                    level.push(Formula::Or(Box::new(f.clone()), Box::new(g.clone())));
                }
            }
        }
        for x in 0..vars {
            for f in exact {
                level.push(Formula::Exists(x, Box::new(f.clone())));
            }
        }
        by_depth.push(level);
    }
    by_depth.into_iter().flatten().collect()
}

/// A seeded random formula of depth at most `max_depth`.
pub fn random_formula(rng: &mut ChaCha8Rng, vars: usize, max_depth: usize) -> Formula {
    if max_depth <= 1 || rng.random_range(0..4) == 0 {
        return Formula::Var(rng.random_range(0..vars));
    }
    let d = max_depth - 1;
    match rng.random_range(0..3) {
        0 => Formula::Neg(Box::new(random_formula(rng, vars, d))),
        1 => Formula::Or(
            Box::new(random_formula(rng, vars, d)),
            Box::new(random_formula(rng, vars, d)),
        ),
        _ => Formula::Exists(rng.random_range(0..vars), Box::new(random_formula(rng, vars, d))),
    }
}

/// `count` distinct seeded random formulas without re-quantification.
pub fn random_formulas(seed: u64, count: usize, vars: usize, max_depth: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Formula> = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let f = random_formula(&mut rng, vars, max_depth);
        if !f.requantifies() && !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// `exists x0 ... exists x(n-1). not(not x0 or ... or not x(n-1))`, true for
/// every `n >= 1`; the naive evaluator explores all `2^n` assignments.
pub fn exists_chain(n: usize) -> Formula {
    let mut body = Formula::Neg(Box::new(Formula::Var(0)));
    for x in 1..n {
        body = Formula::Or(Box::new(body), Box::new(Formula::Neg(Box::new(Formula::Var(x)))));
    }
    let mut f = Formula::Neg(Box::new(body));
    for x in (0..n).rev() {
        f = Formula::Exists(x, Box::new(f));
    }
    f
}

/// A seeded random term of exactly `size` nodes over `symbols` and `vars`.
/// Returns `None` when no term of that size exists.
pub fn random_term(rng: &mut ChaCha8Rng, symbols: &[Symbol], vars: &[Var], size: usize) -> Option<Term> {
    let leaves: Vec<Term> = vars
        .iter()
        .map(|x| Term::Var(x.clone()))
        .chain(symbols.iter().filter(|c| c.arity() == 0).map(|c| Term::constant(c.clone())))
        .collect();
    if size == 1 {
        return (!leaves.is_empty()).then(|| leaves[rng.random_range(0..leaves.len())].clone());
    }
    let inner: Vec<&Symbol> = symbols
        .iter()
        .filter(|c| c.arity() >= 1 && c.arity() < size && (c.arity() == size - 1 || !leaves.is_empty()))
        .collect();
    if inner.is_empty() || leaves.is_empty() {
        return None;
    }
    let f = inner[rng.random_range(0..inner.len())];
    // Split the remaining size - 1 nodes into arity positive parts.
    let k = f.arity();
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() < k - 1 {
        let c = rng.random_range(1..size - 1);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(size - 1);
    let args = bounds
        .windows(2)
        .map(|w| random_term(rng, symbols, vars, w[1] - w[0]))
        .collect::<Option<Vec<_>>>()?;
    Some(Term::app(f.clone(), args))
}
