//! Sort inference for constructor programs and enumeration of closed
//! constructor terms.
//!
//! Sorts are the equivalence classes of argument and result slots that the
//! rules force to be equal. A class containing no constructor result is
//! unconstrained and accepts any constructor term.

use std::collections::HashMap;

use crate::program::Program;
use crate::term::{Signature, Symbol, Term, Var};

pub type SortId = usize;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn fresh(&mut self) -> usize {
        self.0.push(self.0.len());
        self.0.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sorts {
    signature: Signature,
    result: Vec<SortId>,
    args: Vec<Vec<SortId>>,
    rule_vars: Vec<HashMap<Var, SortId>>,
    constructors: Vec<Vec<Symbol>>,
}

impl Sorts {
    pub fn infer(p: &Program) -> Sorts {
        let sig = &p.signature;
        let mut uf = UnionFind(Vec::new());
        let result: Vec<usize> = sig.symbols().iter().map(|_| uf.fresh()).collect();
        let args: Vec<Vec<usize>> = sig
            .symbols()
            .iter()
            .map(|f| (0..f.arity()).map(|_| uf.fresh()).collect())
            .collect();
        let mut rule_vars: Vec<HashMap<Var, usize>> = Vec::new();

        fn walk(
            t: &Term,
            slot: usize,
            sig: &Signature,
            result: &[usize],
            args: &[Vec<usize>],
            vars: &mut HashMap<Var, usize>,
            uf: &mut UnionFind,
        ) {
            match t {
                Term::Var(x) => {
                    let v = *vars.entry(x.clone()).or_insert_with(|| uf.fresh());
                    uf.union(v, slot);
                }
                Term::App(f, ts) => {
                    let Some(i) = sig.index_of(f) else { return };
                    uf.union(result[i], slot);
                    for (k, a) in ts.iter().enumerate() {
                        walk(a, args[i][k], sig, result, args, vars, uf);
                    }
                }
            }
        }

        for rule in &p.rules {
            let mut vars = HashMap::new();
            let top = uf.fresh();
            walk(&rule.lhs, top, sig, &result, &args, &mut vars, &mut uf);
            walk(&rule.rhs, top, sig, &result, &args, &mut vars, &mut uf);
            rule_vars.push(vars);
        }

        // Dense ids in order of first appearance.
        let mut dense: HashMap<usize, SortId> = HashMap::new();
        let mut id = |slot: usize, uf: &mut UnionFind| {
            let root = uf.find(slot);
            let next = dense.len();
            *dense.entry(root).or_insert(next)
        };
        let result: Vec<SortId> = result.iter().map(|&s| id(s, &mut uf)).collect();
        let args: Vec<Vec<SortId>> = args
            .iter()
            .map(|a| a.iter().map(|&s| id(s, &mut uf)).collect())
            .collect();
        let rule_vars = rule_vars
            .into_iter()
            .map(|m| m.into_iter().map(|(x, s)| (x, id(s, &mut uf))).collect())
            .collect();
        let mut constructors = vec![Vec::new(); dense.len()];
        for (i, f) in sig.symbols().iter().enumerate() {
            if f.is_constructor() {
                constructors[result[i]].push(f.clone());
            }
        }
        Sorts {
            signature: sig.clone(),
            result,
            args,
            rule_vars,
            constructors,
        }
    }

    pub fn count(&self) -> usize {
        self.constructors.len()
    }

    pub fn result_sort(&self, f: &Symbol) -> Option<SortId> {
        self.signature.index_of(f).map(|i| self.result[i])
    }

    pub fn arg_sorts(&self, f: &Symbol) -> Option<&[SortId]> {
        self.signature.index_of(f).map(|i| self.args[i].as_slice())
    }

    pub fn var_sort(&self, rule: usize, x: &Var) -> Option<SortId> {
        self.rule_vars.get(rule)?.get(x).copied()
    }

    pub fn constructors(&self, sort: SortId) -> &[Symbol] {
        &self.constructors[sort]
    }

    /// An unconstrained sort has no constructor of its own.
    pub fn is_free(&self, sort: SortId) -> bool {
        self.constructors[sort].is_empty()
    }

    /// Whether the closed term `t` may occupy a slot of sort `sort`.
    pub fn has_sort(&self, t: &Term, sort: SortId) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => {
                let Some(i) = self.signature.index_of(f) else { return false };
                (self.is_free(sort) || self.result[i] == sort)
                    && args.iter().zip(&self.args[i]).all(|(a, &s)| self.has_sort(a, s))
            }
        }
    }

    pub fn is_well_sorted(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, _) => self.result_sort(f).is_some_and(|s| self.has_sort(t, s)),
        }
    }

    /// Whether `t` fits variable `x` of rule `rule`.
    pub fn var_has_sort(&self, rule: usize, x: &Var, t: &Term) -> bool {
        self.var_sort(rule, x).is_some_and(|s| self.has_sort(t, s))
    }

    /// The least closed constructor term of the sort, by size then
    /// declaration order. Unconstrained sorts use the first constant.
    pub fn smallest_inhabitant(&self, sort: SortId) -> Option<Term> {
        if self.is_free(sort) {
            return self
                .signature
                .constructors()
                .find(|c| c.arity() == 0)
                .map(|c| Term::constant(c.clone()));
        }
        self.constructor_terms(sort, usize::MAX).into_iter().next()
    }

    /// Closed constructor terms of the sort with size at most `max_size`,
    /// ordered by size, then constructor, then arguments.
    pub fn constructor_terms(&self, sort: SortId, max_size: usize) -> Vec<Term> {
        // Sizes grow until the first hit when asked for "any" inhabitant.
        let cap = if max_size == usize::MAX { 64 } else { max_size };
        let mut table = SizeTable::new(self.count());
        for n in 1..=cap {
            for s in 0..self.count() {
                let built = self.build(&table, s, n);
                table.set(s, n, built);
            }
            if max_size == usize::MAX && !table.get(sort, n).is_empty() {
                return table.get(sort, n).to_vec();
            }
        }
        if max_size == usize::MAX {
            return Vec::new();
        }
        (1..=cap).flat_map(|n| table.get(sort, n).to_vec()).collect()
    }

    fn build(&self, table: &SizeTable, sort: SortId, n: usize) -> Vec<Term> {
        let symbols: Vec<Symbol> = if self.is_free(sort) {
            self.signature.constructors().cloned().collect()
        } else {
            self.constructors[sort].clone()
        };
        let mut out = Vec::new();
        for c in symbols {
            let i = self.signature.index_of(&c).expect("own signature");
            let slots = &self.args[i];
            for_compositions(n - 1, slots.len(), &mut |parts| {
                let pools: Vec<&[Term]> = parts.iter().zip(slots).map(|(&m, &s)| table.get(s, m)).collect();
                product(&pools, &mut |args| out.push(Term::app(c.clone(), args.to_vec())));
            });
        }
        out
    }

    /// Terms whose constructor nesting is at most `depth`, where depth 0 is
    /// the smallest inhabitant. At each level every constructor of the sort
    /// is applied to the level below.
    pub fn layered_terms(&self, sort: SortId, depth: usize) -> Vec<Term> {
        let base = self.smallest_inhabitant(sort).into_iter().collect::<Vec<_>>();
        if depth == 0 || self.is_free(sort) {
            return base;
        }
        let mut out = base;
        for c in &self.constructors[sort] {
            let i = self.signature.index_of(c).expect("own signature");
            let pools: Vec<Vec<Term>> = self.args[i].iter().map(|&s| self.layered_terms(s, depth - 1)).collect();
            let refs: Vec<&[Term]> = pools.iter().map(Vec::as_slice).collect();
            product(&refs, &mut |args| {
                let t = Term::app(c.clone(), args.to_vec());
                if !out.contains(&t) {
                    out.push(t);
                }
            });
        }
        out
    }
}

struct SizeTable(Vec<Vec<Vec<Term>>>);

impl SizeTable {
    fn new(sorts: usize) -> SizeTable {
        SizeTable(vec![vec![Vec::new()]; sorts])
    }

    fn get(&self, sort: SortId, n: usize) -> &[Term] {
        self.0[sort].get(n).map_or(&[], Vec::as_slice)
    }

    fn set(&mut self, sort: SortId, n: usize, terms: Vec<Term>) {
        let row = &mut self.0[sort];
        while row.len() <= n {
            row.push(Vec::new());
        }
        row[n] = terms;
    }
}

/// Calls `f` on every way to write `total` as `parts` positive summands.
fn for_compositions(total: usize, parts: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(rest: usize, left: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if left == 0 {
            if rest == 0 {
                f(acc);
            }
            return;
        }
        if rest < left {
            return;
        }
        for m in 1..=rest - (left - 1) {
            acc.push(m);
            go(rest - m, left - 1, acc, f);
            acc.pop();
        }
    }
    go(total, parts, &mut Vec::new(), f);
}

/// Cartesian product, first pool varying slowest.
pub(crate) fn product(pools: &[&[Term]], f: &mut dyn FnMut(&[Term])) {
    fn go(pools: &[&[Term]], acc: &mut Vec<Term>, f: &mut dyn FnMut(&[Term])) {
        match pools.split_first() {
            None => f(acc),
            Some((first, rest)) => {
                for t in first.iter() {
                    acc.push(t.clone());
                    go(rest, acc, f);
                    acc.pop();
                }
            }
        }
    }
    go(pools, &mut Vec::new(), f);
}

/// All closed constructor terms over `sig` with size at most `max_size`,
/// ignoring sorts. Ordered by size, then constructor, then arguments.
pub fn all_constructor_terms(sig: &Signature, max_size: usize) -> Vec<Term> {
    let constructors: Vec<Symbol> = sig.constructors().cloned().collect();
    all_terms_over(&constructors, &[], max_size)
}

/// All terms over `symbols` and the variables `vars` with size at most
/// `max_size`, ordered by size.
pub fn all_terms_over(symbols: &[Symbol], vars: &[Var], max_size: usize) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new()];
    for n in 1..=max_size {
        let mut level = Vec::new();
        if n == 1 {
            level.extend(vars.iter().map(|x| Term::Var(x.clone())));
        }
        for c in symbols {
            for_compositions(n - 1, c.arity(), &mut |parts| {
                let pools: Vec<&[Term]> = parts.iter().map(|&m| by_size[m].as_slice()).collect();
                product(&pools, &mut |args| level.push(Term::app(c.clone(), args.to_vec())));
            });
        }
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

/// Streams every term of size exactly `size` over `symbols` and `vars`
/// without materializing the whole set.
pub fn for_each_term(symbols: &[Symbol], vars: &[Var], size: usize, f: &mut dyn FnMut(Term)) {
    if size == 0 {
        return;
    }
    if size == 1 {
        vars.iter().for_each(|x| f(Term::Var(x.clone())));
    }
    for c in symbols {
        if c.arity() == 0 {
            if size == 1 {
                f(Term::constant(c.clone()));
            }
            continue;
        }
        for_compositions(size - 1, c.arity(), &mut |parts| {
            each_args(symbols, vars, c, parts, &mut Vec::new(), f);
        });
    }
}

fn each_args(symbols: &[Symbol], vars: &[Var], c: &Symbol, parts: &[usize], acc: &mut Vec<Term>, f: &mut dyn FnMut(Term)) {
    let Some(&n) = parts.get(acc.len()) else {
        f(Term::app(c.clone(), acc.clone()));
        return;
    };
    for_each_term(symbols, vars, n, &mut |t| {
        acc.push(t);
        each_args(symbols, vars, c, parts, acc, f);
        acc.pop();
    });
}
