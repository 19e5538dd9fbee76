//! Acceptance suite: one PASS/FAIL line per criterion, limits pinned below.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::RngExt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trs_core::corpus;
use trs_core::families::{
    all_formulas, all_strings, bool_value, lcs_dp, lcs_term, nat_value, random_formulas, random_term, square,
};
use trs_core::lpo::{lpo_gt, orient_program, LpoRule, Premise};
use trs_core::mfg::{check_gamma_closed, mfg_eval, verify_graph, Clause, EvalStats};
use trs_core::qi::{check_rule_inequalities, is_kind_zero, validate_qi};
use trs_core::rewrite::{check_quasi_reducible, innermost_normal_forms, normalize_counting};
use trs_core::sorts::Sorts;
use trs_core::syntax::parse_term;
use trs_core::{Graph, Program, Term, Var};

const C1_LIMIT: Duration = Duration::from_secs(1);
const C2_LIMIT: Duration = Duration::from_secs(30);
const C3_LIMIT: Duration = Duration::from_secs(120);
const C6_LIMIT: Duration = Duration::from_secs(60);
const NO_LIMIT: Duration = Duration::from_secs(3600);

const QI_GRID: u64 = 8;
const SUBST_BOUND: usize = 4;
const MAX_STRING: usize = 6;
const MIN_FORMULAS: usize = 200;
const UNIQUENESS_ARG_SIZE: usize = 3;
const SEARCH_STATES: usize = 100_000;
const STEP_LIMIT: usize = 1_000_000;
const SQUARE_MAX_N: usize = 10;
const RANDOM_PAIRS: usize = 10_000;
const RANDOM_MAX_SIZE: usize = 12;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn term(p: &Program, s: &str) -> Term {
    parse_term(s, &p.signature).unwrap()
}

/// A memoized run kept for the certification criterion.
struct Run {
    program: &'static str,
    root: Term,
    normal_form: Term,
    graph: Graph,
    stats: EvalStats,
}

#[derive(Default)]
struct Shared {
    runs: Vec<Run>,
}

fn c1() -> Outcome {
    let lcs = corpus::lcs();
    let qbf = corpus::qbf();
    let mut counts = Vec::new();
    for p in [&lcs, &qbf] {
        let report = orient_program(p);
        ensure(report.oriented, || format!("rule {:?} does not orient", report.first_failure))?;
        for r in &report.rules {
            let w = r.witness.as_ref().ok_or_else(|| format!("no witness for {}", r.rule))?;
            ensure(w.check(&p.precedence), || format!("invalid witness for {}", r.rule))?;
        }
        counts.push(report.rules.len());
    }
    let d = lpo_gt(
        &lcs.precedence,
        &term(&lcs, "max(lcs(x, b(y)), lcs(a(x), y))"),
        &term(&lcs, "lcs(a(x), b(y))"),
    )
    .ok_or("max/lcs rule not oriented")?;
    ensure(d.rule == LpoRule::Precedence, || format!("root uses {:?}", d.rule))?;
    let premises: Vec<Option<LpoRule>> = d
        .premises
        .iter()
        .map(|p| match p {
            Premise::Strict { derivation } => Some(derivation.rule),
            Premise::Equal { .. } => None,
        })
        .collect();
    ensure(premises == [Some(LpoRule::Lexicographic); 2], || format!("premises {premises:?}"))?;
    Ok(format!("lcs {} rules, qbf {} rules oriented with witnesses", counts[0], counts[1]))
}

fn c2() -> Outcome {
    for (name, p) in [("lcs", corpus::lcs()), ("qbf", corpus::qbf())] {
        let q = p.interpretation.as_ref().ok_or("missing interpretation")?;
        let report = validate_qi(q, &p.signature, QI_GRID);
        ensure(report.passed(), || format!("{name}: {:?}", report.conditions))?;
        ensure(is_kind_zero(q, &p.signature), || format!("{name}: not kind 0"))?;
        let rules = check_rule_inequalities(q, &p, SUBST_BOUND);
        ensure(rules.passed(), || format!("{name}: {:?}", rules.violations.first()))?;
    }

    // Displayed instances, evaluated through the tables and by hand.
    let lcs = corpus::lcs();
    let q = lcs.interpretation.as_ref().unwrap();
    let lhs = term(&lcs, "lcs(a(x), b(y))");
    let rhs = term(&lcs, "max(lcs(x, b(y)), lcs(a(x), y))");
    let qbf = corpus::qbf();
    let qq = qbf.interpretation.as_ref().unwrap();
    let big = term(&qbf, "verify(exists_c(x, y), xs)");
    let small = term(&qbf, "or(verify(y, cons(x, xs)), verify(y, xs))");
    let mut points = 0;
    for x in 0..=QI_GRID {
        for y in 0..=QI_GRID {
            let env: HashMap<Var, BigUint> = [(Var::new("x"), x.into()), (Var::new("y"), y.into())].into();
            let r = q.eval_open(&rhs, &env).map_err(|e| e.to_string())?;
            let l = q.eval_open(&lhs, &env).map_err(|e| e.to_string())?;
            let hand_r = (x.max(1 + y)).max((1 + x).max(y));
            let hand_l = (1 + x).max(1 + y);
            ensure(r == hand_r.into() && l == hand_l.into() && hand_r <= hand_l, || {
                format!("lcs instance at x={x}, y={y}: {r} vs {l}")
            })?;
            for xs in 0..=QI_GRID {
                let mut env = env.clone();
                env.insert(Var::new("xs"), xs.into());
                let s = qq.eval_open(&small, &env).map_err(|e| e.to_string())?;
                let b = qq.eval_open(&big, &env).map_err(|e| e.to_string())?;
                let hand = (y + (1 + x + xs)).max(y + xs);
                ensure(s == hand.into() && hand == (1 + x + y) + xs && s <= b, || {
                    format!("qbf instance at x={x}, y={y}, xs={xs}: {s} vs {b}")
                })?;
                points += 1;
            }
        }
    }
    Ok(format!(
        "conditions (i)-(iv) on grid <= {QI_GRID}, kind 0, rule inequalities for substitutions of size <= {SUBST_BOUND}; \
         displayed instances hold at {points} grid points"
    ))
}

fn record(shared: &mut Shared, program: &'static str, p: &Program, t: &Term) -> Result<Term, String> {
    let q = p.interpretation.as_ref().unwrap();
    let (nf, graph, stats) = mfg_eval(p, q, t).map_err(|e| format!("{t}: {e}"))?;
    shared.runs.push(Run {
        program,
        root: t.clone(),
        normal_form: nf.clone(),
        graph,
        stats,
    });
    Ok(nf)
}

fn c3(shared: &mut Shared) -> Outcome {
    let lcs = corpus::lcs();
    let strings = all_strings(MAX_STRING);
    for u in &strings {
        for v in &strings {
            let t = lcs_term(&lcs.signature, u, v);
            let nf = record(shared, "lcs", &lcs, &t)?;
            let got = nat_value(&nf).ok_or_else(|| format!("{t} gave {nf}"))?;
            ensure(got == lcs_dp(u, v), || format!("lcs({u:?}, {v:?}) = {got}, expected {}", lcs_dp(u, v)))?;
        }
    }

    let qbf = corpus::qbf();
    let mut formulas: Vec<_> = all_formulas(3, 3).into_iter().filter(|f| !f.requantifies()).collect();
    formulas.extend(random_formulas(7, 300, 3, 4).into_iter().filter(|f| !f.requantifies()));
    ensure(formulas.len() >= MIN_FORMULAS, || format!("only {} formulas", formulas.len()))?;
    ensure(formulas.iter().all(|f| f.depth() <= 4), || "formula deeper than 4".into())?;
    for f in &formulas {
        let t = f.qbf_term(&qbf.signature);
        let nf = record(shared, "qbf", &qbf, &t)?;
        let got = bool_value(&nf).ok_or_else(|| format!("{t} gave {nf}"))?;
        ensure(got == f.truth(), || format!("{t}: got {got}, truth table says {}", f.truth()))?;
    }
    Ok(format!(
        "{} string pairs match the LCS table; {} formulas match the truth table",
        strings.len() * strings.len(),
        formulas.len()
    ))
}

fn small_basic_terms(p: &Program, max_arg_size: usize) -> Vec<Term> {
    let sorts = Sorts::infer(p);
    let mut out = Vec::new();
    for f in p.signature.defined() {
        let mut tuples: Vec<Vec<Term>> = vec![vec![]];
        for &s in sorts.arg_sorts(f).unwrap() {
            let pool = sorts.constructor_terms(s, max_arg_size);
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    pool.iter().map(move |a| {
                        let mut next = prefix.clone();
                        next.push(a.clone());
                        next
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|args| Term::app(f.clone(), args)));
    }
    out
}

fn c4(shared: &mut Shared) -> Outcome {
    let lcs = corpus::lcs();
    let qbf = corpus::qbf();
    let mut compared = 0;
    for run in &shared.runs {
        let p = if run.program == "lcs" { &lcs } else { &qbf };
        let (naive, _) = normalize_counting(p, &run.root, STEP_LIMIT).map_err(|e| format!("{}: {e}", run.root))?;
        ensure(naive == run.normal_form, || {
            format!("{}: naive {naive}, memoized {}", run.root, run.normal_form)
        })?;
        compared += 1;
    }

    let terms = small_basic_terms(&lcs, UNIQUENESS_ARG_SIZE);
    let mut states = 0;
    for t in &terms {
        let nfs = innermost_normal_forms(&lcs, t, SEARCH_STATES).map_err(|e| format!("{t}: {e}"))?;
        ensure(nfs.len() == 1, || format!("{t} has normal forms {nfs:?}"))?;
        states += 1;
        record(shared, "lcs", &lcs, t)?;
    }
    Ok(format!(
        "{compared} runs agree; {states} lcs/max terms with arguments of size <= {UNIQUENESS_ARG_SIZE} have a unique normal form"
    ))
}

/// A larger constructor term of the same sort as `v`.
fn inflate(program: &str, v: &Term, p: &Program) -> Term {
    let wrap = if program == "lcs" { "s" } else { "neg" };
    Term::app(p.signature.get(wrap).unwrap().clone(), vec![v.clone()])
}

/// A different constructor term of the same sort as `v`.
fn flip(p: &Program, v: &Term) -> Term {
    match v.root().map(|f| f.name()) {
        Some("top") => term(p, "bot"),
        Some("bot") => term(p, "top"),
        Some("s") => v.args()[0].clone(),
        _ => term(p, "s(0)"),
    }
}

fn c5(shared: &Shared) -> Outcome {
    let lcs = corpus::lcs();
    let qbf = corpus::qbf();
    let mut rejected = [0usize; 3];
    let mut applied = [0usize; 3];
    for run in &shared.runs {
        let p = if run.program == "lcs" { &lcs } else { &qbf };
        let q = p.interpretation.as_ref().unwrap();
        let ell = run.stats.ell;
        ensure(run.stats.max_intermediate_arg_size <= ell, || {
            format!("{}: argument of size {} > {ell}", run.root, run.stats.max_intermediate_arg_size)
        })?;
        for (key, entry) in run.graph.iter() {
            let bound = q.eval_term(key).map_err(|e| e.to_string())?;
            ensure(BigUint::from(entry.normal_form.size()) <= bound, || {
                format!("{key} -> {} exceeds {bound}", entry.normal_form)
            })?;
            for (u, _) in &entry.sub_calls {
                ensure(u.args().iter().all(|a| a.size() <= ell), || format!("call {u} outside budget {ell}"))?;
            }
        }
        verify_graph(p, q, &run.graph, ell, &run.root, &run.normal_form).map_err(|v| format!("{}: {v}", run.root))?;
        check_gamma_closed(p, &run.graph).map_err(|v| format!("{}: {v}", run.root))?;

        // Wrong normal form at the root, claimed consistently.
        let mut g = run.graph.clone();
        let wrong = flip(p, &run.normal_form);
        g.get_mut(&run.root).unwrap().normal_form = wrong.clone();
        applied[0] += 1;
        if verify_graph(p, q, &g, ell, &run.root, &wrong).is_err() {
            rejected[0] += 1;
        }

        // Inflated value: one interpretation unit above its key.
        let (target, key_value) = run
            .graph
            .iter()
            .map(|(k, _)| (k.clone(), q.eval_term(k).unwrap()))
            .find(|(_, v)| *v < BigUint::from(ell))
            .unwrap_or_else(|| (run.root.clone(), q.eval_term(&run.root).unwrap()));
        let mut g = run.graph.clone();
        let entry = g.get_mut(&target).unwrap();
        while q.eval_term(&entry.normal_form).unwrap() <= key_value {
            entry.normal_form = inflate(run.program, &entry.normal_form, p);
        }
        let claimed = g.get(&run.root).unwrap().normal_form.clone();
        applied[1] += 1;
        if let Err(v) = verify_graph(p, q, &g, ell, &run.root, &claimed) {
            if matches!(v.clause, Clause::QiBound | Clause::ValueBudget) {
                rejected[1] += 1;
            }
        }

        // Broken fold: one recorded sub-call dropped.
        if let Some((key, _)) = run.graph.iter().find(|(_, e)| !e.sub_calls.is_empty()) {
            let mut g = run.graph.clone();
            g.get_mut(&key.clone()).unwrap().sub_calls.pop();
            applied[2] += 1;
            if verify_graph(p, q, &g, ell, &run.root, &run.normal_form).is_err() {
                rejected[2] += 1;
            }
        }
    }
    ensure(applied.iter().all(|&n| n > 0), || format!("mutations applied {applied:?}"))?;
    ensure(rejected == applied, || format!("rejected {rejected:?} of {applied:?}"))?;
    Ok(format!(
        "{} graphs certified; mutations rejected: wrong value {}/{}, inflated value {}/{}, broken fold {}/{}",
        shared.runs.len(),
        rejected[0],
        applied[0],
        rejected[1],
        applied[1],
        rejected[2],
        applied[2]
    ))
}

fn c6() -> Outcome {
    let p = corpus::lcs();
    let q = p.interpretation.as_ref().unwrap();
    let mut previous: Option<Option<usize>> = None;
    let mut rows = Vec::new();
    for n in 1..=SQUARE_MAX_N {
        let t = square(&p.signature, n);
        let steps = normalize_counting(&p, &t, STEP_LIMIT).ok().map(|(_, k)| k);
        let (nf, graph, stats) = mfg_eval(&p, q, &t).map_err(|e| format!("n={n}: {e}"))?;
        ensure(nat_value(&nf) == Some(0), || format!("n={n}: value {nf}"))?;
        verify_graph(&p, q, &graph, stats.ell, &t, &nf).map_err(|v| format!("n={n}: {v}"))?;
        ensure(stats.distinct_calls <= 4 * (n + 1) * (n + 1), || {
            format!("n={n}: {} distinct calls", stats.distinct_calls)
        })?;
        ensure(n < 2 || stats.cache_hits >= 1, || format!("n={n}: no cache hits"))?;
        if let (Some(Some(prev)), Some(cur)) = (previous, steps) {
            ensure(cur > prev, || format!("naive steps {prev} -> {cur} at n={n}"))?;
            ensure(n - 1 < 5 || cur >= 2 * prev, || format!("naive steps {prev} -> {cur} at n={n}"))?;
        }
        // Once a row exceeds the limit, larger rows must too.
        ensure(previous != Some(None) || steps.is_none(), || format!("n={n} finished after n-1 hit the limit"))?;
        previous = Some(steps);
        rows.push(format!(
            "n={n}:{}/{}",
            steps.map_or("over-limit".to_string(), |k| k.to_string()),
            stats.distinct_calls
        ));
    }
    Ok(format!("naive steps/distinct calls {}", rows.join(" ")))
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut summary = Vec::new();
    for (name, p) in [("lcs", corpus::lcs()), ("qbf", corpus::qbf())] {
        let symbols = p.signature.symbols().to_vec();
        let vars = p.variables();
        let sample = |rng: &mut ChaCha8Rng| loop {
            let size = rng.random_range(1..=RANDOM_MAX_SIZE);
            if let Some(t) = random_term(rng, &symbols, &vars, size) {
                return t;
            }
        };
        let mut successes = 0;
        for i in 0..RANDOM_PAIRS {
            let t = sample(&mut rng);
            // Every other pair draws s from the material of t so that the
            // order relates a fair share of them.
            let s = if i % 2 == 0 {
                sample(&mut rng)
            } else {
                let subs = t.subterms_postorder();
                let base = subs[rng.random_range(0..subs.len())].clone();
                let g = &symbols[rng.random_range(0..symbols.len())];
                let args: Vec<Term> = (0..g.arity()).map(|_| base.clone()).collect();
                let candidate = if g.arity() == 0 { base } else { Term::app(g.clone(), args) };
                if candidate.size() <= RANDOM_MAX_SIZE {
                    candidate
                } else {
                    subs[0].clone()
                }
            };
            if let Some(d) = lpo_gt(&p.precedence, &s, &t) {
                successes += 1;
                ensure(d.node_count() <= s.size() * t.size(), || {
                    format!("{s} < {t}: {} nodes > {}", d.node_count(), s.size() * t.size())
                })?;
                ensure(d.check(&p.precedence), || format!("{s} < {t}: invalid witness"))?;
            }
        }
        ensure(successes > 0, || format!("{name}: no comparison succeeded"))?;
        summary.push(format!("{name} {successes}/{RANDOM_PAIRS} related"));
    }
    Ok(format!("zero bound violations; {}", summary.join(", ")))
}

fn c8() -> Outcome {
    let lcs = corpus::lcs();
    for (name, p) in [("lcs", &lcs), ("qbf", &corpus::qbf())] {
        let report = check_quasi_reducible(p);
        ensure(report.quasi_reducible, || format!("{name}: uncovered {:?}", report.witness))?;
    }
    let index = lcs
        .rules
        .iter()
        .position(|r| r.to_string() == "max(0, y) -> y")
        .ok_or("rule max(0, y) -> y missing")?;
    let report = check_quasi_reducible(&lcs.without_rule(index));
    ensure(!report.quasi_reducible, || "deleting max(0, y) -> y went unnoticed".into())?;
    let witness = report.witness.ok_or("no witness")?;
    ensure(witness == term(&lcs, "max(0, s(0))"), || format!("witness {witness}"))?;
    Ok(format!("both programs covered; lcs without max(0, y) -> y fails at {witness}"))
}

fn run(id: &str, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panic: {msg}"))
    });
    let elapsed = start.elapsed();
    let outcome = outcome.and_then(|detail| {
        if elapsed <= limit {
            Ok(detail)
        } else {
            Err(format!("took {elapsed:.2?}, limit {limit:?} ({detail})"))
        }
    });
    match &outcome {
        Ok(detail) => println!("PASS {id} {title} [{elapsed:.2?}]: {detail}"),
        Err(why) => println!("FAIL {id} {title} [{elapsed:.2?}]: {why}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut shared = Shared::default();
    let results = [
        run("C1", "orientation", C1_LIMIT, c1),
        run("C2", "quasi-interpretations", C2_LIMIT, c2),
        run("C3", "functional correctness", C3_LIMIT, || c3(&mut shared)),
        run("C4", "strategy equivalence and uniqueness", NO_LIMIT, || c4(&mut shared)),
        run("C5", "size-bound certification", NO_LIMIT, || c5(&shared)),
        run("C6", "complexity contrast", C6_LIMIT, c6),
        run("C7", "witness bound", NO_LIMIT, c7),
        run("C8", "quasi-reducibility", NO_LIMIT, c8),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
