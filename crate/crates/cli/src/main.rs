//! `trstool`: check, evaluate and benchmark constructor rewriting programs.
//!
//! Exit codes: 0 when every verdict passes, 1 when a check, evaluation or
//! benchmark row fails, 2 on unreadable input or bad usage.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use trs_core::families::{bool_value, exists_chain, lcs_dp, lcs_term, nat_value, random_strings};
use trs_core::lpo::{orient_program, OrientationReport};
use trs_core::mfg::{check_gamma_closed, mfg_eval, verify_graph, EvalStats, GraphDocument, Violation};
use trs_core::qi::{check_rule_inequalities, derive_ell, is_kind_zero, validate_qi, Status, ValidationReport};
use trs_core::rewrite::{check_quasi_reducible, default_step_limit, normalize_counting, CoverageReport, RewriteError};
use trs_core::{parse_program, parse_term, Program, Term};

#[derive(Parser)]
#[command(name = "trstool", version, about = "Check, evaluate and benchmark constructor term rewriting programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orientation, interpretation and coverage checks.
    Check(CheckArgs),
    /// Normalize a closed term.
    Eval(EvalArgs),
    /// Step and call counts over a family of inputs.
    Bench(BenchArgs),
    /// Re-check a graph written by `eval --graph-out`.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Bounds {
    /// Largest substitution size for rule inequalities.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    subst_bound: u64,
    /// Largest coordinate for the interpretation grid checks.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    grid_bound: u64,
}

#[derive(Args)]
struct CheckArgs {
    program: PathBuf,
    #[command(flatten)]
    bounds: Bounds,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Strategy {
    Naive,
    Mfg,
    Both,
}

#[derive(Args)]
struct EvalArgs {
    program: PathBuf,
    term: String,
    #[arg(long, value_enum, default_value_t = Strategy::Mfg)]
    strategy: Strategy,
    /// Naive step limit; defaults to TRSTOOL_STEP_LIMIT or 1000000.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    step_limit: Option<u64>,
    #[command(flatten)]
    bounds: Bounds,
    /// Re-check the memoized graph after evaluation.
    #[arg(long)]
    verify: bool,
    /// Write the memoized graph as JSON.
    #[arg(long, value_name = "PATH")]
    graph_out: Option<PathBuf>,
    /// Evaluate even if the program fails its checks.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    /// lcs(a^n, b^n).
    Square,
    /// lcs on two seeded random strings of length n.
    Random,
    /// qbf on an n-fold existential chain.
    ExistsChain,
}

#[derive(Args)]
struct BenchArgs {
    program: PathBuf,
    #[arg(long, value_enum, default_value_t = Family::Square)]
    family: Family,
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    /// Seed for the random family.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    step_limit: Option<u64>,
    #[command(flatten)]
    bounds: Bounds,
    #[arg(long)]
    force: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    program: PathBuf,
    graph: PathBuf,
    #[arg(long)]
    json: bool,
}

enum Failure {
    /// Exit 1: a verdict failed.
    Failed(String),
    /// Exit 2: input could not be read or parsed.
    Input(String),
}

type CmdResult = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn step_limit(arg: Option<u64>) -> usize {
    arg.map_or_else(default_step_limit, |n| usize::try_from(n).unwrap_or(usize::MAX))
}

#[derive(Serialize)]
struct Verdict {
    check: &'static str,
    status: Status,
    detail: String,
}

impl Verdict {
    fn new(check: &'static str, ok: bool, detail: String) -> Verdict {
        let status = if ok { Status::Pass } else { Status::Fail };
        Verdict { check, status, detail }
    }

    fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Serialize)]
struct CheckReport {
    program: String,
    passed: bool,
    verdicts: Vec<Verdict>,
    orientation: OrientationReport,
    conditions: Option<ValidationReport>,
    kind_zero: bool,
    rule_inequalities: Option<ValidationReport>,
    quasi_reducibility: CoverageReport,
}

fn run_checks(path: &Path, p: &Program, bounds: &Bounds) -> CheckReport {
    let orientation = orient_program(p);
    let oriented = orientation.rules.iter().filter(|r| r.oriented).count();
    let mut detail = format!("{oriented} of {} rules oriented", orientation.rules.len());
    if let Some(i) = orientation.first_failure {
        detail += &format!("; first failure: rule {i}: {}", orientation.rules[i].rule);
    }
    let mut verdicts = vec![Verdict::new("orientation", orientation.oriented, detail)];

    let (conditions, kind_zero, rules) = match &p.interpretation {
        None => {
            let missing = "no interpretation declared".to_string();
            verdicts.push(Verdict::new("interpretation conditions", false, missing.clone()));
            verdicts.push(Verdict::new("kind 0", false, missing.clone()));
            verdicts.push(Verdict::new("rule inequalities", false, missing));
            (None, false, None)
        }
        Some(q) => {
            let conditions = validate_qi(q, &p.signature, bounds.grid_bound);
            let failed: Vec<String> = conditions
                .conditions
                .iter()
                .filter(|c| c.status == Status::Fail)
                .map(|c| match &c.counterexample {
                    Some(cx) => format!("{}: {}", c.condition, cx.detail),
                    None => c.condition.clone(),
                })
                .collect();
            let detail = if failed.is_empty() {
                format!("(i)-(iv) hold, grid <= {}", bounds.grid_bound)
            } else {
                failed.join("; ")
            };
            verdicts.push(Verdict::new("interpretation conditions", conditions.passed(), detail));

            let kind_zero = is_kind_zero(q, &p.signature);
            let detail = if kind_zero {
                "constructors are interpreted as 1 + sum of arguments".to_string()
            } else {
                "some constructor is not interpreted as 1 + sum of arguments".to_string()
            };
            verdicts.push(Verdict::new("kind 0", kind_zero, detail));

            let subst_bound = usize::try_from(bounds.subst_bound).unwrap_or(usize::MAX);
            let rules = check_rule_inequalities(q, p, subst_bound);
            let detail = match rules.violations.first() {
                None => rules.caveat.clone().unwrap_or_default(),
                Some(v) => format!(
                    "rule {}: {} under {}: rhs {} > lhs {}",
                    v.rule, p.rules[v.rule], v.theta, v.rhs_value, v.lhs_value
                ),
            };
            verdicts.push(Verdict::new("rule inequalities", rules.passed(), detail));
            (Some(conditions), kind_zero, Some(rules))
        }
    };

    let coverage = check_quasi_reducible(p);
    let detail = match &coverage.witness {
        None => "every well-sorted basic term matches a rule".to_string(),
        Some(w) => format!("no rule matches {w}"),
    };
    verdicts.push(Verdict::new("quasi-reducibility", coverage.quasi_reducible, detail));

    CheckReport {
        program: path.display().to_string(),
        passed: verdicts.iter().all(Verdict::passed),
        verdicts,
        orientation,
        conditions,
        kind_zero,
        rule_inequalities: rules,
        quasi_reducibility: coverage,
    }
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    let p = load(&args.program)?;
    let report = run_checks(&args.program, &p, &args.bounds);
    if args.json {
        print_json(&report);
    } else {
        for v in &report.verdicts {
            let status = if v.passed() { "pass" } else { "FAIL" };
            println!("{}: {status} ({})", v.check, v.detail);
        }
        println!("result: {}", if report.passed { "pass" } else { "FAIL" });
    }
    Ok(report.passed)
}

/// Refuses programs that fail their checks unless forced.
fn gate(path: &Path, p: &Program, bounds: &Bounds, force: bool) -> Result<(), Failure> {
    if force {
        return Ok(());
    }
    let report = run_checks(path, p, bounds);
    match report.verdicts.iter().find(|v| !v.passed()) {
        None => Ok(()),
        Some(v) => Err(Failure::Failed(format!(
            "program fails its {} check ({}); pass --force to run anyway",
            v.check, v.detail
        ))),
    }
}

#[derive(Serialize)]
struct NaiveResult {
    normal_form: Option<Term>,
    steps: usize,
    limit_exceeded: bool,
}

#[derive(Serialize)]
struct MfgResult {
    normal_form: Term,
    stats: EvalStats,
    graph_entries: usize,
}

#[derive(Serialize)]
struct EvalReport {
    term: Term,
    strategy: Strategy,
    normal_form: Option<Term>,
    naive: Option<NaiveResult>,
    mfg: Option<MfgResult>,
    equal: Option<bool>,
    verified: Option<bool>,
    violation: Option<Violation>,
}

fn run_naive(p: &Program, t: &Term, limit: usize) -> Result<NaiveResult, Failure> {
    match normalize_counting(p, t, limit) {
        Ok((nf, steps)) => Ok(NaiveResult {
            normal_form: Some(nf),
            steps,
            limit_exceeded: false,
        }),
        Err(RewriteError::CountLimitExceeded { limit, .. }) => Ok(NaiveResult {
            normal_form: None,
            steps: limit,
            limit_exceeded: true,
        }),
        Err(e) => Err(Failure::Failed(e.to_string())),
    }
}

fn cmd_eval(args: &EvalArgs) -> CmdResult {
    if (args.verify || args.graph_out.is_some()) && args.strategy == Strategy::Naive {
        return Err(Failure::Input("--verify and --graph-out need --strategy mfg or both".into()));
    }
    let p = load(&args.program)?;
    let t = parse_term(&args.term, &p.signature).map_err(|e| Failure::Input(format!("term: {e}")))?;
    if !t.is_closed() {
        return Err(Failure::Failed(format!("term `{t}` is not closed")));
    }
    gate(&args.program, &p, &args.bounds, args.force)?;

    let mut report = EvalReport {
        term: t.clone(),
        strategy: args.strategy,
        normal_form: None,
        naive: None,
        mfg: None,
        equal: None,
        verified: None,
        violation: None,
    };

    if args.strategy != Strategy::Mfg {
        report.naive = Some(run_naive(&p, &t, step_limit(args.step_limit))?);
    }
    if args.strategy != Strategy::Naive {
        let q = p
            .interpretation
            .as_ref()
            .ok_or_else(|| Failure::Failed("the mfg strategy needs an interpretation".into()))?;
        if !t.is_basic() {
            return Err(Failure::Failed(format!(
                "the mfg strategy needs a basic term; `{t}` is not (try --strategy naive)"
            )));
        }
        let (nf, graph, stats) = mfg_eval(&p, q, &t).map_err(|e| Failure::Failed(e.to_string()))?;
        if let Some(path) = &args.graph_out {
            let doc = GraphDocument::new(&graph, &t, &nf, stats.ell);
            let text = serde_json::to_string_pretty(&doc).expect("graphs serialize");
            fs::write(path, text + "\n").map_err(|e| Failure::Failed(format!("cannot write {}: {e}", path.display())))?;
        }
        if args.verify {
            let checked = verify_graph(&p, q, &graph, stats.ell, &t, &nf).and_then(|()| check_gamma_closed(&p, &graph));
            report.verified = Some(checked.is_ok());
            report.violation = checked.err();
        }
        report.mfg = Some(MfgResult {
            normal_form: nf,
            graph_entries: graph.len(),
            stats,
        });
    }

    let naive_nf = report.naive.as_ref().and_then(|n| n.normal_form.clone());
    let mfg_nf = report.mfg.as_ref().map(|m| m.normal_form.clone());
    if let (Some(naive), Some(mfg)) = (&report.naive, &mfg_nf) {
        report.equal = Some(naive.normal_form.as_ref() == Some(mfg));
    }
    report.normal_form = mfg_nf.or(naive_nf);
    let limit_hit = report.naive.as_ref().is_some_and(|n| n.limit_exceeded);
    let ok = !limit_hit && report.equal != Some(false) && report.verified != Some(false);

    if args.json {
        print_json(&report);
    } else {
        match &report.normal_form {
            Some(nf) => println!("{nf}"),
            None => println!("no normal form within the step limit"),
        }
        if let Some(n) = &report.naive {
            if n.limit_exceeded {
                println!("naive: step limit {} exceeded", n.steps);
            } else {
                println!("naive: {} steps", n.steps);
            }
        }
        if let Some(m) = &report.mfg {
            let s = &m.stats;
            println!(
                "mfg: {} distinct calls, {} cache hits, stack depth {}, widest argument {}, ell {}",
                s.distinct_calls, s.cache_hits, s.max_stack_depth, s.max_intermediate_arg_size, s.ell
            );
        }
        match report.equal {
            Some(true) => println!("strategies agree"),
            Some(false) => println!("strategies DISAGREE"),
            None => {}
        }
        match (&report.verified, &report.violation) {
            (Some(true), _) => println!("graph verified"),
            (Some(false), Some(v)) => println!("graph REJECTED: {v}"),
            _ => {}
        }
    }
    Ok(ok)
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    term: Term,
    expected: String,
    normal_form: Term,
    naive_steps: Option<usize>,
    naive_limit_exceeded: bool,
    distinct_calls: usize,
    cache_hits: usize,
    max_stack_depth: usize,
    max_intermediate_arg_size: usize,
    ell: usize,
    equal: Option<bool>,
    oracle_ok: bool,
    verified: bool,
}

impl BenchRow {
    fn passed(&self) -> bool {
        !self.naive_limit_exceeded && self.equal == Some(true) && self.oracle_ok && self.verified
    }
}

#[derive(Serialize)]
struct BenchReport {
    program: String,
    family: Family,
    max_n: usize,
    step_limit: usize,
    rows: Vec<BenchRow>,
    /// Largest `distinct_calls / (n + 1)^2` over the rows.
    fitted_c: Option<f64>,
    passed: bool,
}

fn require(p: &Program, family: &str, names: &[&str]) -> Result<(), Failure> {
    let missing: Vec<&str> = names.iter().copied().filter(|n| p.signature.get(n).is_none()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Input(format!("family {family} needs symbols {}", missing.join(", "))))
    }
}

/// The input for row `n` and the value an independent oracle expects.
fn family_input(p: &Program, family: Family, seed: u64, n: usize) -> (Term, Term) {
    let sig = &p.signature;
    let nat = |k: usize| (0..k).fold(Term::constant(sig.get("0").unwrap().clone()), |t, _| {
        Term::app(sig.get("s").unwrap().clone(), vec![t])
    });
    match family {
        Family::Square => (lcs_term(sig, &"a".repeat(n), &"b".repeat(n)), nat(0)),
        Family::Random => {
            let (u, v) = random_strings(seed.wrapping_add(n as u64), n);
            (lcs_term(sig, &u, &v), nat(lcs_dp(&u, &v)))
        }
        Family::ExistsChain => {
            let f = exists_chain(n);
            let truth = if f.truth() { "top" } else { "bot" };
            (f.qbf_term(sig), Term::constant(sig.get(truth).unwrap().clone()))
        }
    }
}

fn cmd_bench(args: &BenchArgs) -> CmdResult {
    let p = load(&args.program)?;
    match args.family {
        Family::Square | Family::Random => require(&p, "square/random", &["lcs", "a", "b", "eps", "0", "s"])?,
        Family::ExistsChain => require(
            &p,
            "exists-chain",
            &["qbf", "exists_c", "or_c", "neg", "var", "0", "s", "top", "bot"],
        )?,
    }
    gate(&args.program, &p, &args.bounds, args.force)?;
    let q = p
        .interpretation
        .as_ref()
        .ok_or_else(|| Failure::Failed("benchmarks need an interpretation".into()))?;
    let limit = step_limit(args.step_limit);

    let mut rows = Vec::new();
    for n in 1..=args.max_n {
        let (t, expected) = family_input(&p, args.family, args.seed, n);
        let naive = run_naive(&p, &t, limit)?;
        let (nf, graph, stats) = mfg_eval(&p, q, &t).map_err(|e| Failure::Failed(format!("n={n}: {e}")))?;
        let verified = verify_graph(&p, q, &graph, stats.ell, &t, &nf).is_ok();
        let oracle_ok = match args.family {
            Family::ExistsChain => bool_value(&nf).is_some() && nf == expected,
            _ => nat_value(&nf).is_some() && nf == expected,
        };
        rows.push(BenchRow {
            n,
            expected: expected.to_string(),
            equal: naive.normal_form.as_ref().map(|x| *x == nf),
            naive_steps: (!naive.limit_exceeded).then_some(naive.steps),
            naive_limit_exceeded: naive.limit_exceeded,
            term: t,
            normal_form: nf,
            distinct_calls: stats.distinct_calls,
            cache_hits: stats.cache_hits,
            max_stack_depth: stats.max_stack_depth,
            max_intermediate_arg_size: stats.max_intermediate_arg_size,
            ell: stats.ell,
            oracle_ok,
            verified,
        });
    }
    let fitted_c = rows
        .iter()
        .map(|r| r.distinct_calls as f64 / ((r.n + 1) * (r.n + 1)) as f64)
        .reduce(f64::max);
    let report = BenchReport {
        program: args.program.display().to_string(),
        family: args.family,
        max_n: args.max_n,
        step_limit: limit,
        passed: rows.iter().all(BenchRow::passed),
        rows,
        fitted_c,
    };

    if args.json {
        print_json(&report);
    } else {
        println!(
            "{:>4} {:>12} {:>8} {:>8} {:>6} {:>6} {:>6}  value",
            "n", "naive", "calls", "hits", "depth", "width", "ell"
        );
        for r in &report.rows {
            let naive = r.naive_steps.map_or("over-limit".to_string(), |s| s.to_string());
            let mut notes = Vec::new();
            if r.equal == Some(false) {
                notes.push("engines disagree");
            }
            if !r.oracle_ok {
                notes.push("oracle mismatch");
            }
            if !r.verified {
                notes.push("graph rejected");
            }
            println!(
                "{:>4} {:>12} {:>8} {:>8} {:>6} {:>6} {:>6}  {} {}",
                r.n,
                naive,
                r.distinct_calls,
                r.cache_hits,
                r.max_stack_depth,
                r.max_intermediate_arg_size,
                r.ell,
                r.normal_form,
                notes.join(", ")
            );
        }
        if let Some(c) = report.fitted_c {
            println!("distinct calls <= {c:.3} * (n + 1)^2");
        }
        println!("result: {}", if report.passed { "pass" } else { "FAIL" });
    }
    Ok(report.passed)
}

#[derive(Serialize)]
struct VerifyReport {
    graph: String,
    root: Term,
    normal_form: Term,
    entries: usize,
    verified: bool,
    violation: Option<Violation>,
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let p = load(&args.program)?;
    let text = read(&args.graph)?;
    let doc = GraphDocument::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", args.graph.display())))?;
    let (graph, root, nf, ell) = doc
        .resolve(&p)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.graph.display())))?;
    let q = p
        .interpretation
        .as_ref()
        .ok_or_else(|| Failure::Failed("verification needs an interpretation".into()))?;
    // The budget is recomputed, never trusted from the document.
    let expected = derive_ell(q, &root).map_err(|e| Failure::Failed(e.to_string()))?;
    if num_ell(&expected) != ell {
        return Err(Failure::Failed(format!("graph claims budget {ell}, but [[{root}]] = {expected}")));
    }
    let checked = verify_graph(&p, q, &graph, ell, &root, &nf).and_then(|()| check_gamma_closed(&p, &graph));
    let report = VerifyReport {
        graph: args.graph.display().to_string(),
        root,
        normal_form: nf,
        entries: graph.len(),
        verified: checked.is_ok(),
        violation: checked.err(),
    };
    if args.json {
        print_json(&report);
    } else {
        match &report.violation {
            None => println!("verified: {} -> {} ({} entries)", report.root, report.normal_form, report.entries),
            Some(v) => println!("REJECTED: {v}"),
        }
    }
    Ok(report.verified)
}

fn num_ell(n: &num_bigint::BigUint) -> usize {
    usize::try_from(n).unwrap_or(usize::MAX)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
