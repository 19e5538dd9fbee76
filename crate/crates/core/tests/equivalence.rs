//! Naive rewriting and memoized evaluation agree on every small well-sorted
//! basic term, and every memoized run yields a checkable graph.

use num_bigint::BigUint;
use trs_core::corpus;
use trs_core::families::{all_strings, lcs_term};
use trs_core::lpo::lpo_gt_bounded;
use trs_core::mfg::{check_gamma_closed, mfg_eval, verify_graph};
use trs_core::rewrite::normalize;
use trs_core::sorts::Sorts;
use trs_core::{Program, Term};

fn basic_terms(p: &Program, max_arg_size: usize) -> Vec<Term> {
    let sorts = Sorts::infer(p);
    let mut out = Vec::new();
    for f in p.signature.defined() {
        let pools: Vec<Vec<Term>> = sorts
            .arg_sorts(f)
            .unwrap()
            .iter()
            .map(|&s| sorts.constructor_terms(s, max_arg_size))
            .collect();
        let mut tuples: Vec<Vec<Term>> = vec![vec![]];
        for pool in &pools {
            tuples = tuples
                .iter()
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

fn sweep(p: &Program, max_arg_size: usize) -> usize {
    let q = p.interpretation.as_ref().unwrap();
    let terms = basic_terms(p, max_arg_size);
    for t in &terms {
        let (naive, _) = normalize(p, t, 1_000_000).unwrap();
        let (nf, graph, stats) = mfg_eval(p, q, t).unwrap_or_else(|e| panic!("{t}: {e}"));
        assert_eq!(nf, naive, "{t}");
        assert!(stats.max_intermediate_arg_size <= stats.ell, "{t}");
        verify_graph(p, q, &graph, stats.ell, t, &nf).unwrap_or_else(|v| panic!("{t}: {v}"));
        check_gamma_closed(p, &graph).unwrap_or_else(|v| panic!("{t}: {v}"));
        for (key, entry) in graph.iter() {
            let key_value = q.eval_term(key).unwrap();
            assert!(BigUint::from(entry.normal_form.size()) <= key_value, "{key}");
            assert!(entry.sub_calls.len() <= p.rules[entry.rule].rhs.size(), "{key}");
            for (u, _) in &entry.sub_calls {
                assert!(lpo_gt_bounded(&p.precedence, stats.ell, u, key), "{u} under {key}");
            }
        }
    }
    terms.len()
}

#[test]
fn lcs_engines_agree_with_arguments_to_size_5() {
    let n = sweep(&corpus::lcs(), 5);
    assert!(n > 100, "{n}");
}

#[test]
fn qbf_engines_agree_with_arguments_to_size_5() {
    let n = sweep(&corpus::qbf(), 5);
    assert!(n > 100, "{n}");
}

#[test]
fn qbf_engines_agree_with_arguments_to_size_7() {
    let n = sweep(&corpus::qbf(), 7);
    assert!(n > 1000, "{n}");
}

#[test]
fn lcs_stack_depth_stays_linear() {
    let p = corpus::lcs();
    let q = p.interpretation.as_ref().unwrap();
    for u in all_strings(5) {
        for v in all_strings(5) {
            let (_, _, stats) = mfg_eval(&p, q, &lcs_term(&p.signature, &u, &v)).unwrap();
            assert!(stats.max_stack_depth <= 2 * (u.len() + v.len()) + 2, "{u} {v}: {}", stats.max_stack_depth);
        }
    }
}
