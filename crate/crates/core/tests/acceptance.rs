//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracenet_core::async_system::AsyncSystem;
use tracenet_core::chain::{build_chain, empirical_validation, CliqueChain, Lumping};
use tracenet_core::petri_net::DEFAULT_MAX_STATES;
use tracenet_core::random_nets::{random_monoid, random_safe_net};
use tracenet_core::reference::{
    discrepancy_report, published_matrix, PUBLISHED_KAPPA, PUBLISHED_PAIRS, REFERENCE_NET_JSON,
};
use tracenet_core::report::{step_records, Analysis, AnalysisOptions};
use tracenet_core::roots::smallest_root_unit;
use tracenet_core::trace_monoid::DEFAULT_MAX_CLIQUES;
use tracenet_core::verify::{check_chain_rule, check_inverse_identity, Outcome};
use tracenet_core::{parse_net, IntPolynomial, TraceMonoid};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn analysis() -> Analysis {
    Analysis::run(
        parse_net(REFERENCE_NET_JSON).unwrap(),
        &AnalysisOptions::default(),
    )
    .unwrap()
}

fn poly(c: &[i64]) -> IntPolynomial {
    IntPolynomial::from_i64(c)
}

fn pair_index(a: &Analysis, chain: &CliqueChain<f64>, state: &str, clique: &str) -> usize {
    let sys = a.system();
    chain
        .position(
            sys.state(state).unwrap(),
            &sys.monoid().clique_named(clique).unwrap(),
        )
        .unwrap_or_else(|| panic!("pair ({state},{clique}) is not reachable"))
}

fn pipeline_golden() {
    let start = Instant::now();
    let a = analysis();
    let sys = a.system();
    let m = sys.monoid();
    let pairs: Vec<String> = m
        .independent_pairs()
        .into_iter()
        .map(|(x, y)| format!("{}{}", m.letter_name(x), m.letter_name(y)))
        .collect();
    assert_eq!(pairs, ["ad", "ae", "bd", "be", "ce"]);
    assert_eq!(sys.state_count(), 2);
    assert_eq!(
        m.mobius_polynomial(DEFAULT_MAX_CLIQUES).unwrap(),
        poly(&[1, -5, 5])
    );
    let mm = sys.mobius_matrix();
    assert_eq!(mm.get(0, 0), &poly(&[1, -3, 2]));
    assert_eq!(mm.get(0, 1), &poly(&[0, -1, 2]));
    assert_eq!(mm.get(1, 0), &poly(&[0, -1, 1]));
    assert_eq!(mm.get(1, 1), &poly(&[1, -2]));
    // (1 - z)(1 - 2z)(1 - 2z - z^2) expanded
    let factored = &(&poly(&[1, -1]) * &poly(&[1, -2])) * &poly(&[1, -2, -1]);
    assert_eq!(sys.theta_polynomial(), factored);
    assert_eq!(factored, poly(&[1, -5, 7, -1, -2]));
    assert!((a.measure.cocycle().q0() - (SQRT2 - 1.0)).abs() <= 1e-12);
    assert!((a.measure.cocycle().gamma(0, 1) - SQRT2).abs() <= 1e-9);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
}

fn monoid_root() {
    let a = analysis();
    let mu = a
        .system()
        .monoid()
        .mobius_polynomial(DEFAULT_MAX_CLIQUES)
        .unwrap();
    let root = smallest_root_unit(&mu, 1e-12).unwrap();
    let expected = 0.5 - 1.0 / (2.0 * 5f64.sqrt());
    assert!(
        (root.midpoint() - expected).abs() <= 1e-12,
        "{}",
        root.midpoint()
    );
    assert!(root.width() <= 1e-12);
}

fn kappa_table() {
    let a = analysis();
    let law = a.measure.first_clique_law(0).unwrap();
    let m = a.system().monoid();
    for (name, value) in PUBLISHED_KAPPA {
        let i = a
            .system()
            .clique_index(&m.clique_named(name).unwrap())
            .unwrap();
        assert!(
            (law.weights[i] - value.value()).abs() <= 1e-9,
            "κ({name}) = {}",
            law.weights[i]
        );
    }
    assert!((law.weights[0] - (5.0 * SQRT2 - 7.0)).abs() <= 1e-9);
}

fn transition_matrix() {
    let a = analysis();
    let chain = build_chain(&a.measure, 0).unwrap();
    let report = discrepancy_report(&a.measure, &chain, 1e-9).unwrap();
    let matching: Vec<&str> = report
        .rows
        .iter()
        .filter(|r| r.matches)
        .map(|r| r.pair.as_str())
        .collect();
    assert_eq!(
        matching,
        [
            "(M0,a)", "(M0,c)", "(M0,ad)", "(M0,ae)", "(M0,ce)", "(M1,d)", "(M1,e)", "(M1,bd)",
            "(M1,be)"
        ]
    );
    assert_eq!(report.flagged, ["(M1,b)"]);
    let b = pair_index(&a, &chain, "M1", "b");
    let c = pair_index(&a, &chain, "M0", "c");
    assert!((chain.transition(b, c) - 1.0).abs() <= 1e-9);
    let row = report.rows.iter().find(|r| r.pair == "(M1,b)").unwrap();
    assert_eq!(row.published, published_matrix()[5]);
    let pos = PUBLISHED_PAIRS
        .iter()
        .position(|p| *p == ("M0", "c"))
        .unwrap();
    assert!((row.derived[pos] - 1.0).abs() <= 1e-9);
    let confirmation = report
        .oracle
        .iter()
        .find(|o| o.pair == "(M1,b)" && o.next == "(M0,c)")
        .expect("oracle value for the flagged row");
    assert!((confirmation.oracle - 1.0).abs() <= 1e-9);
}

fn lumping() {
    let a = analysis();
    let chain = build_chain(&a.measure, 0).unwrap();
    let d = pair_index(&a, &chain, "M1", "d");
    let e = pair_index(&a, &chain, "M1", "e");
    match chain.lumping_check(2, 1e-9) {
        Lumping::NotLumpable {
            conflicts,
            aggregated,
        } => {
            assert!(conflicts.contains(&(d, e)), "{conflicts:?}");
            let first = aggregated[0].as_ref().expect("M0 rows agree");
            assert!((first[0] - (SQRT2 - 1.0)).abs() <= 1e-9);
            assert!((first[1] - (2.0 - SQRT2)).abs() <= 1e-9);
            assert!(aggregated[1].is_none());
        }
        Lumping::Lumpable { .. } => panic!("reference chain reported lumpable"),
    }
    let report = discrepancy_report(&a.measure, &chain, 1e-9).unwrap();
    assert!(report
        .published_lumping_conflicts
        .contains(&("(M1,d)".to_string(), "(M1,e)".to_string())));
}

fn inverse_identity() {
    let a = analysis();
    assert_eq!(
        check_inverse_identity(a.system(), 10).unwrap().outcome,
        Outcome::Pass
    );
    let mut nets = 0;
    for seed in 0..24u64 {
        let net = random_safe_net(seed, 6);
        assert!(net.transitions().len() <= 6);
        let graph = net.reachability_graph(DEFAULT_MAX_STATES).unwrap();
        let sys = AsyncSystem::from_net(&net, &graph, DEFAULT_MAX_CLIQUES).unwrap();
        let check = check_inverse_identity(&sys, 10).unwrap();
        assert_eq!(
            check.outcome,
            Outcome::Pass,
            "seed {seed}: {}",
            check.detail
        );
        nets += 1;
    }
    assert!(nets >= 20);
}

fn enumeration() {
    let a = analysis();
    let mut monoids: Vec<TraceMonoid> = vec![a.system().monoid().clone()];
    monoids.extend((0..12u64).map(|seed| random_monoid(100 + seed, 1 + (seed as usize % 6))));
    for m in &monoids {
        let recurrence = m.growth_coefficients(8, DEFAULT_MAX_CLIQUES).unwrap();
        let brute: Vec<BigInt> = m
            .count_traces(8, 8, DEFAULT_MAX_CLIQUES)
            .unwrap()
            .into_iter()
            .map(BigInt::from)
            .collect();
        assert_eq!(recurrence, brute, "{:?}", m.letter_names());
    }
    // every word of length k, counted up to equivalence
    for (m, max_k) in monoids
        .iter()
        .zip(std::iter::once(8).chain(std::iter::repeat(6)))
    {
        let recurrence = m.growth_coefficients(max_k, DEFAULT_MAX_CLIQUES).unwrap();
        for (k, expected) in recurrence.iter().enumerate() {
            let words = (0..k).fold(vec![Vec::new()], |acc, _| {
                acc.iter()
                    .flat_map(|w: &Vec<usize>| {
                        (0..m.size()).map(move |a| [w.as_slice(), &[a]].concat())
                    })
                    .collect()
            });
            let classes: HashSet<_> = words.iter().map(|w| m.normalize(w).unwrap()).collect();
            assert_eq!(
                BigInt::from(classes.len()),
                *expected,
                "length {k}, {:?}",
                m.letter_names()
            );
        }
    }
    let lambda: Vec<BigInt> = [1, 5, 20, 75, 275, 1000, 3625].map(BigInt::from).to_vec();
    assert_eq!(
        &a.system()
            .monoid()
            .growth_coefficients(6, DEFAULT_MAX_CLIQUES)
            .unwrap(),
        &lambda
    );
}

fn normal_form() {
    let a = analysis();
    let m = a.system().monoid();
    let expected = vec![vec!["a", "d"], vec!["b", "e"], vec!["c"]];
    assert_eq!(m.trace_names(&m.normalize_str("adebc").unwrap()), expected);
    assert_eq!(m.trace_names(&m.normalize_str("dabec").unwrap()), expected);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let len = rng.gen_range(0..=12);
        let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..m.size())).collect();
        let mut scrambled = word.clone();
        for _ in 0..3 * len {
            if len < 2 {
                break;
            }
            let i = rng.gen_range(0..len - 1);
            if m.independent(scrambled[i], scrambled[i + 1]) {
                scrambled.swap(i, i + 1);
            }
        }
        assert!(m.trace_equal(&word, &scrambled).unwrap());
        assert_eq!(
            m.normalize(&word).unwrap(),
            m.normalize(&scrambled).unwrap()
        );
        // a permutation that moves a dependent pair is a different trace
        let mut shuffled = word.clone();
        shuffled.shuffle(&mut rng);
        let same_projections = (0..m.size()).all(|x| {
            (0..m.size()).all(|y| {
                x != y && m.independent(x, y) || {
                    let p = |w: &[usize]| {
                        w.iter()
                            .filter(|&&l| l == x || l == y)
                            .copied()
                            .collect::<Vec<_>>()
                    };
                    p(&word) == p(&shuffled)
                }
            })
        });
        assert_eq!(m.trace_equal(&word, &shuffled).unwrap(), same_projections);
    }
}

fn chain_rule() {
    let a = analysis();
    let check = check_chain_rule(&a.measure, 3, 1e-12, DEFAULT_MAX_CLIQUES).unwrap();
    assert_eq!(
        check.outcome,
        Outcome::Pass,
        "max deviation {}",
        check.residual
    );
}

fn statistical_validation() {
    let start = Instant::now();
    let a = analysis();
    let chain = build_chain(&a.measure, 0).unwrap();
    let report = empirical_validation(&chain, &a.measure, 100_000, 20, 2024).unwrap();
    assert!(
        report.depth1.iter().all(|c| c.pass),
        "depth 1 max |z| {}",
        report.max_abs_z
    );
    assert!(
        report.depth2.iter().all(|c| c.pass),
        "depth 2 max |z| {}",
        report.max_abs_z
    );
    let b = report.depth1.iter().find(|c| c.prefix == ["b"]).unwrap();
    assert!((b.expected - (10.0 - 7.0 * SQRT2)).abs() <= 1e-9);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
}

fn stream(seed: u64) -> Vec<u8> {
    let a = analysis();
    let chain = build_chain(&a.measure, 0).unwrap();
    let mut out = Vec::new();
    for s in chain.sample_runs(5, 20, seed).unwrap() {
        for rec in step_records(&a, &s) {
            out.extend(serde_json::to_vec(&rec).unwrap());
            out.push(b'\n');
        }
    }
    out
}

fn reproducibility() {
    let first = stream(7);
    assert_eq!(first, stream(7));
    assert_ne!(first, stream(8));
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 11] = [
        ("reference pipeline golden values", pipeline_golden),
        ("smallest root of the Möbius polynomial", monoid_root),
        ("first-clique law at the initial marking", kappa_table),
        ("transition matrix rows and flagged row", transition_matrix),
        ("lumpability verdict and aggregated first row", lumping),
        (
            "G(z)M(z) = I on the reference and random nets",
            inverse_identity,
        ),
        (
            "brute-force trace counts against growth series",
            enumeration,
        ),
        ("normal form and scrambled words", normal_form),
        ("chain rule on traces of length at most 3", chain_rule),
        ("statistical validation at 1e5 runs", statistical_validation),
        ("byte-identical sample streams", reproducibility),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.2}s)", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
