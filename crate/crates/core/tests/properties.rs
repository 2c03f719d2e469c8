use proptest::prelude::*;

use dsavoid::bounds;
use dsavoid::constructors::{cartesian_product, complete_bipartite_pow2, hypercube, remove_standard_matchings, ColoredGraph};
use dsavoid::graph::{is_proper, swap_cycle, two_colored_cycles_through, EdgeColoring};
use dsavoid::instance::InstanceFile;
use dsavoid::lists::{generate_distance2, generate_sparse, validate_beta_sparse};
use dsavoid::oracle::{oracle_avoidable, oracle_cycle_census, DEFAULT_NODE_BUDGET};
use dsavoid::ratio::{self, frac};
use dsavoid::solver::{apply_permutation, random_trial, solve_theorem2, verify_solution};

fn family(i: usize) -> ColoredGraph {
    match i % 6 {
        0 => hypercube(3).unwrap(),
        1 => hypercube(4).unwrap(),
        2 => complete_bipartite_pow2(2).unwrap(),
        3 => complete_bipartite_pow2(3).unwrap(),
        4 => remove_standard_matchings(&complete_bipartite_pow2(2).unwrap(), 1, None).unwrap(),
        _ => cartesian_product(&complete_bipartite_pow2(1).unwrap(), &hypercube(2).unwrap()).unwrap(),
    }
}

/// Applies a pseudo-random walk of swaps driven by `picks`.
fn walk(cg: &ColoredGraph, picks: &[(usize, usize)]) -> EdgeColoring {
    let mut f = cg.h.clone();
    for &(e, k) in picks {
        let e = e % cg.graph.edge_count();
        let cycles = two_colored_cycles_through(&cg.graph, &f, e);
        if !cycles.is_empty() {
            f = swap_cycle(&f, &cycles[k % cycles.len()]).unwrap();
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swaps_keep_colorings_proper(fi in 0usize..6, picks in prop::collection::vec((0usize..200, 0usize..8), 0..30)) {
        let cg = family(fi);
        let f = walk(&cg, &picks);
        prop_assert!(is_proper(&cg.graph, &f).unwrap());
        for v in 0..cg.n() {
            prop_assert_eq!(f.vertex_color_set(&cg.graph, v).colors, cg.h.vertex_color_set(&cg.graph, v).colors);
        }
    }

    #[test]
    fn census_matches_scan_after_swaps(fi in 0usize..6, picks in prop::collection::vec((0usize..200, 0usize..8), 0..20)) {
        let cg = family(fi);
        let f = walk(&cg, &picks);
        let scan = oracle_cycle_census(&cg.graph, &f);
        for e in 0..cg.graph.edge_count() {
            prop_assert_eq!(scan[e], two_colored_cycles_through(&cg.graph, &f, e).len());
        }
    }

    #[test]
    fn generated_sparse_lists_validate_and_stay_valid_for_larger_beta(
        fi in 0usize..6, num in 0i64..8, extra in 0i64..4, seed in 0u64..1000,
    ) {
        let cg = family(fi);
        let beta = frac(num, 4 * cg.s as i64);
        let lists = generate_sparse(&cg, &beta, seed);
        prop_assert!(validate_beta_sparse(&cg, &lists, &beta).unwrap().ok);
        let larger = &beta + frac(extra, 4 * cg.s as i64);
        prop_assert!(validate_beta_sparse(&cg, &lists, &larger).unwrap().ok);
    }

    #[test]
    fn distance2_lists_are_solved_and_agree_with_oracle(fi in 0usize..5, seed in 0u64..10_000) {
        let cg = family(fi);
        let lists = generate_distance2(&cg, seed, cg.s - 1).unwrap();
        prop_assert!(cg.graph.is_distance_t_matching(&lists.support(), 2));
        prop_assert!(lists.max_list_len() < cg.s);
        let sol = solve_theorem2(&cg, &lists).unwrap();
        prop_assert!(verify_solution(&cg, &sol.coloring, &lists));
        if cg.graph.edge_count() <= 32 {
            let oracle = oracle_avoidable(&cg.graph, cg.d, &lists, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert!(oracle.avoidable);
        }
    }

    #[test]
    fn permutations_invert(d in 1usize..10, seed in 0u64..1000, k in 1usize..50) {
        let rho = random_trial(d, seed, k);
        let h = EdgeColoring::new((1..=d as u32).collect(), d);
        prop_assert_eq!(apply_permutation(&apply_permutation(&h, &rho), &rho.inverse()), h);
    }

    #[test]
    fn rationals_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = frac(p, q);
        prop_assert_eq!(ratio::parse(&ratio::format(&r)).unwrap(), r);
    }

    #[test]
    fn threshold_grows_with_s(n in 1usize..100_000, d in 2usize..64, s in 1usize..63) {
        prop_assume!(s < d);
        let a = bounds::beta_threshold(n, d, s).unwrap();
        let b = bounds::beta_threshold(n, d, s + 1).unwrap();
        prop_assert!(bounds::compare(&a, &b).is_lt());
    }

    #[test]
    fn margin_decreases_in_tau(d in 11usize..100, s in 11usize..100, t in 1i64..64) {
        prop_assume!(s <= d);
        let p = bounds::default_params(d, s).unwrap();
        let lo = bounds::lemma2_margin(d, s, &p.gamma, &frac(t, 128), &p.epsilon).unwrap();
        let hi = bounds::lemma2_margin(d, s, &p.gamma, &frac(t + 1, 128), &p.epsilon).unwrap();
        let (bounds::Quantity::Exact(a), bounds::Quantity::Exact(b)) = (lo.value, hi.value) else { unreachable!() };
        prop_assert!(b < a);
    }

    #[test]
    fn instances_round_trip(fi in 0usize..6, seed in 0u64..100) {
        let cg = family(fi);
        let mut file = InstanceFile::from_colored(&cg);
        file.set_lists(&generate_sparse(&cg, &frac(1, cg.s as i64), seed));
        let text = file.to_json().unwrap();
        let back = InstanceFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &file);
        let cg2 = back.colored_graph().unwrap();
        prop_assert_eq!(cg2.s, cg.s);
        prop_assert_eq!(cg2.h, cg.h);
    }
}
