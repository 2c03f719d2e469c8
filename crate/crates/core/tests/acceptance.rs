//! Acceptance suite: one PASS/FAIL line per criterion.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dsavoid::bounds::{self, Quantity, Real};
use dsavoid::constructors::{
    cartesian_product, cayley_abelian, cayley_involutions, complete_bipartite_pow2, hypercube, is_isomorphic_under,
    remove_standard_matchings, CayleySpec, ColoredGraph, Group,
};
use dsavoid::graph::{is_proper, swap_cycle, two_colored_cycles_through, Color};
use dsavoid::instance::InstanceFile;
use dsavoid::lists::{conflict_edges, generate_distance2, generate_sparse, ListAssignment};
use dsavoid::oracle::{oracle_avoidable, oracle_cycle_census, DEFAULT_NODE_BUDGET};
use dsavoid::ratio::{self, frac, Rational};
use dsavoid::solver::{
    apply_permutation, solve_pipeline, solve_theorem2, verify_solution, LemmaParams, SearchStrategy,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c4() -> ColoredGraph {
    complete_bipartite_pow2(1).unwrap()
}

fn census_agrees(cg: &ColoredGraph) -> bool {
    let scan = oracle_cycle_census(&cg.graph, &cg.h);
    (0..cg.graph.edge_count()).all(|e| scan[e] == two_colored_cycles_through(&cg.graph, &cg.h, e).len())
}

fn constructor_s_values() -> Outcome {
    let start = Instant::now();
    let mut checked: Vec<(String, ColoredGraph, usize)> = Vec::new();
    for d in 1..=6 {
        checked.push((format!("Q_{d}"), hypercube(d).unwrap(), d));
    }
    for t in 1..=3 {
        let d = 1usize << t;
        checked.push((format!("K_{{{d},{d}}}"), complete_bipartite_pow2(t).unwrap(), d));
    }
    let k44 = complete_bipartite_pow2(2).unwrap();
    let k88 = complete_bipartite_pow2(3).unwrap();
    for k in 1..=2 {
        checked.push((format!("K44-{k}"), remove_standard_matchings(&k44, k, None).unwrap(), 4 - k));
    }
    checked.push(("K88-3".into(), remove_standard_matchings(&k88, 3, None).unwrap(), 5));
    let q1 = hypercube(1).unwrap();
    let q3 = hypercube(3).unwrap();
    for (name, a, b) in [("C4xQ3", c4(), q3.clone()), ("C4xK44", c4(), k44.clone()), ("K44xQ1", k44.clone(), q1)] {
        let p = cartesian_product(&a, &b).unwrap();
        let expect = (a.d + b.s).min(b.d + a.s);
        ensure(p.claimed_s == Some(expect), || format!("{name}: claimed {:?}", p.claimed_s))?;
        checked.push((name.into(), p, expect));
    }

    let z2_3 = cayley_involutions(&CayleySpec {
        group: Group::CyclicProduct(vec![2, 2, 2]),
        generators: vec![1, 2, 4],
        commuting: vec![1, 2, 4],
        half_generators: vec![],
    })
    .unwrap();
    let identity_v: Vec<usize> = (0..8).collect();
    let identity_c: Vec<Color> = (0..=3).collect();
    ensure(is_isomorphic_under(&z2_3, &q3, &identity_v, &identity_c), || {
        "Cay(Z_2^3) is not the 3-cube".into()
    })?;
    checked.push(("Cay(Z2^3)".into(), z2_3, 3));
    let k4 = cayley_involutions(&CayleySpec {
        group: Group::CyclicProduct(vec![2, 2]),
        generators: vec![1, 2, 3],
        commuting: vec![1, 2, 3],
        half_generators: vec![],
    })
    .unwrap();
    ensure(k4.n() == 4 && k4.graph.edge_count() == 6, || "Cay(Z_2^2) is not K_4".into())?;
    checked.push(("Cay(Z2^2)=K4".into(), k4, 3));
    let z4 = cayley_abelian(&CayleySpec {
        group: Group::CyclicProduct(vec![4]),
        generators: vec![],
        commuting: vec![],
        half_generators: vec![1],
    })
    .unwrap();
    checked.push(("Cay(Z4)".into(), z4, 2));
    let z4z2 = cayley_abelian(&CayleySpec {
        group: Group::CyclicProduct(vec![4, 2]),
        generators: vec![],
        commuting: vec![],
        half_generators: vec![1, 4],
    })
    .unwrap();
    checked.push(("Cay(Z4xZ2)".into(), z4z2, 3));

    for (name, cg, expect) in &checked {
        ensure(cg.s == *expect, || format!("{name}: measured s = {}, expected {expect}", cg.s))?;
        ensure(census_agrees(cg), || format!("{name}: census disagrees with the 4-cycle scan"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} constructions exact, census agrees ({elapsed:.2?})", checked.len()))
}

fn inequality_suite() -> Outcome {
    let start = Instant::now();
    let mut margins = 0;
    for s in 11..=256 {
        for d in s..=256 {
            let p = bounds::default_params(d, s).map_err(|e| e.to_string())?;
            let r = bounds::lemma2_margin(d, s, &p.gamma, &p.tau, &p.epsilon).map_err(|e| e.to_string())?;
            ensure(r.satisfied, || format!("margin not positive at s={s}, d={d}"))?;
            margins += 1;
        }
    }
    let p = bounds::default_params(10, 10).unwrap();
    let r = bounds::lemma2_margin(10, 10, &p.gamma, &p.tau, &p.epsilon).unwrap();
    ensure(matches!(&r.value, Quantity::Exact(m) if *m == frac(-12890625, 100000000)), || {
        format!("margin at s=d=10 is {}", r.value)
    })?;

    let mut grid = 0;
    for log_n in [4, 8, 12, 16, 20] {
        let n = 1usize << log_n;
        for s in [11, 16, 32, 128] {
            for d in [s, 2 * s] {
                let p = bounds::default_params(d, s).unwrap();
                let beta = bounds::beta_threshold(n, d, s).unwrap();
                let r = bounds::lemma1_lhs(n, d, s, &Real::Pow2(beta), &p.gamma, &p.tau).map_err(|e| e.to_string())?;
                let term = |name| match r.component(name) {
                    Some(Quantity::Log2(l)) => l.clone(),
                    _ => unreachable!(),
                };
                ensure(term("term1").cmp_pow2(-1).is_lt(), || format!("term1 >= 1/2 at n={n}, s={s}, d={d}"))?;
                ensure(term("term2").cmp_pow2(-3).is_lt(), || format!("term2 >= 1/8 at n={n}, s={s}, d={d}"))?;
                ensure(r.satisfied, || format!("sum >= 1 at n={n}, s={s}, d={d}"))?;
                grid += 1;
            }
        }
    }
    let t = bounds::beta_threshold(16, 4, 4).unwrap();
    ensure(bounds::compare(&t, &bounds::from_int(-651)).is_eq(), || {
        format!("log2 threshold(16,4,4) = {}", bounds::bigfloat_decimal(&t))
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{margins} margins positive, s=d=10 margin exact, {grid} grid points hold, threshold(16,4,4)=2^-651 ({elapsed:.2?})"
    ))
}

fn archive(name: &str, cg: &ColoredGraph, lists: &ListAssignment) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("distance2_failures");
    fs::create_dir_all(&dir).ok();
    let path = dir.join(format!("{name}.json"));
    let mut file = InstanceFile::from_colored(cg);
    file.set_lists(lists);
    file.save(&path).ok();
    path
}

fn theorem2_end_to_end() -> Outcome {
    let start = Instant::now();
    let graphs = [
        ("Q3", hypercube(3).unwrap()),
        ("Q4", hypercube(4).unwrap()),
        ("K44", complete_bipartite_pow2(2).unwrap()),
        ("K88", complete_bipartite_pow2(3).unwrap()),
    ];
    let (mut conflicts, mut relabeled) = (0, 0);
    for (name, cg) in &graphs {
        for seed in 0..100 {
            let lists = generate_distance2(cg, seed, cg.s - 1).map_err(|e| e.to_string())?;
            conflicts += conflict_edges(&cg.graph, &cg.h, &lists).len();
            let ok = match solve_theorem2(cg, &lists) {
                Ok(sol) => {
                    relabeled += usize::from(!sol.permutation.is_identity());
                    verify_solution(cg, &sol.coloring, &lists)
                }
                Err(_) => false,
            };
            if !ok {
                let path = archive(&format!("{name}_seed{seed}"), cg, &lists);
                return Err(format!("{name} seed {seed} failed; archived at {}", path.display()));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "400/400 solved and verified, {conflicts} conflicts resolved, {relabeled} needed a relabeling ({elapsed:.2?})"
    ))
}

fn random_lists(cg: &ColoredGraph, rng: &mut ChaCha8Rng, density: f64) -> ListAssignment {
    let palette: Vec<Color> = (1..=cg.d as Color).collect();
    let mut l = ListAssignment::new();
    for e in 0..cg.graph.edge_count() {
        if rng.random_bool(density) {
            let size = rng.random_range(1..=2.min(cg.d));
            l.set(e, palette.choose_multiple(rng, size).copied());
        }
    }
    l
}

fn oracle_equivalence() -> Outcome {
    let q3 = hypercube(3).unwrap();
    let k44 = complete_bipartite_pow2(2).unwrap();
    let (mut infeasible, mut solver_wins, mut witnesses) = (0, 0, 0);
    for i in 0..50u64 {
        let (cg, gamma, eps) = if i % 2 == 0 {
            (&q3, frac(1, 3), frac(2, 3))
        } else {
            (&k44, frac(1, 4), frac(1, 2))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let density = [0.1, 0.25, 0.5, 0.75, 1.0][(i / 2 % 5) as usize];
        let lists = random_lists(cg, &mut rng, density);
        let oracle = oracle_avoidable(&cg.graph, cg.d, &lists, DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
        if let Some(w) = &oracle.witness {
            ensure(verify_solution(cg, w, &lists), || format!("instance {i}: oracle witness fails verification"))?;
            witnesses += 1;
        } else {
            infeasible += 1;
        }
        let p = LemmaParams::new(cg.d, cg.s, ratio::int(0), gamma, frac(1, 2), eps).unwrap();
        let mut successes = Vec::new();
        if let Ok(sol) = solve_theorem2(cg, &lists) {
            successes.push(sol.coloring);
        }
        if let Ok(sol) = solve_pipeline(cg, &lists, &p, SearchStrategy::exhaustive()) {
            successes.push(sol.coloring);
        }
        for f in &successes {
            ensure(verify_solution(cg, f, &lists), || format!("instance {i}: solver output fails verification"))?;
            ensure(oracle.avoidable, || format!("instance {i}: solver succeeded where the oracle says infeasible"))?;
            solver_wins += 1;
        }
    }
    Ok(format!(
        "50 instances: {witnesses} avoidable (witnesses verified), {infeasible} infeasible, {solver_wins} solver successes all consistent"
    ))
}

fn pswap_properties() -> Outcome {
    let families: [(&str, ColoredGraph, Rational, Rational); 3] = [
        ("Q4", hypercube(4).unwrap(), frac(1, 2), frac(3, 4)),
        ("Q6", hypercube(6).unwrap(), frac(1, 3), frac(2, 3)),
        ("K88", complete_bipartite_pow2(3).unwrap(), frac(1, 4), frac(1, 2)),
    ];
    let tau = frac(1, 2);
    let mut per_family = vec![(0usize, 0usize); 3];
    for i in 0..200u64 {
        let fi = (i % 3) as usize;
        let (_, cg, gamma, eps) = &families[fi];
        let beta = frac(1, cg.s as i64);
        let lists = generate_sparse(cg, &beta, i);
        let p = LemmaParams::new(cg.d, cg.s, beta, gamma.clone(), tau.clone(), eps.clone()).unwrap();
        per_family[fi].1 += 1;
        let Ok(sol) = solve_pipeline(cg, &lists, &p, SearchStrategy::Random { trials: 2000, seed: i }) else {
            continue;
        };
        per_family[fi].0 += 1;
        let plan = &sol.plan;
        let hprime = apply_permutation(&cg.h, &sol.permutation.rho);
        let conflicts = conflict_edges(&cg.graph, &hprime, &lists);
        ensure(plan.is_edge_disjoint(), || format!("instance {i}: cycles share an edge"))?;
        ensure(plan.selections.len() == conflicts.len(), || {
            format!("instance {i}: {} cycles for {} conflicts", plan.selections.len(), conflicts.len())
        })?;
        for sel in &plan.selections {
            let on_cycle = sel.cycle.edges.iter().filter(|e| conflicts.contains(e)).count();
            ensure(on_cycle == 1 && conflicts.contains(&sel.cycle.edges[0]), || {
                format!("instance {i}: a cycle holds {on_cycle} conflict edges")
            })?;
        }
        let cap = p.vertex_used_cap();
        let worst = plan.vertex_used.iter().copied().max().unwrap_or(0);
        ensure(ratio::count_le(worst, &cap), || {
            format!("instance {i}: vertex carries {worst} used edges, cap {}", ratio::format(&cap))
        })?;
        ensure(is_proper(&cg.graph, &sol.coloring).unwrap(), || format!("instance {i}: output improper"))?;
        ensure(verify_solution(cg, &sol.coloring, &lists), || format!("instance {i}: output has a conflict"))?;
    }
    let rates: Vec<String> = families
        .iter()
        .zip(&per_family)
        .map(|((name, ..), (ok, total))| format!("{name} {ok}/{total}"))
        .collect();
    Ok(format!("invariants hold on every success; success rates {}", rates.join(", ")))
}

fn swap_algebra() -> Outcome {
    let k44 = complete_bipartite_pow2(2).unwrap();
    let families = [
        hypercube(3).unwrap(),
        hypercube(4).unwrap(),
        k44.clone(),
        complete_bipartite_pow2(3).unwrap(),
        cartesian_product(&c4(), &hypercube(3).unwrap()).unwrap(),
        remove_standard_matchings(&k44, 1, None).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut current: Vec<_> = families.iter().map(|cg| cg.h.clone()).collect();
    let (mut step, mut attempts) = (0, 0);
    while step < 10_000 {
        attempts += 1;
        let fi = attempts % families.len();
        let cg = &families[fi];
        let f = &current[fi];
        // after earlier swaps an edge may lie on no 2-colored 4-cycle; draw again
        let e = rng.random_range(0..cg.graph.edge_count());
        let cycles = two_colored_cycles_through(&cg.graph, f, e);
        let Some(c) = cycles.choose(&mut rng) else {
            continue;
        };
        let g = swap_cycle(f, c).map_err(|err| err.to_string())?;
        ensure(is_proper(&cg.graph, &g).unwrap(), || format!("step {step}: swap broke properness"))?;
        for v in 0..cg.n() {
            ensure(f.vertex_color_set(&cg.graph, v) == g.vertex_color_set(&cg.graph, v), || {
                format!("step {step}: color set changed at vertex {v}")
            })?;
        }
        let back = swap_cycle(&g, &c.swapped()).map_err(|err| err.to_string())?;
        ensure(back == *f, || format!("step {step}: double swap is not the identity"))?;
        current[fi] = g;
        step += 1;
    }
    Ok("10000 swaps preserve properness and vertex color sets; double swaps are identities".into())
}

fn cayley_discrepancy() -> Outcome {
    let z6 = cayley_abelian(&CayleySpec {
        group: Group::CyclicProduct(vec![6]),
        generators: vec![],
        commuting: vec![],
        half_generators: vec![1],
    })
    .map_err(|e| e.to_string())?;
    ensure(z6.s == 1, || format!("measured s = {}", z6.s))?;
    ensure(z6.claimed_s == Some(2), || format!("claimed s = {:?}", z6.claimed_s))?;
    ensure(z6.discrepancy(), || "discrepancy not flagged".into())?;
    Ok("Cay(Z6) measured s=1, claimed 2, flagged".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("constructor s-values", constructor_s_values),
        ("inequality suite", inequality_suite),
        ("distance-2 solver end-to-end", theorem2_end_to_end),
        ("oracle equivalence", oracle_equivalence),
        ("P-swap properties", pswap_properties),
        ("swap algebra", swap_algebra),
        ("Cayley discrepancy regression", cayley_discrepancy),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
