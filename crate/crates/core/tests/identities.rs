//! Cross-module identities: subdivision algebra against matrix algebra,
//! eigenvalue laws under powers and entrywise domination, and the
//! geometric exactness properties of planar similarities.

use cantor_core::*;
use proptest::prelude::*;

fn bundled_irreducible() -> Vec<(&'static str, CloneStructure)> {
    gallery::all_bundled()
        .into_iter()
        .filter(|(n, _)| *n != "reducible")
        .collect()
}

#[test]
fn d_quantity_is_additive_over_disjoint_splits() {
    let s = gallery::two_model();
    let level3 = s.subdivide(&s.model_roots(), 3).unwrap();
    let d = 0.7;
    let whole = s.d_quantity(&level3, d).unwrap();
    let (left, right) = level3.split_at(level3.len() / 3);
    let a = s.d_quantity(left, d).unwrap();
    let b = s.d_quantity(right, d).unwrap();
    for i in 0..2 {
        let sum = a.components[i] + b.components[i];
        assert!((whole.components[i] - sum).abs() <= 1e-12 * whole.components[i].max(1.0));
    }
}

#[test]
fn subdivision_matches_matrix_action_on_nontrivial_collections() {
    // start from a mixed-depth disjoint collection rather than roots
    let s = gallery::two_model();
    let coll = vec![
        CloneAddress {
            model: TypeId(1),
            word: vec![1, 1],
        },
        CloneAddress {
            model: TypeId(1),
            word: vec![2],
        },
        CloneAddress {
            model: TypeId(2),
            word: vec![4, 3],
        },
    ];
    let sym = build_matrix_symbolic(&s).unwrap();
    let v0 = s.d_quantity_exact(&coll).unwrap();
    for k in 0..=8 {
        let refined = s.subdivide(&coll, k).unwrap();
        let lhs = s.d_quantity_exact(&refined).unwrap();
        let rhs = sym.pow(k).mul_vec(&v0);
        assert_eq!(lhs, rhs, "k = {k}");
    }
}

#[test]
fn eigenvalues_of_matrix_powers_are_powers() {
    for (name, s) in [
        ("two_model", gallery::two_model()),
        ("planar", gallery::planar_three_model()),
    ] {
        let m = build_matrix(&s, 0.45).unwrap();
        let lambda = frobenius(&m).unwrap().eigenvalue;
        for k in 1..=6 {
            let lk = frobenius(&m.pow(k)).unwrap().eigenvalue;
            assert!(
                (lk - lambda.powi(k as i32)).abs() <= 1e-10 * lambda.powi(k as i32),
                "{name}: k = {k}: {lk} vs {}",
                lambda.powi(k as i32)
            );
        }
    }
}

#[test]
fn entrywise_domination_orders_eigenvalues() {
    let s = gallery::two_model();
    let grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2];
    for w in grid.windows(2) {
        let (d_small, d_big) = (w[0], w[1]);
        let a = build_matrix(&s, d_big).unwrap();
        let b = build_matrix(&s, d_small).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(b.at(i, j) > a.at(i, j));
            }
        }
        let la = frobenius(&a).unwrap().eigenvalue;
        let lb = frobenius(&b).unwrap().eigenvalue;
        assert!(lb > la);
    }
}

#[test]
fn eigenvector_components_stay_positive() {
    for (name, s) in bundled_irreducible() {
        for d in [0.0, 0.35, 0.9] {
            let fro = frobenius(&build_matrix(&s, d).unwrap()).unwrap();
            let min_r = fro
                .right_eigenvector
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let min_l = fro
                .left_eigenvector
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_r > 0.0 && min_l > 0.0, "{name} at d = {d}");
        }
    }
}

#[test]
fn power_limit_matches_repeated_squaring() {
    let s = gallery::two_model();
    let dstar = solve_dimension(&s, 1e-13).unwrap().dimension;
    let m = build_matrix(&s, dstar).unwrap();
    let limit = power_limit(&m).unwrap();
    let m64 = m.pow(64);
    for (i, row) in limit.iter().enumerate() {
        for (j, &lij) in row.iter().enumerate() {
            assert!(
                (lij - m64.at(i, j)).abs() < 1e-9,
                "({i},{j}): {lij} vs {}",
                m64.at(i, j)
            );
        }
    }
    // middle third: the 1x1 limit is exactly [1]
    let mt = gallery::middle_third();
    let d = solve_dimension(&mt, 1e-13).unwrap().dimension;
    let lim = power_limit(&build_matrix(&mt, d).unwrap()).unwrap();
    assert!((lim[0][0] - 1.0).abs() < 1e-10);
}

#[test]
fn uniform_power_bound_is_finite_and_at_least_one() {
    let s = gallery::two_model();
    let dstar = solve_dimension(&s, 1e-13).unwrap().dimension;
    let q = uniform_power_bound(&build_matrix(&s, dstar).unwrap()).unwrap();
    assert!(q >= 1.0 && q.is_finite());

    let mt = gallery::middle_third();
    let d = solve_dimension(&mt, 1e-13).unwrap().dimension;
    let q = uniform_power_bound(&build_matrix(&mt, d).unwrap()).unwrap();
    assert!((q - 1.0).abs() < 1e-9);
}

#[test]
fn bundled_configs_match_the_gallery() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (name, s) in gallery::all_bundled() {
        let path = dir.join(format!("{name}.json"));
        let parsed = io::read_structure(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(
            serde_json::to_value(&parsed).unwrap(),
            serde_json::to_value(&s).unwrap(),
            "config file {name}.json drifted from the built-in gallery"
        );
    }
}

proptest! {
    #[test]
    fn planar_similarities_scale_distances_exactly(
        scale in 0.05f64..0.95,
        rotation in -3.2f64..3.2,
        reflect in any::<bool>(),
        tx in -5.0f64..5.0,
        ty in -5.0f64..5.0,
        px in -3.0f64..3.0,
        py in -3.0f64..3.0,
        qx in -3.0f64..3.0,
        qy in -3.0f64..3.0,
    ) {
        let f = PlanarSimilarity { scale, rotation, reflect, translation: [tx, ty] };
        let (p, q) = ([px, py], [qx, qy]);
        let d0 = ((p[0]-q[0]).powi(2) + (p[1]-q[1]).powi(2)).sqrt();
        let (fp, fq) = (f.apply(p), f.apply(q));
        let d1 = ((fp[0]-fq[0]).powi(2) + (fp[1]-fq[1]).powi(2)).sqrt();
        prop_assert!((d1 - scale * d0).abs() <= 1e-12 * d0.max(1.0));
    }

    #[test]
    fn composed_placements_scale_by_the_cumulative_factor(
        word_seed in proptest::collection::vec(0usize..5, 1..6),
        px in -0.4f64..0.4,
        py in -0.4f64..0.4,
        qx in -0.4f64..0.4,
        qy in -0.4f64..0.4,
    ) {
        let s = gallery::two_model();
        let e = EmbeddedRealization::new(s.clone()).unwrap();
        // random admissible word: at each step pick among the clones of
        // the current type
        let mut addr = CloneAddress::root(TypeId(1));
        let mut t = TypeId(1);
        for pick in word_seed {
            let options = s.clones_in_model(t);
            let id = options[pick % options.len()];
            addr.word.push(id);
            t = s.clone_spec(id).unwrap().target;
        }
        let f = e.composed_placement(&addr).unwrap();
        let cum = s.cumulative_inverse_scale(&addr).unwrap();
        prop_assert!((f.scale - cum).abs() <= 1e-12 * cum);
        let (p, q) = ([px, py], [qx, qy]);
        let d0 = ((p[0]-q[0]).powi(2) + (p[1]-q[1]).powi(2)).sqrt();
        let (fp, fq) = (f.apply(p), f.apply(q));
        let d1 = ((fp[0]-fq[0]).powi(2) + (fp[1]-fq[1]).powi(2)).sqrt();
        prop_assert!((d1 - cum * d0).abs() <= 1e-12 * d0.max(1.0));
    }

    #[test]
    fn random_disjoint_collections_satisfy_the_subdivision_identity(
        picks in proptest::collection::vec((0usize..8, 0usize..4), 1..5),
        k in 0usize..4,
    ) {
        let s = gallery::two_model();
        // build a disjoint collection by greedy nesting rejection
        let mut coll: Vec<CloneAddress> = Vec::new();
        for (seed, depth) in picks {
            let model = TypeId(1 + seed % 2);
            let mut addr = CloneAddress::root(model);
            let mut t = model;
            for step in 0..depth {
                let options = s.clones_in_model(t);
                let id = options[(seed + step) % options.len()];
                addr.word.push(id);
                t = s.clone_spec(id).unwrap().target;
            }
            if !coll.iter().any(|existing| existing.nested_with(&addr)) {
                coll.push(addr);
            }
        }
        prop_assume!(!coll.is_empty());

        let sym = build_matrix_symbolic(&s).unwrap();
        let v0 = s.d_quantity_exact(&coll).unwrap();
        let refined = s.subdivide(&coll, k).unwrap();
        prop_assert_eq!(s.d_quantity_exact(&refined).unwrap(), sym.pow(k).mul_vec(&v0));

        // float flavor at a concrete exponent
        let d = 0.61;
        let lhs = s.d_quantity(&refined, d).unwrap();
        let m = build_matrix(&s, d).unwrap();
        let mut rhs = s.d_quantity(&coll, d).unwrap().components;
        for _ in 0..k {
            rhs = m.mul_vec(&rhs);
        }
        for (a, b) in lhs.components.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-12));
        }
    }
}

/// The disc-tree search must return exactly the brute-force minima and
/// maxima over sample points.
#[test]
fn separation_tree_agrees_with_brute_force() {
    let s = gallery::two_model();
    let e = EmbeddedRealization::new(s.clone()).unwrap();
    let level = 7;
    let samples = e.sample_points(level).unwrap();
    let report = e.separation_report_with(level, 3).unwrap();

    let dist = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let under = |addr: &CloneAddress, candidate: &CloneAddress| {
        addr.model == candidate.model && candidate.word.starts_with(&addr.word)
    };

    for row in &report.clones {
        let inside: Vec<[f64; 2]> = samples
            .points
            .iter()
            .filter(|(a, _)| under(&row.address, a))
            .map(|(_, p)| *p)
            .collect();
        let outside: Vec<[f64; 2]> = samples
            .points
            .iter()
            .filter(|(a, _)| !under(&row.address, a))
            .map(|(_, p)| *p)
            .collect();

        let mut brute_sep = f64::INFINITY;
        for p in &inside {
            for q in &outside {
                brute_sep = brute_sep.min(dist(*p, *q));
            }
        }
        let mut brute_diam: f64 = 0.0;
        for (i, p) in inside.iter().enumerate() {
            for q in &inside[i..] {
                brute_diam = brute_diam.max(dist(*p, *q));
            }
        }
        if brute_sep.is_finite() {
            assert!(
                (row.separation - brute_sep).abs() <= 1e-12 * brute_sep.max(1e-12),
                "{}: sep {} vs brute {brute_sep}",
                row.address,
                row.separation
            );
        } else {
            assert!(row.separation.is_infinite());
        }
        assert!(
            (row.diameter - brute_diam).abs() <= 1e-12 * brute_diam.max(1e-12),
            "{}: diam {} vs brute {brute_diam}",
            row.address,
            row.diameter
        );
    }
}

/// The preorder antichain enumeration must reproduce a naive
/// filter-all-subsets enumeration on small caps.
#[test]
fn clopen_enumeration_agrees_with_naive_subsets() {
    use cantor_core::invariants::clopen_invariant;
    use cantor_core::measure::SolvedStructure;

    for (s, base, level_cap, union_cap) in [
        (gallery::middle_third(), 1usize, 3usize, 3usize),
        (gallery::two_model(), 2, 2, 2),
    ] {
        let solved = SolvedStructure::solve_default(&s).unwrap();
        let tci = clopen_invariant(&solved, TypeId(base), level_cap, union_cap).unwrap();

        // all clones of level <= cap under the base model
        let mut clones = vec![CloneAddress::root(TypeId(base))];
        let mut frontier = clones.clone();
        for _ in 0..level_cap {
            frontier = frontier
                .iter()
                .flat_map(|a| s.children(a).unwrap())
                .collect();
            clones.extend(frontier.clone());
        }

        // naive: every subset of size <= union_cap, kept when disjoint
        let mut naive: Vec<f64> = Vec::new();
        let n = clones.len();
        for mask in 1u64..(1 << n) {
            if (mask.count_ones() as usize) > union_cap {
                continue;
            }
            let chosen: Vec<&CloneAddress> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| &clones[i])
                .collect();
            let disjoint = chosen
                .iter()
                .enumerate()
                .all(|(i, a)| chosen[i + 1..].iter().all(|b| !a.nested_with(b)));
            if disjoint {
                naive.push(
                    chosen
                        .iter()
                        .map(|a| solved.clone_measure(a).unwrap())
                        .sum(),
                );
            }
        }
        naive.sort_by(f64::total_cmp);
        naive.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * y.abs());

        assert_eq!(tci.values.len(), naive.len(), "value count mismatch");
        for (a, b) in tci.values.iter().zip(&naive) {
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
        }
    }
}

/// Composed placements of a powered structure still form a valid
/// embedding.
#[test]
fn powered_structure_keeps_a_valid_embedding() {
    let s = gallery::two_model();
    for k in 1..=3 {
        let powered = power_structure(&s, k).unwrap();
        let e = EmbeddedRealization::new(powered).unwrap();
        let report = e.validate();
        assert!(report.is_valid(), "k = {k}: {:?}", report.violations);
    }
}

/// Box counting on the embedded realizations agrees with the spectral
/// dimension — two entirely different routes to the same exponent.
#[test]
fn box_counting_agrees_with_the_spectral_dimension() {
    for (name, s) in [
        ("two_model", gallery::two_model()),
        ("planar", gallery::planar_three_model()),
    ] {
        let dstar = solve_dimension(&s, 1e-12).unwrap().dimension;
        let e = EmbeddedRealization::new(s).unwrap();
        let scales: Vec<f64> = (2..=10).map(|j| 0.5f64.powi(j)).collect();
        let result = e.box_counting_dimension(10, &scales).unwrap();
        assert!(!result.degenerate);
        assert!(
            (result.estimate - dstar).abs() <= 0.08,
            "{name}: box estimate {} vs dimension {dstar}",
            result.estimate
        );
    }
}
