//! Property tests of the structural invariants across all modules.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use proptest::prelude::*;
use spinstrata::algebra::{
    format_rational, int, lagrange_interpolate, parse_rational, rat, RatMatrix, Rational,
    SolveOutcome, UniPoly, solve_rational_system,
};
use spinstrata::correlator::psi_correlator;
use spinstrata::graph::{enumerate_gamma_structures, enumerate_one_edge_graphs, HalfEdge, StableGraph};
use spinstrata::level::{enumerate_two_level_graphs, simple_star_graphs, Signature};
use spinstrata::pixton::{
    admissible_weightings, dr_cycle, permute_legs, spin_dr_cycle, RamificationVector,
};
use spinstrata::recursion::{
    clutching_pullback, graph_ambient, one_edge_graphs, plain_stratum_class,
    pullback_contributions, pullback_fingerprint, reconstruct, spin_stratum_class, Variant,
};
use spinstrata::spin_comb::{
    arf_parity, build_adapted_spanning_tree, delta_adapted_basis, ProngMatching,
    TurningAssignment,
};
use spinstrata::taut::{
    complementary_probes, numerically_equal, product_probes, stable_graphs_cached, Ambient,
    DecoratedClass,
};

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn costly() -> ProptestConfig {
    ProptestConfig::with_cases(8)
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
}

/// Even-type signatures on genus 1 with two or three points.
fn even_genus_one() -> impl Strategy<Value = Vec<i64>> {
    prop_oneof![
        (1i64..=3).prop_map(|m| vec![2 * m, -2 * m]),
        (1i64..=2, 1i64..=2).prop_map(|(a, b)| vec![2 * (a + b), -2 * a, -2 * b]),
    ]
}

/// Genus-1 signatures of sum zero with two or three points.
fn genus_one() -> impl Strategy<Value = Vec<i64>> {
    prop_oneof![
        (1i64..=4).prop_map(|m| vec![m, -m]),
        (1i64..=3, 1i64..=3).prop_map(|(a, b)| vec![a + b, -a, -b]),
    ]
}

/// Signatures whose two-level graphs are enumerated in the level tests.
fn level_signature() -> impl Strategy<Value = (u32, Vec<i64>)> {
    prop_oneof![
        Just((1, vec![4, -2, -2])),
        Just((1, vec![3, -1, -2])),
        Just((1, vec![2, 0, -2])),
        Just((1, vec![0, 0])),
        Just((2, vec![2])),
        Just((2, vec![1, 1])),
        Just((2, vec![4, -2])),
        Just((0, vec![2, -2, -2])),
        Just((0, vec![3, -1, -2, -2])),
    ]
}

fn two_level_graphs(g: u32, mu: &[i64]) -> Vec<spinstrata::level::LevelGraph> {
    let s = Signature::abelian(g, mu.to_vec()).unwrap().stratum();
    enumerate_two_level_graphs(&s).unwrap()
}

fn parity_vectors(genera: &[u32]) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for &h in genera {
        let choices: &[u8] = if h == 0 { &[0] } else { &[0, 1] };
        out = out
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Renames every internal half-edge of `g` to a fresh label, in an order
/// given by `seed`.
fn relabel_internal(g: &StableGraph, seed: usize) -> StableGraph {
    let legs: BTreeSet<HalfEdge> = g.markings().into_iter().collect();
    let mut internal: Vec<HalfEdge> = g
        .half_edges()
        .iter()
        .flatten()
        .copied()
        .filter(|h| !legs.contains(h))
        .collect();
    let len = internal.len().max(1);
    internal.rotate_left(seed % len);
    if seed % 2 == 1 {
        internal.reverse();
    }
    let fresh = 500;
    let map: HashMap<HalfEdge, HalfEdge> = internal
        .iter()
        .enumerate()
        .map(|(i, &h)| (h, fresh + i as HalfEdge))
        .collect();
    g.relabel(&map)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn interpolation_recovers_polynomials(
        coeffs in prop::collection::vec(small_rational(), 0..6),
        xs in prop::collection::btree_set(-20i64..20, 6..9),
    ) {
        let p = UniPoly::from_coeffs(coeffs);
        let n = p.degree().map_or(1, |d| d + 1);
        let points: Vec<(Rational, Rational)> = xs
            .iter()
            .take(n)
            .map(|&x| (int(x), p.eval(&int(x))))
            .collect();
        prop_assert_eq!(lagrange_interpolate(&points).unwrap(), p);
    }

    #[test]
    fn solving_inverts_multiplication(
        rows in 1usize..5,
        cols in 1usize..5,
        entries in prop::collection::vec(-3i64..4, 25),
        x in prop::collection::vec(small_rational(), 5),
    ) {
        let grid: Vec<Vec<Rational>> = (0..rows)
            .map(|i| (0..cols).map(|j| int(entries[i * 5 + j])).collect())
            .collect();
        let a = RatMatrix::from_rows(grid).unwrap();
        let x = &x[..cols];
        let b = a.mul_vec(x).unwrap();
        match solve_rational_system(&a, &b).unwrap() {
            SolveOutcome::Unique(y) => prop_assert_eq!(&y[..], x),
            SolveOutcome::NonUnique { particular, kernel } => {
                prop_assert_eq!(a.mul_vec(&particular).unwrap(), b);
                prop_assert_eq!(kernel.len(), cols - a.rank());
                for k in kernel {
                    prop_assert!(a.mul_vec(&k).unwrap().iter().all(Zero::is_zero));
                }
            }
            SolveOutcome::Inconsistent => prop_assert!(false, "consistent system reported inconsistent"),
        }
    }

    #[test]
    fn rationals_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
        let q = rat(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }

    #[test]
    fn enumerated_graphs_have_the_right_genus(g in 0u32..3, n in 0u32..4) {
        prop_assume!(2 * g + n >= 3);
        let legs: Vec<HalfEdge> = (1..=n).collect();
        for gr in stable_graphs_cached(g, &legs, 3).iter() {
            prop_assert_eq!(gr.genus(), g);
            prop_assert!(gr.is_connected());
        }
        if let Ok(one) = enumerate_one_edge_graphs(g, n) {
            let all: BTreeSet<String> = stable_graphs_cached(g, &legs, 1)
                .iter()
                .filter(|x| x.num_edges() == 1)
                .map(StableGraph::canonical_key)
                .collect();
            let got: BTreeSet<String> = one.iter().map(StableGraph::canonical_key).collect();
            prop_assert_eq!(got, all);
        }
    }

    #[test]
    fn automorphisms_and_structures_ignore_internal_labels(
        g in 0u32..3,
        n in 1u32..4,
        pick in any::<prop::sample::Index>(),
        seed in 0usize..16,
    ) {
        prop_assume!(2 * g + n >= 3);
        let legs: Vec<HalfEdge> = (1..=n).collect();
        let graphs = stable_graphs_cached(g, &legs, 3);
        let delta = &graphs[pick.index(graphs.len())];
        let moved = relabel_internal(delta, seed);
        prop_assert_eq!(moved.automorphism_order(), delta.automorphism_order());
        prop_assert_eq!(moved.canonical_key(), delta.canonical_key());
        for gamma in one_edge_graphs(g, &legs) {
            prop_assert_eq!(
                enumerate_gamma_structures(&moved, &gamma).len(),
                enumerate_gamma_structures(delta, &gamma).len()
            );
        }
    }

    #[test]
    fn two_level_graphs_balance_orders((g, mu) in level_signature()) {
        for lg in two_level_graphs(g, &mu) {
            for (v, hs) in lg.graph.half_edges().iter().enumerate() {
                let total: i64 = hs.iter().map(|h| lg.orders[h]).sum();
                prop_assert_eq!(total, lg.k * (2 * lg.graph.genera()[v] as i64 - 2));
            }
            let kappas = lg.kappas();
            if !kappas.is_empty() {
                prop_assert_eq!(
                    lg.prong_class_count().unwrap() * lg.ell().unwrap(),
                    kappas.iter().product::<i64>()
                );
            }
        }
    }

    #[test]
    fn odd_star_graphs_are_the_all_odd_ones((g, mu) in level_signature()) {
        let sig = Signature::abelian(g, mu).unwrap();
        let all = simple_star_graphs(&sig, false).unwrap();
        let odd = simple_star_graphs(&sig, true).unwrap();
        let filtered: BTreeSet<String> = all
            .iter()
            .filter(|lg| lg.kappas().iter().all(|k| k % 2 == 1))
            .map(|lg| lg.canonical_key())
            .collect();
        let got: BTreeSet<String> = odd.iter().map(|lg| lg.canonical_key()).collect();
        prop_assert_eq!(got, filtered);
    }

    #[test]
    fn adapted_bases_span_the_cycle_space((g, mu) in level_signature()) {
        prop_assume!(Signature::abelian(g, mu.clone()).unwrap().is_even_type());
        for lg in two_level_graphs(g, &mu) {
            let basis = delta_adapted_basis(&lg).unwrap();
            let h1 = lg.graph.h1();
            prop_assert_eq!(basis.graph_cycles.len(), h1);
            prop_assert_eq!(basis.genus(), g);
            if h1 > 0 {
                let rows: Vec<Vec<Rational>> = basis
                    .graph_cycles
                    .iter()
                    .map(|c| {
                        (0..lg.graph.num_edges())
                            .map(|e| int(c.iter().filter(|&&x| x == e).count() as i64))
                            .collect()
                    })
                    .collect();
                prop_assert_eq!(RatMatrix::from_rows(rows).unwrap().rank(), h1);
            }
        }
    }

    #[test]
    fn adapted_spanning_trees_are_planar(
        n in 2usize..6,
        extra in prop::collection::vec((0usize..6, 0usize..6), 0..5),
    ) {
        // A path keeps the multigraph connected; extra edges add cycles.
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        edges.extend(extra.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
        let tree = build_adapted_spanning_tree(n, &edges).unwrap();
        prop_assert!(tree.all_planar());
        prop_assert_eq!(tree.h1(), edges.len() + 1 - n);
    }

    #[test]
    fn parity_is_constant_on_prong_classes((g, mu) in level_signature()) {
        prop_assume!(Signature::abelian(g, mu.clone()).unwrap().is_even_type());
        for lg in two_level_graphs(g, &mu) {
            let basis = delta_adapted_basis(&lg).unwrap();
            if ProngMatching::group_order(&basis.kappas) > 2_000 {
                continue;
            }
            for parities in parity_vectors(&basis.genera) {
                let a = TurningAssignment::from_vertex_parities(&basis, &parities).unwrap();
                for sigma in ProngMatching::all(&basis.kappas) {
                    prop_assert_eq!(
                        arf_parity(&basis, &a, &sigma),
                        arf_parity(&basis, &a, &sigma.level_rotation())
                    );
                }
            }
        }
    }

    #[test]
    fn dilaton_equation(g in 0u32..3, a in prop::collection::vec(0u32..4, 1..5)) {
        let n = a.len() as i64;
        prop_assume!(2 * g as i64 - 2 + n > 0);
        let mut with_one = a.clone();
        with_one.push(1);
        prop_assert_eq!(
            psi_correlator(g, &with_one),
            int(2 * g as i64 - 2 + n) * psi_correlator(g, &a)
        );
    }

    #[test]
    fn integration_is_linear(
        x in small_rational(),
        y in small_rational(),
        i in 1u32..5,
        j in 1u32..5,
    ) {
        let amb = Ambient::mgn(1, 4);
        // Top-degree classes on M̄_{1,4}: ψ_i^3 ψ_j and κ₁ψ_i^3.
        let a = DecoratedClass::psi(amb.clone(), i).mul_psi(i, 2).mul_psi(j, 1);
        let b = DecoratedClass::kappa(amb.clone(), 1).mul_psi(i, 3);
        let mut c = a.scale(&x);
        c.add_scaled(&b, &y);
        prop_assert_eq!(c.integrate(), x * a.integrate() + y * b.integrate());
    }

    #[test]
    fn boundary_products_commute(pick_a in any::<prop::sample::Index>(), pick_b in any::<prop::sample::Index>()) {
        let amb = Ambient::mgn(0, 5);
        let divisors: Vec<DecoratedClass> = stable_graphs_cached(0, &[1, 2, 3, 4, 5], 1)
            .iter()
            .filter(|g| g.num_edges() == 1)
            .map(|g| DecoratedClass::graph_class(amb.clone(), g.clone()).unwrap())
            .collect();
        let da = &divisors[pick_a.index(divisors.len())];
        let db = &divisors[pick_b.index(divisors.len())];
        let psi = DecoratedClass::psi(amb.clone(), 1);
        let ab = psi.product(da).unwrap().product(db).unwrap();
        let ba = psi.product(db).unwrap().product(da).unwrap();
        prop_assert_eq!(ab.integrate(), ba.integrate());
        let x = da.product(db).unwrap();
        let y = db.product(da).unwrap();
        prop_assert!(numerically_equal(&x, &y));
    }

    #[test]
    fn gluing_integrates_factorwise(e1 in 0u32..2, e2 in 0u32..3) {
        // M̄_{0,4} × M̄_{1,3} glued along 4 ~ 5; decorations stay on factors.
        let left = Ambient::single(0, &[1, 2, 4, 10]);
        let right = Ambient::single(1, &[3, 5, 11]);
        let a = DecoratedClass::psi(left, [1, 4][e1 as usize]);
        let mut b = DecoratedClass::psi(right.clone(), 3).mul_psi(3, 1);
        if e2 == 1 {
            b = DecoratedClass::psi(right.clone(), 5).mul_psi(11, 1);
        } else if e2 == 2 {
            b = DecoratedClass::kappa(right, 1).mul_psi(5, 1);
        }
        let glued = a.tensor(&b).glue(&[(10, 11)], Ambient::single(1, &[1, 2, 3, 4, 5])).unwrap();
        prop_assert_eq!(glued.integrate(), a.integrate() * b.integrate());
    }

    #[test]
    fn weightings_count_r_to_the_h1(r in 1i64..8, which in 0usize..3) {
        let (g, legs, a, k): (u32, Vec<HalfEdge>, Vec<i64>, i64) = match which {
            0 => (1, vec![1], vec![1], 1),
            1 => (1, vec![1, 2], vec![5, -3], 1),
            _ => (2, vec![], vec![], 0),
        };
        let rv = RamificationVector::new(g, k, a).unwrap();
        for graph in stable_graphs_cached(g, &legs, 3 * g as usize + legs.len() - 3).iter() {
            let count = admissible_weightings(graph, &rv, r, false).len();
            prop_assert_eq!(count, (r as usize).pow(graph.h1() as u32));
        }
    }
}

proptest! {
    #![proptest_config(costly())]

    #[test]
    fn dr_is_equivariant_and_of_degree_g(x in -4i64..5, y in -4i64..5) {
        // a = (x, y, 1 − x − y) on M̄_{1,3}, k = 1.
        let a = vec![x, y, 3 - x - y];
        let dr = dr_cycle(&a, 1, 1).unwrap();
        prop_assert!(dr.degrees().iter().all(|&d| d == 1));
        let swapped = dr_cycle(&[y, x, 3 - x - y], 1, 1).unwrap();
        let map = HashMap::from([(1, 2), (2, 1)]);
        let probes = complementary_probes(dr.ambient(), 1);
        prop_assert_eq!(
            permute_legs(&dr, &map).fingerprint(&probes),
            swapped.fingerprint(&probes)
        );
    }

    #[test]
    fn spin_dr_is_equivariant(x in -3i64..4) {
        let x = 2 * x + 1;
        let dr = spin_dr_cycle(&[x, 2 - x], 1).unwrap();
        let swapped = spin_dr_cycle(&[2 - x, x], 1).unwrap();
        let map = HashMap::from([(1, 2), (2, 1)]);
        let probes = complementary_probes(dr.ambient(), 1);
        prop_assert_eq!(
            permute_legs(&dr, &map).fingerprint(&probes),
            swapped.fingerprint(&probes)
        );
    }

    #[test]
    fn reconstruction_repulls_consistently(mu in genus_one(), spin in any::<bool>()) {
        let sig = Signature::abelian(1, mu.clone()).unwrap();
        let v = if spin { Variant::Spin } else { Variant::Plain };
        prop_assume!(!spin || sig.is_even_type());
        let s = sig.stratum();
        let (x, report) = reconstruct(&s, v).unwrap();
        prop_assert!(report.unknowns > 0);
        let legs: Vec<HalfEdge> = (1..=mu.len() as HalfEdge).collect();
        let degree = x.degree().unwrap_or(1);
        for gamma in one_edge_graphs(1, &legs) {
            let assembled = clutching_pullback(&s, &gamma, v).unwrap();
            let probes = product_probes(&graph_ambient(&gamma), graph_ambient(&gamma).dim() - degree);
            prop_assert_eq!(
                assembled.fingerprint(&probes),
                pullback_fingerprint(&x, &gamma, degree).unwrap(),
                "{}", gamma.canonical_key()
            );
        }
    }

    #[test]
    fn even_prongs_never_contribute_to_spin_pullbacks(mu in even_genus_one()) {
        let s = Signature::abelian(1, mu.clone()).unwrap().stratum();
        let legs: Vec<HalfEdge> = (1..=mu.len() as HalfEdge).collect();
        for gamma in one_edge_graphs(1, &legs) {
            for c in pullback_contributions(&s, &gamma, Variant::Spin).unwrap() {
                prop_assert!(c.graph.kappas().iter().all(|k| k % 2 == 1));
            }
        }
    }

    #[test]
    fn spin_class_halves_the_plain_difference(mu in even_genus_one()) {
        // [H₁(μ)]^spin = [H₁(μ)] − 2[H₁(μ/2)] on M̄_{1,n}.
        let half: Vec<i64> = mu.iter().map(|m| m / 2).collect();
        let spin = spin_stratum_class(&Signature::abelian(1, mu.clone()).unwrap()).unwrap();
        let full = plain_stratum_class(&Signature::abelian(1, mu).unwrap()).unwrap();
        let halved = plain_stratum_class(&Signature::abelian(1, half).unwrap()).unwrap();
        let mut expected = full;
        expected.add_scaled(&halved, &int(-2));
        prop_assert!(numerically_equal(&spin, &expected));
    }

    #[test]
    fn genus_zero_dr_is_fundamental(a in prop::collection::vec(-5i64..6, 3..5)) {
        let n = a.len() as u32;
        let mut a = a;
        let k = 1;
        let last = k * (n as i64 - 2) - a[..a.len() - 1].iter().sum::<i64>();
        *a.last_mut().unwrap() = last;
        let dr = dr_cycle(&a, 0, k).unwrap();
        prop_assert_eq!(dr, DecoratedClass::fundamental(Ambient::mgn(0, n)));
    }
}
