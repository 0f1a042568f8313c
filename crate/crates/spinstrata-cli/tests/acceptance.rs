//! Acceptance suite: one PASS/FAIL line per criterion, each made of exact
//! sub-checks.  A sub-check listed in `KNOWN_DISCREPANCIES` compares against
//! a printed reference value that is internally inconsistent; it is reported
//! (and required to keep failing) but does not fail the run.  Runs without
//! the test harness so the report is always printed.

use std::collections::BTreeMap;
use std::process::Command;

use serde_json::Value;
use spinstrata::algebra::{rat, Rational};
use spinstrata::correlator::{correlator, psi_correlator};
use spinstrata::graph::{HalfEdge, StableGraph};
use spinstrata::level::{enumerate_two_level_graphs, Component, GenStratum, Signature};
use spinstrata::pixton::{
    admissible_weightings, conjecture_rhs, dr_cycle, pixton_p_poly_with, spin_dr_cycle,
    RamificationVector, SamplingPlan,
};
use spinstrata::recursion::{
    clutching_pullback, graph_ambient, paired_poles_class, plain_stratum_class,
    pullback_contributions, pullback_fingerprint, spin_stratum_class, stratum_class, Variant,
};
use spinstrata::spin_comb::{
    base_parity, delta_adapted_basis, genus0_paired_pole_census, parity_census, ProngMatching,
    TurningAssignment,
};
use spinstrata::taut::{
    complementary_probes, express_in_span, numerically_equal, product_probes,
    stable_graphs_cached, Ambient, DecoratedClass,
};
use spinstrata::Error;

/// Sub-checks whose reference value is a misprint: the printed spin
/// pullback along the graph separating marking 2 is 9ψ, but markings 2 and
/// 3 are symmetric (both of order −2), the sibling graph is printed as 3ψ,
/// and only 3ψ is consistent with the printed final coordinates.
const KNOWN_DISCREPANCIES: &[&str] = &["2: spin pullback along Γ₁^{2} = 9ψ (as printed)"];

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }
}

fn psi(amb: &Ambient, leg: HalfEdge, c: i64) -> DecoratedClass {
    DecoratedClass::psi(amb.clone(), leg).scale(&rat(c, 1))
}

fn sig(g: u32, mu: &[i64]) -> Signature {
    Signature::abelian(g, mu.to_vec()).unwrap()
}

/// The self-node graph on `M̄_{0,5}` with node half-edges 4, 5.
fn gamma0() -> StableGraph {
    StableGraph::new(vec![0], vec![vec![1, 2, 3, 4, 5]], vec![(4, 5)]).unwrap()
}

/// Genus-1 vertex carrying `leg` (if any) and half-edge 4, glued to a
/// genus-0 vertex carrying the other markings and half-edge 5.
fn gamma1(leg: Option<HalfEdge>) -> StableGraph {
    let mut top: Vec<HalfEdge> = leg.into_iter().collect();
    top.push(4);
    let mut rest: Vec<HalfEdge> = (1..=3).filter(|&i| Some(i) != leg).collect();
    rest.push(5);
    StableGraph::new(vec![1, 0], vec![top, rest], vec![(4, 5)]).unwrap()
}

/// `δ`: the divisor with markings 2, 3 on a rational tail.
fn delta_23(amb: &Ambient) -> DecoratedClass {
    let g = StableGraph::new(vec![1, 0], vec![vec![1, 4], vec![2, 3, 5]], vec![(4, 5)]).unwrap();
    DecoratedClass::graph_class(amb.clone(), g).unwrap()
}

fn coeffs(c: &DecoratedClass) -> Vec<Rational> {
    let mut v: Vec<Rational> = c.terms().map(|(_, q)| q.clone()).collect();
    v.sort();
    v
}

fn show(v: &[Rational]) -> String {
    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

/// `[H₁(0)] ⊗ [H₀(1:4, 2:−2, 3:−2, 5:−2)]` with `r₅ = 0` on the `Γ₁^∅`
/// ambient: the top factor is the fundamental class (plain) or the odd
/// torus class (spin), the bottom factor the resolved residue class.
fn gamma1_empty_product(v: Variant) -> DecoratedClass {
    let top = GenStratum::new(1, vec![Component::new(1, vec![(4, 0)])], vec![]).unwrap();
    let top = stratum_class(&top, v).unwrap();
    let s = GenStratum::new(
        1,
        vec![Component::new(0, vec![(1, 4), (2, -2), (3, -2), (5, -2)])],
        vec![vec![5]],
    )
    .unwrap();
    let bottom = stratum_class(&s, v).unwrap();
    top.tensor(&bottom)
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::default();
    let s = sig(1, &[4, -2, -2]).stratum();
    let g0 = gamma0();
    let contributions = pullback_contributions(&s, &g0, Variant::Plain).unwrap();
    // Identify the vertical graphs by their enhancements and bottom markings.
    let mut found: BTreeMap<&str, Vec<Rational>> = BTreeMap::new();
    let mut horizontal = None;
    for k in &contributions {
        if k.horizontal {
            horizontal = Some(k.class.clone());
            continue;
        }
        let mut kappas = k.graph.kappas();
        kappas.sort();
        let bottom_has = |leg| k.graph.graph.markings_at(0).contains(&leg);
        let name = match (kappas.as_slice(), bottom_has(2), bottom_has(3)) {
            ([1, 1], true, false) => "A",
            ([1, 1], false, true) => "B",
            ([1, 3], _, _) => "C",
            ([2, 2], _, _) => "D",
            _ => "other",
        };
        found.insert(name, coeffs(&k.class));
    }
    for (name, expected) in [("A", 1), ("B", 1), ("C", 4), ("D", 2)] {
        let want = vec![rat(expected, 1), rat(expected, 1)];
        let got = found.get(name).cloned().unwrap_or_default();
        c.check(
            format!("1: Γ₀ graph ({name}) = {expected}+{expected}"),
            got == want,
            format!("got {}", show(&got)),
        );
    }
    c.check("1: no other vertical graph reaches Γ₀", !found.contains_key("other"), "");
    // Graph (E): the residue-constrained genus-0 stratum.
    let e = GenStratum::new(
        1,
        vec![Component::new(0, vec![(1, 4), (2, -2), (3, -2), (4, -1), (5, -1)])],
        vec![vec![4, 5]],
    )
    .unwrap();
    let e_class = stratum_class(&e, Variant::Plain).unwrap();
    c.check(
        "1: Γ₀ graph (E) = [H₀^R(4,−2,−2,−1,−1)]",
        horizontal.is_some_and(|h| numerically_equal(&h, &e_class)),
        "",
    );
    // The assembled pullback agrees with the pullback of the reconstructed class.
    let full = plain_stratum_class(&sig(1, &[4, -2, -2])).unwrap();
    let total = clutching_pullback(&s, &g0, Variant::Plain).unwrap();
    let probes = product_probes(&graph_ambient(&g0), graph_ambient(&g0).dim() - 1);
    c.check(
        "1: Σ contributions = ξ*_{Γ₀} of the reconstructed class",
        total.fingerprint(&probes) == pullback_fingerprint(&full, &g0, 1).unwrap(),
        "",
    );
    for (leg, psi_leg, k) in [(Some(1), 1, 15), (Some(2), 4, 3), (Some(3), 4, 3)] {
        let g = gamma1(leg);
        let pb = clutching_pullback(&s, &g, Variant::Plain).unwrap();
        let want = psi(&graph_ambient(&g), psi_leg, k);
        c.check(
            format!("1: plain pullback along Γ₁^{{{}}} = {k}ψ", leg.unwrap()),
            numerically_equal(&pb, &want),
            pb.describe(),
        );
    }
    let g = gamma1(None);
    let pb = clutching_pullback(&s, &g, Variant::Plain).unwrap();
    c.check(
        "1: plain pullback along Γ₁^∅ = [M̄₁,₁] ⊗ [H₀^{r=0}(4,−2,−2,−2)] = ψ",
        numerically_equal(&pb, &gamma1_empty_product(Variant::Plain))
            && numerically_equal(&pb, &psi(&graph_ambient(&g), 5, 1)),
        pb.describe(),
    );
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::default();
    let s = sig(1, &[4, -2, -2]).stratum();
    let printed = [
        (Some(1), 1, 9, "Γ₁^{1} = 9ψ"),
        (Some(2), 4, 9, "Γ₁^{2} = 9ψ (as printed)"),
        (Some(2), 4, 3, "Γ₁^{2} = 3ψ (by the 2↔3 symmetry)"),
        (Some(3), 4, 3, "Γ₁^{3} = 3ψ"),
        (None, 5, -1, "Γ₁^∅ = −ψ"),
    ];
    for (leg, psi_leg, k, label) in printed {
        let g = gamma1(leg);
        let pb = clutching_pullback(&s, &g, Variant::Spin).unwrap();
        c.check(
            format!("2: spin pullback along {label}"),
            numerically_equal(&pb, &psi(&graph_ambient(&g), psi_leg, k)),
            format!("engine: {}", pb.describe()),
        );
    }
    let g = gamma1(None);
    let pb = clutching_pullback(&s, &g, Variant::Spin).unwrap();
    c.check(
        "2: spin Γ₁^∅ = −[M̄₁,₁] ⊗ [H₀^{r=0}(4,−2,−2,−2)]^spin",
        numerically_equal(&pb, &gamma1_empty_product(Variant::Spin)),
        "",
    );
    let class = spin_stratum_class(&sig(1, &[4, -2, -2])).unwrap();
    let amb = class.ambient().clone();
    let span = vec![
        DecoratedClass::kappa(amb.clone(), 1),
        DecoratedClass::psi(amb.clone(), 1),
        DecoratedClass::psi(amb.clone(), 2),
        DecoratedClass::psi(amb.clone(), 3),
        delta_23(&amb),
    ];
    let coords = express_in_span(&class, &span, &complementary_probes(&amb, 1));
    let want: Vec<Rational> = [0, 1, 3, 3, -8].iter().map(|&x| rat(x, 1)).collect();
    c.check(
        "2: reconstructed class = (0,1,3,3,−8) in {κ₁,ψ₁,ψ₂,ψ₃,δ}",
        coords.as_ref().is_ok_and(|x| *x == want),
        format!("{:?}", coords.map(|x| show(&x))),
    );
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::default();
    for (mu, k) in [([2, -2], 3), ([4, -4], 9)] {
        let class = spin_stratum_class(&sig(1, &mu)).unwrap();
        let want = psi(class.ambient(), 1, k);
        c.check(
            format!("3: [H₁({},{})]^spin = {k}ψ₁", mu[0], mu[1]),
            numerically_equal(&class, &want),
            class.describe(),
        );
    }
    c
}

/// All vertex-parity vectors allowed by the vertex genera.
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

fn criterion_4() -> Criterion {
    let mut c = Criterion::default();
    for (g, mu) in [(1, vec![4, -2, -2]), (2, vec![2]), (1, vec![0, 0])] {
        let s = sig(g, &mu).stratum();
        let mut examined = 0;
        let mut skipped = 0;
        let mut bad = Vec::new();
        for lg in enumerate_two_level_graphs(&s).unwrap() {
            let basis = delta_adapted_basis(&lg).unwrap();
            if ProngMatching::group_order(&basis.kappas) > 10_000 {
                skipped += 1;
                continue;
            }
            let has_even = basis.kappas.iter().any(|k| k % 2 == 0);
            for parities in parity_vectors(&basis.genera) {
                let a = TurningAssignment::from_vertex_parities(&basis, &parities).unwrap();
                let (even, odd) = parity_census(&basis, &a, 10_000).unwrap();
                let sum = parities.iter().fold(0, |x, p| x ^ p);
                let ok = if has_even {
                    even == odd
                } else if sum == 0 {
                    odd == 0
                } else {
                    even == 0
                };
                examined += 1;
                if !ok {
                    bad.push(format!("{} {parities:?}: {even}/{odd}", lg.describe()));
                }
            }
        }
        c.check(
            format!("4: census over every two-level graph of {mu:?} (g={g})"),
            bad.is_empty() && examined > 0,
            format!("{examined} (graph, parity) cases, {skipped} graphs over the limit; {bad:?}"),
        );
    }
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::default();
    c.check(
        "5: (0,−1,−1) has odd parity",
        base_parity(&sig(0, &[0, -1, -1])) == Some(1),
        "",
    );
    for k in 1..=4i64 {
        let (even, odd) = genus0_paired_pole_census(k as u32).unwrap();
        let s = GenStratum::new(
            1,
            vec![Component::new(0, vec![(1, 2 * k), (2, -2 * k), (3, -1), (4, -1)])],
            vec![vec![3, 4]],
        )
        .unwrap();
        // Oracle: the resolved spin and plain classes count the points
        // with and without sign.
        let spin = paired_poles_class(&s, 3, 4, Variant::Spin).unwrap();
        let plain = paired_poles_class(&s, 3, 4, Variant::Plain).unwrap();
        let diff = rat(even as i64 - odd as i64, 1);
        let total = rat((even + odd) as i64, 1);
        c.check(
            format!("5: k={k} census even−odd = 1, matching ∫ of the resolved classes"),
            diff == rat(1, 1) && spin.integrate() == diff && plain.integrate() == total,
            format!("census {even}/{odd}, ∫spin {}, ∫plain {}", spin.integrate(), plain.integrate()),
        );
        let class = stratum_class(&s, Variant::Spin).unwrap();
        c.check(
            format!("5: [H₀^R({},{},−1,−1)]^spin = ψ₁", 2 * k, -2 * k),
            numerically_equal(&class, &psi(class.ambient(), 1, 1)) && class.integrate() == rat(1, 1),
            class.describe(),
        );
    }
    c
}

/// Non-decreasing exponent vectors of length `n` summing to `d`.
fn exponent_vectors(n: usize, d: u32, min: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in min..=d {
        for mut rest in exponent_vectors(n - 1, d - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::default();
    let values = [
        ("⟨τ₀³⟩₀ = 1", psi_correlator(0, &[0, 0, 0]), rat(1, 1)),
        ("⟨τ₁⟩₁ = 1/24", psi_correlator(1, &[1]), rat(1, 24)),
        ("⟨τ₀τ₂⟩₁ = 1/24", psi_correlator(1, &[0, 2]), rat(1, 24)),
        ("∫_{0,4} ψ₁ = 1", psi_correlator(0, &[1, 0, 0, 0]), rat(1, 1)),
        ("∫_{0,4} ψ₄ = 1", psi_correlator(0, &[0, 0, 0, 1]), rat(1, 1)),
        ("∫_{1,1} κ₁ = 1/24", correlator(1, &[0], &[1]).unwrap(), rat(1, 24)),
    ];
    for (label, got, want) in values {
        c.check(format!("6: {label}"), got == want, format!("got {got}"));
    }
    let mut failures = Vec::new();
    let mut count = 0;
    for g in 0..=3u32 {
        for n in 1..=9usize {
            // Right-hand side on M̄_{g,n}; the identities add one point.
            let dim = 3 * g as i64 - 3 + n as i64;
            if dim < 0 || dim + 1 > 6 || 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            for a in exponent_vectors(n, dim as u32, 0) {
                count += 1;
                // Dilaton: ⟨τ₁ Π τ_{aᵢ}⟩ = (2g − 2 + n) ⟨Π τ_{aᵢ}⟩.
                let mut lhs_d = a.clone();
                lhs_d.push(1);
                let dil = psi_correlator(g, &lhs_d);
                let want = rat(2 * g as i64 - 2 + n as i64, 1) * psi_correlator(g, &a);
                if dil != want {
                    failures.push(format!("dilaton g={g} {a:?}"));
                }
            }
            // String: ⟨τ₀ Π τ_{aᵢ}⟩ = Σᵢ ⟨… τ_{aᵢ−1} …⟩ with Σaᵢ = dim + 1.
            for a in exponent_vectors(n, (dim + 1) as u32, 0) {
                count += 1;
                let mut lhs = a.clone();
                lhs.push(0);
                let rhs: Rational = (0..n)
                    .filter(|&i| a[i] > 0)
                    .map(|i| {
                        let mut b = a.clone();
                        b[i] -= 1;
                        psi_correlator(g, &b)
                    })
                    .sum();
                if psi_correlator(g, &lhs) != rhs {
                    failures.push(format!("string g={g} {a:?}"));
                }
            }
        }
    }
    c.check(
        "6: string and dilaton identities for 3g−3+n ≤ 6",
        failures.is_empty() && count > 0,
        format!("{count} instances; failures {failures:?}"),
    );
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::default();
    for (a, k) in [(vec![1, 1, -1], 1), (vec![2, -1, -1], 0), (vec![3, 0, -2, -1], 0)] {
        let n = a.len() as u32;
        let dr = dr_cycle(&a, 0, k).unwrap();
        c.check(
            format!("7: DR₀({a:?}) with k={k} is the fundamental class"),
            dr == DecoratedClass::fundamental(Ambient::mgn(0, n)),
            dr.describe(),
        );
    }
    for (g, n, k) in [(1u32, 1usize, 1i64), (1, 2, 1), (2, 1, 1)] {
        let total = k * (2 * g as i64 - 2 + n as i64);
        let vectors: Vec<Vec<i64>> = if n == 1 {
            vec![vec![total]]
        } else {
            (-6..=6).map(|x| vec![x, total - x]).filter(|v| v[1].abs() <= 6).collect()
        };
        let legs: Vec<HalfEdge> = (1..=n as HalfEdge).collect();
        let graphs = stable_graphs_cached(g, &legs, (3 * g as usize + n).saturating_sub(3));
        let mut disagreements = Vec::new();
        let mut weight_failures = Vec::new();
        for a in &vectors {
            let rv = RamificationVector::new(g, k, a.clone()).unwrap();
            let spins: &[bool] = if rv.is_spin_admissible() { &[false, true] } else { &[false] };
            for &spin in spins {
                let plan = SamplingPlan::default_for(&rv, g as i64);
                let p1 = pixton_p_poly_with(&rv, g as i64, spin, &plan).unwrap();
                let p2 = pixton_p_poly_with(&rv, g as i64, spin, &plan.disjoint_successor()).unwrap();
                if !p1.same_polynomials(&p2) {
                    disagreements.push(format!("{a:?} spin={spin}"));
                }
            }
            for graph in graphs.iter() {
                for r in [2i64, 3, 5, 6] {
                    let count = admissible_weightings(graph, &rv, r, false).len();
                    if count != (r as usize).pow(graph.h1() as u32) {
                        weight_failures.push(format!("{a:?} r={r} {}", graph.canonical_key()));
                    }
                }
            }
        }
        c.check(
            format!("7: (g,n,k)=({g},{n},{k}) disjoint even-r sample sets agree"),
            disagreements.is_empty(),
            format!("{} vectors; {disagreements:?}", vectors.len()),
        );
        c.check(
            format!("7: (g,n,k)=({g},{n},{k}) |weightings| = r^h¹ on {} graphs", graphs.len()),
            weight_failures.is_empty(),
            format!("{weight_failures:?}"),
        );
    }
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::default();
    for mu in [vec![2i64, -2], vec![4, -4]] {
        let a: Vec<i64> = mu.iter().map(|m| m + 1).collect();
        let lhs = spin_dr_cycle(&a, 1).unwrap();
        let rhs = conjecture_rhs(&mu, 1).unwrap();
        let probes = complementary_probes(lhs.ambient(), 1);
        let (fl, fr) = (lhs.fingerprint(&probes), rhs.fingerprint(&probes));
        c.check(
            format!("8: spin DR({a:?}) and the star-graph side agree for μ={mu:?}"),
            fl == fr && fl.iter().any(|x| *x != rat(0, 1)),
            format!("{} probes", probes.len()),
        );
    }
    c
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::default();
    c.check(
        "9: library reports g=2, μ=(2) as symbolic",
        matches!(spin_stratum_class(&sig(2, &[2])), Err(Error::Symbolic(_))),
        "",
    );
    let out = Command::new(env!("CARGO_BIN_EXE_spinstrata"))
        .args(["spin-class", "--mu", "2", "--g", "2"])
        .output()
        .expect("binary runs");
    let doc: Option<Value> = serde_json::from_slice(&out.stdout).ok();
    let status = doc.as_ref().and_then(|d| d["status"].as_str().map(str::to_string));
    let has_class = doc.as_ref().is_some_and(|d| !d["class"].is_null());
    c.check(
        "9: CLI exits 2 with status \"symbolic\" and no numbers",
        out.status.code() == Some(2) && status.as_deref() == Some("symbolic") && !has_class,
        format!("exit {:?}, status {status:?}", out.status.code()),
    );
    c
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Criterion)> = vec![
        (1, "plain clutching multiplicities", criterion_1),
        (2, "spin clutching and reconstruction", criterion_2),
        (3, "genus-one two-point spin classes", criterion_3),
        (4, "prong-matching parity census", criterion_4),
        (5, "base cases", criterion_5),
        (6, "intersection numbers", criterion_6),
        (7, "Pixton formula properties", criterion_7),
        (8, "spin DR conjecture at g=1", criterion_8),
        (9, "higher genus is symbolic", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (n, title, run) in criteria {
        let crit = run();
        let pass = crit.checks.iter().all(|k| k.ok);
        println!("criterion {n}: {} — {title}", if pass { "PASS" } else { "FAIL" });
        for k in &crit.checks {
            let known = KNOWN_DISCREPANCIES.contains(&k.name.as_str());
            let tag = match (k.ok, known) {
                (true, _) => "ok",
                (false, true) => "known misprint",
                (false, false) => "FAILED",
            };
            println!("    [{tag}] {} — {}", k.name, k.detail);
            if k.ok == known {
                unexpected.push(format!("{} (ok={})", k.name, k.ok));
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
