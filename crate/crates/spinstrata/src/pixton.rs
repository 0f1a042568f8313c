//! Pixton's formula for k-twisted double ramification cycles and its spin
//! variant.
//!
//! For a ramification vector `a` and a modulus `r`, the mixed-degree class
//!
//! ```text
//! P^r(a) = Σ_Γ Σ_w 1/(|Aut Γ| r^{h¹(Γ)}) ξ_{Γ*}[ Π_v exp(−kκ₁[v]) Π_i exp(a_i² ψ_i)
//!          Π_e (1 − exp(−w(h)w(h')(ψ_h + ψ_h'))) / (ψ_h + ψ_h') ]
//! ```
//!
//! has coefficients that are polynomials in `r` for `r` large.  The DR cycle
//! is `2^{−g}` times the degree-`g` part of the constant term.  The spin
//! variant restricts to weightings whose edge values are all odd, uses even
//! `r`, and replaces the prefactor by `1/(2^{g−h¹}|Aut Γ| r^{h¹})`.
//!
//! The weighting dependence of a graph contribution factors through the
//! moments `Σ_w Π_e (w(h)w(h'))^{m_e}`, one per edge-exponent pattern `m`.
//! [`pixton_p_poly`] therefore interpolates one scalar polynomial per
//! (graph, pattern) pair; [`pixton_p`] evaluates the literal finite sum at a
//! fixed `r` and serves as an independent check.

use crate::algebra::{
    factorial, format_rational, int, lagrange_interpolate, Rational, UniPoly,
};
use crate::error::{Error, Result};
use crate::graph::{HalfEdge, StableGraph};
use crate::level::Signature;
use crate::recursion::{star_graph_sum, Variant};
use crate::taut::{stable_graphs_cached, Ambient, DecoratedClass, Term};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, VecDeque};

/// A ramification vector `a = (a_1, …, a_n)` with `Σ a_i = k(2g − 2 + n)`;
/// entry `i` belongs to the leg labelled `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RamificationVector {
    /// Genus.
    pub g: u32,
    /// Twist `k`.
    pub k: i64,
    /// Entries, in leg order.
    pub a: Vec<i64>,
}

impl RamificationVector {
    /// Validates the sum condition and stability of `(g, n)`.
    pub fn new(g: u32, k: i64, a: Vec<i64>) -> Result<Self> {
        let n = a.len() as i64;
        if 2 * g as i64 - 2 + n <= 0 {
            return Err(Error::Precondition(format!(
                "(g, n) = ({g}, {n}) is not stable"
            )));
        }
        let expected = k * (2 * g as i64 - 2 + n);
        let sum: i64 = a.iter().sum();
        if sum != expected {
            return Err(Error::InvalidSignature(format!(
                "ramification vector sums to {sum}, expected k(2g-2+n) = {expected}"
            )));
        }
        Ok(RamificationVector { g, k, a })
    }

    /// Number of legs.
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Whether every entry is odd, as required by the spin variant.
    pub fn is_spin_admissible(&self) -> bool {
        self.a.iter().all(|x| x % 2 != 0)
    }

    /// Leg labels `1..=n`.
    pub fn legs(&self) -> Vec<HalfEdge> {
        (1..=self.a.len() as HalfEdge).collect()
    }

    /// The ambient `M̄_{g,n}`.
    pub fn ambient(&self) -> Ambient {
        Ambient::single(self.g, &self.legs())
    }

    /// Applies a permutation of the legs: leg `i` of the result carries the
    /// entry of leg `perm[i−1]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> RamificationVector {
        RamificationVector {
            g: self.g,
            k: self.k,
            a: perm.iter().map(|&j| self.a[j - 1]).collect(),
        }
    }

    fn entry(&self, leg: HalfEdge) -> Option<i64> {
        self.a.get((leg as usize).checked_sub(1)?).copied()
    }
}

/// An admissible weighting modulo `r`: a value in `0..r` on every leg and
/// every half-edge of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AdmissibleWeighting {
    /// Values keyed by half-edge.
    pub w: BTreeMap<HalfEdge, i64>,
}

impl AdmissibleWeighting {
    /// `w(h) · w(h')` for an edge.
    pub fn edge_product(&self, edge: (HalfEdge, HalfEdge)) -> i64 {
        self.w[&edge.0] * self.w[&edge.1]
    }
}

/// Spanning-tree data used to solve the weighting conditions.
struct WeightingSolver {
    /// Non-root vertices in BFS order with their parent edge oriented as
    /// (half at the vertex, half at the parent).
    tree: Vec<(usize, HalfEdge, HalfEdge)>,
    /// Edges outside the spanning tree (including self-loops).
    free: Vec<(HalfEdge, HalfEdge)>,
}

impl WeightingSolver {
    fn new(graph: &StableGraph) -> Option<Self> {
        let nv = graph.num_vertices();
        let vm = graph.vertex_map();
        let mut seen = vec![false; nv];
        let mut used = vec![false; graph.num_edges()];
        let mut tree = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for (i, &(a, b)) in graph.edges().iter().enumerate() {
                if used[i] {
                    continue;
                }
                let (here, there) = if vm[&a] == v {
                    (a, b)
                } else if vm[&b] == v {
                    (b, a)
                } else {
                    continue;
                };
                let u = vm[&there];
                if !seen[u] {
                    seen[u] = true;
                    used[i] = true;
                    tree.push((u, there, here));
                    queue.push_back(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return None;
        }
        let free = graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(_, &e)| e)
            .collect();
        Some(WeightingSolver { tree, free })
    }
}

/// All admissible k-weightings modulo `r` of a connected stable graph whose
/// legs are labelled `1..=n` as in `a`.
///
/// Leg `i` receives `a_i mod r`, the two halves of an edge sum to `0 mod r`
/// and the values around a vertex `v` sum to `k(2g(v) − 2 + n(v)) mod r`.
/// With `odd_only` only weightings with odd values on every edge half are
/// kept.  Inconsistent data yields an empty list; otherwise there are
/// `r^{h¹}` weightings before the odd filter.
pub fn admissible_weightings(
    graph: &StableGraph,
    a: &RamificationVector,
    r: i64,
    odd_only: bool,
) -> Vec<AdmissibleWeighting> {
    let mut out = Vec::new();
    for_each_weighting(graph, a, r, odd_only, |w| out.push(AdmissibleWeighting { w: w.clone() }));
    out
}

/// Calls `f` on every admissible weighting (see [`admissible_weightings`]).
fn for_each_weighting<F: FnMut(&BTreeMap<HalfEdge, i64>)>(
    graph: &StableGraph,
    a: &RamificationVector,
    r: i64,
    odd_only: bool,
    mut f: F,
) {
    if r < 1 {
        return;
    }
    let Some(solver) = WeightingSolver::new(graph) else {
        return;
    };
    let mut base: BTreeMap<HalfEdge, i64> = BTreeMap::new();
    for leg in graph.markings() {
        let Some(x) = a.entry(leg) else {
            return;
        };
        base.insert(leg, x.rem_euclid(r));
    }
    let targets: Vec<i64> = (0..graph.num_vertices())
        .map(|v| {
            a.k * (2 * graph.genera()[v] as i64 - 2 + graph.valence(v) as i64)
        })
        .collect();
    let nfree = solver.free.len();
    let mut digits = vec![0i64; nfree];
    loop {
        let mut w = base.clone();
        for (&(h, hp), &x) in solver.free.iter().zip(&digits) {
            w.insert(h, x);
            w.insert(hp, (-x).rem_euclid(r));
        }
        for &(v, h_child, h_parent) in solver.tree.iter().rev() {
            let others: i64 = graph.half_edges()[v]
                .iter()
                .filter(|&&h| h != h_child)
                .map(|h| w[h])
                .sum();
            let x = (targets[v] - others).rem_euclid(r);
            w.insert(h_child, x);
            w.insert(h_parent, (-x).rem_euclid(r));
        }
        let root_sum: i64 = graph.half_edges()[0].iter().map(|h| w[h]).sum();
        let consistent = (root_sum - targets[0]).rem_euclid(r) == 0;
        if !consistent {
            // The root condition does not depend on the free values.
            return;
        }
        let odd_ok = !odd_only
            || graph
                .edges()
                .iter()
                .all(|(h, hp)| w[h] % 2 != 0 && w[hp] % 2 != 0);
        if odd_ok {
            f(&w);
        }
        // Mixed-radix increment over the free edge values.
        let mut i = 0;
        loop {
            if i == nfree {
                return;
            }
            digits[i] += 1;
            if digits[i] < r {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// A monomial of decorations on a fixed graph, with its degree.
#[derive(Clone, Debug)]
struct Deco {
    coeff: Rational,
    psi: BTreeMap<HalfEdge, u32>,
    kappa: Vec<Vec<u32>>,
    degree: i64,
}

fn deco_mul(a: &[Deco], b: &[Deco], budget: i64) -> Vec<Deco> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if x.degree + y.degree > budget {
                continue;
            }
            let mut psi = x.psi.clone();
            for (&h, &e) in &y.psi {
                *psi.entry(h).or_insert(0) += e;
            }
            let kappa = x
                .kappa
                .iter()
                .zip(&y.kappa)
                .map(|(p, q)| {
                    let mut v = p.clone();
                    v.extend(q);
                    v.sort_unstable();
                    v
                })
                .collect();
            out.push(Deco {
                coeff: &x.coeff * &y.coeff,
                psi,
                kappa,
                degree: x.degree + y.degree,
            });
        }
    }
    out
}

fn deco_unit(nv: usize) -> Deco {
    Deco {
        coeff: Rational::one(),
        psi: BTreeMap::new(),
        kappa: vec![Vec::new(); nv],
        degree: 0,
    }
}

/// `Σ_j c^j/j! x^j` truncated at `budget`, where `x` is built by `make(j)`.
fn exp_series<F: Fn(u32) -> Deco>(c: &Rational, budget: i64, make: F) -> Vec<Deco> {
    (0..=budget.max(0) as u32)
        .map(|j| {
            let mut d = make(j);
            let mut p = Rational::one();
            for _ in 0..j {
                p *= c;
            }
            d.coeff = p / factorial(j);
            d.degree = j as i64;
            d
        })
        .filter(|d| !d.coeff.is_zero())
        .collect()
}

/// The class `ξ_{Γ*}[Π_e (−1)^{m_e+1}/m_e! (ψ_h+ψ_h')^{m_e−1} · Π_v exp(−kκ₁[v])
/// · Π_i exp(a_i²ψ_i)]`, truncated to total degree `≤ max_degree`.
fn pattern_class(
    graph: &StableGraph,
    a: &RamificationVector,
    pattern: &[u32],
    max_degree: i64,
    ambient: &Ambient,
) -> DecoratedClass {
    let nv = graph.num_vertices();
    let budget = max_degree - graph.num_edges() as i64;
    let mut acc = vec![deco_unit(nv)];
    for (&(h, hp), &m) in graph.edges().iter().zip(pattern) {
        let mut sign = if m % 2 == 1 { int(1) } else { int(-1) };
        sign /= factorial(m);
        let terms: Vec<Deco> = (0..m)
            .map(|s| {
                let mut d = deco_unit(nv);
                if s > 0 {
                    *d.psi.entry(h).or_insert(0) += s;
                }
                if m - 1 - s > 0 {
                    *d.psi.entry(hp).or_insert(0) += m - 1 - s;
                }
                d.coeff = &sign * binomial(m - 1, s);
                d.degree = (m - 1) as i64;
                d
            })
            .collect();
        acc = deco_mul(&acc, &terms, budget);
    }
    let kk = int(-a.k);
    for v in 0..nv {
        let series = exp_series(&kk, budget, |j| {
            let mut d = deco_unit(nv);
            d.kappa[v] = vec![1; j as usize];
            d
        });
        acc = deco_mul(&acc, &series, budget);
    }
    for leg in graph.markings() {
        let x = a.entry(leg).unwrap_or(0);
        let series = exp_series(&int(x * x), budget, |j| {
            let mut d = deco_unit(nv);
            if j > 0 {
                d.psi.insert(leg, j);
            }
            d
        });
        acc = deco_mul(&acc, &series, budget);
    }
    let mut class = DecoratedClass::zero(ambient.clone());
    for d in acc {
        class.add_term(
            Term {
                graph: graph.clone(),
                psi: d.psi,
                kappa: d.kappa,
            },
            d.coeff,
        );
    }
    class
}

fn binomial(n: u32, k: u32) -> Rational {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Edge-exponent patterns `m ∈ ℤ_{≥1}^E` with `Σ m_e ≤ max_degree`.
fn patterns(num_edges: usize, max_degree: i64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(num_edges);
    fn rec(left: usize, budget: i64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        // Each remaining edge needs at least exponent 1.
        let max_here = budget - (left as i64 - 1);
        for m in 1..=max_here.max(0) {
            cur.push(m as u32);
            rec(left - 1, budget - m, cur, out);
            cur.pop();
        }
    }
    if num_edges as i64 <= max_degree {
        rec(num_edges, max_degree, &mut cur, &mut out);
    }
    out
}

fn graph_ambient(graph: &StableGraph) -> Ambient {
    Ambient::single(graph.genus(), &graph.markings())
}

/// `Cont_{a,Γ,w}` truncated to total degree `≤ max_degree`.
pub fn contribution_class(
    a: &RamificationVector,
    graph: &StableGraph,
    w: &AdmissibleWeighting,
    max_degree: i64,
) -> DecoratedClass {
    let ambient = graph_ambient(graph);
    let mut total = DecoratedClass::zero(ambient.clone());
    for pattern in patterns(graph.num_edges(), max_degree) {
        let mut weight = BigInt::one();
        for (&e, &m) in graph.edges().iter().zip(&pattern) {
            weight *= BigInt::from(w.edge_product(e)).pow(m);
        }
        if weight.is_zero() {
            continue;
        }
        let class = pattern_class(graph, a, &pattern, max_degree, &ambient);
        total.add_scaled(&class, &Rational::from_integer(weight));
    }
    total
}

/// The prefactor `1/(|Aut Γ| r^{h¹})`, times `2^{h¹−g}` in the spin case.
fn prefactor(graph: &StableGraph, r: i64, spin: bool) -> Rational {
    let h1 = graph.h1() as u32;
    let mut den = BigInt::from(graph.automorphism_order()) * BigInt::from(r).pow(h1);
    if spin {
        den *= BigInt::from(2).pow(graph.genus() - h1);
    }
    Rational::new(BigInt::one(), den)
}

fn check_spin(a: &RamificationVector, r: Option<i64>) -> Result<()> {
    if !a.is_spin_admissible() {
        return Err(Error::Precondition(
            "the spin variant needs every entry of the ramification vector odd".into(),
        ));
    }
    if a.k % 2 == 0 {
        return Err(Error::Precondition("the spin variant needs odd k".into()));
    }
    if let Some(r) = r {
        if r % 2 != 0 {
            return Err(Error::Precondition("the spin variant needs even r".into()));
        }
    }
    Ok(())
}

/// Graphs of `M̄_{g,n}` with at most `max_edges` edges.
fn graphs_for(a: &RamificationVector, max_edges: i64) -> Vec<StableGraph> {
    if max_edges < 0 {
        return Vec::new();
    }
    stable_graphs_cached(a.g, &a.legs(), max_edges as usize)
        .iter()
        .cloned()
        .collect()
}

/// The literal finite sum `P^{r}(a)` (or its spin variant) at a fixed `r`,
/// truncated to total degree `≤ degree`.
pub fn pixton_p(a: &RamificationVector, r: i64, degree: i64, spin: bool) -> Result<DecoratedClass> {
    if r < 1 {
        return Err(Error::NonPositive(r));
    }
    if spin {
        check_spin(a, Some(r))?;
    }
    let mut total = DecoratedClass::zero(a.ambient());
    for graph in graphs_for(a, degree) {
        let pre = prefactor(&graph, r, spin);
        for w in admissible_weightings(&graph, a, r, spin) {
            let c = contribution_class(a, &graph, &w, degree);
            total.add_scaled(&c, &pre);
        }
    }
    Ok(total)
}

/// Sample points used to interpolate in `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplingPlan {
    /// Smallest sample.
    pub r0: i64,
    /// Spacing between samples.
    pub step: i64,
    /// Number of samples used for the fit.
    pub fit: usize,
    /// Number of held-out verification samples.
    pub holdout: usize,
    /// Maximal accepted degree in `r`.
    pub degree_bound: usize,
}

impl SamplingPlan {
    /// Default plan for classes truncated at `degree`: samples
    /// `r = R₀ + 2j` for `j = 0..=2·degree+1` with
    /// `R₀ = 2(Σ|a_i| + k(2g−2+n)) + 2`, degree bound `2·degree`, and two
    /// held-out samples.
    pub fn default_for(a: &RamificationVector, degree: i64) -> Self {
        let d = degree.max(0) as usize;
        let s: i64 = a.a.iter().map(|x| x.abs()).sum();
        let r0 = 2 * (s + a.k.abs() * (2 * a.g as i64 - 2 + a.n() as i64)) + 2;
        SamplingPlan {
            r0,
            step: 2,
            fit: 2 * d + 2,
            holdout: 2,
            degree_bound: 2 * d,
        }
    }

    /// A plan of the same shape whose samples are disjoint from (and above)
    /// those of `self`.
    pub fn disjoint_successor(&self) -> Self {
        SamplingPlan {
            r0: self.r0 + self.step * (self.fit + self.holdout) as i64,
            ..self.clone()
        }
    }

    /// Fit samples.
    pub fn fit_samples(&self) -> Vec<i64> {
        (0..self.fit).map(|j| self.r0 + self.step * j as i64).collect()
    }

    /// Held-out samples.
    pub fn holdout_samples(&self) -> Vec<i64> {
        (self.fit..self.fit + self.holdout)
            .map(|j| self.r0 + self.step * j as i64)
            .collect()
    }
}

/// Record of an interpolation run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleLog {
    /// The plan used.
    pub plan: SamplingPlan,
    /// Fit samples.
    pub fit_samples: Vec<i64>,
    /// Held-out samples.
    pub holdout_samples: Vec<i64>,
    /// Whether the spin variant was computed.
    pub spin: bool,
    /// Number of graphs summed over.
    pub graphs: usize,
    /// Number of (graph, edge-exponent pattern) scalars interpolated.
    pub scalars: usize,
    /// Largest degree in `r` observed among the interpolated scalars.
    pub max_r_degree: usize,
    /// Whether every held-out sample matched.
    pub verified: bool,
}

/// A class whose coefficients are polynomials in `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RPolyClass {
    ambient: Ambient,
    terms: BTreeMap<String, (Term, UniPoly)>,
    log: SampleLog,
}

impl RPolyClass {
    /// The ambient space.
    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// Terms with their polynomial coefficients, keyed canonically.
    pub fn terms(&self) -> impl Iterator<Item = (&String, &Term, &UniPoly)> {
        self.terms.iter().map(|(k, (t, p))| (k, t, p))
    }

    /// Interpolation record.
    pub fn log(&self) -> &SampleLog {
        &self.log
    }

    /// Specialisation at `r`.
    pub fn eval(&self, r: &Rational) -> DecoratedClass {
        let mut c = DecoratedClass::zero(self.ambient.clone());
        for (t, p) in self.terms.values() {
            c.add_term(t.clone(), p.eval(r));
        }
        c
    }

    /// Whether two polynomial classes agree coefficient-wise.
    pub fn same_polynomials(&self, other: &RPolyClass) -> bool {
        self.ambient == other.ambient
            && self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .all(|(k, (_, p))| other.terms.get(k).is_some_and(|(_, q)| p == q))
    }

    /// JSON rendering with polynomial coefficients as strings.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .values()
            .map(|(t, p)| {
                serde_json::json!({
                    "graph": t.graph.to_json(),
                    "psi": t.psi.iter().map(|(h, e)| (h.to_string(), *e)).collect::<BTreeMap<_, _>>(),
                    "kappa": t.kappa,
                    "coeff_poly": p.coeffs().iter().map(format_rational).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "terms": terms, "log": self.log })
    }
}

/// Interpolates `P^r(a)` (or its spin variant), truncated to degree
/// `≤ degree`, as a polynomial in `r` using the default sampling plan.
pub fn pixton_p_poly(a: &RamificationVector, degree: i64, spin: bool) -> Result<RPolyClass> {
    pixton_p_poly_with(a, degree, spin, &SamplingPlan::default_for(a, degree))
}

/// [`pixton_p_poly`] with an explicit sampling plan.
pub fn pixton_p_poly_with(
    a: &RamificationVector,
    degree: i64,
    spin: bool,
    plan: &SamplingPlan,
) -> Result<RPolyClass> {
    if spin {
        check_spin(a, None)?;
        if plan.r0 % 2 != 0 || plan.step % 2 != 0 {
            return Err(Error::Precondition("the spin variant needs even r samples".into()));
        }
    }
    if plan.r0 < 1 || plan.step < 1 || plan.fit == 0 {
        return Err(Error::Precondition("invalid sampling plan".into()));
    }
    let ambient = a.ambient();
    let fit = plan.fit_samples();
    let holdout = plan.holdout_samples();
    let graphs = graphs_for(a, degree);
    let mut log = SampleLog {
        plan: plan.clone(),
        fit_samples: fit.clone(),
        holdout_samples: holdout.clone(),
        spin,
        graphs: graphs.len(),
        scalars: 0,
        max_r_degree: 0,
        verified: true,
    };
    let mut terms: BTreeMap<String, (Term, UniPoly)> = BTreeMap::new();
    let mut failures = Vec::new();
    for graph in &graphs {
        let pats = patterns(graph.num_edges(), degree);
        if pats.is_empty() {
            continue;
        }
        // Moment sums for every pattern at every sample.
        let all: Vec<i64> = fit.iter().chain(&holdout).copied().collect();
        let mut values: Vec<Vec<Rational>> = vec![Vec::with_capacity(all.len()); pats.len()];
        for &r in &all {
            let mut sums = vec![BigInt::zero(); pats.len()];
            for_each_weighting(graph, a, r, spin, |w| {
                let prods: Vec<BigInt> = graph
                    .edges()
                    .iter()
                    .map(|(h, hp)| BigInt::from(w[h] * w[hp]))
                    .collect();
                for (s, pat) in sums.iter_mut().zip(&pats) {
                    let mut x = BigInt::one();
                    for (p, &m) in prods.iter().zip(pat) {
                        x *= p.pow(m);
                    }
                    *s += x;
                }
            });
            let pre = prefactor(graph, r, spin);
            for (vals, s) in values.iter_mut().zip(sums) {
                vals.push(&pre * Rational::from_integer(s));
            }
        }
        for (pat, vals) in pats.iter().zip(values) {
            if vals.iter().all(Zero::is_zero) {
                continue;
            }
            let points: Vec<(Rational, Rational)> = fit
                .iter()
                .zip(&vals)
                .map(|(&r, v)| (int(r), v.clone()))
                .collect();
            let poly = lagrange_interpolate(&points)?;
            let deg = poly.degree().unwrap_or(0);
            log.max_r_degree = log.max_r_degree.max(deg);
            log.scalars += 1;
            if deg > plan.degree_bound {
                failures.push(format!(
                    "graph {} pattern {:?}: degree {deg} exceeds bound {}",
                    graph.canonical_key(),
                    pat,
                    plan.degree_bound
                ));
            }
            for (&r, v) in holdout.iter().zip(&vals[fit.len()..]) {
                if poly.eval(&int(r)) != *v {
                    failures.push(format!("pattern {pat:?}: held-out sample r = {r} disagrees"));
                }
            }
            let class = pattern_class(graph, a, pat, degree, &ambient);
            for (key, term, c) in class.keyed_terms() {
                let entry = terms
                    .entry(key.clone())
                    .or_insert_with(|| (term.clone(), UniPoly::zero()));
                entry.1 = entry.1.add(&poly.scale(c));
            }
        }
    }
    terms.retain(|_, (_, p)| !p.is_zero());
    if !failures.is_empty() {
        log.verified = false;
        let log_json = serde_json::to_string(&log).unwrap_or_default();
        return Err(Error::Interpolation(format!(
            "{}; sample log: {log_json}",
            failures.join("; ")
        )));
    }
    Ok(RPolyClass {
        ambient,
        terms,
        log,
    })
}

/// The k-twisted double ramification cycle `DR_g(a) = 2^{−g} P^g_g(a)`,
/// together with the interpolation log.
pub fn dr_cycle_with_log(a: &RamificationVector, spin: bool) -> Result<(DecoratedClass, SampleLog)> {
    let g = a.g as i64;
    let poly = pixton_p_poly(a, g, spin)?;
    let class = poly
        .eval(&Rational::zero())
        .degree_part(g)
        .scale(&Rational::new(BigInt::one(), BigInt::from(2).pow(a.g)));
    Ok((class, poly.log))
}

/// The k-twisted double ramification cycle of degree `g`.
pub fn dr_cycle(a: &[i64], g: u32, k: i64) -> Result<DecoratedClass> {
    let rv = RamificationVector::new(g, k, a.to_vec())?;
    Ok(dr_cycle_with_log(&rv, false)?.0)
}

/// The spin double ramification cycle (`k = 1`); every entry must be odd.
pub fn spin_dr_cycle(a: &[i64], g: u32) -> Result<DecoratedClass> {
    let rv = RamificationVector::new(g, 1, a.to_vec())?;
    check_spin(&rv, None)?;
    Ok(dr_cycle_with_log(&rv, true)?.0)
}

/// Star-graph side of the spin double ramification formula for `k = 1`:
/// the sum over simple star graphs with odd prongs of
/// `Π κ_e / |Aut Δ| · ξ_{Δ*}(Π_top [H_top]^spin ⊗ [H_center]^spin)`,
/// including the trivial graph (the spin stratum class itself).
pub fn conjecture_rhs(mu: &[i64], g: u32) -> Result<DecoratedClass> {
    let sig = Signature::abelian(g, mu.to_vec())?;
    if !sig.is_even_type() {
        return Err(Error::Precondition("signature must be of even type".into()));
    }
    if sig.is_holomorphic() {
        return Err(Error::Precondition("signature must be meromorphic".into()));
    }
    star_graph_sum(&sig, Variant::Spin)
}

/// Renames the legs of a class on `M̄_{g,n}` by `leg ↦ map[leg]`.
pub fn permute_legs(class: &DecoratedClass, map: &HashMap<HalfEdge, HalfEdge>) -> DecoratedClass {
    class.relabel_legs(map, class.ambient().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::taut::complementary_probes;

    fn rv(g: u32, k: i64, a: &[i64]) -> RamificationVector {
        RamificationVector::new(g, k, a.to_vec()).unwrap()
    }

    fn self_loop() -> StableGraph {
        StableGraph::new(vec![0], vec![vec![1, 10, 11]], vec![(10, 11)]).unwrap()
    }

    #[test]
    fn ramification_vector_validation() {
        assert!(RamificationVector::new(1, 1, vec![3, -1]).is_ok());
        assert!(RamificationVector::new(1, 1, vec![3, 1]).is_err());
        assert!(RamificationVector::new(0, 1, vec![1, 1]).is_err());
        assert!(rv(1, 1, &[3, -1]).is_spin_admissible());
        assert!(!rv(1, 1, &[4, -2]).is_spin_admissible());
    }

    #[test]
    fn self_loop_has_r_weightings() {
        let a = rv(1, 1, &[1]);
        for r in 1..8 {
            assert_eq!(admissible_weightings(&self_loop(), &a, r, false).len(), r as usize);
        }
    }

    #[test]
    fn self_loop_odd_weightings_are_half() {
        let a = rv(1, 1, &[1]);
        for r in [2, 4, 6, 8] {
            assert_eq!(
                admissible_weightings(&self_loop(), &a, r, true).len(),
                (r / 2) as usize
            );
        }
    }

    #[test]
    fn weightings_satisfy_the_conditions() {
        let a = rv(1, 1, &[5, -3]);
        for g in stable_graphs_cached(1, &[1, 2], 3).iter() {
            for r in [3, 5, 6] {
                let ws = admissible_weightings(g, &a, r, false);
                assert_eq!(ws.len(), (r as usize).pow(g.h1() as u32));
                for w in &ws {
                    assert_eq!(w.w[&1], 5i64.rem_euclid(r));
                    assert_eq!(w.w[&2], (-3i64).rem_euclid(r));
                    for &(h, hp) in g.edges() {
                        assert_eq!((w.w[&h] + w.w[&hp]) % r, 0);
                    }
                    for v in 0..g.num_vertices() {
                        let s: i64 = g.half_edges()[v].iter().map(|h| w.w[h]).sum();
                        let t = 2 * g.genera()[v] as i64 - 2 + g.valence(v) as i64;
                        assert_eq!((s - t).rem_euclid(r), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_graph_contribution() {
        let a = rv(1, 1, &[3, -1]);
        let g = StableGraph::smooth(1, &[1, 2]);
        let w = admissible_weightings(&g, &a, 5, false).pop().unwrap();
        let c = contribution_class(&a, &g, &w, 1);
        let amb = a.ambient();
        assert_eq!(c.degree_part(0), DecoratedClass::fundamental(amb.clone()));
        let mut expected = DecoratedClass::kappa(amb.clone(), 1).scale(&int(-1));
        expected.add_scaled(&DecoratedClass::psi(amb.clone(), 1), &int(9));
        expected.add_scaled(&DecoratedClass::psi(amb, 2), &int(1));
        assert_eq!(c.degree_part(1), expected);
    }

    #[test]
    fn one_edge_leading_coefficient() {
        let a = rv(1, 1, &[1]);
        let w = AdmissibleWeighting {
            w: BTreeMap::from([(1, 1), (10, 2), (11, 3)]),
        };
        let c = contribution_class(&a, &self_loop(), &w, 1);
        let amb = a.ambient();
        let expected = DecoratedClass::graph_class(amb, self_loop()).unwrap().scale(&int(6));
        assert_eq!(c, expected);
    }

    #[test]
    fn genus_zero_is_fundamental() {
        let a = rv(0, 1, &[2, 1, 0, -1]);
        let p = pixton_p_poly(&a, 1, false).unwrap();
        assert_eq!(
            p.eval(&Rational::zero()).degree_part(0),
            DecoratedClass::fundamental(a.ambient())
        );
        assert_eq!(
            dr_cycle(&[2, 1, 0, -1], 0, 1).unwrap(),
            DecoratedClass::fundamental(a.ambient())
        );
    }

    #[test]
    fn dr_of_zero_vector_is_minus_lambda_one() {
        // DR_1(0, 0) with k = 0 is −λ₁, and ∫_{M̄_{1,2}} λ₁ψ₁ = 1/24.
        let dr = dr_cycle(&[0, 0], 1, 0).unwrap();
        let x = dr.mul_psi(1, 1).integrate();
        assert_eq!(x, rat(-1, 24));
        // On M̄_{1,1}: ∫ DR_1(1) = −1/24 for k = 1 by the loop sum alone.
        assert_eq!(dr_cycle(&[1], 1, 1).unwrap().integrate(), rat(-1, 24));
    }

    #[test]
    fn poly_specialises_to_literal_sum() {
        let a = rv(1, 1, &[3, -1]);
        let p = pixton_p_poly(&a, 1, false).unwrap();
        for r in p.log().fit_samples.iter().take(2).chain(&p.log().holdout_samples) {
            assert_eq!(p.eval(&int(*r)), pixton_p(&a, *r, 1, false).unwrap());
        }
        let s = pixton_p_poly(&a, 1, true).unwrap();
        let r = s.log().holdout_samples[0];
        assert_eq!(s.eval(&int(r)), pixton_p(&a, r, 1, true).unwrap());
    }

    #[test]
    fn disjoint_sample_sets_agree() {
        let a = rv(1, 1, &[5, -3]);
        let plan = SamplingPlan::default_for(&a, 1);
        let p1 = pixton_p_poly_with(&a, 1, true, &plan).unwrap();
        let p2 = pixton_p_poly_with(&a, 1, true, &plan.disjoint_successor()).unwrap();
        assert!(p1.same_polynomials(&p2));
    }

    #[test]
    fn dr_has_pure_degree_g() {
        let dr = dr_cycle(&[3, -1], 1, 1).unwrap();
        assert_eq!(dr.degrees(), vec![1]);
    }

    #[test]
    fn spin_rejects_even_entries() {
        assert!(spin_dr_cycle(&[4, -2], 1).is_err());
        assert!(pixton_p(&rv(1, 1, &[3, -1]), 5, 1, true).is_err());
    }

    #[test]
    fn spin_trivial_graph_prefactor() {
        // At g = 1 the trivial graph carries 1/2, so the degree-0 part of the
        // spin P is 1/2 · [M̄_{1,2}].
        let a = rv(1, 1, &[3, -1]);
        let p = pixton_p_poly(&a, 1, true).unwrap();
        assert_eq!(
            p.eval(&Rational::zero()).degree_part(0),
            DecoratedClass::fundamental(a.ambient()).scale(&rat(1, 2))
        );
    }

    #[test]
    fn permutation_equivariance() {
        let a = rv(1, 1, &[5, -3]);
        let b = a.permuted(&[2, 1]);
        let swap = HashMap::from([(1, 2), (2, 1)]);
        let da = permute_legs(&dr_cycle(&a.a, 1, 1).unwrap(), &swap);
        let db = dr_cycle(&b.a, 1, 1).unwrap();
        let probes = complementary_probes(&a.ambient(), 1);
        assert_eq!(da.fingerprint(&probes), db.fingerprint(&probes));
    }

    #[test]
    fn spin_dr_matches_star_graph_side() {
        for mu in [vec![2i64, -2], vec![4, -4]] {
            let a: Vec<i64> = mu.iter().map(|m| m + 1).collect();
            let lhs = spin_dr_cycle(&a, 1).unwrap();
            let rhs = conjecture_rhs(&mu, 1).unwrap();
            let probes = complementary_probes(lhs.ambient(), 1);
            assert_eq!(lhs.fingerprint(&probes), rhs.fingerprint(&probes), "{mu:?}");
        }
    }

    #[test]
    fn conjecture_rhs_rejects_odd_entries() {
        assert!(conjecture_rhs(&[3, -3], 1).is_err());
        assert!(conjecture_rhs(&[0, 0], 1).is_err());
    }
}
