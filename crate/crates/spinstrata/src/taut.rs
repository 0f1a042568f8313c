//! Tautological classes represented as rational combinations of decorated
//! stable graphs, with exact intersection products and integration.
//!
//! A term `(G, ψ, κ)` stands for the pushforward `ξ_{G*}(Π ψ_h^{e_h} Π κ[v])`
//! along the gluing map of `G` (no automorphism factor).  Classes may live on
//! a product of moduli spaces (an [`Ambient`] with several factors); a term
//! graph then has one connected component per factor.
//!
//! Class equality is decided numerically: two classes of the same degree
//! are compared through their pairings with a spanning set of decorated
//! strata of complementary degree (see [`decorated_strata`]).

use crate::algebra::{
    format_rational, int, solve_rational_system, RatMatrix, Rational, SolveOutcome,
};
use crate::correlator::correlator;
use crate::error::{Error, Result};
use crate::graph::{
    canonicalize, enumerate_gamma_structures, enumerate_stable_graphs_with_legs, HalfEdge,
    StableGraph,
};
use itertools::Itertools;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};

/// First label used for internal half-edges of canonical terms.  Leg labels
/// of every ambient must stay below this value.
pub const TERM_BASE: HalfEdge = 1000;

/// One factor `M̄_{g, legs}` of an ambient space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Factor {
    /// Genus.
    pub g: u32,
    /// Sorted leg labels.
    pub legs: Vec<HalfEdge>,
}

impl Factor {
    /// Builds a factor, sorting the legs.
    pub fn new(g: u32, legs: &[HalfEdge]) -> Self {
        let mut legs = legs.to_vec();
        legs.sort_unstable();
        Factor { g, legs }
    }

    /// Dimension `3g − 3 + n`.
    pub fn dim(&self) -> i64 {
        3 * self.g as i64 - 3 + self.legs.len() as i64
    }

    /// Whether `2g − 2 + n > 0`.
    pub fn is_stable(&self) -> bool {
        2 * self.g as i64 - 2 + self.legs.len() as i64 > 0
    }
}

/// A product of moduli spaces of stable curves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ambient {
    /// The factors.
    pub factors: Vec<Factor>,
}

impl Ambient {
    /// The single space `M̄_{g, legs}`.
    pub fn single(g: u32, legs: &[HalfEdge]) -> Self {
        Ambient {
            factors: vec![Factor::new(g, legs)],
        }
    }

    /// `M̄_{g,n}` with legs `1..=n`.
    pub fn mgn(g: u32, n: u32) -> Self {
        let legs: Vec<HalfEdge> = (1..=n).collect();
        Self::single(g, &legs)
    }

    /// Product of the given factors.
    pub fn product(factors: Vec<Factor>) -> Self {
        Ambient { factors }
    }

    /// Total dimension.
    pub fn dim(&self) -> i64 {
        self.factors.iter().map(Factor::dim).sum()
    }

    /// Factor index carrying the leg `h`.
    pub fn factor_of(&self, h: HalfEdge) -> Option<usize> {
        self.factors.iter().position(|f| f.legs.contains(&h))
    }

    /// All leg labels.
    pub fn all_legs(&self) -> Vec<HalfEdge> {
        let mut v: Vec<HalfEdge> = self.factors.iter().flat_map(|f| f.legs.clone()).collect();
        v.sort_unstable();
        v
    }

    /// Concatenation of two ambients.
    pub fn concat(&self, other: &Ambient) -> Ambient {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ambient { factors }
    }

    fn check(&self) -> Result<()> {
        let legs = self.all_legs();
        if legs.iter().any(|&h| h >= TERM_BASE) {
            return Err(Error::Precondition(format!(
                "leg labels must be below {TERM_BASE}"
            )));
        }
        if legs.iter().dedup().count() != legs.len() {
            return Err(Error::Precondition("repeated leg label in ambient".into()));
        }
        if self.factors.iter().any(|f| !f.is_stable()) {
            return Err(Error::Precondition("unstable ambient factor".into()));
        }
        Ok(())
    }
}

/// A decorated graph: graph, ψ-exponents on half-edges, and κ-index
/// multisets on vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    /// Underlying graph (one component per ambient factor).
    pub graph: StableGraph,
    /// ψ-exponents keyed by half-edge (zero exponents omitted).
    pub psi: BTreeMap<HalfEdge, u32>,
    /// Sorted κ indices per vertex; `[1, 1]` means `κ₁²`.
    pub kappa: Vec<Vec<u32>>,
}

impl Term {
    /// Undecorated term of a graph.
    pub fn bare(graph: StableGraph) -> Self {
        let n = graph.num_vertices();
        Term {
            graph,
            psi: BTreeMap::new(),
            kappa: vec![Vec::new(); n],
        }
    }

    /// Cohomological degree.
    pub fn degree(&self) -> i64 {
        self.graph.num_edges() as i64
            + self.psi.values().map(|&e| e as i64).sum::<i64>()
            + self.kappa.iter().flatten().map(|&a| a as i64).sum::<i64>()
    }

    /// Decoration degree at vertex `v`.
    fn vertex_degree(&self, v: usize) -> i64 {
        self.graph.half_edges()[v]
            .iter()
            .map(|h| *self.psi.get(h).unwrap_or(&0) as i64)
            .sum::<i64>()
            + self.kappa[v].iter().map(|&a| a as i64).sum::<i64>()
    }

    /// Whether some vertex carries more decoration than its dimension,
    /// which makes the term zero.
    fn is_trivially_zero(&self) -> bool {
        (0..self.graph.num_vertices()).any(|v| {
            let dim = 3 * self.graph.genera()[v] as i64 - 3 + self.graph.valence(v) as i64;
            self.vertex_degree(v) > dim
        })
    }

    /// Canonical form and its key.
    pub fn canonical(&self) -> (String, Term) {
        let vcolor: Vec<Vec<i64>> = self
            .kappa
            .iter()
            .map(|k| {
                let mut k: Vec<i64> = k.iter().map(|&a| a as i64).collect();
                k.sort_unstable();
                k
            })
            .collect();
        let hcolor: HashMap<HalfEdge, i64> =
            self.psi.iter().map(|(&h, &e)| (h, e as i64)).collect();
        let c = canonicalize(&self.graph, &vcolor, &hcolor, TERM_BASE);
        let term = Term {
            graph: c.graph,
            psi: c
                .half_edge_colors
                .iter()
                .map(|(&h, &e)| (h, e as u32))
                .collect(),
            kappa: c
                .vertex_colors
                .iter()
                .map(|k| k.iter().map(|&a| a as u32).collect())
                .collect(),
        };
        (c.key, term)
    }

    /// Integral of the term over its (product) ambient: the product over
    /// vertices of the ψ–κ correlators.
    pub fn integrate(&self) -> Rational {
        let mut acc = Rational::one();
        for v in 0..self.graph.num_vertices() {
            let psi: Vec<u32> = self.graph.half_edges()[v]
                .iter()
                .map(|h| *self.psi.get(h).unwrap_or(&0))
                .collect();
            let val = correlator(self.graph.genera()[v], &psi, &self.kappa[v])
                .expect("stable vertex");
            if val.is_zero() {
                return val;
            }
            acc *= val;
        }
        acc
    }

    /// Shifts internal half-edge labels by `offset`.
    fn shift_internal(&self, offset: HalfEdge) -> Term {
        let marks: HashSet<HalfEdge> = self.graph.markings().into_iter().collect();
        let map: HashMap<HalfEdge, HalfEdge> = self
            .graph
            .half_edges()
            .iter()
            .flatten()
            .filter(|h| !marks.contains(h))
            .map(|&h| (h, h + offset))
            .collect();
        self.relabel(&map)
    }

    /// Renames half-edges.
    pub fn relabel(&self, map: &HashMap<HalfEdge, HalfEdge>) -> Term {
        Term {
            graph: self.graph.relabel(map),
            psi: self
                .psi
                .iter()
                .map(|(h, &e)| (*map.get(h).unwrap_or(h), e))
                .collect(),
            kappa: self.kappa.clone(),
        }
    }

    /// Connected component containing the given legs, as a stand-alone term.
    fn component_with(&self, leg: HalfEdge) -> Term {
        let comps = self.graph.components();
        let v0 = self.graph.vertex_of(leg).expect("leg present");
        let comp = comps.into_iter().find(|c| c.contains(&v0)).expect("component");
        self.restrict_to(&comp)
    }

    fn restrict_to(&self, verts: &[usize]) -> Term {
        let hs: HashSet<HalfEdge> = verts
            .iter()
            .flat_map(|&v| self.graph.half_edges()[v].iter().copied())
            .collect();
        let graph = StableGraph::new(
            verts.iter().map(|&v| self.graph.genera()[v]).collect(),
            verts.iter().map(|&v| self.graph.half_edges()[v].clone()).collect(),
            self.graph
                .edges()
                .iter()
                .copied()
                .filter(|(a, _)| hs.contains(a))
                .collect(),
        )
        .expect("restriction of a valid graph");
        Term {
            graph,
            psi: self
                .psi
                .iter()
                .filter(|(h, _)| hs.contains(h))
                .map(|(&h, &e)| (h, e))
                .collect(),
            kappa: verts.iter().map(|&v| self.kappa[v].clone()).collect(),
        }
    }

    /// Splits a term on a product ambient into one term per factor.
    pub fn split(&self, ambient: &Ambient) -> Vec<Term> {
        if ambient.factors.len() == 1 {
            return vec![self.clone()];
        }
        ambient
            .factors
            .iter()
            .map(|f| self.component_with(f.legs[0]))
            .collect()
    }

    /// Human readable description.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for v in 0..self.graph.num_vertices() {
            let parts: Vec<String> = self.graph.half_edges()[v]
                .iter()
                .map(|h| match self.psi.get(h) {
                    Some(e) => format!("{h}^{e}"),
                    None => format!("{h}"),
                })
                .collect();
            s.push_str(&format!("[g{}:{}", self.graph.genera()[v], parts.join(",")));
            if !self.kappa[v].is_empty() {
                s.push_str(&format!(";k{:?}", self.kappa[v]));
            }
            s.push(']');
        }
        for (a, b) in self.graph.edges() {
            s.push_str(&format!(" {a}-{b}"));
        }
        s
    }
}

/// A formal rational combination of decorated graphs on an ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedClass {
    ambient: Ambient,
    terms: BTreeMap<String, (Term, Rational)>,
}

impl DecoratedClass {
    /// The zero class.
    pub fn zero(ambient: Ambient) -> Self {
        DecoratedClass {
            ambient,
            terms: BTreeMap::new(),
        }
    }

    /// The fundamental class.
    pub fn fundamental(ambient: Ambient) -> Self {
        let graph = fundamental_graph(&ambient);
        let mut c = Self::zero(ambient);
        c.add_term(Term::bare(graph), Rational::one());
        c
    }

    /// The class of a single term with coefficient `coeff`.
    pub fn from_term(ambient: Ambient, term: Term, coeff: Rational) -> Result<Self> {
        ambient.check()?;
        validate_term(&ambient, &term)?;
        let mut c = Self::zero(ambient);
        c.add_term(term, coeff);
        Ok(c)
    }

    /// `ξ_{G*}[1]` for a graph `G` of the ambient.
    pub fn graph_class(ambient: Ambient, graph: StableGraph) -> Result<Self> {
        Self::from_term(ambient, Term::bare(graph), Rational::one())
    }

    /// `ψ_leg` on the ambient.
    pub fn psi(ambient: Ambient, leg: HalfEdge) -> Self {
        Self::fundamental(ambient).mul_psi(leg, 1)
    }

    /// `κ_a` on a single-factor ambient.
    pub fn kappa(ambient: Ambient, a: u32) -> Self {
        Self::fundamental(ambient).mul_kappa(0, a)
    }

    /// The ambient space.
    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// Terms with coefficients in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.terms.values().map(|(t, c)| (t, c))
    }

    /// Terms keyed by their canonical key.
    pub fn keyed_terms(&self) -> impl Iterator<Item = (&String, &Term, &Rational)> {
        self.terms.iter().map(|(k, (t, c))| (k, t, c))
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether the class has no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · term`, canonicalising and merging duplicates.
    pub fn add_term(&mut self, term: Term, coeff: Rational) {
        if coeff.is_zero() || term.is_trivially_zero() {
            return;
        }
        let (key, t) = term.canonical();
        match self.terms.get_mut(&key) {
            Some((_, c)) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, (t, coeff));
            }
        }
    }

    /// `self + other` (ambients must agree).
    pub fn add(&self, other: &DecoratedClass) -> DecoratedClass {
        debug_assert_eq!(self.ambient, other.ambient);
        let mut out = self.clone();
        for (t, c) in other.terms() {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    /// In-place `self += c · other`.
    pub fn add_scaled(&mut self, other: &DecoratedClass, c: &Rational) {
        debug_assert_eq!(self.ambient, other.ambient);
        for (t, k) in other.terms() {
            self.add_term(t.clone(), k * c);
        }
    }

    /// `c · self`.
    pub fn scale(&self, c: &Rational) -> DecoratedClass {
        let mut out = Self::zero(self.ambient.clone());
        if c.is_zero() {
            return out;
        }
        for (k, (t, x)) in &self.terms {
            out.terms.insert(k.clone(), (t.clone(), x * c));
        }
        out
    }

    /// `−self`.
    pub fn neg(&self) -> DecoratedClass {
        self.scale(&-Rational::one())
    }

    /// Set of term degrees.
    pub fn degrees(&self) -> Vec<i64> {
        self.terms().map(|(t, _)| t.degree()).unique().sorted().collect()
    }

    /// The degree if the class is homogeneous and non-zero.
    pub fn degree(&self) -> Option<i64> {
        match self.degrees().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Part of cohomological degree `d`.
    pub fn degree_part(&self, d: i64) -> DecoratedClass {
        let mut out = Self::zero(self.ambient.clone());
        for (k, (t, c)) in &self.terms {
            if t.degree() == d {
                out.terms.insert(k.clone(), (t.clone(), c.clone()));
            }
        }
        out
    }

    /// Multiplies by `ψ_leg^e`.
    pub fn mul_psi(&self, leg: HalfEdge, e: u32) -> DecoratedClass {
        let mut out = Self::zero(self.ambient.clone());
        for (t, c) in self.terms() {
            let mut t = t.clone();
            *t.psi.entry(leg).or_insert(0) += e;
            out.add_term(t, c.clone());
        }
        out
    }

    /// Multiplies by `κ_a` of the given factor (a sum over its vertices).
    pub fn mul_kappa(&self, factor: usize, a: u32) -> DecoratedClass {
        let mut out = Self::zero(self.ambient.clone());
        let leg = self.ambient.factors[factor].legs.first().copied();
        for (t, c) in self.terms() {
            let verts: Vec<usize> = match leg {
                Some(l) if self.ambient.factors.len() > 1 => {
                    let v0 = t.graph.vertex_of(l).expect("leg");
                    t.graph
                        .components()
                        .into_iter()
                        .find(|comp| comp.contains(&v0))
                        .expect("component")
                }
                _ => (0..t.graph.num_vertices()).collect(),
            };
            for v in verts {
                let mut t2 = t.clone();
                t2.kappa[v].push(a);
                t2.kappa[v].sort_unstable();
                out.add_term(t2, c.clone());
            }
        }
        out
    }

    /// Integral over the ambient (only top-degree terms contribute).
    pub fn integrate(&self) -> Rational {
        let dim = self.ambient.dim();
        self.terms()
            .filter(|(t, _)| t.degree() == dim)
            .map(|(t, c)| c * t.integrate())
            .sum()
    }

    /// Exterior product on the concatenated ambient.
    pub fn tensor(&self, other: &DecoratedClass) -> DecoratedClass {
        let ambient = self.ambient.concat(&other.ambient);
        let mut out = Self::zero(ambient);
        for (ta, ca) in self.terms() {
            let offset = ta.graph.max_label() + 1;
            for (tb, cb) in other.terms() {
                let tb = tb.shift_internal(offset);
                let graph = ta.graph.disjoint_union(&tb.graph).expect("disjoint labels");
                let mut psi = ta.psi.clone();
                psi.extend(tb.psi.iter().map(|(&h, &e)| (h, e)));
                let mut kappa = ta.kappa.clone();
                kappa.extend(tb.kappa.iter().cloned());
                out.add_term(Term { graph, psi, kappa }, ca * cb);
            }
        }
        out
    }

    /// Pushforward along the gluing map that joins the given leg pairs into
    /// edges; `target` is the resulting ambient.
    pub fn glue(&self, pairs: &[(HalfEdge, HalfEdge)], target: Ambient) -> Result<DecoratedClass> {
        target.check()?;
        let mut out = Self::zero(target.clone());
        for (t, c) in self.terms() {
            // Move internal labels out of the way of glued legs.
            let t = t.shift_internal(TERM_BASE);
            let mut graph = t.graph.clone();
            for &(a, b) in pairs {
                graph = graph.with_edge(a, b)?;
            }
            let term = Term {
                graph,
                psi: t.psi.clone(),
                kappa: t.kappa.clone(),
            };
            validate_term(&target, &term)?;
            out.add_term(term, c.clone());
        }
        Ok(out)
    }

    /// Renames legs according to `map` and replaces the ambient.
    pub fn relabel_legs(&self, map: &HashMap<HalfEdge, HalfEdge>, target: Ambient) -> DecoratedClass {
        let mut out = Self::zero(target);
        for (t, c) in self.terms() {
            let t = t.shift_internal(TERM_BASE);
            out.add_term(t.relabel(map), c.clone());
        }
        out
    }

    /// Intersection product with another class on the same ambient.
    pub fn product(&self, other: &DecoratedClass) -> Result<DecoratedClass> {
        if self.ambient != other.ambient {
            return Err(Error::Precondition("product of classes on different ambients".into()));
        }
        let mut out = Self::zero(self.ambient.clone());
        let dim = self.ambient.dim();
        for (ta, ca) in self.terms() {
            for (tb, cb) in other.terms() {
                if ta.degree() + tb.degree() > dim {
                    continue;
                }
                let pa = ta.split(&self.ambient);
                let pb = tb.split(&self.ambient);
                let mut acc = Self::zero(Ambient::product(Vec::new()));
                let mut first = true;
                for (i, f) in self.ambient.factors.iter().enumerate() {
                    let amb = Ambient::single(f.g, &f.legs);
                    let mut part = Self::zero(amb);
                    for (t, c) in term_product(&pa[i], &pb[i]).iter() {
                        part.add_term(t.clone(), c.clone());
                    }
                    acc = if first { part } else { acc.tensor(&part) };
                    first = false;
                }
                out.add_scaled(&DecoratedClass { ambient: self.ambient.clone(), terms: acc.terms }, &(ca * cb));
            }
        }
        Ok(out)
    }

    /// `∫ self · probe` for a probe given per factor.
    pub fn pair(&self, probe: &[Term]) -> Rational {
        let mut total = Rational::zero();
        for (t, c) in self.terms() {
            let parts = t.split(&self.ambient);
            let mut val = c.clone();
            for (i, part) in parts.iter().enumerate() {
                if part.degree() + probe[i].degree() != self.ambient.factors[i].dim() {
                    val = Rational::zero();
                    break;
                }
                val *= pair_terms(part, &probe[i]);
                if val.is_zero() {
                    break;
                }
            }
            total += val;
        }
        total
    }

    /// Vector of pairings with every probe.
    pub fn fingerprint(&self, probes: &[Vec<Term>]) -> Vec<Rational> {
        probes.iter().map(|p| self.pair(p)).collect()
    }

    /// JSON representation.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms()
            .map(|(t, c)| {
                let vm = t.graph.vertex_map();
                let psi: BTreeMap<String, u32> =
                    t.psi.iter().map(|(h, e)| (h.to_string(), *e)).collect();
                let kappa: BTreeMap<String, Vec<u32>> = t
                    .kappa
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| !k.is_empty())
                    .map(|(v, k)| (v.to_string(), k.clone()))
                    .collect();
                let _ = vm;
                serde_json::json!({
                    "coeff": format_rational(c),
                    "graph": t.graph.to_json(),
                    "psi": psi,
                    "kappa": kappa,
                })
            })
            .collect();
        let mut obj = serde_json::json!({ "terms": terms });
        if self.ambient.factors.len() == 1 {
            obj["g"] = self.ambient.factors[0].g.into();
            obj["n"] = self.ambient.factors[0].legs.len().into();
            obj["legs"] = serde_json::json!(self.ambient.factors[0].legs);
        } else {
            obj["factors"] = serde_json::json!(self.ambient.factors);
        }
        obj
    }

    /// Human readable one-line rendering.
    pub fn describe(&self) -> String {
        if self.is_empty() {
            return "0".into();
        }
        self.terms()
            .map(|(t, c)| format!("({}) {}", format_rational(c), t.describe()))
            .join(" + ")
    }
}

/// The disjoint union of smooth vertices of an ambient.
pub fn fundamental_graph(ambient: &Ambient) -> StableGraph {
    StableGraph::new(
        ambient.factors.iter().map(|f| f.g).collect(),
        ambient.factors.iter().map(|f| f.legs.clone()).collect(),
        Vec::new(),
    )
    .expect("distinct legs")
}

fn validate_term(ambient: &Ambient, term: &Term) -> Result<()> {
    let g = &term.graph;
    if term.kappa.len() != g.num_vertices() {
        return Err(Error::InvalidGraph("κ list length differs from vertex count".into()));
    }
    let comps = g.components();
    if comps.len() != ambient.factors.len() {
        return Err(Error::InvalidGraph(format!(
            "{} components for {} factors",
            comps.len(),
            ambient.factors.len()
        )));
    }
    for f in &ambient.factors {
        let sub = if ambient.factors.len() == 1 {
            term.clone()
        } else {
            match f.legs.first() {
                Some(&l) if g.vertex_of(l).is_some() => term.component_with(l),
                _ => return Err(Error::InvalidGraph("factor legs missing".into())),
            }
        };
        if sub.graph.markings() != f.legs || sub.graph.genus() != f.g {
            return Err(Error::InvalidGraph(format!(
                "component does not match factor (g={}, legs={:?})",
                f.g, f.legs
            )));
        }
    }
    if !crate::graph::is_stable(g) {
        return Err(Error::InvalidGraph("unstable vertex in term".into()));
    }
    Ok(())
}

type GraphCacheKey = (u32, Vec<HalfEdge>, usize);
static GRAPH_CACHE: Lazy<Mutex<HashMap<GraphCacheKey, Arc<Vec<StableGraph>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached enumeration of the stable graphs of `M̄_{g,legs}` with at most
/// `max_edges` edges.
pub fn stable_graphs_cached(g: u32, legs: &[HalfEdge], max_edges: usize) -> Arc<Vec<StableGraph>> {
    let key = (g, legs.to_vec(), max_edges);
    if let Some(v) = GRAPH_CACHE.lock().expect("cache poisoned").get(&key) {
        return v.clone();
    }
    let v = Arc::new(
        enumerate_stable_graphs_with_legs(g, legs, max_edges).expect("stable (g, n)"),
    );
    GRAPH_CACHE
        .lock()
        .expect("cache poisoned")
        .insert(key, v.clone());
    v
}

/// A monomial of decorations on a fixed graph.
#[derive(Clone, Debug)]
struct Monomial {
    coeff: Rational,
    psi: BTreeMap<HalfEdge, u32>,
    kappa: Vec<Vec<u32>>,
}

fn mono_mul(a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
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
            out.push(Monomial {
                coeff: &x.coeff * &y.coeff,
                psi,
                kappa,
            });
        }
    }
    out
}

/// Pulls back the decorations of `src` along a structure on `target`
/// given by the vertex map `fv` (target vertex → src vertex) and
/// half-edge map `fh` (src half-edge → target half-edge).
fn pull_back_decorations(
    src: &Term,
    target: &StableGraph,
    fv: &[usize],
    fh: &BTreeMap<HalfEdge, HalfEdge>,
) -> Vec<Monomial> {
    let nv = target.num_vertices();
    let mut psi = BTreeMap::new();
    for (h, &e) in &src.psi {
        psi.insert(fh[h], e);
    }
    let mut result = vec![Monomial {
        coeff: Rational::one(),
        psi,
        kappa: vec![Vec::new(); nv],
    }];
    for (v, ks) in src.kappa.iter().enumerate() {
        let pre: Vec<usize> = (0..nv).filter(|&w| fv[w] == v).collect();
        for &a in ks {
            let factor: Vec<Monomial> = pre
                .iter()
                .map(|&w| {
                    let mut kappa = vec![Vec::new(); nv];
                    kappa[w].push(a);
                    Monomial {
                        coeff: Rational::one(),
                        psi: BTreeMap::new(),
                        kappa,
                    }
                })
                .collect();
            result = mono_mul(&result, &factor);
        }
    }
    result
}

type ProductKey = (String, String);
static PRODUCT_MEMO: Lazy<Mutex<HashMap<ProductKey, Arc<Vec<(Term, Rational)>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));
static PAIR_MEMO: Lazy<Mutex<HashMap<ProductKey, Rational>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Intersection product of two decorated graphs on a connected ambient,
/// via the excess intersection formula over generic common degenerations.
pub fn term_product(a: &Term, b: &Term) -> Arc<Vec<(Term, Rational)>> {
    let (ka, ta) = a.canonical();
    let (kb, tb) = b.canonical();
    let key = if ka <= kb {
        (ka.clone(), kb.clone())
    } else {
        (kb.clone(), ka.clone())
    };
    if let Some(v) = PRODUCT_MEMO.lock().expect("memo poisoned").get(&key) {
        return v.clone();
    }
    let value = Arc::new(term_product_uncached(&ta, &tb));
    PRODUCT_MEMO
        .lock()
        .expect("memo poisoned")
        .insert(key, value.clone());
    value
}

fn term_product_uncached(a: &Term, b: &Term) -> Vec<(Term, Rational)> {
    let mut out = DecoratedClass::zero(Ambient::product(Vec::new()));
    // Fast paths when one side is a decorated smooth curve.
    for (x, y) in [(a, b), (b, a)] {
        if x.graph.num_edges() == 0 {
            let nv = y.graph.num_vertices();
            let fv = vec![0usize; nv];
            let fh: BTreeMap<HalfEdge, HalfEdge> =
                x.graph.markings().into_iter().map(|h| (h, h)).collect();
            let base = Monomial {
                coeff: Rational::one(),
                psi: y.psi.clone(),
                kappa: y.kappa.clone(),
            };
            for m in mono_mul(&[base], &pull_back_decorations(x, &y.graph, &fv, &fh)) {
                out.add_term(
                    Term {
                        graph: y.graph.clone(),
                        psi: m.psi,
                        kappa: m.kappa,
                    },
                    m.coeff,
                );
            }
            return out.terms.into_values().collect();
        }
    }
    let g = a.graph.genus();
    let legs = a.graph.markings();
    let ea = a.graph.num_edges();
    let eb = b.graph.num_edges();
    let dim = 3 * g as i64 - 3 + legs.len() as i64;
    if a.degree() + b.degree() > dim {
        return Vec::new();
    }
    let candidates = stable_graphs_cached(g, &legs, ea + eb);
    for c in candidates.iter() {
        let ec = c.num_edges();
        if ec < ea.max(eb) || ec > ea + eb {
            continue;
        }
        let sa = enumerate_gamma_structures(c, &a.graph);
        if sa.is_empty() {
            continue;
        }
        let sb = enumerate_gamma_structures(c, &b.graph);
        if sb.is_empty() {
            continue;
        }
        let aut = Rational::from_integer(c.automorphism_order().into());
        let edge_index: HashMap<HalfEdge, usize> = c
            .edges()
            .iter()
            .enumerate()
            .flat_map(|(i, &(p, q))| [(p, i), (q, i)])
            .collect();
        for fa in &sa {
            let img_a: HashSet<usize> = a
                .graph
                .edges()
                .iter()
                .map(|(p, _)| edge_index[&fa.half_edge_map[p]])
                .collect();
            for fb in &sb {
                let img_b: HashSet<usize> = b
                    .graph
                    .edges()
                    .iter()
                    .map(|(p, _)| edge_index[&fb.half_edge_map[p]])
                    .collect();
                if img_a.union(&img_b).count() != ec {
                    continue;
                }
                let mut monos = mono_mul(
                    &pull_back_decorations(a, c, &fa.vertex_map, &fa.half_edge_map),
                    &pull_back_decorations(b, c, &fb.vertex_map, &fb.half_edge_map),
                );
                for &e in img_a.intersection(&img_b) {
                    let (p, q) = c.edges()[e];
                    let nv = c.num_vertices();
                    let excess: Vec<Monomial> = [p, q]
                        .iter()
                        .map(|&h| Monomial {
                            coeff: -Rational::one(),
                            psi: [(h, 1)].into_iter().collect(),
                            kappa: vec![Vec::new(); nv],
                        })
                        .collect();
                    monos = mono_mul(&monos, &excess);
                }
                for m in monos {
                    out.add_term(
                        Term {
                            graph: c.clone(),
                            psi: m.psi,
                            kappa: m.kappa,
                        },
                        m.coeff / &aut,
                    );
                }
            }
        }
    }
    out.terms.into_values().collect()
}

/// `∫ a · b` for two decorated graphs on the same connected ambient.
pub fn pair_terms(a: &Term, b: &Term) -> Rational {
    let g = a.graph.genus();
    let dim = 3 * g as i64 - 3 + a.graph.markings().len() as i64;
    if a.degree() + b.degree() != dim {
        return Rational::zero();
    }
    let (ka, _) = a.canonical();
    let (kb, _) = b.canonical();
    let key = if ka <= kb { (ka, kb) } else { (kb, ka) };
    if let Some(v) = PAIR_MEMO.lock().expect("memo poisoned").get(&key) {
        return v.clone();
    }
    let value: Rational = term_product(a, b)
        .iter()
        .map(|(t, c)| c * t.integrate())
        .sum();
    PAIR_MEMO
        .lock()
        .expect("memo poisoned")
        .insert(key, value.clone());
    value
}

/// All decorated strata of cohomological degree `degree` on `M̄_{g,legs}`
/// (graphs with at most `degree` edges, all ψ/κ decorations), skipping
/// terms that vanish for dimension reasons.  They span the tautological
/// group of that degree.
pub fn decorated_strata(g: u32, legs: &[HalfEdge], degree: i64) -> Vec<Term> {
    let dim = 3 * g as i64 - 3 + legs.len() as i64;
    if degree < 0 || degree > dim {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for graph in stable_graphs_cached(g, legs, degree as usize).iter() {
        let rest = degree - graph.num_edges() as i64;
        if rest < 0 {
            continue;
        }
        let hs: Vec<HalfEdge> = graph.half_edges().iter().flatten().copied().collect();
        let nv = graph.num_vertices();
        // Distribute `rest` among vertices, then within a vertex among
        // ψ-exponents and a κ partition.
        for per_vertex in compositions(rest as u32, nv) {
            let mut options: Vec<Vec<(BTreeMap<HalfEdge, u32>, Vec<u32>)>> = Vec::new();
            let mut feasible = true;
            for v in 0..nv {
                let vdim = 3 * graph.genera()[v] as i64 - 3 + graph.valence(v) as i64;
                if per_vertex[v] as i64 > vdim {
                    feasible = false;
                    break;
                }
                options.push(vertex_decorations(&graph.half_edges()[v], per_vertex[v]));
            }
            if !feasible {
                continue;
            }
            for choice in options.iter().map(|o| o.iter()).multi_cartesian_product() {
                let mut psi = BTreeMap::new();
                let mut kappa = Vec::new();
                for (p, k) in &choice {
                    psi.extend(p.iter().map(|(&h, &e)| (h, e)));
                    kappa.push(k.clone());
                }
                let t = Term {
                    graph: graph.clone(),
                    psi,
                    kappa,
                };
                let (key, t) = t.canonical();
                if seen.insert(key) {
                    out.push(t);
                }
            }
            if nv == 0 {
                break;
            }
        }
        let _ = &hs;
    }
    out
}

/// Compositions of `total` into `parts` non-negative parts.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Partitions of `n` into positive parts (non-increasing).
fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All decorations of total degree `d` at a vertex with half-edges `hs`.
fn vertex_decorations(hs: &[HalfEdge], d: u32) -> Vec<(BTreeMap<HalfEdge, u32>, Vec<u32>)> {
    let mut out = Vec::new();
    for kdeg in 0..=d {
        for part in partitions(kdeg, kdeg) {
            let mut kappa = part.clone();
            kappa.sort_unstable();
            for comp in compositions(d - kdeg, hs.len()) {
                let psi: BTreeMap<HalfEdge, u32> = hs
                    .iter()
                    .zip(&comp)
                    .filter(|(_, &e)| e > 0)
                    .map(|(&h, &e)| (h, e))
                    .collect();
                out.push((psi, kappa.clone()));
            }
        }
    }
    out
}

/// Tensor probes of total degree `degree` on an ambient: tuples of
/// per-factor decorated strata.
pub fn product_probes(ambient: &Ambient, degree: i64) -> Vec<Vec<Term>> {
    let dims: Vec<i64> = ambient.factors.iter().map(Factor::dim).collect();
    let mut out = Vec::new();
    if degree < 0 {
        return out;
    }
    for split in compositions(degree as u32, ambient.factors.len()) {
        if split.iter().zip(&dims).any(|(&d, &m)| d as i64 > m) {
            continue;
        }
        let lists: Vec<Vec<Term>> = ambient
            .factors
            .iter()
            .zip(&split)
            .map(|(f, &d)| decorated_strata(f.g, &f.legs, d as i64))
            .collect();
        if lists.iter().any(|l| l.is_empty()) {
            continue;
        }
        for combo in lists.iter().map(|l| l.iter()).multi_cartesian_product() {
            out.push(combo.into_iter().cloned().collect());
        }
    }
    out
}

/// Probes of complementary degree for classes of degree `degree`.
pub fn complementary_probes(ambient: &Ambient, degree: i64) -> Vec<Vec<Term>> {
    product_probes(ambient, ambient.dim() - degree)
}

/// Whether two classes on the same ambient have identical fingerprints
/// against every complementary probe.
pub fn numerically_equal(a: &DecoratedClass, b: &DecoratedClass) -> bool {
    let diff = a.add(&b.neg());
    diff.degrees().iter().all(|&d| {
        let probes = complementary_probes(&diff.ambient, d);
        diff.degree_part(d).fingerprint(&probes).iter().all(|x| x.is_zero())
    })
}

/// Report returned by [`express_in_span`] on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanFailure {
    /// The target is not in the span of the candidates (numerically).
    NotInSpan,
    /// The candidates are dependent modulo the probes; the kernel is given.
    NonUnique(Vec<Vec<Rational>>),
}

/// Solves `fingerprint(target) = Σ cᵢ fingerprint(candidateᵢ)`.
pub fn express_in_span(
    target: &DecoratedClass,
    candidates: &[DecoratedClass],
    probes: &[Vec<Term>],
) -> std::result::Result<Vec<Rational>, SpanFailure> {
    let rhs = target.fingerprint(probes);
    let cols: Vec<Vec<Rational>> = candidates.iter().map(|c| c.fingerprint(probes)).collect();
    let rows: Vec<Vec<Rational>> = (0..probes.len())
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect();
    let m = if rows.is_empty() {
        RatMatrix::zeros(0, candidates.len())
    } else {
        RatMatrix::from_rows(rows).expect("rectangular")
    };
    match solve_rational_system(&m, &rhs).expect("dimensions agree") {
        SolveOutcome::Unique(x) => Ok(x),
        SolveOutcome::Inconsistent => Err(SpanFailure::NotInSpan),
        SolveOutcome::NonUnique { kernel, .. } => Err(SpanFailure::NonUnique(kernel)),
    }
}

/// Convenience: the rational `n`.
pub fn q(n: i64) -> Rational {
    int(n)
}
