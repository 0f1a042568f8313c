//! Signatures, generalised strata with residue conditions, and two-level
//! graphs.
//!
//! A *generalised stratum* is a product of strata of k-differentials, one per
//! component, together with linear residue conditions: each condition is a
//! set `S` of pole labels and imposes `Σ_{p∈S} res_p = 0`.  Residues are
//! only tracked for abelian differentials (`k = 1`).
//!
//! A *level graph* is a stable graph whose vertices carry a level (`0` top,
//! `-1` bottom) and whose half-edges carry the order of the differential at
//! the corresponding point.  At a vertical edge the enhancement is
//! `κ = m_top + k = −m_bottom − k`; horizontal edges join two simple poles.

use crate::algebra::{lcm_list, rat, RatMatrix, Rational};
use crate::error::{Error, Result};
use crate::graph::{canonicalize, HalfEdge, StableGraph, UnionFind};
use crate::taut::{stable_graphs_cached, Ambient, Factor, TERM_BASE};
use num_traits::Zero;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// A signature `μ = (m_1, …, m_n)` of a stratum of k-differentials of
/// genus `g`; leg `i` carries `m_i` and is labelled `i` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    /// Genus.
    pub g: u32,
    /// Order `k` of the differentials.
    pub k: i64,
    /// Orders of the marked points.
    pub orders: Vec<i64>,
}

impl Signature {
    /// Builds a signature, checking `Σ m_i = k(2g − 2)` and `n ≥ 1`.
    pub fn new(g: u32, k: i64, orders: Vec<i64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::EmptyInput("signature"));
        }
        if k < 1 {
            return Err(Error::NonPositive(k));
        }
        let sum: i64 = orders.iter().sum();
        let expected = k * (2 * g as i64 - 2);
        if sum != expected {
            return Err(Error::InvalidSignature(format!(
                "orders sum to {sum}, expected k(2g-2) = {expected}"
            )));
        }
        if orders.len() as u32 >= TERM_BASE {
            return Err(Error::InvalidSignature("too many marked points".into()));
        }
        Ok(Signature { g, k, orders })
    }

    /// Abelian signature (`k = 1`).
    pub fn abelian(g: u32, orders: Vec<i64>) -> Result<Self> {
        Self::new(g, 1, orders)
    }

    /// Number of marked points.
    pub fn n(&self) -> usize {
        self.orders.len()
    }

    /// Whether every order is a non-negative multiple of `k`.
    pub fn is_holomorphic(&self) -> bool {
        self.orders.iter().all(|&m| m >= 0 && m % self.k == 0)
    }

    /// Whether every order is even, i.e. the stratum carries a spin
    /// structure (for abelian differentials).
    pub fn is_even_type(&self) -> bool {
        self.orders.iter().all(|m| m % 2 == 0)
    }

    /// The DR vector `a_i = m_i + k`.
    pub fn dr_vector(&self) -> Vec<i64> {
        self.orders.iter().map(|m| m + self.k).collect()
    }

    /// The stratum with no residue conditions, legs labelled `1..=n`.
    pub fn stratum(&self) -> GenStratum {
        GenStratum {
            k: self.k,
            components: vec![Component::new(
                self.g,
                self.orders
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| (i as HalfEdge + 1, m))
                    .collect(),
            )],
            residues: Vec::new(),
        }
    }
}

/// One connected component of a generalised stratum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Component {
    /// Genus.
    pub g: u32,
    /// `(label, order)` pairs, sorted by label.
    pub legs: Vec<(HalfEdge, i64)>,
}

impl Component {
    /// Builds a component, sorting its legs.
    pub fn new(g: u32, mut legs: Vec<(HalfEdge, i64)>) -> Self {
        legs.sort_unstable();
        Component { g, legs }
    }

    /// Leg labels.
    pub fn labels(&self) -> Vec<HalfEdge> {
        self.legs.iter().map(|l| l.0).collect()
    }

    /// Whether no leg is a pole.
    pub fn is_holomorphic(&self) -> bool {
        self.legs.iter().all(|l| l.1 >= 0)
    }
}

/// A generalised stratum: components plus residue conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GenStratum {
    /// Order `k` of the differentials.
    pub k: i64,
    /// The components.
    pub components: Vec<Component>,
    /// Residue conditions: each part `S` imposes `Σ_{p∈S} res_p = 0`.
    pub residues: Vec<Vec<HalfEdge>>,
}

impl GenStratum {
    /// Builds and validates a generalised stratum.  Parts are sorted and
    /// empty parts dropped.
    pub fn new(k: i64, components: Vec<Component>, residues: Vec<Vec<HalfEdge>>) -> Result<Self> {
        let mut s = GenStratum {
            k,
            components,
            residues: Vec::new(),
        };
        s.set_residues(residues);
        s.validate()?;
        Ok(s)
    }

    /// Replaces the residue conditions (normalising their order).
    pub fn with_residues(&self, residues: Vec<Vec<HalfEdge>>) -> Result<Self> {
        Self::new(self.k, self.components.clone(), residues)
    }

    fn set_residues(&mut self, residues: Vec<Vec<HalfEdge>>) {
        let mut parts: Vec<Vec<HalfEdge>> = residues
            .into_iter()
            .filter(|p| !p.is_empty())
            .map(|mut p| {
                p.sort_unstable();
                p.dedup();
                p
            })
            .collect();
        parts.sort();
        parts.dedup();
        self.residues = parts;
    }

    fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::EmptyInput("stratum components"));
        }
        let mut seen = HashSet::new();
        for c in &self.components {
            let sum: i64 = c.legs.iter().map(|l| l.1).sum();
            if sum != self.k * (2 * c.g as i64 - 2) {
                return Err(Error::InvalidSignature(format!(
                    "component of genus {} has orders summing to {sum}",
                    c.g
                )));
            }
            if 2 * c.g as i64 - 2 + c.legs.len() as i64 <= 0 {
                return Err(Error::InvalidSignature(format!(
                    "unstable component (g={}, n={})",
                    c.g,
                    c.legs.len()
                )));
            }
            for &(h, _) in &c.legs {
                if h >= TERM_BASE || !seen.insert(h) {
                    return Err(Error::InvalidSignature(format!("bad leg label {h}")));
                }
            }
        }
        for p in &self.residues {
            for h in p {
                match self.order_of(*h) {
                    Some(m) if m < 0 => {}
                    _ => {
                        return Err(Error::InvalidSignature(format!(
                            "residue condition on non-pole {h}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Order of the differential at a leg.
    pub fn order_of(&self, h: HalfEdge) -> Option<i64> {
        self.components
            .iter()
            .flat_map(|c| c.legs.iter())
            .find(|l| l.0 == h)
            .map(|l| l.1)
    }

    /// Component index carrying a leg.
    pub fn component_of(&self, h: HalfEdge) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.legs.iter().any(|l| l.0 == h))
    }

    /// All leg labels, sorted.
    pub fn labels(&self) -> Vec<HalfEdge> {
        let mut v: Vec<HalfEdge> = self.components.iter().flat_map(|c| c.labels()).collect();
        v.sort_unstable();
        v
    }

    /// Largest leg label.
    pub fn max_label(&self) -> HalfEdge {
        self.labels().into_iter().max().unwrap_or(0)
    }

    /// Pole labels (order `< 0`), sorted.
    pub fn poles(&self) -> Vec<HalfEdge> {
        let mut v: Vec<HalfEdge> = self
            .components
            .iter()
            .flat_map(|c| c.legs.iter().filter(|l| l.1 < 0).map(|l| l.0))
            .collect();
        v.sort_unstable();
        v
    }

    /// Simple-pole labels (order `−k`), sorted.
    pub fn simple_poles(&self) -> Vec<HalfEdge> {
        let k = self.k;
        let mut v: Vec<HalfEdge> = self
            .components
            .iter()
            .flat_map(|c| c.legs.iter().filter(move |l| l.1 == -k).map(|l| l.0))
            .collect();
        v.sort_unstable();
        v
    }

    /// Whether every order is even or a simple pole, and the simple poles
    /// are matched in pairs by two-element residue conditions.
    pub fn admits_spin(&self) -> bool {
        if self.k != 1 {
            return false;
        }
        let odd_ok = self
            .components
            .iter()
            .flat_map(|c| c.legs.iter())
            .all(|l| l.1 % 2 == 0 || l.1 == -1);
        if !odd_ok {
            return false;
        }
        let simple = self.simple_poles();
        let mut matched = BTreeSet::new();
        for p in self.pairing_parts() {
            matched.insert(p[0]);
            matched.insert(p[1]);
        }
        simple.iter().all(|h| matched.contains(h))
    }

    /// Residue conditions that pair two simple poles.
    pub fn pairing_parts(&self) -> Vec<Vec<HalfEdge>> {
        let simple: HashSet<HalfEdge> = self.simple_poles().into_iter().collect();
        self.residues
            .iter()
            .filter(|p| p.len() == 2 && p.iter().all(|h| simple.contains(h)))
            .cloned()
            .collect()
    }

    /// Whether the stratum is a single component.
    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// The ambient `Π M̄_{g_ν, legs_ν}`.
    pub fn ambient(&self) -> Ambient {
        Ambient::product(
            self.components
                .iter()
                .map(|c| Factor::new(c.g, &c.labels()))
                .collect(),
        )
    }

    /// Rows of the residue theorem (one per meromorphic component) over the
    /// pole variables.
    fn rt_rows(&self, poles: &[HalfEdge]) -> Vec<Vec<Rational>> {
        self.components
            .iter()
            .filter(|c| !c.is_holomorphic())
            .map(|c| {
                let ls: HashSet<HalfEdge> = c.labels().into_iter().collect();
                poles
                    .iter()
                    .map(|p| if ls.contains(p) { rat(1, 1) } else { Rational::zero() })
                    .collect()
            })
            .collect()
    }

    fn part_rows(&self, parts: &[Vec<HalfEdge>], poles: &[HalfEdge]) -> Vec<Vec<Rational>> {
        parts
            .iter()
            .map(|s| {
                poles
                    .iter()
                    .map(|p| if s.contains(p) { rat(1, 1) } else { Rational::zero() })
                    .collect()
            })
            .collect()
    }

    fn rank_of(rows: Vec<Vec<Rational>>, cols: usize) -> usize {
        if rows.is_empty() || cols == 0 {
            return 0;
        }
        RatMatrix::from_rows(rows).expect("rectangular").rank()
    }

    /// Rank of the residue theorem plus the given conditions.
    fn rank_with(&self, parts: &[Vec<HalfEdge>]) -> usize {
        let poles = self.poles();
        let mut rows = self.rt_rows(&poles);
        rows.extend(self.part_rows(parts, &poles));
        Self::rank_of(rows, poles.len())
    }

    /// Number of residue conditions independent of the residue theorem.
    pub fn extra_conditions(&self) -> usize {
        self.rank_with(&self.residues) - self.rank_with(&[])
    }

    /// Whether the part with index `i` is not implied by the others.
    pub fn is_effective(&self, i: usize) -> bool {
        let mut rest = self.residues.clone();
        rest.remove(i);
        self.rank_with(&self.residues) > self.rank_with(&rest)
    }

    /// Indices of effective residue conditions.
    pub fn effective_parts(&self) -> Vec<usize> {
        (0..self.residues.len()).filter(|&i| self.is_effective(i)).collect()
    }

    /// Dimension of the unprojectivised stratum of abelian differentials,
    /// or `None` for `k ≠ 1`.
    pub fn dim(&self) -> Option<i64> {
        if self.k != 1 {
            return None;
        }
        let base: i64 = self
            .components
            .iter()
            .map(|c| {
                2 * c.g as i64 - 2 + c.legs.len() as i64 + i64::from(c.is_holomorphic())
            })
            .sum();
        Some(base - self.extra_conditions() as i64)
    }

    /// Dimension of the projectivised stratum.
    pub fn proj_dim(&self) -> Option<i64> {
        self.dim().map(|d| d - 1)
    }

    /// Whether a simple pole is forced to have zero residue.
    fn simple_pole_killed(&self) -> bool {
        let poles = self.poles();
        let mut rows = self.rt_rows(&poles);
        rows.extend(self.part_rows(&self.residues, &poles));
        let r = Self::rank_of(rows.clone(), poles.len());
        self.simple_poles().iter().any(|s| {
            let mut ext = rows.clone();
            ext.push(
                poles
                    .iter()
                    .map(|p| if p == s { rat(1, 1) } else { Rational::zero() })
                    .collect(),
            );
            Self::rank_of(ext, poles.len()) == r
        })
    }

    /// Whether the (projectivised) stratum is empty.  Only the dimension
    /// count and the simple-pole residue obstruction are used; for `k ≠ 1`
    /// strata are reported non-empty.
    pub fn is_empty(&self) -> bool {
        match self.proj_dim() {
            None => false,
            Some(d) => d < 0 || self.simple_pole_killed(),
        }
    }

    /// Human-readable rendering, e.g. `H_1(1:4, 2:-2, 3:-2) [r3]`.
    pub fn describe(&self) -> String {
        let comps: Vec<String> = self
            .components
            .iter()
            .map(|c| {
                let legs: Vec<String> = c.legs.iter().map(|(h, m)| format!("{h}:{m}")).collect();
                format!("H_{}({})", c.g, legs.join(", "))
            })
            .collect();
        let mut s = comps.join(" x ");
        if !self.residues.is_empty() {
            let parts: Vec<String> = self
                .residues
                .iter()
                .map(|p| p.iter().map(|h| format!("r{h}")).collect::<Vec<_>>().join("+"))
                .collect();
            s.push_str(&format!(" [{}=0]", parts.join("=0, ")));
        }
        s
    }
}

/// Enhancement of an edge of a level graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enhancement {
    /// Vertical edge with prong number `κ ≥ 1`.
    Vertical(i64),
    /// Horizontal edge joining two simple poles.
    Horizontal,
}

/// Enhancement of an edge from the orders at its two half-edges.
pub fn enhancement_from_orders(m_upper: i64, m_lower: i64, k: i64) -> Result<Enhancement> {
    if m_upper == -k && m_lower == -k {
        return Ok(Enhancement::Horizontal);
    }
    let kappa = m_upper + k;
    if kappa < 1 || m_lower != -m_upper - 2 * k {
        return Err(Error::InvalidGraph(format!(
            "orders ({m_upper}, {m_lower}) do not form an edge"
        )));
    }
    Ok(Enhancement::Vertical(kappa))
}

/// Level of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Level 0.
    Top,
    /// Level −1.
    Bottom,
}

/// A level graph with at most two levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelGraph {
    /// Underlying (possibly disconnected) stable graph.
    pub graph: StableGraph,
    /// Level of every vertex: `0` or `-1`.
    pub levels: Vec<i32>,
    /// Order at every half-edge (legs and edge branches).
    pub orders: BTreeMap<HalfEdge, i64>,
    /// Order of the differentials.
    pub k: i64,
}

/// JSON form of a level graph.
#[derive(Clone, Debug, Serialize)]
pub struct LevelGraphJson {
    /// Vertex genera.
    pub genera: Vec<u32>,
    /// Vertex levels.
    pub levels: Vec<i32>,
    /// Legs per vertex as `(label, order)`.
    pub legs: Vec<Vec<(HalfEdge, i64)>>,
    /// Edges as `(upper half, lower half, κ)`; κ is 0 for horizontal edges.
    pub edges: Vec<(HalfEdge, HalfEdge, i64)>,
    /// `|Aut|`.
    pub automorphisms: u64,
}

impl LevelGraph {
    /// Edges oriented as `(upper half, lower half)`; horizontal edges keep
    /// their stored order.
    pub fn oriented_edges(&self) -> Vec<(HalfEdge, HalfEdge)> {
        let vm = self.graph.vertex_map();
        self.graph
            .edges()
            .iter()
            .map(|&(a, b)| {
                if self.levels[vm[&a]] < self.levels[vm[&b]] {
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect()
    }

    /// Enhancement of every edge, in edge order.
    pub fn enhancements(&self) -> Vec<Enhancement> {
        self.oriented_edges()
            .iter()
            .map(|(a, b)| {
                enhancement_from_orders(self.orders[a], self.orders[b], self.k)
                    .expect("validated level graph")
            })
            .collect()
    }

    /// Prong numbers of the vertical edges.
    pub fn kappas(&self) -> Vec<i64> {
        self.enhancements()
            .into_iter()
            .filter_map(|e| match e {
                Enhancement::Vertical(k) => Some(k),
                Enhancement::Horizontal => None,
            })
            .collect()
    }

    /// Whether every edge is horizontal.
    pub fn is_horizontal(&self) -> bool {
        self.enhancements()
            .iter()
            .all(|e| *e == Enhancement::Horizontal)
    }

    /// `ℓ = lcm(κ_e)` over vertical edges.
    pub fn ell(&self) -> Result<i64> {
        lcm_list(&self.kappas())
    }

    /// Number of prong-matching equivalence classes, `Π κ_e / ℓ`.
    pub fn prong_class_count(&self) -> Result<i64> {
        let ks = self.kappas();
        if ks.is_empty() {
            return Err(Error::Precondition("graph has no vertical edge".into()));
        }
        Ok(ks.iter().product::<i64>() / lcm_list(&ks)?)
    }

    /// Vertices on a level.
    pub fn vertices_at(&self, level: Level) -> Vec<usize> {
        let l = match level {
            Level::Top => 0,
            Level::Bottom => -1,
        };
        (0..self.levels.len()).filter(|&v| self.levels[v] == l).collect()
    }

    /// Level of the vertex carrying a half-edge.
    pub fn level_of(&self, h: HalfEdge) -> Option<Level> {
        let v = self.graph.vertex_of(h)?;
        Some(if self.levels[v] == 0 { Level::Top } else { Level::Bottom })
    }

    fn canonical(&self) -> crate::graph::Canonical {
        let vcolor: Vec<Vec<i64>> = self.levels.iter().map(|&l| vec![l as i64]).collect();
        let hcolor: HashMap<HalfEdge, i64> = self.orders.iter().map(|(&h, &m)| (h, m)).collect();
        let base = self.graph.markings().into_iter().max().unwrap_or(0) + 1;
        canonicalize(&self.graph, &vcolor, &hcolor, base)
    }

    /// Order of the automorphism group preserving levels and orders.
    pub fn automorphism_order(&self) -> u64 {
        self.canonical().aut
    }

    /// Isomorphism-invariant key.
    pub fn canonical_key(&self) -> String {
        self.canonical().key
    }

    /// Canonically relabelled copy.
    pub fn canonical_form(&self) -> LevelGraph {
        let c = self.canonical();
        let mut levels = vec![0; self.levels.len()];
        for (v, &cv) in c.vertex_perm.iter().enumerate() {
            levels[cv] = self.levels[v];
        }
        let orders = self
            .orders
            .iter()
            .map(|(h, &m)| (*c.half_edge_map.get(h).unwrap_or(h), m))
            .collect();
        LevelGraph {
            graph: c.graph,
            levels,
            orders,
            k: self.k,
        }
    }

    /// JSON form.
    pub fn to_json(&self) -> LevelGraphJson {
        let markings: HashSet<HalfEdge> = self.graph.markings().into_iter().collect();
        let legs = (0..self.graph.num_vertices())
            .map(|v| {
                self.graph.half_edges()[v]
                    .iter()
                    .filter(|h| markings.contains(h))
                    .map(|h| (*h, self.orders[h]))
                    .collect()
            })
            .collect();
        let edges = self
            .oriented_edges()
            .into_iter()
            .zip(self.enhancements())
            .map(|((a, b), e)| {
                let kappa = match e {
                    Enhancement::Vertical(k) => k,
                    Enhancement::Horizontal => 0,
                };
                (a, b, kappa)
            })
            .collect();
        LevelGraphJson {
            genera: self.graph.genera().to_vec(),
            levels: self.levels.clone(),
            legs,
            edges,
            automorphisms: self.automorphism_order(),
        }
    }

    /// One-line rendering.
    pub fn describe(&self) -> String {
        let vs: Vec<String> = (0..self.graph.num_vertices())
            .map(|v| {
                let hs: Vec<String> = self.graph.half_edges()[v]
                    .iter()
                    .map(|h| format!("{h}:{}", self.orders[h]))
                    .collect();
                format!("[L{} g{} {}]", self.levels[v], self.graph.genera()[v], hs.join(" "))
            })
            .collect();
        let es: Vec<String> = self
            .oriented_edges()
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect();
        format!("{} edges {}", vs.join(" "), es.join(" "))
    }
}

/// A placement of one component of a stratum into a two-level graph.
struct Placement {
    graph: StableGraph,
    levels: Vec<i32>,
    orders: BTreeMap<HalfEdge, i64>,
}

/// Proper 2-colourings of a connected graph without self-loops.
fn two_colourings(graph: &StableGraph) -> Vec<Vec<i32>> {
    let n = graph.num_vertices();
    let vm = graph.vertex_map();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in graph.edges() {
        let (u, v) = (vm[&a], vm[&b]);
        if u == v {
            return Vec::new();
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut col = vec![-2i32; n];
    col[0] = 0;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if col[v] == -2 {
                col[v] = -1 - col[u];
                stack.push(v);
            } else if col[v] == col[u] {
                return Vec::new();
            }
        }
    }
    if col.iter().any(|&c| c == -2) {
        return Vec::new();
    }
    let flipped = col.iter().map(|&c| -1 - c).collect();
    vec![col, flipped]
}

/// All prong assignments on a bipartite coloured graph solving the vertex
/// equations `Σ orders = k(2g_v − 2)`.
fn solve_prongs(
    graph: &StableGraph,
    levels: &[i32],
    leg_orders: &HashMap<HalfEdge, i64>,
    k: i64,
) -> Vec<BTreeMap<HalfEdge, i64>> {
    let vm = graph.vertex_map();
    let n = graph.num_vertices();
    // Upper half first.
    let edges: Vec<(HalfEdge, HalfEdge)> = graph
        .edges()
        .iter()
        .map(|&(a, b)| if levels[vm[&a]] == 0 { (a, b) } else { (b, a) })
        .collect();
    // Target Σ κ over edges at each vertex.
    let mut need = vec![0i64; n];
    let mut deg = vec![0i64; n];
    for &(a, b) in &edges {
        deg[vm[&a]] += 1;
        deg[vm[&b]] += 1;
    }
    for v in 0..n {
        let legs: i64 = graph.half_edges()[v]
            .iter()
            .filter_map(|h| leg_orders.get(h))
            .sum();
        let rhs = k * (2 * graph.genera()[v] as i64 - 2) - legs;
        // top: Σ(κ − k) = rhs; bottom: Σ(−κ − k) = rhs.
        need[v] = if levels[v] == 0 {
            rhs + k * deg[v]
        } else {
            -rhs - k * deg[v]
        };
    }
    if (0..n).any(|v| need[v] < deg[v]) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut kap = vec![0i64; edges.len()];
    let mut used = vec![0i64; n];
    let mut left = deg.clone();
    fn rec(
        i: usize,
        edges: &[(HalfEdge, HalfEdge)],
        vm: &HashMap<HalfEdge, usize>,
        need: &[i64],
        used: &mut Vec<i64>,
        left: &mut Vec<i64>,
        kap: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if i == edges.len() {
            if used.iter().zip(need).all(|(u, n)| u == n) {
                out.push(kap.clone());
            }
            return;
        }
        let (u, v) = (vm[&edges[i].0], vm[&edges[i].1]);
        left[u] -= 1;
        left[v] -= 1;
        let max = (need[u] - used[u] - left[u]).min(need[v] - used[v] - left[v]);
        for c in 1..=max.max(0) {
            if left[u] == 0 && used[u] + c != need[u] {
                continue;
            }
            if left[v] == 0 && used[v] + c != need[v] {
                continue;
            }
            used[u] += c;
            used[v] += c;
            kap[i] = c;
            rec(i + 1, edges, vm, need, used, left, kap, out);
            used[u] -= c;
            used[v] -= c;
        }
        left[u] += 1;
        left[v] += 1;
    }
    let mut sols = Vec::new();
    rec(0, &edges, &vm, &need, &mut used, &mut left, &mut kap, &mut sols);
    for sol in sols {
        let mut orders: BTreeMap<HalfEdge, i64> =
            leg_orders.iter().map(|(&h, &m)| (h, m)).collect();
        for (&(a, b), &c) in edges.iter().zip(&sol) {
            orders.insert(a, c - k);
            orders.insert(b, -c - k);
        }
        out.push(orders);
    }
    out
}

/// Every way to place one component into a two-level graph (including the
/// smooth placements on either level).
fn component_placements(c: &Component, k: i64) -> Vec<Placement> {
    let labels = c.labels();
    let leg_orders: HashMap<HalfEdge, i64> = c.legs.iter().copied().collect();
    let mut out = Vec::new();
    for lvl in [0, -1] {
        out.push(Placement {
            graph: StableGraph::smooth(c.g, &labels),
            levels: vec![lvl],
            orders: leg_orders.iter().map(|(&h, &m)| (h, m)).collect(),
        });
    }
    let max_edges = (3 * c.g as i64 - 3 + labels.len() as i64).max(0) as usize;
    for graph in stable_graphs_cached(c.g, &labels, max_edges).iter() {
        if graph.num_edges() == 0 {
            continue;
        }
        for levels in two_colourings(graph) {
            for orders in solve_prongs(graph, &levels, &leg_orders, k) {
                out.push(Placement {
                    graph: graph.clone(),
                    levels: levels.clone(),
                    orders,
                });
            }
        }
    }
    out
}

/// Joins per-component placements into one level graph with fresh internal
/// labels above `base`.
fn join_placements(parts: &[&Placement], k: i64, base: HalfEdge) -> Result<LevelGraph> {
    let mut next = base;
    let mut genera = Vec::new();
    let mut half_edges = Vec::new();
    let mut edges = Vec::new();
    let mut levels = Vec::new();
    let mut orders = BTreeMap::new();
    for p in parts {
        let legs: HashSet<HalfEdge> = p.graph.markings().into_iter().collect();
        let mut map = HashMap::new();
        for h in p.graph.half_edges().iter().flatten() {
            if legs.contains(h) {
                map.insert(*h, *h);
            } else {
                map.insert(*h, next);
                next += 1;
            }
        }
        genera.extend_from_slice(p.graph.genera());
        half_edges.extend(
            p.graph
                .half_edges()
                .iter()
                .map(|hs| hs.iter().map(|h| map[h]).collect::<Vec<_>>()),
        );
        edges.extend(p.graph.edges().iter().map(|(a, b)| (map[a], map[b])));
        levels.extend_from_slice(&p.levels);
        orders.extend(p.orders.iter().map(|(h, &m)| (map[h], m)));
    }
    if next >= TERM_BASE {
        return Err(Error::Precondition("too many half-edges for labelling".into()));
    }
    Ok(LevelGraph {
        graph: StableGraph::new(genera, half_edges, edges)?,
        levels,
        orders,
        k,
    })
}

/// Residue conditions of a level stratum.
#[derive(Clone, Debug)]
pub struct LevelExtract {
    /// The level stratum with all its residue conditions.
    pub stratum: GenStratum,
    /// The conditions coming from the global residue condition (a subset
    /// of `stratum.residues`).
    pub grc: Vec<Vec<HalfEdge>>,
}

/// Components of the level stratum at `level`: one per vertex, legs being
/// its half-edges.
fn level_components(lg: &LevelGraph, level: Level) -> Vec<Component> {
    lg.vertices_at(level)
        .into_iter()
        .map(|v| {
            Component::new(
                lg.graph.genera()[v],
                lg.graph.half_edges()[v]
                    .iter()
                    .map(|h| (*h, lg.orders[h]))
                    .collect(),
            )
        })
        .collect()
}

/// Residue conditions of the top level: the parts of `residues` restricted
/// to the top level.
fn top_conditions(lg: &LevelGraph, residues: &[Vec<HalfEdge>]) -> Vec<Vec<HalfEdge>> {
    residues
        .iter()
        .map(|s| {
            s.iter()
                .copied()
                .filter(|h| lg.level_of(*h) == Some(Level::Top))
                .collect::<Vec<_>>()
        })
        .filter(|p| !p.is_empty())
        .collect()
}

/// Residue conditions of the bottom level: inherited parts lying fully on
/// the bottom plus the global residue condition.
///
/// For a top vertex `Y` let `E_Y` be the bottom halves of its edges.  If
/// `Y` has no marked pole, `Σ_{E_Y} res = 0`.  Otherwise the parts of `R`
/// reaching the top and the top vertices carrying marked poles form a
/// linkage graph; for each linked cluster whose top poles are all
/// constrained by `R`, the bottom residues of the cluster's edges together
/// with the bottom parts of its conditions must sum to zero.
fn bottom_conditions(
    lg: &LevelGraph,
    residues: &[Vec<HalfEdge>],
) -> (Vec<Vec<HalfEdge>>, Vec<Vec<HalfEdge>>) {
    let top = lg.vertices_at(Level::Top);
    let is_top = |h: HalfEdge| lg.level_of(h) == Some(Level::Top);
    let markings: HashSet<HalfEdge> = lg.graph.markings().into_iter().collect();
    let mut inherited = Vec::new();
    let mut touching = Vec::new();
    for s in residues {
        if s.iter().any(|&h| is_top(h)) {
            touching.push(s.clone());
        } else {
            inherited.push(s.clone());
        }
    }
    let down_halves = |v: usize| -> Vec<HalfEdge> {
        lg.graph.half_edges()[v]
            .iter()
            .filter_map(|h| lg.graph.partner(*h))
            .collect()
    };
    let poles_of = |v: usize| -> Vec<HalfEdge> {
        lg.graph.half_edges()[v]
            .iter()
            .copied()
            .filter(|h| markings.contains(h) && lg.orders[h] < 0)
            .collect()
    };
    let mut grc = Vec::new();
    // Nodes of the linkage graph: touching parts, then top vertices with poles.
    let pole_vertices: Vec<usize> = top.iter().copied().filter(|&v| !poles_of(v).is_empty()).collect();
    for &v in &top {
        if poles_of(v).is_empty() {
            grc.push(down_halves(v));
        }
    }
    let np = touching.len();
    let mut uf = UnionFind::new(np + pole_vertices.len());
    for (i, s) in touching.iter().enumerate() {
        for (j, &v) in pole_vertices.iter().enumerate() {
            if poles_of(v).iter().any(|h| s.contains(h)) {
                uf.union(i, np + j);
            }
        }
    }
    let constrained: HashSet<HalfEdge> = residues.iter().flatten().copied().collect();
    let mut clusters: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in 0..np {
        clusters.entry(uf.find(i)).or_default().0.push(i);
    }
    for j in 0..pole_vertices.len() {
        clusters.entry(uf.find(np + j)).or_default().1.push(j);
    }
    for (parts, verts) in clusters.values() {
        if parts.is_empty() {
            continue;
        }
        let free = verts
            .iter()
            .any(|&j| poles_of(pole_vertices[j]).iter().any(|h| !constrained.contains(h)));
        if free {
            continue;
        }
        let mut cond: Vec<HalfEdge> = Vec::new();
        for &i in parts {
            cond.extend(touching[i].iter().copied().filter(|&h| !is_top(h)));
        }
        for &j in verts {
            cond.extend(down_halves(pole_vertices[j]));
        }
        grc.push(cond);
    }
    grc.retain(|p| !p.is_empty());
    (inherited, grc)
}

/// The level stratum of `lg` at `level`, inside the ambient stratum with
/// residue conditions `residues`, with or without the global residue
/// condition.
pub fn level_stratum(
    lg: &LevelGraph,
    residues: &[Vec<HalfEdge>],
    level: Level,
    with_grc: bool,
) -> Result<LevelExtract> {
    let comps = level_components(lg, level);
    if comps.is_empty() {
        return Err(Error::Precondition("empty level".into()));
    }
    let (parts, grc) = match level {
        Level::Top => (top_conditions(lg, residues), Vec::new()),
        Level::Bottom => {
            let (inh, grc) = bottom_conditions(lg, residues);
            if with_grc {
                let mut all = inh;
                all.extend(grc.iter().cloned());
                (all, grc)
            } else {
                (inh, Vec::new())
            }
        }
    };
    let stratum = GenStratum::new(lg.k, comps, parts)?;
    let grc = grc
        .into_iter()
        .map(|mut p| {
            p.sort_unstable();
            p
        })
        .collect();
    Ok(LevelExtract { stratum, grc })
}

/// Extracts the level stratum of a level graph of `ambient` (with GRC).
pub fn extract_level_stratum(ambient: &GenStratum, lg: &LevelGraph, level: Level) -> Result<LevelExtract> {
    level_stratum(lg, &ambient.residues, level, true)
}

/// All two-level graphs with one or more vertical edges (and no horizontal
/// edges) of a generalised stratum, one per isomorphism class, keeping
/// those whose level strata are non-empty before the global residue
/// condition is imposed.
pub fn enumerate_two_level_graphs(stratum: &GenStratum) -> Result<Vec<LevelGraph>> {
    let k = stratum.k;
    let per_comp: Vec<Vec<Placement>> = stratum
        .components
        .iter()
        .map(|c| component_placements(c, k))
        .collect();
    let base = stratum.max_label() + 1;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut idx = vec![0usize; per_comp.len()];
    loop {
        let parts: Vec<&Placement> = idx.iter().zip(&per_comp).map(|(&i, p)| &p[i]).collect();
        let has_top = parts.iter().any(|p| p.levels.contains(&0));
        let has_bottom = parts.iter().any(|p| p.levels.contains(&-1));
        let has_edge = parts.iter().any(|p| p.graph.num_edges() > 0);
        if has_top && has_bottom && has_edge {
            let lg = join_placements(&parts, k, base)?.canonical_form();
            let key = lg.canonical_key();
            if !seen.contains(&key) && levels_nonempty(&lg, &stratum.residues)? {
                seen.insert(key);
                out.push(lg);
            }
        }
        // Advance the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == idx.len() {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < per_comp[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn levels_nonempty(lg: &LevelGraph, residues: &[Vec<HalfEdge>]) -> Result<bool> {
    for level in [Level::Top, Level::Bottom] {
        if level_stratum(lg, residues, level, false)?.stratum.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Graphs with a single horizontal edge: a self-node on a component of
/// positive genus, or a separating node between two simple poles.  The
/// level stratum (one level) carries the extra condition
/// `res_h + res_h' = 0`.
pub fn enumerate_horizontal_one_edge(stratum: &GenStratum) -> Result<Vec<LevelGraph>> {
    let k = stratum.k;
    let base = stratum.max_label() + 1;
    let (h, hp) = (base, base + 1);
    if hp >= TERM_BASE {
        return Err(Error::Precondition("too many half-edges for labelling".into()));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (ci, c) in stratum.components.iter().enumerate() {
        let mut pieces: Vec<Placement> = Vec::new();
        let orders: BTreeMap<HalfEdge, i64> = c
            .legs
            .iter()
            .copied()
            .chain([(h, -k), (hp, -k)])
            .collect();
        if c.g >= 1 {
            let mut legs = c.labels();
            legs.extend([h, hp]);
            pieces.push(Placement {
                graph: StableGraph::new(vec![c.g - 1], vec![legs], vec![(h, hp)])?,
                levels: vec![0],
                orders: orders.clone(),
            });
        }
        let n = c.legs.len();
        for mask in 0..(1u64 << n) {
            let a: Vec<(HalfEdge, i64)> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| c.legs[i]).collect();
            let b: Vec<(HalfEdge, i64)> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| c.legs[i]).collect();
            for g1 in 0..=c.g {
                let g2 = c.g - g1;
                let sa: i64 = a.iter().map(|l| l.1).sum::<i64>() - k;
                if sa != k * (2 * g1 as i64 - 2) {
                    continue;
                }
                if 2 * g1 as i64 - 1 + a.len() as i64 <= 0 || 2 * g2 as i64 - 1 + b.len() as i64 <= 0 {
                    continue;
                }
                let mut la: Vec<HalfEdge> = a.iter().map(|l| l.0).collect();
                la.push(h);
                let mut lb: Vec<HalfEdge> = b.iter().map(|l| l.0).collect();
                lb.push(hp);
                pieces.push(Placement {
                    graph: StableGraph::new(vec![g1, g2], vec![la, lb], vec![(h, hp)])?,
                    levels: vec![0, 0],
                    orders: orders.clone(),
                });
            }
        }
        for piece in pieces {
            let mut parts: Vec<Placement> = Vec::new();
            for (cj, d) in stratum.components.iter().enumerate() {
                if cj == ci {
                    continue;
                }
                parts.push(Placement {
                    graph: StableGraph::smooth(d.g, &d.labels()),
                    levels: vec![0],
                    orders: d.legs.iter().copied().collect(),
                });
            }
            let mut graph = piece.graph.clone();
            let mut levels = piece.levels.clone();
            let mut ords = piece.orders.clone();
            for p in &parts {
                graph = graph.disjoint_union(&p.graph)?;
                levels.extend_from_slice(&p.levels);
                ords.extend(p.orders.iter().map(|(a, b)| (*a, *b)));
            }
            let lg = LevelGraph { graph, levels, orders: ords, k };
            let key = lg.canonical_key();
            if seen.insert(key) {
                let ex = horizontal_level_stratum(stratum, &lg)?;
                if !ex.is_empty() {
                    out.push(lg);
                }
            }
        }
    }
    Ok(out)
}

/// The single level stratum of a graph with only horizontal edges: its
/// vertices, the inherited conditions and `res_h + res_h' = 0` per edge.
pub fn horizontal_level_stratum(ambient: &GenStratum, lg: &LevelGraph) -> Result<GenStratum> {
    let comps = level_components(lg, Level::Top);
    let mut parts = ambient.residues.clone();
    parts.extend(lg.graph.edges().iter().map(|&(a, b)| vec![a, b]));
    GenStratum::new(lg.k, comps, parts)
}

/// Two-level graphs of `ambient` in which removing the condition `removed`
/// from `ambient.residues ∪ {removed}` imposes no extra condition on the
/// top level.
pub fn lg_removed_condition_free(
    ambient: &GenStratum,
    removed: &[HalfEdge],
) -> Result<Vec<LevelGraph>> {
    let mut with = ambient.residues.clone();
    with.push(removed.to_vec());
    let mut out = Vec::new();
    for lg in enumerate_two_level_graphs(ambient)? {
        let top0 = level_stratum(&lg, &ambient.residues, Level::Top, true)?.stratum;
        let top1 = level_stratum(&lg, &with, Level::Top, true)?.stratum;
        if top0.extra_conditions() == top1.extra_conditions() {
            out.push(lg);
        }
    }
    Ok(out)
}

/// Two-level graphs of `ambient` with the reference leg on the bottom level.
pub fn lg_reference_bottom(ambient: &GenStratum, reference: HalfEdge) -> Result<Vec<LevelGraph>> {
    Ok(enumerate_two_level_graphs(ambient)?
        .into_iter()
        .filter(|lg| lg.level_of(reference) == Some(Level::Bottom))
        .collect())
}

/// Two-level graphs of `ambient` on which the two simple poles `a`, `b`
/// lie on the top level and the condition `res_a + res_b = 0` is implied
/// there.
pub fn lg_pair_on_top_free(ambient: &GenStratum, a: HalfEdge, b: HalfEdge) -> Result<Vec<LevelGraph>> {
    Ok(lg_removed_condition_free(ambient, &[a, b])?
        .into_iter()
        .filter(|lg| lg.level_of(a) == Some(Level::Top) && lg.level_of(b) == Some(Level::Top))
        .collect())
}

/// Two-level graphs of `ambient` with `a` on the top and `b` on the bottom.
pub fn lg_pair_split(ambient: &GenStratum, a: HalfEdge, b: HalfEdge) -> Result<Vec<LevelGraph>> {
    Ok(enumerate_two_level_graphs(ambient)?
        .into_iter()
        .filter(|lg| lg.level_of(a) == Some(Level::Top) && lg.level_of(b) == Some(Level::Bottom))
        .collect())
}

/// Simple star graphs of a signature: one bottom vertex (the centre), every
/// top vertex carrying only legs of non-negative order, all vertical, with
/// all orders at top vertices divisible by `k`.  With `odd_only`, every
/// prong is odd.  The trivial graph is not included.
pub fn simple_star_graphs(sig: &Signature, odd_only: bool) -> Result<Vec<LevelGraph>> {
    let stratum = sig.stratum();
    let mut out = Vec::new();
    for lg in enumerate_two_level_graphs(&stratum)? {
        let bottom = lg.vertices_at(Level::Bottom);
        if bottom.len() != 1 {
            continue;
        }
        let top = lg.vertices_at(Level::Top);
        let markings: HashSet<HalfEdge> = lg.graph.markings().into_iter().collect();
        let ok = top.iter().all(|&v| {
            lg.graph.half_edges()[v].iter().all(|h| {
                let m = lg.orders[h];
                (!markings.contains(h) || m >= 0) && m % sig.k == 0
            })
        });
        if !ok {
            continue;
        }
        if odd_only && lg.kappas().iter().any(|k| k % 2 == 0) {
            continue;
        }
        out.push(lg);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1_422() -> GenStratum {
        Signature::abelian(1, vec![4, -2, -2]).unwrap().stratum()
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::abelian(1, vec![4, -2, -2]).is_ok());
        assert!(Signature::abelian(1, vec![4, -2]).is_err());
        assert!(Signature::new(1, 0, vec![0]).is_err());
        assert_eq!(Signature::abelian(1, vec![4, -4]).unwrap().dr_vector(), vec![5, -3]);
    }

    #[test]
    fn dimensions() {
        // H_1(4,-2,-2): 2g-2+n = 3.
        let s = g1_422();
        assert_eq!(s.dim(), Some(3));
        let r = s.with_residues(vec![vec![3]]).unwrap();
        assert_eq!(r.dim(), Some(2));
        // Holomorphic H_2(2): 2g-1+n = 4.
        assert_eq!(Signature::abelian(2, vec![2]).unwrap().stratum().dim(), Some(4));
        // H_1(1,-1) is empty.
        assert!(Signature::abelian(1, vec![1, -1]).unwrap().stratum().is_empty());
        // H_0(0,-1,-1) is a point.
        let s = Signature::abelian(0, vec![0, -1, -1]).unwrap().stratum();
        assert_eq!(s.proj_dim(), Some(0));
        assert!(!s.is_empty());
    }

    #[test]
    fn enhancement_rules() {
        assert_eq!(enhancement_from_orders(2, -4, 1).unwrap(), Enhancement::Vertical(3));
        assert_eq!(enhancement_from_orders(-1, -1, 1).unwrap(), Enhancement::Horizontal);
        assert!(enhancement_from_orders(2, -3, 1).is_err());
    }

    #[test]
    fn nine_two_level_graphs_for_g1_422() {
        let lgs = enumerate_two_level_graphs(&g1_422()).unwrap();
        assert_eq!(lgs.len(), 9, "{:#?}", lgs.iter().map(|l| l.describe()).collect::<Vec<_>>());
        let mut kappas: Vec<Vec<i64>> = lgs
            .iter()
            .map(|l| {
                let mut k = l.kappas();
                k.sort_unstable();
                k
            })
            .collect();
        kappas.sort();
        // Single edges with κ=1 (I), 3 (F, G, H); bananas (1,1), (1,1),
        // (1,3), (2,2); and the tree (1,3) with two top vertices.
        assert_eq!(
            kappas,
            vec![
                vec![1],
                vec![1, 1],
                vec![1, 1],
                vec![1, 3],
                vec![1, 3],
                vec![2, 2],
                vec![3],
                vec![3],
                vec![3]
            ]
        );
    }

    #[test]
    fn level_strata_of_f_and_i() {
        let s = g1_422();
        let lgs = enumerate_two_level_graphs(&s).unwrap();
        // F: top genus 0 with legs 2, 3; bottom genus 1 with leg 1.
        let f = lgs
            .iter()
            .find(|l| l.kappas() == vec![3] && l.level_of(1) == Some(Level::Bottom) && l.level_of(2) == Some(Level::Top) && l.level_of(3) == Some(Level::Top))
            .unwrap();
        let bot = extract_level_stratum(&s, f, Level::Bottom).unwrap();
        assert_eq!(bot.stratum.components.len(), 1);
        assert_eq!(bot.stratum.components[0].g, 1);
        let mut ords: Vec<i64> = bot.stratum.components[0].legs.iter().map(|l| l.1).collect();
        ords.sort_unstable();
        assert_eq!(ords, vec![-4, 4]);
        // I: top genus 1 without legs, bottom genus 0 with GRC at the node.
        let i = lgs
            .iter()
            .find(|l| l.kappas() == vec![1])
            .unwrap();
        let bot = extract_level_stratum(&s, i, Level::Bottom).unwrap();
        assert_eq!(bot.stratum.components[0].g, 0);
        assert_eq!(bot.grc.len(), 1);
        assert_eq!(bot.stratum.residues.len(), 1);
        let node = bot.grc[0][0];
        assert_eq!(bot.stratum.order_of(node), Some(-2));
        assert_eq!(bot.stratum.proj_dim(), Some(0));
    }

    #[test]
    fn tree_graph_has_two_top_components_and_empty_bottom() {
        let s = g1_422();
        let lgs = enumerate_two_level_graphs(&s).unwrap();
        let j = lgs
            .iter()
            .find(|l| l.vertices_at(Level::Top).len() == 2)
            .unwrap();
        let top = extract_level_stratum(&s, j, Level::Top).unwrap();
        assert_eq!(top.stratum.components.len(), 2);
        let bot = extract_level_stratum(&s, j, Level::Bottom).unwrap();
        assert!(bot.stratum.is_empty());
    }

    #[test]
    fn removed_residue_condition_graphs() {
        let s = g1_422();
        let free = lg_removed_condition_free(&s, &[3]).unwrap();
        // A, B, G, H, I.
        assert_eq!(free.len(), 5);
        let ells: Vec<i64> = {
            let mut v: Vec<i64> = free.iter().map(|l| l.ell().unwrap()).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(ells, vec![1, 1, 1, 3, 3]);
        let refb = lg_reference_bottom(&s, 3).unwrap();
        // B, G, I and the even banana are the graphs with leg 3 on the bottom.
        assert!(refb.iter().all(|l| l.level_of(3) == Some(Level::Bottom)));
    }

    #[test]
    fn automorphisms_of_bananas() {
        let lgs = enumerate_two_level_graphs(&g1_422()).unwrap();
        for l in &lgs {
            let ks = l.kappas();
            let expected = if ks.len() == 2 && ks[0] == ks[1] { 2 } else { 1 };
            assert_eq!(l.automorphism_order(), expected, "{}", l.describe());
        }
    }

    #[test]
    fn prong_counts() {
        let lgs = enumerate_two_level_graphs(&g1_422()).unwrap();
        for l in &lgs {
            let ks = l.kappas();
            let p: i64 = ks.iter().product();
            assert_eq!(l.prong_class_count().unwrap(), p / l.ell().unwrap());
        }
    }

    #[test]
    fn horizontal_graphs() {
        let s = Signature::abelian(1, vec![2, -2]).unwrap().stratum();
        let hs = enumerate_horizontal_one_edge(&s).unwrap();
        // Only the self-node (no simple poles to split off).
        assert_eq!(hs.len(), 1);
        let lvl = horizontal_level_stratum(&s, &hs[0]).unwrap();
        assert_eq!(lvl.pairing_parts().len(), 1);
        assert!(lvl.admits_spin());
    }

    #[test]
    fn star_graphs_of_g1() {
        let sig = Signature::abelian(1, vec![2, -2]).unwrap();
        let stars = simple_star_graphs(&sig, true).unwrap();
        // Top genus-1 vertex without legs joined by κ=1 to the centre.
        assert_eq!(stars.len(), 1);
        assert_eq!(stars[0].kappas(), vec![1]);
    }
}
