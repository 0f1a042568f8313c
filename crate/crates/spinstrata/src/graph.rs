//! Stable graphs of marked nodal curves: validation, canonical forms,
//! automorphism counts, isomorphisms, contractions (Γ-structures) and
//! exhaustive enumeration.
//!
//! A graph is stored as a list of vertex genera, the half-edges attached to
//! each vertex, and the edges as pairs of half-edges.  Half-edges that are not
//! part of an edge are the legs (markings) of the graph.

use crate::error::{Error, Result};
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// Label of a half-edge or leg.
pub type HalfEdge = u32;

/// A (not necessarily stable) dual graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    genera: Vec<u32>,
    half_edges: Vec<Vec<HalfEdge>>,
    edges: Vec<(HalfEdge, HalfEdge)>,
}

/// JSON form of a stable graph: vertex genera, markings per vertex and edges
/// as `[[v, h], [v', h']]` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    /// Genus of every vertex.
    pub vertices: Vec<u32>,
    /// Markings attached to every vertex.
    pub legs: Vec<Vec<HalfEdge>>,
    /// Edges as pairs of `(vertex, half-edge)`.
    pub edges: Vec<[(usize, HalfEdge); 2]>,
}

impl StableGraph {
    /// Builds a graph, checking that half-edge labels are unique and that
    /// every edge refers to existing half-edges.  Stability is not checked;
    /// see [`validate_stable_graph`].
    pub fn new(
        genera: Vec<u32>,
        mut half_edges: Vec<Vec<HalfEdge>>,
        edges: Vec<(HalfEdge, HalfEdge)>,
    ) -> Result<Self> {
        if genera.len() != half_edges.len() {
            return Err(Error::InvalidGraph(
                "genus list and half-edge list differ in length".into(),
            ));
        }
        let mut seen = HashSet::new();
        for h in half_edges.iter().flatten() {
            if !seen.insert(*h) {
                return Err(Error::InvalidGraph(format!("half-edge {h} used twice")));
            }
        }
        let mut used = HashSet::new();
        for &(a, b) in &edges {
            if a == b || !seen.contains(&a) || !seen.contains(&b) {
                return Err(Error::InvalidGraph(format!("bad edge ({a},{b})")));
            }
            if !used.insert(a) || !used.insert(b) {
                return Err(Error::InvalidGraph(format!(
                    "half-edge of ({a},{b}) in two edges"
                )));
            }
        }
        for hs in &mut half_edges {
            hs.sort_unstable();
        }
        Ok(StableGraph {
            genera,
            half_edges,
            edges,
        })
    }

    /// The one-vertex graph of genus `g` with the given legs.
    pub fn smooth(g: u32, legs: &[HalfEdge]) -> Self {
        let mut legs = legs.to_vec();
        legs.sort_unstable();
        StableGraph {
            genera: vec![g],
            half_edges: vec![legs],
            edges: Vec::new(),
        }
    }

    /// Vertex genera.
    pub fn genera(&self) -> &[u32] {
        &self.genera
    }

    /// Half-edges (legs and edge halves) at each vertex.
    pub fn half_edges(&self) -> &[Vec<HalfEdge>] {
        &self.half_edges
    }

    /// Edges as half-edge pairs.
    pub fn edges(&self) -> &[(HalfEdge, HalfEdge)] {
        &self.edges
    }

    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    /// Number of edges.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Vertex carrying half-edge `h`.
    pub fn vertex_of(&self, h: HalfEdge) -> Option<usize> {
        self.half_edges.iter().position(|hs| hs.contains(&h))
    }

    /// Map from half-edge to vertex.
    pub fn vertex_map(&self) -> HashMap<HalfEdge, usize> {
        self.half_edges
            .iter()
            .enumerate()
            .flat_map(|(v, hs)| hs.iter().map(move |&h| (h, v)))
            .collect()
    }

    /// The opposite half-edge of `h` if `h` belongs to an edge.
    pub fn partner(&self, h: HalfEdge) -> Option<HalfEdge> {
        self.edges.iter().find_map(|&(a, b)| {
            if a == h {
                Some(b)
            } else if b == h {
                Some(a)
            } else {
                None
            }
        })
    }

    fn edge_halves(&self) -> HashSet<HalfEdge> {
        self.edges.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// Sorted list of all markings.
    pub fn markings(&self) -> Vec<HalfEdge> {
        let eh = self.edge_halves();
        let mut m: Vec<_> = self
            .half_edges
            .iter()
            .flatten()
            .copied()
            .filter(|h| !eh.contains(h))
            .collect();
        m.sort_unstable();
        m
    }

    /// Sorted markings at vertex `v`.
    pub fn markings_at(&self, v: usize) -> Vec<HalfEdge> {
        let eh = self.edge_halves();
        self.half_edges[v]
            .iter()
            .copied()
            .filter(|h| !eh.contains(h))
            .collect()
    }

    /// Number of special points (legs plus edge halves) at `v`.
    pub fn valence(&self, v: usize) -> usize {
        self.half_edges[v].len()
    }

    /// Largest half-edge label in use (0 for a graph without half-edges).
    pub fn max_label(&self) -> HalfEdge {
        self.half_edges
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Connected components as lists of vertices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let vm = self.vertex_map();
        let mut uf = UnionFind::new(self.num_vertices());
        for &(a, b) in &self.edges {
            uf.union(vm[&a], vm[&b]);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.num_vertices() {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort();
        comps
    }

    /// Whether the graph is connected.
    pub fn is_connected(&self) -> bool {
        self.num_vertices() > 0 && self.components().len() == 1
    }

    /// First Betti number `|E| − |V| + #components`.
    pub fn h1(&self) -> usize {
        self.num_edges() + self.components().len() - self.num_vertices()
    }

    /// Arithmetic genus `Σ g(v) + h¹`.
    pub fn genus(&self) -> u32 {
        self.genera.iter().sum::<u32>() + self.h1() as u32
    }

    /// Renames half-edges according to `f`; labels not in `f` are kept.
    pub fn relabel(&self, f: &HashMap<HalfEdge, HalfEdge>) -> StableGraph {
        let m = |h: &HalfEdge| *f.get(h).unwrap_or(h);
        let mut half_edges: Vec<Vec<HalfEdge>> = self
            .half_edges
            .iter()
            .map(|hs| hs.iter().map(m).collect())
            .collect();
        for hs in &mut half_edges {
            hs.sort_unstable();
        }
        StableGraph {
            genera: self.genera.clone(),
            half_edges,
            edges: self.edges.iter().map(|(a, b)| (m(a), m(b))).collect(),
        }
    }

    /// Disjoint union of two graphs (half-edge labels must not collide).
    pub fn disjoint_union(&self, other: &StableGraph) -> Result<StableGraph> {
        let mut genera = self.genera.clone();
        genera.extend(&other.genera);
        let mut half_edges = self.half_edges.clone();
        half_edges.extend(other.half_edges.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(&other.edges);
        StableGraph::new(genera, half_edges, edges)
    }

    /// Adds an edge between two existing legs.
    pub fn with_edge(&self, a: HalfEdge, b: HalfEdge) -> Result<StableGraph> {
        let mut edges = self.edges.clone();
        edges.push((a, b));
        StableGraph::new(self.genera.clone(), self.half_edges.clone(), edges)
    }

    /// Contracts the edges with the given indices.  Returns the contracted
    /// graph and the vertex map from `self` to it.
    pub fn contract(&self, edge_indices: &[usize]) -> (StableGraph, Vec<usize>) {
        let vm = self.vertex_map();
        let mut uf = UnionFind::new(self.num_vertices());
        for &i in edge_indices {
            let (a, b) = self.edges[i];
            uf.union(vm[&a], vm[&b]);
        }
        let mut roots: Vec<usize> = (0..self.num_vertices()).map(|v| uf.find(v)).collect();
        let distinct: Vec<usize> = roots.iter().copied().unique().collect();
        let index: HashMap<usize, usize> =
            distinct.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        for r in &mut roots {
            *r = index[r];
        }
        let contracted: HashSet<usize> = edge_indices.iter().copied().collect();
        let removed: HashSet<HalfEdge> = edge_indices
            .iter()
            .flat_map(|&i| [self.edges[i].0, self.edges[i].1])
            .collect();
        let k = distinct.len();
        let mut genera = vec![0u32; k];
        let mut half_edges = vec![Vec::new(); k];
        let mut nverts = vec![0usize; k];
        let mut nedges = vec![0usize; k];
        for v in 0..self.num_vertices() {
            genera[roots[v]] += self.genera[v];
            nverts[roots[v]] += 1;
            half_edges[roots[v]].extend(
                self.half_edges[v]
                    .iter()
                    .copied()
                    .filter(|h| !removed.contains(h)),
            );
        }
        for &i in &contracted {
            nedges[roots[vm[&self.edges[i].0]]] += 1;
        }
        for c in 0..k {
            genera[c] += (nedges[c] + 1 - nverts[c]) as u32;
            half_edges[c].sort_unstable();
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !contracted.contains(i))
            .map(|(_, e)| *e)
            .collect();
        (
            StableGraph {
                genera,
                half_edges,
                edges,
            },
            roots,
        )
    }

    /// Canonical form of the undecorated graph, with internal half-edges
    /// relabelled from one above the largest marking.
    pub fn canonical(&self) -> Canonical {
        let base = self.markings().last().copied().unwrap_or(0) + 1;
        canonicalize(self, &vec![Vec::new(); self.num_vertices()], &HashMap::new(), base)
    }

    /// Canonical encoding string (equal iff the graphs are isomorphic).
    pub fn canonical_key(&self) -> String {
        self.canonical().key
    }

    /// Order of the automorphism group fixing the legs.
    pub fn automorphism_order(&self) -> u64 {
        self.canonical().aut
    }

    /// JSON representation.
    pub fn to_json(&self) -> GraphJson {
        let vm = self.vertex_map();
        GraphJson {
            vertices: self.genera.clone(),
            legs: (0..self.num_vertices()).map(|v| self.markings_at(v)).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| [(vm[&a], a), (vm[&b], b)])
                .collect(),
        }
    }

    /// Builds a graph from its JSON representation.
    pub fn from_json(j: &GraphJson) -> Result<Self> {
        let mut half_edges = j.legs.clone();
        if half_edges.len() != j.vertices.len() {
            return Err(Error::InvalidGraph("legs/vertices length mismatch".into()));
        }
        let mut edges = Vec::new();
        for [(va, a), (vb, b)] in &j.edges {
            if *va >= half_edges.len() || *vb >= half_edges.len() {
                return Err(Error::InvalidGraph("edge vertex out of range".into()));
            }
            half_edges[*va].push(*a);
            half_edges[*vb].push(*b);
            edges.push((*a, *b));
        }
        StableGraph::new(j.vertices.clone(), half_edges, edges)
    }
}

/// Minimal union–find over `0..n`.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    /// `n` singleton classes.
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    /// Representative of the class of `x`.
    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Merges the classes of `a` and `b`; the smaller root wins.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// A violation reported by [`validate_stable_graph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The graph has no vertices.
    Empty,
    /// The graph is disconnected.
    Disconnected,
    /// Vertex with `2g − 2 + n ≤ 0`.
    UnstableVertex(usize),
    /// Total genus differs from the declared ambient genus.
    GenusMismatch {
        /// Declared genus.
        expected: u32,
        /// Genus of the graph.
        found: u32,
    },
    /// Markings differ from the declared ambient markings.
    MarkingMismatch,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Empty => write!(f, "empty graph"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
            Violation::UnstableVertex(v) => write!(f, "unstable vertex {v}"),
            Violation::GenusMismatch { expected, found } => {
                write!(f, "genus {found} differs from ambient genus {expected}")
            }
            Violation::MarkingMismatch => write!(f, "markings differ from ambient"),
        }
    }
}

/// Checks connectivity, vertex stability and, when given, the ambient
/// `(g, markings)`.  Returns every violation found.
pub fn validate_stable_graph(
    graph: &StableGraph,
    ambient: Option<(u32, &[HalfEdge])>,
) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if graph.num_vertices() == 0 {
        return Err(vec![Violation::Empty]);
    }
    if !graph.is_connected() {
        out.push(Violation::Disconnected);
    }
    for v in 0..graph.num_vertices() {
        if 2 * graph.genera[v] as i64 - 2 + graph.valence(v) as i64 <= 0 {
            out.push(Violation::UnstableVertex(v));
        }
    }
    if let Some((g, legs)) = ambient {
        let found = graph.genus();
        if found != g {
            out.push(Violation::GenusMismatch { expected: g, found });
        }
        let mut legs = legs.to_vec();
        legs.sort_unstable();
        if graph.markings() != legs {
            out.push(Violation::MarkingMismatch);
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Whether every vertex satisfies `2g − 2 + n > 0`.
pub fn is_stable(graph: &StableGraph) -> bool {
    (0..graph.num_vertices()).all(|v| 2 * graph.genera[v] as i64 - 2 + graph.valence(v) as i64 > 0)
}

/// Result of canonicalising a (possibly coloured) graph.
#[derive(Clone, Debug)]
pub struct Canonical {
    /// Canonically relabelled graph.
    pub graph: StableGraph,
    /// Vertex colours in canonical vertex order.
    pub vertex_colors: Vec<Vec<i64>>,
    /// Half-edge colours in canonical labels (zero colours omitted).
    pub half_edge_colors: BTreeMap<HalfEdge, i64>,
    /// Encoding string; equal iff the coloured graphs are isomorphic.
    pub key: String,
    /// Order of the colour-preserving automorphism group fixing legs.
    pub aut: u64,
    /// Canonical position of each original vertex.
    pub vertex_perm: Vec<usize>,
    /// Original half-edge label to canonical label.
    pub half_edge_map: HashMap<HalfEdge, HalfEdge>,
}

type EdgeCode = (usize, usize, i64, i64);

/// Canonicalises a graph whose vertices carry colours `vcolor` and whose
/// half-edges carry integer colours `hcolor` (missing entries mean 0).
/// Internal half-edges of the result are numbered from `base`.
///
/// Isomorphisms fix every leg label; the search brute-forces vertex
/// permutations inside colour-refinement classes, which is ample for the
/// small graphs used here.
pub fn canonicalize(
    graph: &StableGraph,
    vcolor: &[Vec<i64>],
    hcolor: &HashMap<HalfEdge, i64>,
    base: HalfEdge,
) -> Canonical {
    let n = graph.num_vertices();
    let vm = graph.vertex_map();
    let col = |h: &HalfEdge| *hcolor.get(h).unwrap_or(&0);
    let eh = graph.edge_halves();
    // Initial invariant: genus, colour, markings with colours, internal colours.
    let mut inv: Vec<String> = (0..n)
        .map(|v| {
            let marks: Vec<(HalfEdge, i64)> = graph.half_edges[v]
                .iter()
                .filter(|h| !eh.contains(h))
                .map(|h| (*h, col(h)))
                .collect();
            let mut internal: Vec<i64> = graph.half_edges[v]
                .iter()
                .filter(|h| eh.contains(h))
                .map(col)
                .collect();
            internal.sort_unstable();
            format!(
                "{}|{:?}|{:?}|{:?}",
                graph.genera[v], vcolor[v], marks, internal
            )
        })
        .collect();
    let rank_of = |inv: &[String]| -> Vec<usize> {
        let sorted: Vec<&String> = inv.iter().sorted().dedup().collect();
        inv.iter()
            .map(|s| sorted.binary_search(&s).unwrap())
            .collect()
    };
    let mut ranks = rank_of(&inv);
    // Colour refinement by neighbourhoods.
    loop {
        let mut next: Vec<String> = (0..n)
            .map(|v| {
                let mut nb: Vec<(usize, i64, i64)> = Vec::new();
                for &(a, b) in &graph.edges {
                    let (va, vb) = (vm[&a], vm[&b]);
                    if va == v {
                        nb.push((ranks[vb], col(&a), col(&b)));
                    }
                    if vb == v {
                        nb.push((ranks[va], col(&b), col(&a)));
                    }
                }
                nb.sort_unstable();
                format!("{}#{:?}", ranks[v], nb)
            })
            .collect();
        let new_ranks = rank_of(&next);
        let count = |r: &[usize]| r.iter().unique().count();
        if count(&new_ranks) == count(&ranks) {
            break;
        }
        ranks = new_ranks;
        inv = std::mem::take(&mut next);
    }
    let _ = inv;
    // Groups of vertices sharing a refined rank, in rank order.
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(ranks[v]).or_default().push(v);
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let mut offsets = Vec::new();
    let mut acc = 0;
    for g in &groups {
        offsets.push(acc);
        acc += g.len();
    }
    let edge_code = |pos: &[usize]| -> Vec<EdgeCode> {
        let mut codes: Vec<EdgeCode> = graph
            .edges
            .iter()
            .map(|&(a, b)| {
                let (pa, pb) = (pos[vm[&a]], pos[vm[&b]]);
                let (ca, cb) = (col(&a), col(&b));
                if pa < pb || (pa == pb && ca <= cb) {
                    (pa, pb, ca, cb)
                } else {
                    (pb, pa, cb, ca)
                }
            })
            .collect();
        codes.sort_unstable();
        codes
    };
    let mut best: Option<(Vec<EdgeCode>, Vec<usize>)> = None;
    let mut hits: u64 = 0;
    let perms_per_group: Vec<Vec<Vec<usize>>> = groups
        .iter()
        .map(|g| g.iter().copied().permutations(g.len()).collect())
        .collect();
    for choice in perms_per_group.iter().multi_cartesian_product_or_unit() {
        let mut pos = vec![0usize; n];
        for (gi, perm) in choice.iter().enumerate() {
            for (i, &v) in perm.iter().enumerate() {
                pos[v] = offsets[gi] + i;
            }
        }
        let code = edge_code(&pos);
        match &best {
            Some((b, _)) if code > *b => {}
            Some((b, _)) if code == *b => hits += 1,
            _ => {
                best = Some((code, pos));
                hits = 1;
            }
        }
    }
    let (code, pos) = best.expect("at least one permutation");
    let mut aut = hits;
    for (_, run) in &code.iter().chunk_by(|c| **c) {
        let run: Vec<_> = run.collect();
        let m = run.len() as u64;
        aut *= (1..=m).product::<u64>();
        let (a, b, ca, cb) = *run[0];
        if a == b && ca == cb {
            aut *= 1 << m;
        }
    }
    // Build the relabelled graph.
    let mut inv_pos = vec![0usize; n];
    for v in 0..n {
        inv_pos[pos[v]] = v;
    }
    let mut half_edge_map: HashMap<HalfEdge, HalfEdge> = HashMap::new();
    for h in graph.markings() {
        half_edge_map.insert(h, h);
    }
    // Assign canonical labels to edges in code order, matching original edges.
    let mut remaining: Vec<(usize, (HalfEdge, HalfEdge))> = graph
        .edges
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let (pa, pb) = (pos[vm[&a]], pos[vm[&b]]);
            let (ca, cb) = (col(&a), col(&b));
            let oriented = if pa < pb || (pa == pb && ca <= cb) {
                (a, b)
            } else {
                (b, a)
            };
            (i, oriented)
        })
        .collect();
    let mut new_edges = Vec::new();
    let mut new_half: Vec<Vec<HalfEdge>> = vec![Vec::new(); n];
    let mut new_hcolor = BTreeMap::new();
    for v in 0..n {
        new_half[pos[v]].extend(graph.markings_at(v));
    }
    for (j, c) in code.iter().enumerate() {
        let idx = remaining
            .iter()
            .position(|(_, (a, b))| {
                let (pa, pb) = (pos[vm[a]], pos[vm[b]]);
                (pa, pb, col(a), col(b)) == *c
            })
            .expect("edge code matches an edge");
        let (_, (a, b)) = remaining.swap_remove(idx);
        let (la, lb) = (base + 2 * j as u32, base + 2 * j as u32 + 1);
        half_edge_map.insert(a, la);
        half_edge_map.insert(b, lb);
        new_half[c.0].push(la);
        new_half[c.1].push(lb);
        new_edges.push((la, lb));
    }
    for (h, &c) in hcolor {
        if c != 0 {
            if let Some(&nh) = half_edge_map.get(h) {
                new_hcolor.insert(nh, c);
            }
        }
    }
    for hs in &mut new_half {
        hs.sort_unstable();
    }
    let new_genera: Vec<u32> = inv_pos.iter().map(|&v| graph.genera[v]).collect();
    let new_vcolor: Vec<Vec<i64>> = inv_pos.iter().map(|&v| vcolor[v].clone()).collect();
    let mut key = String::new();
    for i in 0..n {
        let v = inv_pos[i];
        let marks: Vec<String> = graph
            .markings_at(v)
            .iter()
            .map(|h| {
                let c = col(h);
                if c == 0 {
                    format!("{h}")
                } else {
                    format!("{h}^{c}")
                }
            })
            .collect();
        key.push_str(&format!("v{}", graph.genera[v]));
        if !vcolor[v].is_empty() {
            key.push_str(&format!("{:?}", vcolor[v]));
        }
        key.push_str(&format!("({})", marks.join(",")));
    }
    for (a, b, ca, cb) in &code {
        key.push_str(&format!(";{a}-{b}"));
        if *ca != 0 || *cb != 0 {
            key.push_str(&format!("[{ca},{cb}]"));
        }
    }
    Canonical {
        graph: StableGraph {
            genera: new_genera,
            half_edges: new_half,
            edges: new_edges,
        },
        vertex_colors: new_vcolor,
        half_edge_colors: new_hcolor,
        key,
        aut,
        vertex_perm: pos,
        half_edge_map,
    }
}

trait CartesianOrUnit<'a> {
    fn multi_cartesian_product_or_unit(self) -> Box<dyn Iterator<Item = Vec<&'a Vec<usize>>> + 'a>;
}

impl<'a, I> CartesianOrUnit<'a> for I
where
    I: Iterator<Item = &'a Vec<Vec<usize>>> + Clone + 'a,
{
    fn multi_cartesian_product_or_unit(
        self,
    ) -> Box<dyn Iterator<Item = Vec<&'a Vec<usize>>> + 'a> {
        let lists: Vec<&'a Vec<Vec<usize>>> = self.collect();
        if lists.is_empty() {
            return Box::new(std::iter::once(Vec::new()));
        }
        Box::new(lists.into_iter().map(|l| l.iter()).multi_cartesian_product())
    }
}

/// An isomorphism between two graphs fixing legs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    /// Image of each source vertex.
    pub vertex_map: Vec<usize>,
    /// Image of each source half-edge.
    pub half_edge_map: BTreeMap<HalfEdge, HalfEdge>,
}

/// All isomorphisms `a → b` that fix leg labels.
pub fn isomorphisms(a: &StableGraph, b: &StableGraph) -> Vec<Isomorphism> {
    if a.num_vertices() != b.num_vertices()
        || a.num_edges() != b.num_edges()
        || a.markings() != b.markings()
    {
        return Vec::new();
    }
    let n = a.num_vertices();
    let (vma, vmb) = (a.vertex_map(), b.vertex_map());
    let sig = |g: &StableGraph, v: usize| (g.genera[v], g.markings_at(v), g.valence(v));
    let count = |g: &StableGraph, vm: &HashMap<HalfEdge, usize>, x: usize, y: usize| {
        g.edges
            .iter()
            .filter(|&&(p, q)| {
                let (vp, vq) = (vm[&p], vm[&q]);
                (vp == x && vq == y) || (vp == y && vq == x)
            })
            .count()
    };
    let mut maps = Vec::new();
    let mut cur = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        i: usize,
        n: usize,
        cur: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for t in 0..n {
            if !used[t] && ok(i, t, cur) {
                cur[i] = t;
                used[t] = true;
                rec(i + 1, n, cur, used, ok, out);
                used[t] = false;
                cur[i] = usize::MAX;
            }
        }
    }
    let ok = |i: usize, t: usize, cur: &[usize]| {
        if sig(a, i) != sig(b, t) {
            return false;
        }
        if count(a, &vma, i, i) != count(b, &vmb, t, t) {
            return false;
        }
        (0..i).all(|j| count(a, &vma, i, j) == count(b, &vmb, t, cur[j]))
    };
    rec(0, n, &mut cur, &mut used, &ok, &mut maps);
    let mut out = Vec::new();
    for vmap in maps {
        // Edge classes by unordered vertex pair.
        let mut classes: BTreeMap<(usize, usize), Vec<(HalfEdge, HalfEdge)>> = BTreeMap::new();
        for &(p, q) in &a.edges {
            let (vp, vq) = (vma[&p], vma[&q]);
            let key = (vp.min(vq), vp.max(vq));
            let oriented = if vp <= vq { (p, q) } else { (q, p) };
            classes.entry(key).or_default().push(oriented);
        }
        let mut per_class: Vec<Vec<Vec<(HalfEdge, HalfEdge, HalfEdge, HalfEdge)>>> = Vec::new();
        for (&(x, y), src) in &classes {
            let (tx, ty) = (vmap[x], vmap[y]);
            let tgt: Vec<(HalfEdge, HalfEdge)> = b
                .edges
                .iter()
                .filter_map(|&(p, q)| {
                    let (vp, vq) = (vmb[&p], vmb[&q]);
                    if vp == tx && vq == ty {
                        Some((p, q))
                    } else if vp == ty && vq == tx {
                        Some((q, p))
                    } else {
                        None
                    }
                })
                .collect();
            let mut options = Vec::new();
            for perm in (0..tgt.len()).permutations(tgt.len()) {
                let loops = x == y;
                let flips = if loops { 1usize << src.len() } else { 1 };
                for mask in 0..flips {
                    let mut assign = Vec::new();
                    for (k, &(p, q)) in src.iter().enumerate() {
                        let (s, t) = tgt[perm[k]];
                        if loops && (mask >> k) & 1 == 1 {
                            assign.push((p, q, t, s));
                        } else {
                            assign.push((p, q, s, t));
                        }
                    }
                    options.push(assign);
                }
            }
            per_class.push(options);
        }
        let combos: Vec<Vec<&Vec<(HalfEdge, HalfEdge, HalfEdge, HalfEdge)>>> =
            if per_class.is_empty() {
                vec![Vec::new()]
            } else {
                per_class
                    .iter()
                    .map(|o| o.iter())
                    .multi_cartesian_product()
                    .collect()
            };
        for combo in combos {
            let mut hm: BTreeMap<HalfEdge, HalfEdge> =
                a.markings().into_iter().map(|h| (h, h)).collect();
            for assign in combo {
                for &(p, q, s, t) in assign {
                    hm.insert(p, s);
                    hm.insert(q, t);
                }
            }
            out.push(Isomorphism {
                vertex_map: vmap.clone(),
                half_edge_map: hm,
            });
        }
    }
    out
}

/// A Γ-structure on Δ: a contraction `Δ → Γ`, recorded as the vertex
/// surjection and the half-edge injection `H(Γ) → H(Δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphContraction {
    /// Image in `V(Γ)` of each vertex of Δ.
    pub vertex_map: Vec<usize>,
    /// Image in `H(Δ)` of each half-edge of Γ (legs map to themselves).
    pub half_edge_map: BTreeMap<HalfEdge, HalfEdge>,
    /// Indices of the edges of Δ that are contracted.
    pub contracted_edges: Vec<usize>,
}

/// All Γ-structures on Δ.
pub fn enumerate_gamma_structures(delta: &StableGraph, gamma: &StableGraph) -> Vec<GraphContraction> {
    let ed = delta.num_edges();
    let eg = gamma.num_edges();
    if eg > ed || delta.markings() != gamma.markings() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for subset in (0..ed).combinations(ed - eg) {
        let (c, roots) = delta.contract(&subset);
        for iso in isomorphisms(gamma, &c) {
            // iso: Γ → C; f_v = iso_v⁻¹ ∘ roots.
            let mut inv = vec![0usize; iso.vertex_map.len()];
            for (gv, &cv) in iso.vertex_map.iter().enumerate() {
                inv[cv] = gv;
            }
            out.push(GraphContraction {
                vertex_map: roots.iter().map(|&r| inv[r]).collect(),
                half_edge_map: iso.half_edge_map.clone(),
                contracted_edges: subset.clone(),
            });
        }
    }
    out
}

/// Sort key used for deterministic enumeration order.
fn enumeration_order(g: &StableGraph) -> (usize, Vec<u32>, String) {
    let mut gen = g.genera.clone();
    gen.sort_unstable();
    (g.num_edges(), gen, g.canonical_key())
}

/// All stable graphs of genus `g` with the given legs and at most
/// `max_edges` edges, one per isomorphism class, in canonical order.
pub fn enumerate_stable_graphs_with_legs(
    g: u32,
    legs: &[HalfEdge],
    max_edges: usize,
) -> Result<Vec<StableGraph>> {
    if 2 * g as i64 - 2 + legs.len() as i64 <= 0 {
        return Err(Error::Precondition(format!(
            "(g,n)=({g},{}) is unstable",
            legs.len()
        )));
    }
    let start = StableGraph::smooth(g, legs).canonical().graph;
    let mut all: Vec<StableGraph> = vec![start.clone()];
    let mut frontier = vec![start];
    let mut seen: HashSet<String> = all.iter().map(|g| g.canonical_key()).collect();
    for _ in 0..max_edges {
        let mut next = Vec::new();
        for gr in &frontier {
            for child in one_step_degenerations(gr) {
                let can = child.canonical();
                if seen.insert(can.key.clone()) {
                    next.push(can.graph);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all.sort_by_cached_key(enumeration_order);
    Ok(all)
}

/// All stable graphs of genus `g` with markings `1..=n` and at most
/// `max_edges` edges.
pub fn enumerate_stable_graphs(g: u32, n: u32, max_edges: usize) -> Result<Vec<StableGraph>> {
    let legs: Vec<HalfEdge> = (1..=n).collect();
    enumerate_stable_graphs_with_legs(g, &legs, max_edges)
}

/// All stable graphs of `(g, n)` with exactly one edge.
pub fn enumerate_one_edge_graphs(g: u32, n: u32) -> Result<Vec<StableGraph>> {
    Ok(enumerate_stable_graphs(g, n, 1)?
        .into_iter()
        .filter(|gr| gr.num_edges() == 1)
        .collect())
}

/// Every graph obtained by splitting one vertex with a new edge (self-loop
/// or separating split), keeping stability.
pub fn one_step_degenerations(gr: &StableGraph) -> Vec<StableGraph> {
    let fresh = gr.max_label() + 1;
    let (h, hp) = (fresh, fresh + 1);
    let mut out = Vec::new();
    for v in 0..gr.num_vertices() {
        let gv = gr.genera[v];
        if gv >= 1 {
            let mut genera = gr.genera.clone();
            genera[v] -= 1;
            let mut half = gr.half_edges.clone();
            half[v].push(h);
            half[v].push(hp);
            let mut edges = gr.edges.clone();
            edges.push((h, hp));
            out.push(StableGraph::new(genera, half, edges).expect("fresh labels"));
        }
        let hs = &gr.half_edges[v];
        let k = hs.len();
        for mask in 0..(1u64 << k) {
            for g1 in 0..=gv {
                let g2 = gv - g1;
                let a: Vec<HalfEdge> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| hs[i]).collect();
                let b: Vec<HalfEdge> = (0..k).filter(|i| mask >> i & 1 == 0).map(|i| hs[i]).collect();
                if 2 * g1 as i64 - 1 + a.len() as i64 <= 0 || 2 * g2 as i64 - 1 + b.len() as i64 <= 0 {
                    continue;
                }
                let mut genera = gr.genera.clone();
                genera[v] = g1;
                genera.push(g2);
                let mut half = gr.half_edges.clone();
                let mut a = a;
                a.push(h);
                half[v] = a;
                let mut b = b;
                b.push(hp);
                half.push(b);
                let mut edges = gr.edges.clone();
                edges.push((h, hp));
                out.push(StableGraph::new(genera, half, edges).expect("fresh labels"));
            }
        }
    }
    out
}

/// Canonical set of leg labels of a graph as a `BTreeSet`.
pub fn leg_set(gr: &StableGraph) -> BTreeSet<HalfEdge> {
    gr.markings().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn banana(legs_a: &[u32], legs_b: &[u32], first: u32) -> StableGraph {
        let mut a = legs_a.to_vec();
        a.extend([first, first + 2]);
        let mut b = legs_b.to_vec();
        b.extend([first + 1, first + 3]);
        StableGraph::new(
            vec![0, 0],
            vec![a, b],
            vec![(first, first + 1), (first + 2, first + 3)],
        )
        .unwrap()
    }

    #[test]
    fn validation_examples() {
        let g = StableGraph::smooth(1, &[1, 2, 3]);
        assert!(validate_stable_graph(&g, Some((1, &[1, 2, 3]))).is_ok());
        let bad = StableGraph::new(vec![0, 0], vec![vec![1, 2, 3, 10], vec![4, 11]], vec![(10, 11)]).unwrap();
        let v = validate_stable_graph(&bad, None).unwrap_err();
        assert_eq!(v, vec![Violation::UnstableVertex(1)]);
        assert_eq!(v[0].to_string(), "unstable vertex 1");
        let loop_g = StableGraph::new(vec![1], vec![vec![1, 10, 11]], vec![(10, 11)]).unwrap();
        assert!(validate_stable_graph(&loop_g, Some((2, &[1]))).is_ok());
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(banana(&[1], &[2, 3], 10).automorphism_order(), 2);
        let ct = StableGraph::new(vec![1, 0], vec![vec![1, 10], vec![2, 3, 11]], vec![(10, 11)]).unwrap();
        assert_eq!(ct.automorphism_order(), 1);
        let lp = StableGraph::new(vec![0], vec![vec![1, 10, 11]], vec![(10, 11)]).unwrap();
        assert_eq!(lp.automorphism_order(), 2);
        // Two genus-1 vertices joined by an edge, no legs: swap symmetry.
        let dumbbell = StableGraph::new(vec![1, 1], vec![vec![10], vec![11]], vec![(10, 11)]).unwrap();
        assert_eq!(dumbbell.automorphism_order(), 2);
    }

    #[test]
    fn one_edge_enumeration() {
        assert_eq!(enumerate_one_edge_graphs(1, 3).unwrap().len(), 5);
        assert_eq!(enumerate_one_edge_graphs(1, 2).unwrap().len(), 2);
        assert_eq!(enumerate_one_edge_graphs(0, 4).unwrap().len(), 3);
    }

    #[test]
    fn stable_graph_enumeration_examples() {
        assert_eq!(enumerate_stable_graphs(0, 3, 5).unwrap().len(), 1);
        assert_eq!(enumerate_stable_graphs(1, 1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_stable_graphs(2, 0, 1).unwrap().len(), 3);
    }

    #[test]
    fn canonical_forms() {
        let b1 = banana(&[1], &[2, 3], 10);
        let b2 = banana(&[2, 3], &[1], 20);
        assert_eq!(b1.canonical_key(), b2.canonical_key());
        let g1 = StableGraph::new(vec![1, 0], vec![vec![1, 10], vec![2, 3, 11]], vec![(10, 11)]).unwrap();
        let g2 = StableGraph::new(vec![1, 0], vec![vec![2, 10], vec![1, 3, 11]], vec![(10, 11)]).unwrap();
        assert_ne!(g1.canonical_key(), g2.canonical_key());
    }

    #[test]
    fn gamma_structures_identity() {
        let g = StableGraph::new(vec![1, 0], vec![vec![1, 10], vec![2, 3, 11]], vec![(10, 11)]).unwrap();
        assert_eq!(enumerate_gamma_structures(&g, &g).len(), 1);
        let lp = StableGraph::new(vec![0], vec![vec![1, 2, 3, 10, 11]], vec![(10, 11)]).unwrap();
        assert_eq!(enumerate_gamma_structures(&lp, &lp).len(), 2);
    }

    #[test]
    fn banana_has_four_loop_structures() {
        let a = banana(&[1], &[2, 3], 10);
        let lp = StableGraph::new(vec![0], vec![vec![1, 2, 3, 10, 11]], vec![(10, 11)]).unwrap();
        assert_eq!(enumerate_gamma_structures(&a, &lp).len(), 4);
    }

    #[test]
    fn json_roundtrip() {
        let a = banana(&[1], &[2, 3], 10);
        let j = a.to_json();
        let b = StableGraph::from_json(&j).unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());
    }
}
