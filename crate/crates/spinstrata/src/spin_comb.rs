//! Spin parity combinatorics of multi-scale differentials.
//!
//! The flat geometry of a welded surface is abstracted to turning numbers
//! modulo 2.  A Δ-adapted symplectic basis consists of
//!
//! * non-crossing pairs living on single vertices (their Arf contribution
//!   is the spin parity of the vertex),
//! * graph cycles, one per non-tree edge `q` of an adapted spanning tree,
//!   each paired with the vanishing cycle (seam) of `q`.
//!
//! A vanishing cycle at an edge of odd prong number has odd turning number,
//! so its pair contributes nothing.  At an edge of even prong number the
//! vanishing cycle is taken even, and the paired graph cycle's turning
//! number shifts by `σ_e mod 2` for every even-prong edge `e` it crosses.
//! Odd-prong rotations cannot change a mod-2 quantity consistently (there
//! is no non-trivial homomorphism `ℤ/κ → ℤ/2` for odd κ) and are ignored.

use crate::error::{Error, Result};
use crate::graph::UnionFind;
use crate::level::{LevelGraph, Signature};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Spin parity, `0` even and `1` odd.
pub type Parity = u8;

/// A spanning tree with its fundamental cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptedTree {
    /// Number of vertices.
    pub num_vertices: usize,
    /// The edges of the multigraph as vertex pairs.
    pub edges: Vec<(usize, usize)>,
    /// The fixed initial vertex `v*` (a leaf of the initial tree).
    pub root: usize,
    /// Indices of tree edges, sorted.
    pub tree_edges: Vec<usize>,
    /// Indices of non-tree edges, sorted.
    pub non_tree_edges: Vec<usize>,
    /// For each non-tree edge `q`, its fundamental cycle as a closed walk
    /// `[(edge, from, to)]` starting with `q`.
    pub cycles: Vec<Vec<(usize, usize, usize)>>,
}

fn check_edges(n: usize, edges: &[(usize, usize)]) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyInput("graph vertices"));
    }
    if edges.iter().any(|&(a, b)| a >= n || b >= n) {
        return Err(Error::InvalidGraph("edge endpoint out of range".into()));
    }
    let mut uf = UnionFind::new(n);
    for &(a, b) in edges {
        uf.union(a, b);
    }
    let r = uf.find(0);
    if (0..n).any(|v| uf.find(v) != r) {
        return Err(Error::InvalidGraph("graph is not connected".into()));
    }
    Ok(())
}

/// Breadth-first spanning tree from vertex 0 (lowest edge index first).
pub fn bfs_tree(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    check_edges(n, edges)?;
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    let mut tree = Vec::new();
    while let Some(u) = queue.pop_front() {
        for (i, &(a, b)) in edges.iter().enumerate() {
            let other = if a == u { b } else if b == u { a } else { continue };
            if !seen[other] {
                seen[other] = true;
                tree.push(i);
                queue.push_back(other);
            }
        }
    }
    tree.sort_unstable();
    Ok(tree)
}

/// Parent edge and depth of every vertex of a tree rooted at `root`.
fn root_tree(n: usize, edges: &[(usize, usize)], tree: &BTreeSet<usize>, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &i in tree {
            let (a, b) = edges[i];
            let other = if a == u { b } else if b == u { a } else { continue };
            if depth[other] == usize::MAX {
                depth[other] = depth[u] + 1;
                parent[other] = Some(i);
                queue.push_back(other);
            }
        }
    }
    (parent, depth)
}

/// Tree path from `x` to `y` as `(edge, from, to)` steps.
fn tree_path(
    edges: &[(usize, usize)],
    parent: &[Option<usize>],
    depth: &[usize],
    x: usize,
    y: usize,
) -> Vec<(usize, usize, usize)> {
    let other = |e: usize, v: usize| {
        let (a, b) = edges[e];
        if a == v {
            b
        } else {
            a
        }
    };
    let (mut u, mut v) = (x, y);
    let mut up = Vec::new();
    let mut down = Vec::new();
    while u != v {
        if depth[u] >= depth[v] {
            let e = parent[u].expect("non-root");
            let w = other(e, u);
            up.push((e, u, w));
            u = w;
        } else {
            let e = parent[v].expect("non-root");
            let w = other(e, v);
            down.push((e, w, v));
            v = w;
        }
    }
    down.reverse();
    up.extend(down);
    up
}

fn fundamental_cycles(
    n: usize,
    edges: &[(usize, usize)],
    tree: &BTreeSet<usize>,
    root: usize,
) -> Vec<Vec<(usize, usize, usize)>> {
    let (parent, depth) = root_tree(n, edges, tree, root);
    (0..edges.len())
        .filter(|i| !tree.contains(i))
        .map(|q| {
            let (x, y) = edges[q];
            let mut walk = vec![(q, x, y)];
            walk.extend(tree_path(edges, &parent, &depth, y, x));
            walk
        })
        .collect()
}

/// The tree `initial` with its fundamental cycles, without modification.
pub fn tree_with_cycles(n: usize, edges: &[(usize, usize)], initial: &[usize]) -> Result<AdaptedTree> {
    check_edges(n, edges)?;
    let tree: BTreeSet<usize> = initial.iter().copied().collect();
    if tree.len() != n - 1 {
        return Err(Error::InvalidGraph("initial tree has the wrong size".into()));
    }
    let mut uf = UnionFind::new(n);
    for &i in &tree {
        let (a, b) = *edges.get(i).ok_or_else(|| Error::InvalidGraph("bad tree edge".into()))?;
        if !uf.union(a, b) {
            return Err(Error::InvalidGraph("initial edges contain a cycle".into()));
        }
    }
    let root = leaf_root(n, edges, &tree);
    Ok(AdaptedTree {
        num_vertices: n,
        edges: edges.to_vec(),
        root,
        tree_edges: tree.iter().copied().collect(),
        non_tree_edges: (0..edges.len()).filter(|i| !tree.contains(i)).collect(),
        cycles: fundamental_cycles(n, edges, &tree, root),
    })
}

fn leaf_root(n: usize, edges: &[(usize, usize)], tree: &BTreeSet<usize>) -> usize {
    let mut deg = vec![0usize; n];
    for &i in tree {
        deg[edges[i].0] += 1;
        deg[edges[i].1] += 1;
    }
    (0..n).find(|&v| deg[v] <= 1).unwrap_or(0)
}

/// Spanning tree from the layer-by-layer replacement iteration, started
/// from a breadth-first tree.
pub fn build_adapted_spanning_tree(n: usize, edges: &[(usize, usize)]) -> Result<AdaptedTree> {
    let t0 = bfs_tree(n, edges)?;
    build_adapted_spanning_tree_from(n, edges, &t0)
}

/// Spanning tree from the layer-by-layer replacement iteration started at
/// `initial`.
///
/// The initial vertex `v*` is the lowest-numbered leaf of the initial tree.
/// At depth `k + 1`, whenever two edges leading away from `v*` at a vertex
/// `w` share the fundamental cycle of a non-tree edge `q`, the
/// higher-numbered of the two is replaced by `q` (lowest `q` first).
pub fn build_adapted_spanning_tree_from(
    n: usize,
    edges: &[(usize, usize)],
    initial: &[usize],
) -> Result<AdaptedTree> {
    let start = tree_with_cycles(n, edges, initial)?;
    let root = start.root;
    let mut tree: BTreeSet<usize> = start.tree_edges.iter().copied().collect();
    let mut layer = 1usize;
    loop {
        let (_, depth) = root_tree(n, edges, &tree, root);
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        if layer > max_depth {
            break;
        }
        let ws: Vec<usize> = (0..n).filter(|&v| depth[v] == layer).collect();
        for w in ws {
            loop {
                let (parent, depth) = root_tree(n, edges, &tree, root);
                let mut found = None;
                'search: for q in (0..edges.len()).filter(|i| !tree.contains(i)) {
                    let (x, y) = edges[q];
                    if x == y {
                        continue;
                    }
                    let path = tree_path(edges, &parent, &depth, x, y);
                    let away: Vec<usize> = path
                        .iter()
                        .filter(|&&(e, a, b)| (a == w || b == w) && Some(e) != parent[w])
                        .map(|s| s.0)
                        .collect();
                    if away.len() >= 2 {
                        found = Some((q, away[0].max(away[1])));
                        break 'search;
                    }
                }
                match found {
                    Some((q, drop)) => {
                        tree.remove(&drop);
                        tree.insert(q);
                    }
                    None => break,
                }
            }
        }
        layer += 1;
    }
    Ok(AdaptedTree {
        num_vertices: n,
        edges: edges.to_vec(),
        root,
        tree_edges: tree.iter().copied().collect(),
        non_tree_edges: (0..edges.len()).filter(|i| !tree.contains(i)).collect(),
        cycles: fundamental_cycles(n, edges, &tree, root),
    })
}

/// The segment graph `Σ_v` at a vertex: nodes are the half-edges at `v`
/// (edge index, end 0/1), segments join the two half-edges used by a
/// fundamental cycle passing through `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentGraph {
    /// Half-edges at the vertex.
    pub nodes: Vec<(usize, u8)>,
    /// Segments as node-index pairs (one per passage of a cycle).
    pub segments: Vec<(usize, usize)>,
}

/// Outcome of the planarity audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Planarity {
    /// Certified planar: after merging parallel segments the graph is a
    /// forest.
    Planar,
    /// Certified non-planar by the Euler bound `E ≤ 3V − 6` (or
    /// `E ≤ 2V − 4` for bipartite graphs).
    NonPlanar,
    /// Neither certificate applies.
    Undetermined,
}

impl AdaptedTree {
    /// Number of fundamental cycles, `h¹`.
    pub fn h1(&self) -> usize {
        self.non_tree_edges.len()
    }

    /// The segment graph at vertex `v`.
    pub fn segment_graph(&self, v: usize) -> SegmentGraph {
        let mut nodes = Vec::new();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                nodes.push((i, 0u8));
            }
            if b == v {
                nodes.push((i, 1u8));
            }
        }
        let index = |e: usize, end: u8| nodes.iter().position(|&x| x == (e, end)).expect("half-edge at v");
        let end_at = |e: usize, at: usize, from_side: bool| -> u8 {
            // Which end of edge e sits at vertex `at`; for loops choose by direction.
            let (a, b) = self.edges[e];
            if a == b {
                return if from_side { 0 } else { 1 };
            }
            if a == at {
                0
            } else {
                1
            }
        };
        let mut segments = Vec::new();
        for walk in &self.cycles {
            let len = walk.len();
            for i in 0..len {
                let (e_in, _, to) = walk[i];
                let (e_out, from, _) = walk[(i + 1) % len];
                debug_assert_eq!(to, from);
                if to != v || len == 1 {
                    continue;
                }
                let h_in = index(e_in, end_at(e_in, v, false));
                let h_out = index(e_out, end_at(e_out, v, true));
                segments.push((h_in.min(h_out), h_in.max(h_out)));
            }
            if len == 1 && walk[0].1 == v {
                // A self-loop cycle joins its own two half-edges.
                let e = walk[0].0;
                segments.push((index(e, 0), index(e, 1)));
            }
        }
        SegmentGraph { nodes, segments }
    }

    /// Planarity audit of the segment graph at every vertex.
    pub fn planarity(&self) -> Vec<Planarity> {
        (0..self.num_vertices)
            .map(|v| self.segment_graph(v).planarity())
            .collect()
    }

    /// Whether every segment graph is certified planar.
    pub fn all_planar(&self) -> bool {
        self.planarity().iter().all(|p| *p == Planarity::Planar)
    }

    /// Cycle vectors over the edges (`±1` by traversal direction).
    pub fn cycle_vectors(&self) -> Vec<Vec<i64>> {
        self.cycles
            .iter()
            .map(|walk| {
                let mut v = vec![0i64; self.edges.len()];
                for &(e, from, _) in walk {
                    v[e] += if self.edges[e].0 == from { 1 } else { -1 };
                }
                v
            })
            .collect()
    }
}

impl SegmentGraph {
    /// Planarity audit (see [`Planarity`]).
    pub fn planarity(&self) -> Planarity {
        let simple: BTreeSet<(usize, usize)> =
            self.segments.iter().copied().filter(|(a, b)| a != b).collect();
        let nv = self.nodes.len();
        let mut uf = UnionFind::new(nv.max(1));
        let mut forest = true;
        for &(a, b) in &simple {
            if !uf.union(a, b) {
                forest = false;
                break;
            }
        }
        if forest {
            return Planarity::Planar;
        }
        let (v, e) = (nv as i64, simple.len() as i64);
        if v >= 3 && e > 3 * v - 6 {
            return Planarity::NonPlanar;
        }
        if v >= 3 && is_bipartite(nv, &simple) && e > 2 * v - 4 {
            return Planarity::NonPlanar;
        }
        Planarity::Undetermined
    }
}

fn is_bipartite(n: usize, edges: &BTreeSet<(usize, usize)>) -> bool {
    let mut col = vec![-1i32; n];
    for s in 0..n {
        if col[s] != -1 {
            continue;
        }
        col[s] = 0;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(a, b) in edges {
                let w = if a == u { b } else if b == u { a } else { continue };
                if col[w] == -1 {
                    col[w] = 1 - col[u];
                    stack.push(w);
                } else if col[w] == col[u] {
                    return false;
                }
            }
        }
    }
    true
}

/// A Δ-adapted symplectic basis, recorded combinatorially.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaAdaptedBasis {
    /// Vertex genera.
    pub genera: Vec<u32>,
    /// Edges as vertex pairs.
    pub edges: Vec<(usize, usize)>,
    /// Prong number of every edge.
    pub kappas: Vec<i64>,
    /// Graph cycles as edge sets (each edge crossed once).
    pub graph_cycles: Vec<Vec<usize>>,
    /// The edge whose vanishing cycle is dual to each graph cycle.
    pub vanishing_edges: Vec<usize>,
    /// Number of non-crossing symplectic pairs at each vertex (its genus).
    pub noncrossing_pairs: Vec<u32>,
    /// The spanning tree used.
    pub tree: AdaptedTree,
}

impl DeltaAdaptedBasis {
    /// Total number of symplectic pairs, the genus of the smoothing.
    pub fn genus(&self) -> u32 {
        self.noncrossing_pairs.iter().sum::<u32>() + self.graph_cycles.len() as u32
    }

    /// Whether some graph cycle is dual to an even-prong vanishing cycle.
    pub fn has_even_vanishing_cycle(&self) -> bool {
        self.vanishing_edges.iter().any(|&e| self.kappas[e] % 2 == 0)
    }
}

/// Δ-adapted basis of a connected graph given by vertex genera, edges and
/// prong numbers.  If some edge has even prong number, the lowest such
/// edge is forced out of the spanning tree so that its vanishing cycle is
/// part of the basis.
pub fn delta_adapted_basis_raw(
    genera: &[u32],
    edges: &[(usize, usize)],
    kappas: &[i64],
) -> Result<DeltaAdaptedBasis> {
    let n = genera.len();
    if kappas.len() != edges.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} edges but {} prong numbers",
            edges.len(),
            kappas.len()
        )));
    }
    if kappas.iter().any(|&k| k < 1) {
        return Err(Error::Precondition("prong numbers must be positive".into()));
    }
    check_edges(n, edges)?;
    let even = (0..edges.len()).find(|&e| kappas[e] % 2 == 0 && edges[e].0 != edges[e].1);
    let tree = match even {
        Some(e0) => {
            // Build the adapted tree on Δ minus e0 (non-separating), then
            // re-insert e0 as a non-tree edge.
            let reduced: Vec<(usize, usize)> = edges
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != e0)
                .map(|(_, &x)| x)
                .collect();
            let sub = build_adapted_spanning_tree(n, &reduced).map_err(|_| {
                Error::Precondition("edge of even prong number is separating".into())
            })?;
            let lift = |i: usize| if i >= e0 { i + 1 } else { i };
            let tree_edges: Vec<usize> = sub.tree_edges.iter().map(|&i| lift(i)).collect();
            tree_with_root(n, edges, &tree_edges, sub.root)
        }
        None => build_adapted_spanning_tree(n, edges)?,
    };
    let graph_cycles: Vec<Vec<usize>> = tree
        .cycles
        .iter()
        .map(|walk| walk.iter().map(|s| s.0).collect())
        .collect();
    Ok(DeltaAdaptedBasis {
        genera: genera.to_vec(),
        edges: edges.to_vec(),
        kappas: kappas.to_vec(),
        graph_cycles,
        vanishing_edges: tree.non_tree_edges.clone(),
        noncrossing_pairs: genera.to_vec(),
        tree,
    })
}

fn tree_with_root(n: usize, edges: &[(usize, usize)], tree_edges: &[usize], root: usize) -> AdaptedTree {
    let tree: BTreeSet<usize> = tree_edges.iter().copied().collect();
    AdaptedTree {
        num_vertices: n,
        edges: edges.to_vec(),
        root,
        tree_edges: tree.iter().copied().collect(),
        non_tree_edges: (0..edges.len()).filter(|i| !tree.contains(i)).collect(),
        cycles: fundamental_cycles(n, edges, &tree, root),
    }
}

/// Vertex pairs, edges and prong numbers of a vertical level graph.
pub fn level_graph_data(lg: &LevelGraph) -> Result<(Vec<u32>, Vec<(usize, usize)>, Vec<i64>)> {
    if !lg.graph.is_connected() {
        return Err(Error::Precondition("level graph is not connected".into()));
    }
    let vm = lg.graph.vertex_map();
    let oriented = lg.oriented_edges();
    let mut kappas = Vec::new();
    for e in lg.enhancements() {
        match e {
            crate::level::Enhancement::Vertical(k) => kappas.push(k),
            crate::level::Enhancement::Horizontal => {
                return Err(Error::Precondition("horizontal edge in level graph".into()))
            }
        }
    }
    let edges = oriented.iter().map(|(a, b)| (vm[a], vm[b])).collect();
    Ok((lg.graph.genera().to_vec(), edges, kappas))
}

/// Δ-adapted basis of a connected vertical level graph.
pub fn delta_adapted_basis(lg: &LevelGraph) -> Result<DeltaAdaptedBasis> {
    let (genera, edges, kappas) = level_graph_data(lg)?;
    delta_adapted_basis_raw(&genera, &edges, &kappas)
}

/// A global prong-matching, recorded as an offset in `ℤ/κ_e` per edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProngMatching {
    /// Offset per edge, in `0..κ_e`.
    pub offsets: Vec<i64>,
    /// Prong numbers.
    pub kappas: Vec<i64>,
}

impl ProngMatching {
    /// The base prong-matching (all offsets zero).
    pub fn base(kappas: &[i64]) -> Self {
        ProngMatching {
            offsets: vec![0; kappas.len()],
            kappas: kappas.to_vec(),
        }
    }

    /// Rotation by `l` at one edge.
    pub fn rotate(&self, edge: usize, l: i64) -> Result<ProngMatching> {
        let k = *self
            .kappas
            .get(edge)
            .ok_or_else(|| Error::Precondition(format!("no vertical edge {edge}")))?;
        let mut out = self.clone();
        out.offsets[edge] = (out.offsets[edge] + l).rem_euclid(k);
        Ok(out)
    }

    /// Simultaneous rotation of every edge by one prong (turning the lower
    /// level once around).
    pub fn level_rotation(&self) -> ProngMatching {
        ProngMatching {
            offsets: self
                .offsets
                .iter()
                .zip(&self.kappas)
                .map(|(o, k)| (o + 1).rem_euclid(*k))
                .collect(),
            kappas: self.kappas.clone(),
        }
    }

    /// Size of the prong rotation group `Π κ_e`.
    pub fn group_order(kappas: &[i64]) -> i64 {
        kappas.iter().product()
    }

    /// Every element of the prong rotation group.
    pub fn all(kappas: &[i64]) -> Vec<ProngMatching> {
        let mut out = vec![ProngMatching::base(kappas)];
        for (e, &k) in kappas.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|p| (0..k).map(move |l| {
                    let mut q = p.clone();
                    q.offsets[e] = l;
                    q
                }))
                .collect();
        }
        out
    }
}

/// Turning numbers mod 2 of the basis cycles at the base prong-matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurningAssignment {
    /// Per vertex, `(ind a, ind b)` for each non-crossing pair.
    pub noncrossing: Vec<Vec<(u8, u8)>>,
    /// Turning number of each graph cycle at the base prong-matching.
    pub graph_base: Vec<u8>,
    /// Turning number of each vanishing cycle.
    pub vanishing: Vec<u8>,
}

impl TurningAssignment {
    /// Realises the given vertex parities: a vertex of parity `p` and genus
    /// `h ≥ 1` gets one pair `(0,0)` (Arf 1) when `p = 1` and pairs `(1,0)`
    /// (Arf 0) otherwise.  Vanishing cycles at odd prongs are odd, at even
    /// prongs even; graph cycles start at 0.
    pub fn from_vertex_parities(basis: &DeltaAdaptedBasis, parities: &[Parity]) -> Result<Self> {
        if parities.len() != basis.genera.len() {
            return Err(Error::DimensionMismatch("one parity per vertex required".into()));
        }
        let mut noncrossing = Vec::new();
        for (&h, &p) in basis.noncrossing_pairs.iter().zip(parities) {
            if h == 0 && p != 0 {
                return Err(Error::Precondition("genus-0 vertex must have even parity".into()));
            }
            let mut pairs = vec![(1u8, 0u8); h as usize];
            if p % 2 == 1 {
                pairs[0] = (0, 0);
            }
            noncrossing.push(pairs);
        }
        Ok(TurningAssignment {
            noncrossing,
            graph_base: vec![0; basis.graph_cycles.len()],
            vanishing: basis
                .vanishing_edges
                .iter()
                .map(|&e| (basis.kappas[e] % 2) as u8)
                .collect(),
        })
    }
}

fn arf_pair(a: u8, b: u8) -> u8 {
    ((a + 1) % 2) * ((b + 1) % 2)
}

/// Arf invariant `Σ (ind aᵢ + 1)(ind bᵢ + 1) mod 2` of the basis at the
/// prong-matching `σ`.
pub fn arf_parity(basis: &DeltaAdaptedBasis, assignment: &TurningAssignment, sigma: &ProngMatching) -> Parity {
    let mut total = 0u8;
    for pairs in &assignment.noncrossing {
        for &(a, b) in pairs {
            total ^= arf_pair(a, b);
        }
    }
    for (i, cycle) in basis.graph_cycles.iter().enumerate() {
        let mut ind = assignment.graph_base[i];
        for &e in cycle {
            if basis.kappas[e] % 2 == 0 {
                ind ^= (sigma.offsets[e].rem_euclid(2)) as u8;
            }
        }
        total ^= arf_pair(ind % 2, assignment.vanishing[i]);
    }
    total
}

/// Classification of the spin parity over prong-matchings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinClassification {
    /// Exactly half of the prong-matchings are even.
    HalfHalf,
    /// Every prong-matching has this parity.
    Constant(Parity),
}

/// Classifies a connected level graph: half/half if some prong number is
/// even, otherwise the sum of the vertex parities.
pub fn classify_spin(kappas: &[i64], vertex_parities: &[Parity]) -> SpinClassification {
    if kappas.iter().any(|k| k % 2 == 0) {
        SpinClassification::HalfHalf
    } else {
        SpinClassification::Constant(vertex_parities.iter().fold(0, |a, p| a ^ (p % 2)))
    }
}

/// Classification of a level graph from its vertex parities.
pub fn classify_level_graph(lg: &LevelGraph, vertex_parities: &[Parity]) -> SpinClassification {
    classify_spin(&lg.kappas(), vertex_parities)
}

/// Counts `(even, odd)` prong-matchings by brute force; fails when
/// `|P_Γ| > limit`.
pub fn parity_census(
    basis: &DeltaAdaptedBasis,
    assignment: &TurningAssignment,
    limit: i64,
) -> Result<(u64, u64)> {
    let order = ProngMatching::group_order(&basis.kappas);
    if order > limit {
        return Err(Error::Precondition(format!("prong group of order {order} exceeds {limit}")));
    }
    let mut even = 0;
    let mut odd = 0;
    for sigma in ProngMatching::all(&basis.kappas) {
        if arf_parity(basis, assignment, &sigma) == 0 {
            even += 1;
        } else {
            odd += 1;
        }
    }
    Ok((even, odd))
}

/// Census of the zero-dimensional stratum `H_0(2k, −2k, −1, −1)` with
/// `res_3 + res_4 = 0`.
///
/// Its points are `ω = z^{2k} dz / ((z − 1)(z − ζ))` with `ζ = e^{πij/k}`,
/// `j = 1, …, 2k − 1` (the residues at `1` and `ζ` cancel exactly when
/// `ζ^{2k} = 1`).  Gluing the two half-infinite cylinders gives a torus
/// whose core curve has turning number 0; the dual curve runs along the
/// chord from `ζ` to `1`, where `arg(z − 1)` and `arg(z − ζ)` are constant,
/// so its turning number is `2k · Δarg(z) / 2π`.  The parity is
/// `ind + 1 mod 2`.
pub fn genus0_paired_pole_census(k: u32) -> Result<(u64, u64)> {
    if k == 0 {
        return Err(Error::NonPositive(0));
    }
    let mut even = 0;
    let mut odd = 0;
    for j in 1..2 * k as i64 {
        let ind = paired_pole_turning_number(k as i64, j);
        if (ind + 1).rem_euclid(2) == 0 {
            even += 1;
        } else {
            odd += 1;
        }
    }
    Ok((even, odd))
}

/// Turning number of the dual curve of configuration `j` (see
/// [`genus0_paired_pole_census`]).  `Δarg z` along the chord from
/// `e^{iπj/k}` to `1` is `−πj/k` for `j < k`, `π(2k − j)/k` for `j > k`, and
/// `±π` for `j = k` (the chord passes the zero; both detours differ by the
/// even number `2k`).
pub fn paired_pole_turning_number(k: i64, j: i64) -> i64 {
    // In units of 2π: Δarg z = −j/(2k) or (2k − j)/(2k); times 2k.
    if j < k {
        -j
    } else if j > k {
        2 * k - j
    } else {
        k
    }
}

/// Parity of the genus-0 base cases: `(0, −1, −1)` is odd (gluing the
/// cylinders gives a flat torus); an even-type genus-0 signature without
/// simple poles is even by convention; anything else is not a base case.
pub fn base_parity(sig: &Signature) -> Option<Parity> {
    if sig.g != 0 || sig.k != 1 {
        return None;
    }
    let mut o = sig.orders.clone();
    o.sort_unstable();
    if o == vec![-1, -1, 0] {
        return Some(1);
    }
    if sig.is_even_type() {
        return Some(0);
    }
    None
}

/// Sign relating the spin class across a separating horizontal edge to the
/// product of the vertex spin classes: the parity of the glued surface is
/// the sum of the vertex parities plus one.
pub fn horizontal_join_spin_sign() -> i64 {
    -1
}

/// JSON record for one level graph: classification and prong classes.
pub fn classification_json(lg: &LevelGraph, class: SpinClassification) -> Result<serde_json::Value> {
    let (kind, parity) = match class {
        SpinClassification::HalfHalf => ("half", serde_json::Value::Null),
        SpinClassification::Constant(p) => ("constant", p.into()),
    };
    Ok(serde_json::json!({
        "kind": kind,
        "parity": parity,
        "prong_classes": lg.prong_class_count()?,
        "kappas": lg.kappas(),
        "graph": lg.to_json(),
    }))
}

/// Fundamental cycle lengths by edge, for diagnostics.
pub fn cycle_edge_counts(basis: &DeltaAdaptedBasis) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for c in &basis.graph_cycles {
        for &e in c {
            *m.entry(e).or_insert(0) += 1;
        }
    }
    m
}
