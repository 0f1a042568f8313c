//! Stratum classes of abelian differentials, plain and spin, computed by
//! resolving residue conditions and, in genus one, by solving the linear
//! system of clutching pullbacks along all one-edge boundary maps.
//!
//! Classes are pushforwards `p_*[PΞM̄^R]` to `Π M̄_{g_ν, n_ν}` of the
//! projectivised (generalised) stratum; for the spin variant the
//! difference of the even and odd components is pushed forward.
//!
//! The evaluation closure is:
//!
//! * genus zero, any residue conditions and paired simple poles;
//! * genus one, by clutching reconstruction;
//! * disconnected strata whose residue space splits per component (zero).
//!
//! Everything else (genus `≥ 2`, disconnected strata linked by residue
//! conditions) returns [`Error::Symbolic`].

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::Serialize;

use crate::algebra::{int, solve_rational_system, RatMatrix, Rational, SolveOutcome};
use crate::graph::{enumerate_gamma_structures, GraphContraction, HalfEdge, StableGraph};
use crate::level::{
    enumerate_horizontal_one_edge, enumerate_two_level_graphs, horizontal_level_stratum,
    level_stratum, lg_pair_on_top_free, lg_pair_split, lg_reference_bottom,
    lg_removed_condition_free, simple_star_graphs, Component, GenStratum, Level, LevelGraph,
    Signature,
};
use crate::spin_comb::horizontal_join_spin_sign;
use crate::taut::{
    complementary_probes, decorated_strata, product_probes, stable_graphs_cached, Ambient,
    DecoratedClass, Factor, Term, TERM_BASE,
};
use crate::{Error, Result};

/// Which class of a stratum is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    /// The fundamental class.
    Plain,
    /// The even component minus the odd component.
    Spin,
}

/// One step of the recursion: the stratum, the rule applied, and the
/// sub-computations it required.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TraceNode {
    /// Rendering of the stratum (or boundary graph) handled at this step.
    pub stratum: String,
    /// Rule used, e.g. `"base: genus 0"` or `"reconstruct"`.
    pub rule: String,
    /// Nested computations.
    pub children: Vec<TraceNode>,
}

impl TraceNode {
    fn new(stratum: String) -> Self {
        TraceNode {
            stratum,
            ..Default::default()
        }
    }

    /// Total number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TraceNode::size).sum::<usize>()
    }
}

/// Range of cohomological degrees (in complex codimension) in which the sum
/// of pullbacks along one-edge clutching maps of `M̄_{g,n}` is injective.
pub fn injectivity_range(g: u32, n: usize) -> i64 {
    let (g, n) = (g as i64, n as i64);
    match (g, n) {
        (0, _) => 2 * n - 7,
        (_, 0) | (_, 1) => 2 * g - 1,
        (_, 2) => 2 * g,
        _ => 2 * g - 3 + n,
    }
}

/// The ambient `M̄_Γ = Π_v M̄_{g(v), H(v)}` of a stable graph, one factor
/// per vertex in vertex order.
pub fn graph_ambient(graph: &StableGraph) -> Ambient {
    Ambient::product(
        (0..graph.num_vertices())
            .map(|v| Factor::new(graph.genera()[v], &graph.half_edges()[v]))
            .collect(),
    )
}

/// One-edge stable graphs of genus `g` with the given legs.
pub fn one_edge_graphs(g: u32, legs: &[HalfEdge]) -> Vec<StableGraph> {
    stable_graphs_cached(g, legs, 1)
        .iter()
        .filter(|gr| gr.num_edges() == 1)
        .cloned()
        .collect()
}

static MEMO: Lazy<Mutex<HashMap<String, (DecoratedClass, String)>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// The (plain or spin) class of a generalised stratum on its ambient.
pub fn stratum_class(s: &GenStratum, v: Variant) -> Result<DecoratedClass> {
    let mut tr = TraceNode::default();
    class_of(s, v, &mut tr)
}

/// [`stratum_class`] together with the recursion trace.
pub fn stratum_class_traced(s: &GenStratum, v: Variant) -> Result<(DecoratedClass, TraceNode)> {
    let mut tr = TraceNode::default();
    let c = class_of(s, v, &mut tr)?;
    Ok((c, tr))
}

/// Spin class of the stratum of a signature (legs `1..n`).
pub fn spin_stratum_class(sig: &Signature) -> Result<DecoratedClass> {
    stratum_class(&sig.stratum(), Variant::Spin)
}

/// Plain class of the stratum of a signature (legs `1..n`).
pub fn plain_stratum_class(sig: &Signature) -> Result<DecoratedClass> {
    stratum_class(&sig.stratum(), Variant::Plain)
}

fn rank(rows: Vec<Vec<Rational>>) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    RatMatrix::from_rows(rows).expect("rectangular").rank()
}

/// Rows of the residue theorem and the residue conditions over the poles.
fn residue_rows(s: &GenStratum) -> (Vec<HalfEdge>, Vec<Vec<Rational>>) {
    let poles = s.poles();
    let row = |set: &[HalfEdge]| -> Vec<Rational> {
        poles
            .iter()
            .map(|p| if set.contains(p) { Rational::one() } else { Rational::zero() })
            .collect()
    };
    let mut rows: Vec<Vec<Rational>> = s
        .components
        .iter()
        .filter(|c| !c.is_holomorphic())
        .map(|c| row(&c.labels()))
        .collect();
    rows.extend(s.residues.iter().map(|p| row(p)));
    (poles, rows)
}

/// Whether the space of residue constraints is a direct sum of constraints
/// on the poles of the individual components, i.e. the stratum is a
/// product of connected generalised strata.
pub fn splits_as_product(s: &GenStratum) -> bool {
    let (poles, rows) = residue_rows(s);
    let total = rank(rows.clone());
    let mut sum = 0;
    for ci in 0..s.components.len() {
        // dim(S ∩ V_c) = dim S − dim π_{¬c}(S).
        let projected: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&poles)
                    .map(|(x, p)| if s.component_of(*p) == Some(ci) { Rational::zero() } else { x.clone() })
                    .collect()
            })
            .collect();
        sum += total - rank(projected);
    }
    sum == total
}

/// Relabels a connected stratum to legs `1..n` (in increasing order);
/// returns the normalised stratum and the map back.
fn normalise(s: &GenStratum) -> Result<(GenStratum, HashMap<HalfEdge, HalfEdge>)> {
    let labels = s.labels();
    let fwd: HashMap<HalfEdge, HalfEdge> = labels
        .iter()
        .enumerate()
        .map(|(i, &h)| (h, i as HalfEdge + 1))
        .collect();
    let back = fwd.iter().map(|(&a, &b)| (b, a)).collect();
    let comps = s
        .components
        .iter()
        .map(|c| Component::new(c.g, c.legs.iter().map(|&(h, m)| (fwd[&h], m)).collect()))
        .collect();
    let res = s
        .residues
        .iter()
        .map(|p| p.iter().map(|h| fwd[h]).collect())
        .collect();
    Ok((GenStratum::new(s.k, comps, res)?, back))
}

fn class_of(s: &GenStratum, v: Variant, tr: &mut TraceNode) -> Result<DecoratedClass> {
    tr.stratum = s.describe();
    if s.k != 1 {
        return Err(Error::Symbolic(format!("{}: only abelian differentials are evaluated", s.describe())));
    }
    if s.is_empty() {
        tr.rule = "empty".into();
        return Ok(DecoratedClass::zero(s.ambient()));
    }
    if v == Variant::Spin && !s.admits_spin() {
        return Err(Error::Precondition(format!("{} does not carry a spin parity", s.describe())));
    }
    if s.components.len() > 1 {
        if splits_as_product(s) {
            tr.rule = "disconnected: independent scalings".into();
            return Ok(DecoratedClass::zero(s.ambient()));
        }
        tr.rule = "symbolic: components linked by residue conditions".into();
        return Err(Error::Symbolic(format!(
            "{}: components linked by residue conditions",
            s.describe()
        )));
    }
    let (norm, back) = normalise(s)?;
    let key = format!("{v:?}|{}", norm.describe());
    let cached = MEMO.lock().expect("memo lock").get(&key).cloned();
    let (cls, rule) = match cached {
        Some((c, rule)) => {
            tr.rule = format!("cached: {rule}");
            (c, rule)
        }
        None => {
            let mut sub = TraceNode::new(norm.describe());
            let c = connected_class(&norm, v, &mut sub)?;
            let rule = sub.rule.clone();
            tr.rule = rule.clone();
            tr.children = sub.children;
            MEMO.lock().expect("memo lock").insert(key, (c.clone(), rule.clone()));
            (c, rule)
        }
    };
    let _ = rule;
    Ok(cls.relabel_legs(&back, s.ambient()))
}

/// Base cases of the spin recursion that are evaluated directly: genus
/// zero without simple poles (even), holomorphic genus one (odd),
/// `(0^m, −1, −1)` in genus zero (odd, the glued torus) and
/// `(2k, −2k, −1, −1)` in genus zero (`ψ` at the zero).  Returns `None` if
/// no base case applies.
pub fn spin_base_class(s: &GenStratum) -> Option<DecoratedClass> {
    if !s.is_connected() || !s.admits_spin() {
        return None;
    }
    let c = &s.components[0];
    let amb = s.ambient();
    let simple = s.simple_poles();
    let others: Vec<(HalfEdge, i64)> = c.legs.iter().copied().filter(|l| l.1 != -1).collect();
    match c.g {
        0 if simple.is_empty() => Some(DecoratedClass::fundamental(amb)),
        0 if others.iter().all(|l| l.1 >= 0) => Some(DecoratedClass::fundamental(amb).neg()),
        0 if simple.len() == 2 && others.len() == 2 => {
            let pos = others.iter().find(|l| l.1 > 0)?;
            Some(DecoratedClass::psi(amb, pos.0))
        }
        1 if s.poles().is_empty() => Some(DecoratedClass::fundamental(amb).neg()),
        _ => None,
    }
}

fn connected_class(s: &GenStratum, v: Variant, tr: &mut TraceNode) -> Result<DecoratedClass> {
    let g = s.components[0].g;
    let eff = s.effective_parts();
    let pairing = s.pairing_parts();
    let resolvable = eff
        .iter()
        .copied()
        .find(|&i| v == Variant::Plain || !pairing.contains(&s.residues[i]));
    if let Some(i) = resolvable {
        let reference = s.residues[i][0];
        return resolve_with(s, i, reference, v, tr);
    }
    match v {
        Variant::Plain => {
            // Remaining conditions are implied by the residue theorem.
            let free = s.with_residues(Vec::new())?;
            if g == 0 || (g == 1 && free.poles().is_empty()) {
                tr.rule = "base: full-dimensional".into();
                return Ok(DecoratedClass::fundamental(s.ambient()));
            }
            if g == 1 {
                return reconstruct_into(&free, v, tr);
            }
        }
        Variant::Spin => {
            if let Some(c) = spin_base_class(s) {
                tr.rule = "base: spin".into();
                return Ok(c);
            }
            if g == 0 {
                let p = s.pairing_parts()[0].clone();
                return paired_poles_into(s, p[0], p[1], v, tr);
            }
            if g == 1 {
                return reconstruct_into(s, v, tr);
            }
        }
    }
    tr.rule = "symbolic: genus beyond evaluation range".into();
    Err(Error::Symbolic(format!(
        "{}: genus {g} classes need a tautological basis",
        s.describe()
    )))
}

/// Removes the residue condition with index `idx` and expresses the class
/// through the ambient without it:
/// `p_*[B^R] = −(m_ref+1) ψ_ref p_*[B] + Σ_{ref below} p_*(ℓ[D]) − Σ_{free} p_*(ℓ[D])`.
pub fn resolve_condition(
    s: &GenStratum,
    idx: usize,
    reference: HalfEdge,
    v: Variant,
) -> Result<DecoratedClass> {
    let mut tr = TraceNode::new(s.describe());
    resolve_with(s, idx, reference, v, &mut tr)
}

fn resolve_with(
    s: &GenStratum,
    idx: usize,
    reference: HalfEdge,
    v: Variant,
    tr: &mut TraceNode,
) -> Result<DecoratedClass> {
    tr.rule = format!("remove residue condition, reference leg {reference}");
    let removed = s.residues[idx].clone();
    let mut rest = s.residues.clone();
    rest.remove(idx);
    let b0 = s.with_residues(rest)?;
    let m_ref = b0
        .order_of(reference)
        .ok_or_else(|| Error::Precondition(format!("reference leg {reference} absent")))?;
    let amb = s.ambient();
    let mut out = DecoratedClass::zero(amb.clone());
    if m_ref + 1 != 0 {
        let mut sub = TraceNode::default();
        let base = class_of(&b0, v, &mut sub)?;
        tr.children.push(sub);
        out.add_scaled(&base.mul_psi(reference, 1), &int(-(m_ref + 1)));
    }
    for lg in lg_reference_bottom(&b0, reference)? {
        let d = divisor_into(&b0, &lg, &b0.residues, v, tr)?;
        out = out.add(&d);
    }
    for lg in lg_removed_condition_free(&b0, &removed)? {
        let d = divisor_into(&b0, &lg, &b0.residues, v, tr)?;
        out = out.add(&d.neg());
    }
    Ok(out)
}

/// Genus-zero class with paired simple poles `a`, `b`, via the boundary of
/// the stratum without that pairing.  The spin variant keeps only the
/// graphs with both poles on top where the pairing is implied.
pub fn paired_poles_class(s: &GenStratum, a: HalfEdge, b: HalfEdge, v: Variant) -> Result<DecoratedClass> {
    let mut tr = TraceNode::new(s.describe());
    paired_poles_into(s, a, b, v, &mut tr)
}

fn paired_poles_into(
    s: &GenStratum,
    a: HalfEdge,
    b: HalfEdge,
    v: Variant,
    tr: &mut TraceNode,
) -> Result<DecoratedClass> {
    tr.rule = format!("paired simple poles {a},{b}");
    let pair = vec![a.min(b), a.max(b)];
    let rest: Vec<Vec<HalfEdge>> = s.residues.iter().filter(|p| **p != pair).cloned().collect();
    let b0 = s.with_residues(rest)?;
    let mut out = DecoratedClass::zero(s.ambient());
    for lg in lg_pair_on_top_free(&b0, a, b)? {
        let d = divisor_into(&b0, &lg, &s.residues, v, tr)?;
        out = out.add(&d.neg());
    }
    if v == Variant::Plain {
        for lg in lg_pair_split(&b0, a, b)? {
            let d = divisor_into(&b0, &lg, &b0.residues, v, tr)?;
            out = out.add(&d);
        }
    }
    Ok(out)
}

/// Tensor product of the two level classes, or `None` when either
/// vanishes.  A symbolic level is tolerated when the other one vanishes.
fn level_product(
    top: &GenStratum,
    bottom: &GenStratum,
    v: Variant,
    tr: &mut TraceNode,
) -> Result<Option<DecoratedClass>> {
    let mut nt = TraceNode::default();
    let t = class_of(top, v, &mut nt);
    tr.children.push(nt);
    if matches!(&t, Ok(c) if c.is_empty()) {
        return Ok(None);
    }
    let mut nb = TraceNode::default();
    let b = class_of(bottom, v, &mut nb);
    tr.children.push(nb);
    match (t, b) {
        (_, Ok(b)) if b.is_empty() => Ok(None),
        (Ok(t), Ok(b)) => Ok(Some(t.tensor(&b))),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// `p_*(ℓ_Δ [D_Δ]) = Π κ_e/|Aut Δ| · ξ_{Δ*}(top ⊗ bottom)` on the ambient
/// of `amb`.  Top-level conditions are taken from `top_residues`, the bottom
/// level (with the global residue condition) from `amb`.
fn divisor_into(
    amb: &GenStratum,
    lg: &LevelGraph,
    top_residues: &[Vec<HalfEdge>],
    v: Variant,
    tr: &mut TraceNode,
) -> Result<DecoratedClass> {
    let target = amb.ambient();
    let kappas = lg.kappas();
    if v == Variant::Spin && kappas.iter().any(|k| k % 2 == 0) {
        return Ok(DecoratedClass::zero(target));
    }
    let mut node = TraceNode::new(lg.describe());
    node.rule = "boundary divisor".into();
    let top = level_stratum(lg, top_residues, Level::Top, true)?.stratum;
    let bottom = level_stratum(lg, &amb.residues, Level::Bottom, true)?.stratum;
    let prod = level_product(&top, &bottom, v, &mut node)?;
    tr.children.push(node);
    let Some(prod) = prod else {
        return Ok(DecoratedClass::zero(target));
    };
    let coeff = Rational::new(
        kappas.iter().product::<i64>().into(),
        (lg.automorphism_order() as i64).into(),
    );
    Ok(prod.glue(lg.graph.edges(), target)?.scale(&coeff))
}

/// Pushes a class on `M̄_Δ` (factors ordered as the vertices carrying them)
/// forward to `M̄_Γ` along a Γ-structure: contracted edges are glued and
/// the remaining half-edges renamed to those of Γ.
pub fn push_along_structure(
    cls: &DecoratedClass,
    delta: &StableGraph,
    f: &GraphContraction,
    gamma: &StableGraph,
) -> Result<DecoratedClass> {
    let mut next = delta.max_label().max(gamma.max_label()) + 1;
    let mut map: HashMap<HalfEdge, HalfEdge> = HashMap::new();
    for (&hg, &hd) in &f.half_edge_map {
        map.insert(hd, hg);
    }
    let mut pairs = Vec::new();
    for &e in &f.contracted_edges {
        let (a, b) = delta.edges()[e];
        map.insert(a, next);
        map.insert(b, next + 1);
        pairs.push((next, next + 1));
        next += 2;
    }
    if next >= TERM_BASE {
        return Err(Error::Precondition("too many half-edges for labelling".into()));
    }
    let inter = Ambient::product(
        cls.ambient()
            .factors
            .iter()
            .map(|fa| {
                let legs: Vec<HalfEdge> = fa.legs.iter().map(|h| *map.get(h).unwrap_or(h)).collect();
                Factor::new(fa.g, &legs)
            })
            .collect(),
    );
    cls.relabel_legs(&map, inter).glue(&pairs, graph_ambient(gamma))
}

/// Class of a horizontal level stratum (a single level with one horizontal
/// edge).  A separating edge between two vertices, each with exactly two
/// simple poles, gives the product of the per-vertex classes with their
/// poles paired (times the sign of a horizontal join for spin).
fn horizontal_class(hs: &GenStratum, v: Variant, tr: &mut TraceNode) -> Result<DecoratedClass> {
    if hs.components.len() == 1 {
        let mut node = TraceNode::default();
        let c = class_of(hs, v, &mut node)?;
        tr.children.push(node);
        return Ok(c);
    }
    if hs.is_empty() {
        return Ok(DecoratedClass::zero(hs.ambient()));
    }
    let mut acc: Option<DecoratedClass> = None;
    for comp in &hs.components {
        let simple: Vec<HalfEdge> = comp.legs.iter().filter(|l| l.1 == -1).map(|l| l.0).collect();
        if simple.len() != 2 {
            return Err(Error::Symbolic(format!(
                "{}: horizontal join without a pair of simple poles per side",
                hs.describe()
            )));
        }
        let piece = GenStratum::new(hs.k, vec![comp.clone()], vec![simple])?;
        let mut node = TraceNode::default();
        let c = class_of(&piece, v, &mut node)?;
        tr.children.push(node);
        acc = Some(match acc {
            None => c,
            Some(a) => a.tensor(&c),
        });
    }
    let mut c = acc.expect("two components");
    if v == Variant::Spin {
        c = c.scale(&int(horizontal_join_spin_sign()));
    }
    Ok(c)
}

/// Clutching pullback `ξ_Γ^* p_*[PΞM̄^R]` of a connected stratum along a
/// one-edge graph Γ on the same legs, as a class on `M̄_Γ`.
pub fn clutching_pullback(s: &GenStratum, gamma: &StableGraph, v: Variant) -> Result<DecoratedClass> {
    let mut tr = TraceNode::default();
    clutching_pullback_into(s, gamma, v, &mut tr)
}

/// Contribution of one boundary graph of the stratum to a clutching
/// pullback: the sum over its Γ-structures of the pushed level classes.
#[derive(Clone, Debug)]
pub struct PullbackContribution {
    /// The level graph (two-level, or one horizontal edge).
    pub graph: LevelGraph,
    /// Whether the graph has a horizontal edge.
    pub horizontal: bool,
    /// Number of Γ-structures on the graph.
    pub structures: usize,
    /// The contribution on `M̄_Γ`.
    pub class: DecoratedClass,
}

/// All non-zero contributions to the clutching pullback along Γ.
pub fn pullback_contributions(
    s: &GenStratum,
    gamma: &StableGraph,
    v: Variant,
) -> Result<Vec<PullbackContribution>> {
    let mut tr = TraceNode::default();
    contributions_into(s, gamma, v, &mut tr)
}

fn contributions_into(
    s: &GenStratum,
    gamma: &StableGraph,
    v: Variant,
    tr: &mut TraceNode,
) -> Result<Vec<PullbackContribution>> {
    let gamb = graph_ambient(gamma);
    let mut out = Vec::new();
    let aut_gamma = int(gamma.automorphism_order() as i64);
    for lg in enumerate_horizontal_one_edge(s)? {
        let structures = enumerate_gamma_structures(&lg.graph, gamma);
        if structures.is_empty() {
            continue;
        }
        let hs = horizontal_level_stratum(s, &lg)?;
        let mut node = TraceNode::new(lg.describe());
        node.rule = "horizontal".into();
        let cls = horizontal_class(&hs, v, &mut node)?;
        tr.children.push(node);
        if cls.is_empty() {
            continue;
        }
        let mut acc = DecoratedClass::zero(gamb.clone());
        for f in &structures {
            let pushed = push_along_structure(&cls, &lg.graph, f, gamma)?;
            acc.add_scaled(&pushed, &(Rational::one() / &aut_gamma));
        }
        out.push(PullbackContribution {
            graph: lg,
            horizontal: true,
            structures: structures.len(),
            class: acc,
        });
    }
    for lg in enumerate_two_level_graphs(s)? {
        let structures = enumerate_gamma_structures(&lg.graph, gamma);
        if structures.is_empty() {
            continue;
        }
        let kappas = lg.kappas();
        if v == Variant::Spin && kappas.iter().any(|k| k % 2 == 0) {
            continue;
        }
        let mut node = TraceNode::new(lg.describe());
        node.rule = "vertical".into();
        let top = level_stratum(&lg, &s.residues, Level::Top, true)?.stratum;
        let bottom = level_stratum(&lg, &s.residues, Level::Bottom, true)?.stratum;
        let prod = level_product(&top, &bottom, v, &mut node)?;
        tr.children.push(node);
        let Some(prod) = prod else { continue };
        let kprod: i64 = kappas.iter().product();
        let aut = lg.automorphism_order() as i64;
        let mut acc = DecoratedClass::zero(gamb.clone());
        for f in &structures {
            let kept = (0..lg.graph.num_edges())
                .find(|e| !f.contracted_edges.contains(e))
                .expect("one edge survives");
            let coeff = Rational::new(kprod.into(), (kappas[kept] * aut).into());
            let pushed = push_along_structure(&prod, &lg.graph, f, gamma)?;
            acc.add_scaled(&pushed, &coeff);
        }
        out.push(PullbackContribution {
            graph: lg,
            horizontal: false,
            structures: structures.len(),
            class: acc,
        });
    }
    Ok(out)
}

fn clutching_pullback_into(
    s: &GenStratum,
    gamma: &StableGraph,
    v: Variant,
    tr: &mut TraceNode,
) -> Result<DecoratedClass> {
    let mut out = DecoratedClass::zero(graph_ambient(gamma));
    for c in contributions_into(s, gamma, v, tr)? {
        out = out.add(&c.class);
    }
    Ok(out)
}

/// Fingerprint of the pullback `ξ_Γ^* x` of a class `x` on `M̄_{g,n}`
/// against the product probes of `M̄_Γ`, via the projection formula
/// `∫ ξ_Γ^* x · P = ∫ x · ξ_{Γ*} P`.  Pairs with
/// `product_probes(graph_ambient(Γ), dim − deg x)`.
pub fn pullback_fingerprint(x: &DecoratedClass, gamma: &StableGraph, degree: i64) -> Result<Vec<Rational>> {
    let gamb = graph_ambient(gamma);
    product_probes(&gamb, gamb.dim() - degree)
        .iter()
        .map(|p| Ok(pair_with(x, &glued_probe(gamma, p, x.ambient())?)))
        .collect()
}

/// Pushforward `ξ_{Γ*}` of a product probe on `M̄_Γ` to `M̄_{g,n}`.
fn glued_probe(gamma: &StableGraph, probe: &[Term], target: &Ambient) -> Result<DecoratedClass> {
    let gamb = graph_ambient(gamma);
    let mut acc: Option<DecoratedClass> = None;
    for (f, t) in gamb.factors.iter().zip(probe) {
        let c = DecoratedClass::from_term(Ambient::single(f.g, &f.legs), t.clone(), Rational::one())?;
        acc = Some(match acc {
            None => c,
            Some(a) => a.tensor(&c),
        });
    }
    acc.expect("non-empty graph").glue(gamma.edges(), target.clone())
}

fn pair_with(x: &DecoratedClass, y: &DecoratedClass) -> Rational {
    y.terms().map(|(t, c)| c * x.pair(std::slice::from_ref(t))).sum()
}

/// Diagnostics of a clutching reconstruction.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// Degree of the unknown class.
    pub degree: i64,
    /// Number of independent candidate classes.
    pub unknowns: usize,
    /// Number of pullback equations.
    pub equations: usize,
    /// Boundary graphs whose pullbacks were used.
    pub graphs: usize,
}

/// Genus-one class of a connected stratum reconstructed from its clutching
/// pullbacks (the self-node graph is skipped for three or more legs).
pub fn reconstruct(s: &GenStratum, v: Variant) -> Result<(DecoratedClass, SolveReport)> {
    let mut tr = TraceNode::default();
    reconstruct_with_report(s, v, &mut tr)
}

fn reconstruct_into(s: &GenStratum, v: Variant, tr: &mut TraceNode) -> Result<DecoratedClass> {
    reconstruct_with_report(s, v, tr).map(|(c, _)| c)
}

fn reconstruct_with_report(
    s: &GenStratum,
    v: Variant,
    tr: &mut TraceNode,
) -> Result<(DecoratedClass, SolveReport)> {
    tr.rule = "reconstruct from clutching pullbacks".into();
    if !s.is_connected() {
        return Err(Error::Precondition("reconstruction needs a connected stratum".into()));
    }
    let g = s.components[0].g;
    let legs = s.labels();
    let amb = s.ambient();
    let d = amb.dim() - s.proj_dim().expect("abelian");
    if d > injectivity_range(g, legs.len()) {
        return Err(Error::Symbolic(format!(
            "{}: degree {d} beyond the injectivity range",
            s.describe()
        )));
    }
    // Independent candidates modulo numerical equivalence.
    let full = complementary_probes(&amb, d);
    let mut cands: Vec<DecoratedClass> = Vec::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for t in decorated_strata(g, &legs, d) {
        let c = DecoratedClass::from_term(amb.clone(), t, Rational::one())?;
        let fp = c.fingerprint(&full);
        let mut trial = rows.clone();
        trial.push(fp);
        if rank(trial.clone()) > rows.len() {
            rows = trial;
            cands.push(c);
        }
    }
    let mut eq_rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    let mut graphs = 0;
    for gamma in one_edge_graphs(g, &legs) {
        if legs.len() >= 3 && gamma.h1() == 1 {
            continue;
        }
        graphs += 1;
        let mut node = TraceNode::new(format!("pullback to {}", gamma.canonical_key()));
        let pull = clutching_pullback_into(s, &gamma, v, &mut node)?;
        tr.children.push(node);
        let gamb = graph_ambient(&gamma);
        for probe in product_probes(&gamb, gamb.dim() - d) {
            rhs.push(pull.pair(&probe));
            let glued = glued_probe(&gamma, &probe, &amb)?;
            eq_rows.push(cands.iter().map(|c| pair_with(c, &glued)).collect());
        }
    }
    let report = SolveReport {
        degree: d,
        unknowns: cands.len(),
        equations: rhs.len(),
        graphs,
    };
    if cands.is_empty() {
        return if rhs.iter().all(Zero::is_zero) {
            Ok((DecoratedClass::zero(amb), report))
        } else {
            Err(Error::Solve("inconsistent pullbacks with no candidates".into()))
        };
    }
    let m = if eq_rows.is_empty() {
        RatMatrix::zeros(0, cands.len())
    } else {
        RatMatrix::from_rows(eq_rows)?
    };
    let x = match solve_rational_system(&m, &rhs)? {
        SolveOutcome::Unique(x) => x,
        SolveOutcome::Inconsistent => {
            return Err(Error::Solve(format!("{}: pullbacks inconsistent", s.describe())))
        }
        SolveOutcome::NonUnique { kernel, .. } => {
            return Err(Error::Solve(format!(
                "{}: pullbacks leave a kernel of dimension {}",
                s.describe(),
                kernel.len()
            )))
        }
    };
    let mut out = DecoratedClass::zero(amb);
    for (c, xi) in cands.iter().zip(&x) {
        out.add_scaled(c, xi);
    }
    Ok((out, report))
}

/// Star-graph side of the (spin) double ramification formula for `k = 1`:
/// `Σ_Δ Π κ_e / |Aut Δ| · ξ_{Δ*}(Π_top [H_top] ⊗ [H_center])`, where the
/// centre carries no residue conditions.  The trivial graph contributes the
/// stratum class itself.  With `Variant::Spin` only graphs with all prongs
/// odd enter.
pub fn star_graph_sum(sig: &Signature, v: Variant) -> Result<DecoratedClass> {
    if sig.k != 1 {
        return Err(Error::Symbolic("star-graph sums are evaluated for k = 1 only".into()));
    }
    let s = sig.stratum();
    let mut out = stratum_class(&s, v)?;
    for lg in simple_star_graphs(sig, v == Variant::Spin)? {
        let top = level_stratum(&lg, &[], Level::Top, false)?.stratum;
        let center = level_stratum(&lg, &[], Level::Bottom, false)?.stratum;
        let mut tops: Option<DecoratedClass> = None;
        for comp in &top.components {
            let piece = GenStratum::new(1, vec![comp.clone()], Vec::new())?;
            let c = stratum_class(&piece, v)?;
            tops = Some(match tops {
                None => c,
                Some(a) => a.tensor(&c),
            });
        }
        let c = stratum_class(&center, v)?;
        let prod = tops.expect("a top vertex").tensor(&c);
        let coeff = Rational::new(
            lg.kappas().iter().product::<i64>().into(),
            (lg.automorphism_order() as i64).into(),
        );
        out.add_scaled(&prod.glue(lg.graph.edges(), s.ambient())?, &coeff);
    }
    Ok(out)
}
