//! Conversions between the power-graph variants.
//!
//! A component `Φ` of the Z±-power graph made of infinite-order elements
//! falls apart into two N-power components `Ψ₁`, `Ψ₂ = Ψ₁⁻¹`, with
//! `Φ ≅ Ψ₁ ⊠ P₂` and `Ψ₁ ≅ Φ/≡`. Component censuses and the transposition
//! lift below turn isomorphisms of one variant into isomorphisms of another.

use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use serde::Serialize;

use crate::error::TransformError;
use crate::graphs::{find_isomorphism, is_isomorphism, SimpleGraph, TwinPartition};
use crate::groups::{Element, Group};
use crate::powergraph::{PowerGraphBundle, VariantBundles, VariantTag};

/// Whether `x^n = y^m` for some `n, m >= 1`, i.e. whether `x` and `y` lie
/// in the same component of the N-power graph.
pub fn sbar_same_component(group: &Group, x: &Element, y: &Element) -> Result<bool, TransformError> {
    let e = group.identity();
    if let Group::Finite(_) = group {
        return Err(TransformError::UnsupportedFamily(group.family_name()));
    }
    for g in [x, y] {
        group.check(g).map_err(|_| TransformError::TorsionComponent(g.to_string()))?;
        if *g == e {
            return Err(TransformError::TorsionComponent(g.to_string()));
        }
    }
    Ok(match (x, y) {
        (Element::Int(a), Element::Int(b)) => a.signum() == b.signum(),
        (Element::Rat(a), Element::Rat(b)) => a.numer().signum() == b.numer().signum(),
        (Element::Triple(a, b, c), Element::Triple(a2, b2, c2)) => {
            if (*a, *b) == (0, 0) || (*a2, *b2) == (0, 0) {
                (*a, *b) == (*a2, *b2) && c.signum() == c2.signum()
            } else {
                let d = a.gcd(b);
                let d2 = a2.gcd(b2);
                if (a / d, b / d) != (a2 / d2, b2 / d2) {
                    return Ok(false);
                }
                // n a = m a2 forces (n, m) to be a multiple of (alpha, beta);
                // roots are unique in the group, so one multiple decides all.
                let g = d.gcd(&d2);
                group.power(x, d2 / g) == group.power(y, d / g)
            }
        }
        _ => unreachable!("elements were checked against the group"),
    })
}

/// The two N-power components inside one Z±-power component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSplit {
    /// Carrier indices of `Φ`, ascending.
    pub component: Vec<usize>,
    /// The half containing the least vertex of `Φ`.
    pub psi1: Vec<usize>,
    pub psi2: Vec<usize>,
    /// `(x, x⁻¹)` for every `x` in `psi1`.
    pub inversion: Vec<(usize, usize)>,
}

fn require(b: &PowerGraphBundle, v: VariantTag) -> Result<(), TransformError> {
    if b.variant() == v {
        Ok(())
    } else {
        Err(TransformError::WrongVariant { expected: v.name(), found: b.variant().name() })
    }
}

pub fn split_component(b: &PowerGraphBundle, phi: &[usize]) -> Result<ComponentSplit, TransformError> {
    require(b, VariantTag::Zpm)?;
    let mut component = phi.to_vec();
    component.sort_unstable();
    component.dedup();
    if let Some(&t) = component.iter().find(|&&v| !b.has_infinite_order(v)) {
        return Err(TransformError::TorsionComponent(b.element(t).to_string()));
    }
    let plus = b.variant_graph_on(&component, VariantTag::Nplus);
    let parts = plus.connected_components();
    if parts.len() != 2 {
        return Err(TransformError::UnexpectedSplit { count: parts.len() });
    }
    let lift = |p: &[usize]| p.iter().map(|&i| component[i]).collect::<Vec<_>>();
    let (psi1, psi2) = if parts[0].contains(&0) { (lift(&parts[0]), lift(&parts[1])) } else { (lift(&parts[1]), lift(&parts[0])) };
    let mut inverses: Vec<usize> = psi1.iter().map(|&v| b.inverse_index(v)).collect();
    inverses.sort_unstable();
    if inverses != psi2 {
        return Err(TransformError::InversionMismatch(format!("{} halves of sizes {} and {}", b.element(psi1[0]), psi1.len(), psi2.len())));
    }
    let inversion = psi1.iter().map(|&v| (v, b.inverse_index(v))).collect();
    Ok(ComponentSplit { component, psi1, psi2, inversion })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxtimesReport {
    /// `Ψ₁ ≅ Ψ₂` as N-power graphs.
    pub halves_isomorphic: bool,
    /// `Φ ≅ Ψ₁ ⊠ P₂`.
    pub product_isomorphic: bool,
    /// `Ψ₁ ≅ Φ/≡`, with `≡` the twin relation of the whole group.
    pub quotient_isomorphic: bool,
    /// Whether the window's own twin classes on `Φ` are exactly the
    /// group's (boundary effects can merge classes in small windows).
    pub window_twins_exact: bool,
    /// Labels `(x, image)` of the `Ψ₁ → Ψ₂` isomorphism found.
    pub halves_map: Option<Vec<[String; 2]>>,
}

impl BoxtimesReport {
    pub fn all(&self) -> bool {
        self.halves_isomorphic && self.product_isomorphic && self.quotient_isomorphic
    }
}

pub fn verify_boxtimes_decomposition(b: &PowerGraphBundle, split: &ComponentSplit) -> Result<BoxtimesReport, TransformError> {
    require(b, VariantTag::Zpm)?;
    let phi = b.graph().induced(&split.component);
    let psi1 = b.variant_graph_on(&split.psi1, VariantTag::Nplus);
    let psi2 = b.variant_graph_on(&split.psi2, VariantTag::Nplus);
    let halves = find_isomorphism(&psi1, &psi2);
    let product = psi1.strong_product(&SimpleGraph::path(2));
    let classes = inverse_classes(b, &split.component);
    let quotient = phi.quotient_by_blocks(&classes)?;
    Ok(BoxtimesReport {
        window_twins_exact: phi.twin_partition().same_blocks(&classes),
        halves_isomorphic: halves.is_some(),
        product_isomorphic: find_isomorphism(&phi, &product).is_some(),
        quotient_isomorphic: find_isomorphism(&psi1, &quotient).is_some(),
        halves_map: halves.map(|m| label_pairs(&psi1, &psi2, &m)),
    })
}

/// The classes `{x, x⁻¹}` of a torsion-free component, as local indices.
fn inverse_classes(b: &PowerGraphBundle, component: &[usize]) -> TwinPartition {
    let mut blocks = Vec::new();
    for (i, &v) in component.iter().enumerate() {
        let j = component.binary_search(&b.inverse_index(v)).expect("components are inversion-closed");
        if i < j {
            blocks.push(vec![i, j]);
        }
    }
    TwinPartition::from_blocks(blocks, component.len())
}

pub(crate) fn label_pairs(g: &SimpleGraph, h: &SimpleGraph, map: &[usize]) -> Vec<[String; 2]> {
    map.iter().enumerate().map(|(i, &j)| [g.label(i).to_string(), h.label(j).to_string()]).collect()
}

fn same_carrier(a: &PowerGraphBundle, b: &PowerGraphBundle) -> bool {
    a.elements() == b.elements()
}

/// Lift an isomorphism of Z±-power graphs to one of power graphs:
/// `φ̂ = τ ∘ φ` where `τ` swaps `e_H` and `φ(e_G)`.
pub fn lift_pm_iso_to_power_iso(
    phi: &[usize],
    pm_g: &PowerGraphBundle,
    pm_h: &PowerGraphBundle,
    z_g: &PowerGraphBundle,
    z_h: &PowerGraphBundle,
) -> Result<Vec<usize>, TransformError> {
    require(pm_g, VariantTag::Zpm)?;
    require(pm_h, VariantTag::Zpm)?;
    require(z_g, VariantTag::Z)?;
    require(z_h, VariantTag::Z)?;
    if !same_carrier(pm_g, z_g) || !same_carrier(pm_h, z_h) {
        return Err(TransformError::NotAnIsomorphism("bundles do not share a carrier".into()));
    }
    if !is_isomorphism(pm_g.graph(), pm_h.graph(), phi) {
        return Err(TransformError::NotAnIsomorphism("input map is not a Z±-power graph isomorphism".into()));
    }
    let (eh, image_of_eg) = (pm_h.identity_index(), phi[pm_g.identity_index()]);
    let tau = |v: usize| {
        if v == eh {
            image_of_eg
        } else if v == image_of_eg {
            eh
        } else {
            v
        }
    };
    let lifted: Vec<usize> = phi.iter().map(|&v| tau(v)).collect();
    if !is_isomorphism(z_g.graph(), z_h.graph(), &lifted) {
        return Err(TransformError::NotAnIsomorphism("lifted map is not a power graph isomorphism".into()));
    }
    Ok(lifted)
}

/// A random automorphism of the Z±-power graph: an arbitrary permutation
/// inside each twin class, optionally after group inversion.
pub fn random_pm_automorphism<R: Rng + ?Sized>(pm: &PowerGraphBundle, rng: &mut R) -> Vec<usize> {
    let n = pm.order();
    let invert = rng.random_bool(0.5);
    let mut perm: Vec<usize> = (0..n).collect();
    for block in pm.graph().twin_partition().blocks() {
        let mut shuffled = block.clone();
        shuffled.shuffle(rng);
        for (&from, to) in block.iter().zip(shuffled) {
            perm[from] = to;
        }
    }
    let map: Vec<usize> = (0..n).map(|v| perm[if invert { pm.inverse_index(v) } else { v }]).collect();
    map
}

/// Components of one isomorphism class.
#[derive(Clone, Debug)]
pub struct ComponentClass {
    pub representative: SimpleGraph,
    /// Carrier index sets of the member components.
    pub members: Vec<Vec<usize>>,
}

impl ComponentClass {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

/// Component census by isomorphism class.
#[derive(Clone, Debug)]
pub struct MultiplicityTable {
    pub classes: Vec<ComponentClass>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub vertices: usize,
    pub edges: usize,
    pub count: usize,
}

impl MultiplicityTable {
    pub fn component_count(&self) -> usize {
        self.classes.iter().map(ComponentClass::count).sum()
    }

    pub fn summary(&self) -> Vec<ClassSummary> {
        self.classes
            .iter()
            .map(|c| ClassSummary { vertices: c.representative.order(), edges: c.representative.edge_count(), count: c.count() })
            .collect()
    }

    /// Class index of a graph, if some class representative is isomorphic.
    pub fn find_class(&self, g: &SimpleGraph) -> Option<usize> {
        self.classes.iter().position(|c| invariant(&c.representative) == invariant(g) && find_isomorphism(&c.representative, g).is_some())
    }
}

type Invariant = (usize, usize, Vec<usize>);

fn invariant(g: &SimpleGraph) -> Invariant {
    let mut deg: Vec<usize> = (0..g.order()).map(|v| g.degree(v)).collect();
    deg.sort_unstable();
    (g.order(), g.edge_count(), deg)
}

fn census(graph: &SimpleGraph, comps: Vec<Vec<usize>>) -> MultiplicityTable {
    let mut classes: Vec<ComponentClass> = Vec::new();
    let mut buckets: BTreeMap<Invariant, Vec<usize>> = BTreeMap::new();
    for comp in comps {
        let g = graph.induced(&comp);
        let bucket = buckets.entry(invariant(&g)).or_default();
        match bucket.iter().copied().find(|&c| find_isomorphism(&classes[c].representative, &g).is_some()) {
            Some(c) => classes[c].members.push(comp),
            None => {
                bucket.push(classes.len());
                classes.push(ComponentClass { representative: g, members: vec![comp] });
            }
        }
    }
    MultiplicityTable { classes }
}

pub fn multiplicity_table(b: &PowerGraphBundle) -> MultiplicityTable {
    census(b.graph(), b.graph().connected_components())
}

fn infinite_components(b: &PowerGraphBundle) -> Vec<Vec<usize>> {
    b.graph().connected_components().into_iter().filter(|c| c.iter().all(|&v| b.has_infinite_order(v))).collect()
}

fn torsion_part(b: &PowerGraphBundle) -> Vec<usize> {
    (0..b.order()).filter(|&v| !b.has_infinite_order(v)).collect()
}

/// Window form of the doubling law: each class of infinite Z±-power
/// components of multiplicity `k` accounts for `2k` N-power components of
/// the class of its half.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DoublingRow {
    pub half_vertices: usize,
    pub pm_components: usize,
    pub plus_components: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DoublingReport {
    pub rows: Vec<DoublingRow>,
    pub holds: bool,
}

pub fn doubling_law(bundles: &VariantBundles) -> Result<DoublingReport, TransformError> {
    let pm = census(bundles.zpm.graph(), infinite_components(&bundles.zpm));
    let plus = census(bundles.nplus.graph(), infinite_components(&bundles.nplus));
    let mut expected = vec![0usize; plus.classes.len()];
    let mut holds = true;
    for class in &pm.classes {
        let split = split_component(&bundles.zpm, &class.members[0])?;
        let half = bundles.nplus.graph().induced(&split.psi1);
        match plus.find_class(&half) {
            Some(c) => expected[c] += 2 * class.count(),
            None => holds = false,
        }
    }
    let rows: Vec<DoublingRow> = plus
        .classes
        .iter()
        .zip(&expected)
        .map(|(c, &e)| DoublingRow { half_vertices: c.representative.order(), pm_components: e / 2, plus_components: c.count() })
        .collect();
    holds &= rows.iter().all(|r| r.plus_components == 2 * r.pm_components);
    Ok(DoublingReport { rows, holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MatchDirection {
    /// Build an N-power isomorphism from Z±-power data.
    PlusFromPm,
    /// Build a Z±-power isomorphism from N-power data.
    PmFromPlus,
}

/// Why no isomorphism was assembled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub reason: String,
}

fn mismatch(reason: impl Into<String>) -> Mismatch {
    Mismatch { reason: reason.into() }
}

/// Pair the components of two graphs class by class.
fn pair_components(
    g: &SimpleGraph,
    gc: Vec<Vec<usize>>,
    h: &SimpleGraph,
    hc: Vec<Vec<usize>>,
) -> Result<Vec<(Vec<Vec<usize>>, Vec<Vec<usize>>)>, Mismatch> {
    let tg = census(g, gc);
    let mut th_members: Vec<Vec<Vec<usize>>> = vec![Vec::new(); tg.classes.len()];
    for comp in hc {
        let sub = h.induced(&comp);
        match tg.find_class(&sub) {
            Some(c) => th_members[c].push(comp),
            None => {
                return Err(mismatch(format!(
                    "component with {} vertices and {} edges has no counterpart",
                    sub.order(),
                    sub.edge_count()
                )))
            }
        }
    }
    let mut out = Vec::new();
    for (class, hm) in tg.classes.into_iter().zip(th_members) {
        if class.count() != hm.len() {
            return Err(mismatch(format!(
                "class with {} vertices and {} edges occurs {} times against {}",
                class.representative.order(),
                class.representative.edge_count(),
                class.count(),
                hm.len()
            )));
        }
        out.push((class.members, hm));
    }
    Ok(out)
}

/// Assemble an isomorphism of the target variant (N-power for
/// `PlusFromPm`, Z± for `PmFromPlus`) from the other variant's components.
pub fn match_variant_isomorphism(g: &VariantBundles, h: &VariantBundles, direction: MatchDirection) -> Result<Vec<usize>, Mismatch> {
    let n = g.zpm.order();
    if n != h.zpm.order() {
        return Err(mismatch(format!("carriers have {} and {} elements", n, h.zpm.order())));
    }
    let (tg, th) = (torsion_part(&g.zpm), torsion_part(&h.zpm));
    if tg.len() != th.len() {
        return Err(mismatch(format!("torsion parts have {} and {} elements", tg.len(), th.len())));
    }
    let tmap = find_isomorphism(&g.zpm.graph().induced(&tg), &h.zpm.graph().induced(&th))
        .ok_or_else(|| mismatch("torsion parts are not isomorphic"))?;
    let mut map = vec![usize::MAX; n];
    for (i, &v) in tg.iter().enumerate() {
        map[v] = th[tmap[i]];
    }
    let target = match direction {
        MatchDirection::PlusFromPm => {
            let pairs = pair_components(g.zpm.graph(), infinite_components(&g.zpm), h.zpm.graph(), infinite_components(&h.zpm))?;
            for (gm, hm) in pairs {
                for (cg, ch) in gm.iter().zip(&hm) {
                    place_from_quotient(&g.zpm, cg, &h.zpm, ch, &mut map)?;
                }
            }
            (&g.nplus, &h.nplus)
        }
        MatchDirection::PmFromPlus => {
            let pairs =
                pair_components(g.nplus.graph(), infinite_components(&g.nplus), h.nplus.graph(), infinite_components(&h.nplus))?;
            for (gm, hm) in pairs {
                let (gp, hp) = (inverse_pairs(&g.nplus, &gm)?, inverse_pairs(&h.nplus, &hm)?);
                for (psi_g, psi_h) in gp.iter().zip(&hp) {
                    let m = find_isomorphism(&g.nplus.graph().induced(psi_g), &h.nplus.graph().induced(psi_h))
                        .ok_or_else(|| mismatch("paired halves are not isomorphic"))?;
                    for (i, &x) in psi_g.iter().enumerate() {
                        let y = psi_h[m[i]];
                        map[x] = y;
                        map[g.nplus.inverse_index(x)] = h.nplus.inverse_index(y);
                    }
                }
            }
            (&g.zpm, &h.zpm)
        }
    };
    if map.contains(&usize::MAX) || !is_isomorphism(target.0.graph(), target.1.graph(), &map) {
        return Err(mismatch("assembled map failed verification"));
    }
    Ok(map)
}

/// Map `Ψ₁(cg)` onto `Ψ₁(ch)` through an isomorphism of the twin quotients,
/// then extend to `Ψ₂` by inversion.
fn place_from_quotient(
    g: &PowerGraphBundle,
    cg: &[usize],
    h: &PowerGraphBundle,
    ch: &[usize],
    map: &mut [usize],
) -> Result<(), Mismatch> {
    let err = |e: TransformError| mismatch(e.to_string());
    let (sg, sh) = (split_component(g, cg).map_err(err)?, split_component(h, ch).map_err(err)?);
    let (phig, phih) = (g.graph().induced(&sg.component), h.graph().induced(&sh.component));
    let (pg, ph) = (inverse_classes(g, &sg.component), inverse_classes(h, &sh.component));
    let quotient = |phi: &SimpleGraph, p: &TwinPartition| phi.quotient_by_blocks(p).map_err(|e| mismatch(e.to_string()));
    let qmap = find_isomorphism(&quotient(&phig, &pg)?, &quotient(&phih, &ph)?)
        .ok_or_else(|| mismatch("twin quotients are not isomorphic"))?;
    let psi1_h: HashSet<usize> = sh.psi1.iter().copied().collect();
    for &x in &sg.psi1 {
        let local = sg.component.binary_search(&x).expect("half lies in its component");
        let block = &ph.blocks()[qmap[pg.block_of(local)]];
        let hits: Vec<usize> = block.iter().map(|&l| sh.component[l]).filter(|y| psi1_h.contains(y)).collect();
        let [y] = hits[..] else {
            return Err(mismatch(format!("twin class of {} meets the half in {} vertices", h.element(sh.component[block[0]]), hits.len())));
        };
        map[x] = y;
        map[g.inverse_index(x)] = h.inverse_index(y);
    }
    Ok(())
}

/// Group N-power components into `(Ψ, Ψ⁻¹)` pairs, returning each `Ψ`.
fn inverse_pairs(b: &PowerGraphBundle, members: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, Mismatch> {
    let mut taken = vec![false; members.len()];
    let mut halves = Vec::new();
    for i in 0..members.len() {
        if taken[i] {
            continue;
        }
        let inv = b.inverse_index(members[i][0]);
        let j = members
            .iter()
            .position(|m| m.binary_search(&inv).is_ok())
            .filter(|&j| j != i && !taken[j])
            .ok_or_else(|| mismatch(format!("inverse of the component of {} is not in its class", b.element(members[i][0]))))?;
        taken[i] = true;
        taken[j] = true;
        halves.push(members[i].clone());
    }
    Ok(halves)
}
