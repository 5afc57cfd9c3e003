//! The directed power graph and its three undirected variants over a window.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::WindowError;
use crate::graphs::{Digraph, SimpleGraph, TwinPartition};
use crate::groups::{Element, ExponentSet, Group, Order};
use crate::window::WindowSpec;

/// Exponent domain of a power-graph variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantTag {
    /// All integers.
    Z,
    /// `{1, 2, 3, ...}`.
    Nplus,
    /// Nonzero integers.
    Zpm,
}

impl VariantTag {
    pub const ALL: [VariantTag; 3] = [VariantTag::Z, VariantTag::Nplus, VariantTag::Zpm];

    pub fn name(self) -> &'static str {
        match self {
            VariantTag::Z => "z",
            VariantTag::Nplus => "nplus",
            VariantTag::Zpm => "zpm",
        }
    }

    /// Whether the exponent set meets this variant's domain.
    pub fn admits(self, exponents: &ExponentSet) -> bool {
        match self {
            VariantTag::Z => !exponents.is_empty(),
            VariantTag::Nplus => exponents.has_positive(),
            VariantTag::Zpm => exponents.has_nonzero(),
        }
    }
}

impl fmt::Display for VariantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "z" => Ok(VariantTag::Z),
            "nplus" => Ok(VariantTag::Nplus),
            "zpm" => Ok(VariantTag::Zpm),
            other => Err(format!("unknown variant {other:?} (expected z, nplus or zpm)")),
        }
    }
}

/// `x -> y` in the directed graph of variant `v`: `y = x^n` for some `n` in
/// the variant's domain. Loops are excluded.
pub fn directed_adjacent(group: &Group, x: &Element, y: &Element, v: VariantTag) -> bool {
    x != y && v.admits(&group.solve_power_of(y, x))
}

pub fn adjacent(group: &Group, x: &Element, y: &Element, v: VariantTag) -> bool {
    directed_adjacent(group, x, y, v) || directed_adjacent(group, y, x, v)
}

/// `<x> = <y>`.
pub fn same_cyclic_subgroup(group: &Group, x: &Element, y: &Element) -> bool {
    group.is_power_of(x, y) && group.is_power_of(y, x)
}

/// A power graph materialised on a window carrier.
#[derive(Clone, Debug)]
pub struct PowerGraphBundle {
    group: Group,
    window: WindowSpec,
    variant: VariantTag,
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
    graph: SimpleGraph,
    digraph: Digraph,
}

/// All three variants on one shared carrier.
#[derive(Clone, Debug)]
pub struct VariantBundles {
    pub z: PowerGraphBundle,
    pub nplus: PowerGraphBundle,
    pub zpm: PowerGraphBundle,
}

impl VariantBundles {
    pub fn get(&self, v: VariantTag) -> &PowerGraphBundle {
        match v {
            VariantTag::Z => &self.z,
            VariantTag::Nplus => &self.nplus,
            VariantTag::Zpm => &self.zpm,
        }
    }
}

/// Output format of a rendered graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl PowerGraphBundle {
    /// The variant graph, or the directed graph, as DOT or JSON text.
    pub fn render(&self, directed: bool, format: GraphFormat) -> String {
        let name = format!("{}_{}", self.group.family_name(), self.variant.name());
        match (directed, format) {
            (false, GraphFormat::Dot) => self.graph.to_dot(&name),
            (true, GraphFormat::Dot) => self.digraph.to_dot(&name),
            (false, GraphFormat::Json) => self.graph.to_document().to_json(),
            (true, GraphFormat::Json) => self.digraph.to_document().to_json(),
        }
    }


    pub fn build(group: &Group, window: &WindowSpec, variant: VariantTag) -> Result<Self, WindowError> {
        Self::build_with_cap(group, window, variant, crate::window::DEFAULT_CAP)
    }

    pub fn build_with_cap(
        group: &Group,
        window: &WindowSpec,
        variant: VariantTag,
        cap: usize,
    ) -> Result<Self, WindowError> {
        let elements = window.carrier(group, cap)?;
        Ok(Self::from_carrier(group, window, variant, elements))
    }

    /// Build every variant on one carrier, solving each ordered pair once.
    pub fn build_all(group: &Group, window: &WindowSpec, cap: usize) -> Result<VariantBundles, WindowError> {
        let elements = window.carrier(group, cap)?;
        let n = elements.len();
        let mut arcs: [Vec<(usize, usize)>; 3] = Default::default();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ex = group.solve_power_of(&elements[j], &elements[i]);
                for (k, v) in VariantTag::ALL.iter().enumerate() {
                    if v.admits(&ex) {
                        arcs[k].push((i, j));
                    }
                }
            }
        }
        let [z, nplus, zpm] = arcs;
        let make = |variant, arcs| Self::assemble(group, window, variant, elements.clone(), arcs);
        Ok(VariantBundles { z: make(VariantTag::Z, z), nplus: make(VariantTag::Nplus, nplus), zpm: make(VariantTag::Zpm, zpm) })
    }

    fn from_carrier(group: &Group, window: &WindowSpec, variant: VariantTag, elements: Vec<Element>) -> Self {
        let n = elements.len();
        let arcs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| directed_adjacent(group, &elements[i], &elements[j], variant))
            .collect();
        Self::assemble(group, window, variant, elements, arcs)
    }

    fn assemble(
        group: &Group,
        window: &WindowSpec,
        variant: VariantTag,
        elements: Vec<Element>,
        arcs: Vec<(usize, usize)>,
    ) -> Self {
        let labels: Vec<String> = elements.iter().map(Element::to_string).collect();
        let digraph = Digraph::new(labels, arcs).expect("carrier labels are distinct");
        let graph = digraph.underlying();
        let index = elements.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        PowerGraphBundle { group: group.clone(), window: window.clone(), variant, elements, index, graph, digraph }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn variant(&self) -> VariantTag {
        self.variant
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn digraph(&self) -> &Digraph {
        &self.digraph
    }

    pub fn identity_index(&self) -> usize {
        self.index[&self.group.identity()]
    }

    /// Index of the inverse of vertex `i`; windows are inversion-closed.
    pub fn inverse_index(&self, i: usize) -> usize {
        self.index[&self.group.inverse(&self.elements[i])]
    }

    pub fn has_infinite_order(&self, i: usize) -> bool {
        self.group.element_order(&self.elements[i]) == Order::Infinite
    }

    /// The graph of another variant induced on `vertices` of this carrier,
    /// computed from the symbolic relation.
    pub fn variant_graph_on(&self, vertices: &[usize], variant: VariantTag) -> SimpleGraph {
        let labels = vertices.iter().map(|&v| self.graph.label(v).to_string()).collect();
        SimpleGraph::from_fn(labels, |i, j| {
            adjacent(&self.group, &self.elements[vertices[i]], &self.elements[vertices[j]], variant)
        })
        .expect("carrier labels are distinct")
    }

    /// Dominating vertices of the window graph, as elements.
    pub fn center(&self) -> Vec<Element> {
        self.graph.dominating_vertices().into_iter().map(|i| self.elements[i]).collect()
    }

    /// Twin classes of the infinite graph, restricted to the carrier.
    /// Finite groups use the exact window partition (the window is the
    /// whole group).
    /// Twin classes of the carrier with closed neighbourhoods taken in the
    /// window scaled by 2, which separates most pairs merged at the
    /// boundary. Finite groups and explicit windows are left as they are.
    pub fn boundary_corrected_twin_partition(&self) -> TwinPartition {
        let big = match (&self.group, &self.window) {
            (Group::Finite(_), _) | (_, WindowSpec::Explicit(_) | WindowSpec::Full) => None,
            _ => PowerGraphBundle::build_with_cap(&self.group, &self.window.scaled(2), self.variant, usize::MAX / 128).ok(),
        };
        let Some(big) = big else { return self.graph.twin_partition() };
        let mut classes: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, g) in self.elements.iter().enumerate() {
            let key = big.graph.closed_neighborhood(big.index_of(g).expect("scaled window contains the window"));
            let id = *classes.entry(key).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(i);
        }
        TwinPartition::from_blocks(blocks, self.order())
    }

    pub fn symbolic_twin_partition(&self) -> TwinPartition {
        let n = self.order();
        if let Group::Finite(_) = self.group {
            return self.graph.twin_partition();
        }
        let e = self.identity_index();
        let generators: Vec<Element> = match (&self.group, self.variant) {
            (Group::Integers, VariantTag::Z) => vec![Element::Int(1), Element::Int(-1)],
            (Group::Rational(h), VariantTag::Z) => match h.cyclic_generator() {
                Some(g) => vec![Element::Rat(g), Element::Rat(-g)],
                None => Vec::new(),
            },
            _ => Vec::new(),
        };
        let mut block_of = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if block_of[i] != usize::MAX {
                continue;
            }
            let members: Vec<usize> = if i == e {
                std::iter::once(e).chain(generators.iter().filter_map(|g| self.index_of(g))).collect()
            } else if self.variant == VariantTag::Nplus || generators.contains(&self.elements[i]) {
                vec![i]
            } else {
                let j = self.inverse_index(i);
                if j == i { vec![i] } else { vec![i, j] }
            };
            for &m in &members {
                block_of[m] = blocks.len();
            }
            blocks.push(members);
        }
        TwinPartition::from_blocks(blocks, n)
    }
}

/// Twin-class census of a variant-`Z` bundle.
#[derive(Clone, Debug)]
pub struct ClassProfile {
    /// Block sizes of the window partition, descending.
    pub sizes: Vec<usize>,
    pub window: TwinPartition,
    pub symbolic: TwinPartition,
    /// Twin classes of window elements measured in the doubled window.
    pub corrected: TwinPartition,
    /// Blocks of `window` merged only by the window boundary.
    pub boundary_twins: Vec<Vec<usize>>,
    /// Whether the corrected and symbolic partitions coincide.
    pub agrees: bool,
    /// Whether the raw window and symbolic partitions coincide.
    pub window_exact: bool,
    /// One class of size 3 containing the identity, infinitely many of
    /// size 2 and no others. Decided on the symbolic classes.
    pub z_signature: bool,
}

pub fn equiv_class_profile(b: &PowerGraphBundle) -> ClassProfile {
    let window = b.graph().twin_partition();
    let symbolic = b.symbolic_twin_partition();
    let e = b.identity_index();
    let blocks = symbolic.blocks();
    let triple = blocks.iter().filter(|bl| bl.len() == 3).count() == 1 && blocks[symbolic.block_of(e)].len() == 3;
    let rest_pairs = blocks.iter().all(|bl| bl.len() == 2 || bl.contains(&e));
    let z_signature = !matches!(b.group(), Group::Finite(_))
        && b.variant() == VariantTag::Z
        && triple
        && rest_pairs
        && blocks.len() > 1;
    let corrected = b.boundary_corrected_twin_partition();
    let boundary_twins = window.blocks().iter().filter(|bl| !corrected.blocks().contains(bl)).cloned().collect();
    ClassProfile {
        sizes: window.sizes(),
        agrees: corrected.same_blocks(&symbolic),
        window_exact: window.same_blocks(&symbolic),
        boundary_twins,
        window,
        corrected,
        symbolic,
        z_signature,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::HeightFunction;
    use crate::window::DEFAULT_CAP;

    fn ints(b: &PowerGraphBundle, vs: &[usize]) -> Vec<i64> {
        vs.iter()
            .map(|&v| match b.element(v) {
                Element::Int(n) => *n,
                Element::Index(i) => *i as i64,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn directed_adjacency_examples() {
        let z = Group::Integers;
        let (two, zero, m4) = (Element::Int(2), Element::Int(0), Element::Int(-4));
        assert!(directed_adjacent(&z, &two, &zero, VariantTag::Z));
        assert!(!directed_adjacent(&z, &two, &zero, VariantTag::Zpm));
        assert!(!directed_adjacent(&z, &two, &m4, VariantTag::Nplus));
        assert!(directed_adjacent(&z, &two, &m4, VariantTag::Zpm));
    }

    #[test]
    fn torsion_variants_coincide() {
        let all = PowerGraphBundle::build_all(&Group::cyclic(6), &WindowSpec::Full, DEFAULT_CAP).unwrap();
        assert_eq!(all.z.graph(), all.nplus.graph());
        assert_eq!(all.z.graph(), all.zpm.graph());
        assert_eq!(all.z.order(), 6);
    }

    #[test]
    fn integer_window_zpm() {
        let b = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 5 }, VariantTag::Zpm)
            .unwrap();
        assert_eq!(b.graph().isolated_vertices(), vec![b.identity_index()]);
        for one in [Element::Int(1), Element::Int(-1)] {
            assert_eq!(b.graph().degree(b.index_of(&one).unwrap()), 9);
        }
    }

    #[test]
    fn rational_ratio_three() {
        let q = Group::Rational(HeightFunction::rationals());
        let b = PowerGraphBundle::build(&q, &WindowSpec::Rational { max_num: 4, max_den: 4 }, VariantTag::Zpm).unwrap();
        let (a, c) = (b.index_of(&Element::rational(1, 2)).unwrap(), b.index_of(&Element::rational(3, 2)).unwrap());
        assert!(b.graph().has_edge(a, c));
        assert!(b.digraph().has_arc(a, c) && !b.digraph().has_arc(c, a));
    }

    #[test]
    fn centers() {
        let z6 = PowerGraphBundle::build(&Group::cyclic(6), &WindowSpec::Full, VariantTag::Z).unwrap();
        let mut c = z6.center();
        c.sort();
        assert_eq!(c, vec![Element::Index(0), Element::Index(1), Element::Index(5)]);
        let z = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 20 }, VariantTag::Z).unwrap();
        assert_eq!(z.center(), vec![Element::Int(0), Element::Int(1), Element::Int(-1)]);
        let z2 = PowerGraphBundle::build(&Group::cyclic(2), &WindowSpec::Full, VariantTag::Z).unwrap();
        assert_eq!(z2.center().len(), 2);
    }

    #[test]
    fn class_profiles() {
        let z = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 30 }, VariantTag::Z).unwrap();
        let p = equiv_class_profile(&z);
        assert!(p.z_signature && p.agrees && p.window_exact);
        assert_eq!(p.sizes[0], 3);

        assert!(p.sizes[1..].iter().all(|&s| s == 2));
        // 8 and 16 share their closed neighbourhood inside |n| <= 20
        let z20 = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 20 }, VariantTag::Z).unwrap();
        let p = equiv_class_profile(&z20);
        assert!(p.agrees && !p.window_exact);
        let merged: Vec<Vec<i64>> = p.boundary_twins.iter().map(|b| ints(&z20, b)).collect();
        assert_eq!(merged, vec![vec![8, -8, 16, -16]]);

        let z6 = PowerGraphBundle::build(&Group::cyclic(6), &WindowSpec::Full, VariantTag::Z).unwrap();
        let p = equiv_class_profile(&z6);
        let mut blocks: Vec<Vec<i64>> = p.window.blocks().iter().map(|b| ints(&z6, b)).collect();
        for b in &mut blocks {
            b.sort();
        }
        blocks.sort();
        assert_eq!(blocks, vec![vec![0, 1, 5], vec![2, 4], vec![3]]);
        assert!(!p.z_signature);

        for n in [2, 3] {
            let b = PowerGraphBundle::build(&Group::cyclic(n), &WindowSpec::Full, VariantTag::Z).unwrap();
            let p = equiv_class_profile(&b);
            assert_eq!(p.sizes, vec![n]);
            assert!(!p.z_signature);
        }
    }

    #[test]
    fn same_cyclic_subgroup_examples() {
        let z = Group::Integers;
        assert!(same_cyclic_subgroup(&z, &Element::Int(5), &Element::Int(-5)));
        assert!(!same_cyclic_subgroup(&z, &Element::Int(2), &Element::Int(4)));
        assert!(same_cyclic_subgroup(&Group::cyclic(6), &Element::Index(1), &Element::Index(5)));
    }

    #[test]
    fn window_independence() {
        let small = PowerGraphBundle::build(&Group::Heisenberg, &WindowSpec::Heisenberg { max_coord: 1 }, VariantTag::Zpm)
            .unwrap();
        let big = PowerGraphBundle::build(&Group::Heisenberg, &WindowSpec::Heisenberg { max_coord: 2 }, VariantTag::Zpm)
            .unwrap();
        let idx: Vec<usize> = small.elements().iter().map(|g| big.index_of(g).unwrap()).collect();
        assert_eq!(&big.graph().induced(&idx), small.graph());
    }
}
