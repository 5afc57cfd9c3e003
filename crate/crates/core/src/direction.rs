//! Recovering arc directions from the undirected Z±-power graph.
//!
//! `S(x, y) = N̄(y) ∖ N̄(x)` is finite exactly when `x -> y` in groups where
//! every nonidentity element lies in a unique maximal cyclic subgroup.
//! Finiteness is decided symbolically per family and can be cross-checked
//! against slices of growing windows.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_integer::Integer;
use num_rational::Rational64;
use serde::Serialize;

use crate::arith::{factorize, pair_count, valuation};
use crate::error::DirectionError;
use crate::graphs::{is_anti_isomorphism, is_isomorphism, SimpleGraph};
use crate::groups::{rational_valuation, Element, ExponentSet, Group, Height, HeightFunction};
use crate::powergraph::{adjacent, directed_adjacent, PowerGraphBundle, VariantBundles, VariantTag};
use crate::window::WindowSpec;

fn require_zpm(b: &PowerGraphBundle) -> Result<(), DirectionError> {
    if b.variant() == VariantTag::Zpm {
        Ok(())
    } else {
        Err(DirectionError::WrongVariant { expected: "zpm", found: b.variant().name() })
    }
}

fn in_closed_nbhd(group: &Group, z: &Element, y: &Element) -> bool {
    z == y || adjacent(group, z, y, VariantTag::Zpm)
}

/// Exact finiteness verdict for `S(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SVerdict {
    /// The whole set, sorted.
    Finite(Vec<String>),
    /// A description of an infinite subfamily.
    Infinite(String),
}

impl SVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, SVerdict::Finite(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSetDescriptor {
    pub x: Element,
    pub y: Element,
    /// `S(x, y)` restricted to the window, in carrier order.
    pub slice: Vec<Element>,
    /// `None` when the family has no symbolic criterion.
    pub verdict: Option<SVerdict>,
}

/// The window slice of `S(x, y)` together with the symbolic verdict.
pub fn s_set(b: &PowerGraphBundle, x: &Element, y: &Element) -> Result<SSetDescriptor, DirectionError> {
    require_zpm(b)?;
    let (xi, yi) = match (b.index_of(x), b.index_of(y)) {
        (Some(xi), Some(yi)) if xi != yi => (xi, yi),
        _ => return Err(DirectionError::PreconditionFailed(format!("{x} and {y} must be distinct window elements"))),
    };
    let closed = |v: usize, c: usize| v == c || b.graph().has_edge(v, c);
    let slice = (0..b.order()).filter(|&v| closed(v, yi) && !closed(v, xi)).map(|v| *b.element(v)).collect();
    let verdict = s_set_verdict(b.group(), x, y).ok();
    Ok(SSetDescriptor { x: *x, y: *y, slice, verdict })
}

fn check_pair(group: &Group, x: &Element, y: &Element) -> Result<(), DirectionError> {
    let e = group.identity();
    for g in [x, y] {
        if !group.contains(g) {
            return Err(DirectionError::PreconditionFailed(format!("{g} is not in the group")));
        }
    }
    if *x == e || *y == e || x == y || *x == group.inverse(y) {
        return Err(DirectionError::DegeneratePair(format!("({x}, {y})")));
    }
    Ok(())
}

/// Symbolic verdict for `S(x, y)`; `x, y ≠ e` and `x ∉ {y, y⁻¹}`.
pub fn s_set_verdict(group: &Group, x: &Element, y: &Element) -> Result<SVerdict, DirectionError> {
    check_pair(group, x, y)?;
    match (group, x, y) {
        (Group::Finite(_), ..) => Err(DirectionError::UnsupportedFamily(group.family_name())),
        (Group::Integers, Element::Int(a), Element::Int(b)) => {
            let v = rational_verdict(&HeightFunction::integers(), Rational64::from(*a), Rational64::from(*b));
            Ok(map_finite(v, |q| Element::Int(q.to_integer())))
        }
        (Group::Rational(h), Element::Rat(a), Element::Rat(b)) => Ok(map_finite(rational_verdict(h, *a, *b), Element::Rat)),
        (Group::Heisenberg, ..) => {
            if group.solve_power_of(y, x).is_empty() {
                return Ok(SVerdict::Infinite(format!("powers of {y} outside the closed neighbourhood of {x}")));
            }
            // both lie in <g> for the primitive root g of x; work in exponents
            let (g, i) = primitive_root(x);
            let m = match group.solve_power_of(y, &g) {
                ExponentSet::Single(m) => m,
                _ => unreachable!("y is a power of x, hence of its root"),
            };
            let v = rational_verdict(&HeightFunction::integers(), Rational64::from(i), Rational64::from(m));
            Ok(map_finite(v, |t| group.power(&g, t.to_integer())))
        }
        _ => unreachable!("elements were checked against the group"),
    }
}

pub fn s_set_is_finite(group: &Group, x: &Element, y: &Element) -> Result<bool, DirectionError> {
    s_set_verdict(group, x, y).map(|v| v.is_finite())
}

enum RawVerdict {
    Finite(Vec<Rational64>),
    Infinite(String),
}

fn map_finite(v: RawVerdict, f: impl Fn(Rational64) -> Element) -> SVerdict {
    match v {
        RawVerdict::Finite(set) => {
            let mut out: Vec<Element> = set.into_iter().map(f).collect();
            out.sort();
            SVerdict::Finite(out.iter().map(Element::to_string).collect())
        }
        RawVerdict::Infinite(d) => SVerdict::Infinite(d),
    }
}

/// `S(x, y)` in the rational subgroup with heights `h`.
///
/// Closed neighbourhoods are `N̄(y) = {ky} ∪ {y/k : y/k ∈ G}`. With
/// `r = y/x`, multiples escape `N̄(x)` infinitely often unless `r ∈ ℤ`; then
/// `S(x, y) = {±y/k : y/k ∈ G, k ∤ r, r ∤ k}`, which is finite iff the
/// group is cyclic or exactly one prime `q` has infinite height, every
/// other height is finite with default 0, and `|r|` is a power of `q`.
fn rational_verdict(h: &HeightFunction, x: Rational64, y: Rational64) -> RawVerdict {
    let r = y / x;
    if !r.is_integer() {
        return RawVerdict::Infinite(format!("multiples k*{y} with k*{y}/{x} not an integer"));
    }
    let r = r.to_integer().unsigned_abs();
    let infinite: Vec<u64> = h.exceptions().filter(|(_, v)| v.is_infinite()).map(|(p, _)| p).collect();
    let cyclic = h.is_cyclic();
    let finite = cyclic
        || (h.default_height() == Height::Finite(0)
            && infinite.len() == 1
            && factorize(r).iter().all(|&(p, _)| p == infinite[0]));
    if !finite {
        return RawVerdict::Infinite(format!("quotients {y}/k for infinitely many k not divisible by {r}"));
    }
    // k ranges over products of candidate primes within their caps
    let mut primes: BTreeSet<u64> = h.exceptions().map(|(p, _)| p).collect();
    primes.extend(factorize(y.numer().unsigned_abs()).into_iter().map(|(p, _)| p));
    primes.extend(factorize(r).into_iter().map(|(p, _)| p));
    let mut ks: Vec<u64> = vec![1];
    for p in primes {
        let cap = match h.height(p) {
            Height::Finite(t) => (rational_valuation(&y, p) + t as i64) as u32,
            // only k with v_p(k) < v_p(r) can avoid r | k
            Height::Infinite => valuation(r, p).saturating_sub(1),
        };
        let mut next = Vec::new();
        for &k in &ks {
            let mut pk = k;
            for _ in 0..=cap {
                next.push(pk);
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        ks = next;
    }
    let mut set = Vec::new();
    for k in ks {
        if r % k != 0 && k % r != 0 {
            let z = y / Rational64::from(k as i64);
            set.push(z);
            set.push(-z);
        }
    }
    RawVerdict::Finite(set)
}

/// `(g, n)` with `g^n = x` and `n` maximal: `g` generates the maximal
/// cyclic subgroup containing `x`.
fn primitive_root(x: &Element) -> (Element, i64) {
    let Element::Triple(a, b, c) = *x else { panic!("not a Heisenberg element") };
    if (a, b) == (0, 0) {
        return (Element::Triple(0, 0, c.signum()), c.abs());
    }
    let d = a.gcd(&b).unsigned_abs();
    let mut divisors = vec![1u64];
    for (p, e) in factorize(d) {
        let prev = divisors.clone();
        for k in 1..=e {
            divisors.extend(prev.iter().map(|v| v * p.pow(k)));
        }
    }
    divisors.sort_unstable_by(|u, v| v.cmp(u));
    for n in divisors {
        let n = n as i64;
        let (ra, rb) = (a / n, b / n);
        let t = c - pair_count(n) * ra * rb;
        if t % n == 0 {
            return (Element::Triple(ra, rb, t / n), n);
        }
    }
    unreachable!("n = 1 always works")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthVerdict {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthReport {
    pub base: u64,
    /// `|S(x, y) ∩ W|` for windows of size `base`, `2 base`, `4 base`, `8 base`.
    pub sizes: [usize; 4],
    pub verdict: GrowthVerdict,
}

/// A window size large enough for the growth oracle on `(x, y)`.
///
/// Infinite families of quotients `y/p` need primes `p` beyond every prime
/// already present in `x` and `y`, so the base scales with the largest one.
pub fn default_growth_base(x: &Element, y: &Element) -> u64 {
    let parts = |g: &Element| -> [u64; 2] {
        match g {
            Element::Int(n) => [n.unsigned_abs(), 1],
            Element::Rat(q) => [q.numer().unsigned_abs(), q.denom().unsigned_abs()],
            Element::Triple(a, b, c) => [a.unsigned_abs().max(b.unsigned_abs()).max(c.unsigned_abs()), 1],
            Element::Index(_) => [1, 1],
        }
    };
    let all = [parts(x), parts(y)].concat();
    let s = all.iter().copied().max().unwrap_or(1).max(1);
    match x {
        // central coordinates of powers grow quadratically
        Element::Triple(..) => (8 * s * s).max(16),
        _ => {
            let largest_prime = all.iter().flat_map(|&v| factorize(v)).map(|(p, _)| p).max().unwrap_or(1);
            2 * s * largest_prime
        }
    }
}

/// `|S(x, y) ∩ W|` over windows `base · 2^i`, `i = 0..4`: strictly increasing
/// sizes read as infinite, equal last sizes as finite.
pub fn growth_oracle(group: &Group, x: &Element, y: &Element, base: u64) -> Result<GrowthReport, DirectionError> {
    check_pair(group, x, y)?;
    let mut sizes = [0usize; 4];
    for (i, s) in sizes.iter_mut().enumerate() {
        *s = slice_size(group, x, y, base << i)?;
    }
    let verdict = if sizes.windows(2).all(|w| w[0] < w[1]) {
        GrowthVerdict::Infinite
    } else if sizes[2] == sizes[3] && sizes.windows(2).all(|w| w[0] <= w[1]) {
        GrowthVerdict::Finite
    } else {
        GrowthVerdict::Inconclusive
    };
    Ok(GrowthReport { base, sizes, verdict })
}

/// Size of `S(x, y)` inside the family window of parameter `n`, counted by
/// enumerating `N̄(y)` directly.
pub fn slice_size(group: &Group, x: &Element, y: &Element, n: u64) -> Result<usize, DirectionError> {
    let keep = |z: &Element| !in_closed_nbhd(group, z, x);
    let count = match (group, y) {
        (Group::Integers, Element::Int(v)) => {
            let m = n as i64;
            let mut set: HashSet<i64> = HashSet::new();
            for k in 1..=m / v.abs() {
                set.extend([k * v, -k * v]);
            }
            for (d, _) in divisors(v.unsigned_abs()) {
                set.extend([d as i64, -(d as i64)]);
            }
            set.into_iter().filter(|&z| z.abs() <= m && keep(&Element::Int(z))).count()
        }
        (Group::Rational(h), Element::Rat(v)) => {
            let m = n as i64;
            let inside = |q: &Rational64| q.numer().abs() <= m && *q.denom() <= m && h.contains(q);
            let mut set: HashSet<Rational64> = HashSet::new();
            for k in 1..=m * v.denom() {
                set.insert(v * k);
            }
            for k in 1..=m * v.numer().abs() {
                set.insert(v / k);
            }
            set.into_iter()
                .flat_map(|q| [q, -q])
                .collect::<HashSet<_>>()
                .into_iter()
                .filter(|q| inside(q) && keep(&Element::Rat(*q)))
                .count()
        }
        (Group::Heisenberg, _) => {
            // N̄(y) lies in the maximal cyclic subgroup <g>: exponents t with m | t or t | m
            let (g, m) = primitive_root(y);
            let b = n as i64;
            let in_window = |z: &Element| {
                let Element::Triple(a, bb, c) = *z else { unreachable!() };
                let boxed = |a: i64, bb: i64, c: i64| a.abs() <= b && bb.abs() <= b && c.abs() <= b;
                boxed(a, bb, c) || boxed(-a, -bb, a * bb - c)
            };
            let Element::Triple(ga, gb, _) = g else { unreachable!() };
            let t_max = if (ga, gb) == (0, 0) { b + b * b } else { b };
            (-t_max..=t_max)
                .filter(|&t| t != 0 && (t % m == 0 || m % t == 0))
                .map(|t| group.power(&g, t))
                .filter(|z| in_window(z) && keep(z))
                .count()
        }
        _ => return Err(DirectionError::UnsupportedFamily(group.family_name())),
    };
    Ok(count)
}

fn divisors(n: u64) -> Vec<(u64, ())> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        for k in 1..=e {
            out.extend(prev.iter().map(|v| v * p.pow(k)));
        }
    }
    out.sort_unstable();
    out.into_iter().map(|d| (d, ())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    XtoY,
    YtoX,
}

/// Every nonidentity element lies in a unique maximal cyclic subgroup.
fn unique_maximal_cyclic(group: &Group) -> Result<(), DirectionError> {
    match group {
        Group::Integers | Group::Heisenberg => Ok(()),
        Group::Rational(h) if h.is_cyclic() => Ok(()),
        Group::Rational(_) => Err(DirectionError::HypothesisViolated(
            "a non-cyclic subgroup of the rationals has no maximal cyclic subgroups".into(),
        )),
        Group::Finite(_) => Err(DirectionError::HypothesisViolated("the group has torsion".into())),
    }
}

/// Direction of the Z±-power edge `{x, y}` read off S-set finiteness.
pub fn recover_orientation(group: &Group, x: &Element, y: &Element) -> Result<Orientation, DirectionError> {
    unique_maximal_cyclic(group)?;
    check_pair(group, x, y)?;
    if !adjacent(group, x, y, VariantTag::Zpm) {
        return Err(DirectionError::NotAdjacent(x.to_string(), y.to_string()));
    }
    Ok(if s_set_is_finite(group, x, y)? { Orientation::XtoY } else { Orientation::YtoX })
}

/// Orientation recovery over every admissible adjacent pair of a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrientationReport {
    pub pairs: usize,
    pub agreements: usize,
    /// Pairs `(x, y)` where recovery disagrees with the ground truth.
    pub disagreements: Vec<[String; 2]>,
}

pub fn orientation_report(b: &PowerGraphBundle) -> Result<OrientationReport, DirectionError> {
    require_zpm(b)?;
    let g = b.group();
    let mut report = OrientationReport { pairs: 0, agreements: 0, disagreements: Vec::new() };
    for (i, j) in b.graph().edges() {
        let (x, y) = (b.element(i), b.element(j));
        if *y == g.inverse(x) {
            continue;
        }
        report.pairs += 1;
        let truth = if directed_adjacent(g, x, y, VariantTag::Zpm) { Orientation::XtoY } else { Orientation::YtoX };
        if recover_orientation(g, x, y)? == truth {
            report.agreements += 1;
        } else {
            report.disagreements.push([x.to_string(), y.to_string()]);
        }
    }
    Ok(report)
}

/// In- and out-neighbours of `z` in the directed Z±-power graph, without
/// `z⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSplit {
    pub z: usize,
    pub inverse: usize,
    pub inn: Vec<usize>,
    pub out: Vec<usize>,
    /// `inn ∪ out`, ascending.
    pub mixed: Vec<usize>,
    /// No complement edge joins `out` to `inn`.
    pub out_closed: bool,
    /// `out` is connected in the complement of the graph on `mixed`.
    pub out_connected: bool,
}

impl NeighborSplit {
    /// `out` is a connected component of the complement on `mixed`.
    pub fn out_is_component(&self) -> bool {
        self.out_closed && self.out_connected
    }
}

pub fn neighbor_split(b: &PowerGraphBundle, z: &Element) -> Result<NeighborSplit, DirectionError> {
    require_zpm(b)?;
    if !b.group().is_torsion_free() {
        return Err(DirectionError::UnsupportedFamily(b.group().family_name()));
    }
    let zi = b.index_of(z).ok_or_else(|| DirectionError::PreconditionFailed(format!("{z} is not in the window")))?;
    if zi == b.identity_index() {
        return Err(DirectionError::PreconditionFailed("the base must not be the identity".into()));
    }
    let inverse = b.inverse_index(zi);
    let d = b.digraph();
    let inn: Vec<usize> = d.in_neighbors(zi).iter().copied().filter(|&v| v != inverse).collect();
    let out: Vec<usize> = d.out_neighbors(zi).iter().copied().filter(|&v| v != inverse).collect();
    let mut mixed: Vec<usize> = inn.iter().chain(&out).copied().collect();
    mixed.sort_unstable();
    let complement = b.graph().induced(&mixed).complement();
    let local: HashSet<usize> = out.iter().map(|v| mixed.binary_search(v).unwrap()).collect();
    let out_closed = local.iter().all(|&v| complement.neighbors(v).iter().all(|w| local.contains(w)));
    let out_connected = match local.iter().min() {
        None => true,
        Some(&start) => {
            let comp = complement.connected_components().into_iter().find(|c| c.contains(&start)).unwrap();
            local.iter().all(|v| comp.binary_search(v).is_ok())
        }
    };
    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v
    };
    Ok(NeighborSplit { z: zi, inverse, inn: sorted(inn), out: sorted(out), mixed, out_closed, out_connected })
}

/// `0 ↦ 0`, `x ↦ a²/x`.
pub fn phi_a(a: Rational64, x: Rational64) -> Result<Rational64, DirectionError> {
    if a == Rational64::from(0) {
        return Err(DirectionError::PreconditionFailed("a must be nonzero".into()));
    }
    Ok(if x == Rational64::from(0) { x } else { a * a / x })
}

/// A window of `ℚ` closed under negation and `φ_a`: the box
/// `|p| <= bound, q <= bound` together with its image.
pub fn phi_closed_window(a: Rational64, bound: u64) -> Result<WindowSpec, DirectionError> {
    let q = Group::Rational(HeightFunction::rationals());
    let mut base = WindowSpec::Rational { max_num: bound, max_den: bound }
        .carrier(&q, usize::MAX / 128)
        .map_err(|e| DirectionError::PreconditionFailed(e.to_string()))?;
    for g in [Element::Rat(a), Element::Rat(-a)] {
        if !base.contains(&g) {
            base.push(g);
        }
    }
    let mut seen: HashSet<Element> = base.iter().copied().collect();
    let mut out = base.clone();
    for g in &base {
        let Element::Rat(x) = g else { unreachable!() };
        let img = Element::Rat(phi_a(a, *x)?);
        if seen.insert(img) {
            out.push(img);
        }
    }
    Ok(WindowSpec::Explicit(out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiReport {
    pub a: String,
    pub vertices: usize,
    pub involution: bool,
    pub preserves_adjacency: bool,
    pub reverses_arcs: bool,
    pub maps_in_onto_out: bool,
}

impl PhiReport {
    pub fn all(&self) -> bool {
        self.involution && self.preserves_adjacency && self.reverses_arcs && self.maps_in_onto_out
    }
}

/// Check `φ_a` on a `φ_a`-closed bundle of `ℚ`.
pub fn check_phi_a(a: Rational64, b: &PowerGraphBundle) -> Result<PhiReport, DirectionError> {
    require_zpm(b)?;
    let map = phi_map(a, b)?;
    let involution = (0..b.order()).all(|v| map[map[v]] == v);
    let ai = b.index_of(&Element::Rat(a)).ok_or_else(|| DirectionError::PreconditionFailed(format!("{a} is not in the window")))?;
    let split = neighbor_split(b, b.element(ai))?;
    let mut image: Vec<usize> = split.inn.iter().map(|&v| map[v]).collect();
    image.sort_unstable();
    Ok(PhiReport {
        a: a.to_string(),
        vertices: b.order(),
        involution,
        preserves_adjacency: is_isomorphism(b.graph(), b.graph(), &map),
        reverses_arcs: is_anti_isomorphism(b.digraph(), b.digraph(), &map),
        maps_in_onto_out: image == split.out,
    })
}

/// `φ_a` as a vertex map of a `ℚ` bundle.
pub fn phi_map(a: Rational64, b: &PowerGraphBundle) -> Result<Vec<usize>, DirectionError> {
    b.elements()
        .iter()
        .map(|g| {
            let Element::Rat(x) = g else {
                return Err(DirectionError::UnsupportedFamily(b.group().family_name()));
            };
            b.index_of(&Element::Rat(phi_a(a, *x)?))
                .ok_or_else(|| DirectionError::PreconditionFailed("window is not closed under the map".into()))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Out,
    In,
}

/// How many primes carry a given cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Multiplicity {
    Finite(usize),
    Infinite,
}

/// The preorder on `O(x)` (`u ⪯ v` iff `u -> v` or `u = v`) or on `I(x)`
/// (`u ⪯ v` iff `v -> u` or `u = v`) in a rational subgroup.
///
/// Classes are `{±x·n}` on the out side and `{±x/n}` on the in side for
/// admissible `n >= 2`, ordered by divisibility of `n`. Admissible means
/// `v_p(n) <= cap(p)` for every prime, where out-side caps are all infinite
/// and in-side caps are `v_p(x) + height(p)`. The poset is a product of
/// chains of these lengths, so the multiset of caps `>= 1` determines it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborPreorder {
    pub side: Side,
    pub base: Rational64,
    default_cap: Height,
    caps: BTreeMap<u64, Height>,
}

/// A minimal class `{±x·p}` or `{±x/p}` and whether it lies on an infinite
/// ascending chain whose down-set is totally ordered (the chain of powers).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalClass {
    pub prime: u64,
    pub representative: String,
    pub infinite_chain: bool,
}

pub fn neighbor_preorder(h: &HeightFunction, side: Side) -> NeighborPreorder {
    neighbor_preorder_at(h, side, Rational64::from(1)).expect("1 belongs to every height-function subgroup")
}

pub fn neighbor_preorder_at(h: &HeightFunction, side: Side, base: Rational64) -> Result<NeighborPreorder, DirectionError> {
    if base == Rational64::from(0) || !h.contains(&base) {
        return Err(DirectionError::PreconditionFailed(format!("{base} is not a nonidentity element")));
    }
    let (default_cap, caps) = match side {
        Side::Out => (Height::Infinite, BTreeMap::new()),
        Side::In => {
            let mut primes: BTreeSet<u64> = h.exceptions().map(|(p, _)| p).collect();
            primes.extend(factorize(base.numer().unsigned_abs()).into_iter().map(|(p, _)| p));
            primes.extend(factorize(base.denom().unsigned_abs()).into_iter().map(|(p, _)| p));
            let caps = primes
                .into_iter()
                .map(|p| {
                    let cap = match h.height(p) {
                        Height::Infinite => Height::Infinite,
                        Height::Finite(t) => Height::Finite((rational_valuation(&base, p) + t as i64) as u32),
                    };
                    (p, cap)
                })
                .filter(|&(_, c)| c != h.default_height())
                .collect();
            (h.default_height(), caps)
        }
    };
    Ok(NeighborPreorder { side, base, default_cap, caps })
}

impl NeighborPreorder {
    pub fn cap(&self, p: u64) -> Height {
        self.caps.get(&p).copied().unwrap_or(self.default_cap)
    }

    fn admissible(&self, n: u64) -> bool {
        factorize(n).into_iter().all(|(p, e)| self.cap(p).admits(e))
    }

    fn element(&self, n: u64) -> Rational64 {
        match self.side {
            Side::Out => self.base * Rational64::from(n as i64),
            Side::In => self.base / Rational64::from(n as i64),
        }
    }

    /// Class representatives `x·n` or `x/n` for admissible `2 <= n <= limit`.
    pub fn classes_up_to(&self, limit: u64) -> Vec<Rational64> {
        (2..=limit).filter(|&n| self.admissible(n)).map(|n| self.element(n)).collect()
    }

    /// `u ⪯ v` for class representatives given by their multipliers.
    pub fn below(&self, n: u64, m: u64) -> bool {
        m % n == 0
    }

    /// Whether there are infinitely many minimal classes.
    pub fn infinitely_many_minimal(&self) -> bool {
        self.default_cap != Height::Finite(0)
    }

    /// Minimal classes among primes `<= limit`.
    pub fn minimal_classes_up_to(&self, limit: u64) -> Vec<MinimalClass> {
        (2..=limit)
            .filter(|&p| crate::arith::is_prime(p) && self.cap(p) != Height::Finite(0))
            .map(|p| MinimalClass {
                prime: p,
                representative: Element::Rat(self.element(p)).to_string(),
                infinite_chain: self.cap(p).is_infinite(),
            })
            .collect()
    }

    /// Number of primes per cap value `>= 1`.
    pub fn cap_signature(&self) -> BTreeMap<Height, Multiplicity> {
        let mut sig: BTreeMap<Height, Multiplicity> = BTreeMap::new();
        if self.default_cap != Height::Finite(0) {
            sig.insert(self.default_cap, Multiplicity::Infinite);
        }
        for &c in self.caps.values() {
            if c == Height::Finite(0) {
                continue;
            }
            let entry = sig.entry(c).or_insert(Multiplicity::Finite(0));
            if let Multiplicity::Finite(k) = entry {
                *k += 1;
            }
        }
        sig
    }

    pub fn is_isomorphic(&self, other: &NeighborPreorder) -> bool {
        self.cap_signature() == other.cap_signature()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborSymmetryReport {
    pub is_q: bool,
    /// A base where the in- and out-preorders differ, with the prime whose
    /// in-side chain stops.
    pub witness_base: Option<String>,
    pub witness_prime: Option<u64>,
}

/// Whether `O(x)` and `I(x)` carry isomorphic preorders at every `x`.
///
/// Both sides are isomorphic at every base when all heights are infinite.
/// Otherwise, for the least prime `p` of finite height, the base
/// `p^(1 - h(p))` has in-side cap 1 at `p`, while all out-side caps are
/// infinite.
pub fn is_rationals_by_neighbor_symmetry(h: &HeightFunction) -> NeighborSymmetryReport {
    let at = |base: Rational64| {
        let o = neighbor_preorder_at(h, Side::Out, base).expect("base is in the group");
        let i = neighbor_preorder_at(h, Side::In, base).expect("base is in the group");
        o.is_isomorphic(&i)
    };
    match h.first_finite_prime() {
        None => {
            debug_assert!(at(Rational64::from(1)));
            NeighborSymmetryReport { is_q: true, witness_base: None, witness_prime: None }
        }
        Some(p) => {
            let Height::Finite(t) = h.height(p) else { unreachable!() };
            let base = if t == 0 {
                Rational64::from(p as i64)
            } else {
                Rational64::new(1, (p as i64).pow(t - 1))
            };
            let differ = !at(base);
            NeighborSymmetryReport {
                is_q: !differ,
                witness_base: differ.then(|| Element::Rat(base).to_string()),
                witness_prime: differ.then_some(p),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransferVerdict {
    Iso,
    AntiIso,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub verdict: TransferVerdict,
    /// Directed edges `u -> v`, `v ∉ {u, u⁻¹}`, compared.
    pub arcs_checked: usize,
    /// For `Iso`, `φ(O(x)) = O(φx)`; for `AntiIso`, `φ(O(x)) = I(φx)` and
    /// `φ(I(x)) = O(φx)`; for every `x` in the component (window slices).
    pub slices_consistent: bool,
}

/// Classify `φ` restricted to a component `C` of the Z±-power graph of `G`
/// as an isomorphism or anti-isomorphism of the directed graphs.
pub fn check_directed_transfer(
    phi: &[usize],
    g: &PowerGraphBundle,
    h: &PowerGraphBundle,
    component: &[usize],
) -> Result<TransferReport, DirectionError> {
    require_zpm(g)?;
    require_zpm(h)?;
    if !g.group().is_torsion_free() || !g.group().nilpotency_class_at_most_2() {
        return Err(DirectionError::PreconditionFailed("G must be torsion-free of class at most 2".into()));
    }
    if !is_isomorphism(g.graph(), h.graph(), phi) {
        return Err(DirectionError::PreconditionFailed("map is not a Z±-power graph isomorphism".into()));
    }
    let mut comp = component.to_vec();
    comp.sort_unstable();
    let actual = g.graph().connected_components().into_iter().find(|c| comp.first().is_some_and(|v| c.contains(v)));
    if comp.len() < 2 || actual.as_ref() != Some(&comp) {
        return Err(DirectionError::PreconditionFailed("not a nontrivial component".into()));
    }
    let (gd, hd) = (g.digraph(), h.digraph());
    let mut kept: Option<(usize, usize)> = None;
    let mut reversed: Option<(usize, usize)> = None;
    let mut arcs_checked = 0;
    for &u in &comp {
        for &v in gd.out_neighbors(u) {
            if v == g.inverse_index(u) {
                continue;
            }
            arcs_checked += 1;
            if hd.has_arc(phi[u], phi[v]) {
                kept.get_or_insert((u, v));
            } else {
                reversed.get_or_insert((u, v));
            }
        }
    }
    let label = |(u, v): (usize, usize)| format!("{} -> {}", g.element(u), g.element(v));
    let verdict = match (kept, reversed) {
        (Some(k), Some(r)) => return Err(DirectionError::MixedVerdict(format!("{} kept, {} reversed", label(k), label(r)))),
        (_, None) => TransferVerdict::Iso,
        (None, Some(_)) => TransferVerdict::AntiIso,
    };
    let image = |vs: &[usize]| {
        let mut out: Vec<usize> = vs.iter().map(|&v| phi[v]).collect();
        out.sort_unstable();
        out
    };
    let mut slices_consistent = true;
    for &x in &comp {
        let (sg, sh) = (neighbor_split(g, g.element(x))?, neighbor_split(h, h.element(phi[x]))?);
        slices_consistent &= match verdict {
            TransferVerdict::Iso => image(&sg.out) == sh.out && image(&sg.inn) == sh.inn,
            TransferVerdict::AntiIso => image(&sg.out) == sh.inn && image(&sg.inn) == sh.out,
        };
    }
    Ok(TransferReport { verdict, arcs_checked, slices_consistent })
}

/// Root-search bound for Heisenberg windows of coordinate bound `b`. The
/// central coordinate of a window element reaches `b + b²`, and the root
/// of `(0, 0, c)` is `(0, 0, ±1)` only after dividing `c` out, so any
/// common root has coordinates of at most that size.
pub fn heisenberg_witness_bound(b: u64) -> u64 {
    b + b * b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCyclicReport {
    pub pass: bool,
    pub pairs: usize,
    /// First pair without a common root within the bound.
    pub failing_pair: Option<[String; 2]>,
}

/// Every pair of the component has a common root within `bound`.
pub fn locally_cyclic_component_check(b: &PowerGraphBundle, component: &[usize], bound: u64) -> LocalCyclicReport {
    let g = b.group();
    let candidates = g.root_candidates(bound);
    let roots: Vec<Vec<usize>> = component
        .iter()
        .map(|&v| (0..candidates.len()).filter(|&c| g.is_power_of(b.element(v), &candidates[c])).collect())
        .collect();
    let mut pairs = 0;
    for i in 0..component.len() {
        for j in i..component.len() {
            pairs += 1;
            let common = roots[i].iter().any(|c| roots[j].binary_search(c).is_ok());
            if !common {
                return LocalCyclicReport {
                    pass: false,
                    pairs,
                    failing_pair: Some([b.element(component[i]).to_string(), b.element(component[j]).to_string()]),
                };
            }
        }
    }
    LocalCyclicReport { pass: true, pairs, failing_pair: None }
}

/// Nontrivial components of a Z±-power bundle.
pub fn nontrivial_components(b: &PowerGraphBundle) -> Vec<Vec<usize>> {
    b.graph().connected_components().into_iter().filter(|c| c.len() > 1).collect()
}

/// The Z±-power graph induced on `O(z)` or `I(z)`, for inspection.
pub fn side_graph(b: &PowerGraphBundle, split: &NeighborSplit, side: Side) -> SimpleGraph {
    match side {
        Side::Out => b.graph().induced(&split.out),
        Side::In => b.graph().induced(&split.inn),
    }
}

/// Bundles of all variants on one window, for callers that need several.
pub fn bundles(group: &Group, window: &WindowSpec) -> Result<VariantBundles, DirectionError> {
    PowerGraphBundle::build_all(group, window, crate::window::DEFAULT_CAP)
        .map_err(|e| DirectionError::PreconditionFailed(e.to_string()))
}
