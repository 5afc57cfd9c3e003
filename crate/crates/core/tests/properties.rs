use std::collections::{BTreeSet, VecDeque};

use num_rational::Rational64;
use proptest::prelude::*;

use ::powergraph::direction::{
    default_growth_base, growth_oracle, neighbor_preorder, phi_a, s_set, s_set_is_finite, GrowthVerdict, Side,
};
use ::powergraph::graphs::{find_isomorphism, is_isomorphism, GraphDocument};
use ::powergraph::groups::Height;
use ::powergraph::powergraph::adjacent;
use ::powergraph::report::Report;
use ::powergraph::transforms::sbar_same_component;
use ::powergraph::{Digraph, Element, Group, HeightFunction, PowerGraphBundle, SimpleGraph, VariantTag, WindowSpec};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn graph_from_bits(n: usize, bits: &[bool]) -> SimpleGraph {
    let mut k = 0;
    SimpleGraph::from_fn(labels(n), |_, _| {
        k += 1;
        bits[k - 1]
    })
    .unwrap()
}

fn arb_graph(max: usize) -> impl Strategy<Value = SimpleGraph> {
    (1..=max).prop_flat_map(|n| prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |b| graph_from_bits(n, &b)))
}

fn arb_digraph(max: usize) -> impl Strategy<Value = Digraph> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            Digraph::from_fn(labels(n), |i, j| bits[i * n + j]).unwrap()
        })
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_isomorphic(g: &SimpleGraph, h: &SimpleGraph) -> bool {
    g.order() == h.order()
        && g.edge_count() == h.edge_count()
        && permutations(g.order())
            .iter()
            .any(|p| g.edges().all(|(i, j)| h.has_edge(p[i], p[j])))
}

fn relabel(g: &SimpleGraph, perm: &[usize]) -> SimpleGraph {
    SimpleGraph::new(labels(g.order()), g.edges().map(|(i, j)| (perm[i], perm[j]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn isomorphism_matches_brute_force(g in arb_graph(6), h in arb_graph(6)) {
        let found = find_isomorphism(&g, &h);
        prop_assert_eq!(found.is_some(), brute_isomorphic(&g, &h));
        if let Some(m) = found {
            prop_assert!(is_isomorphism(&g, &h, &m));
        }
    }

    #[test]
    fn relabelled_graphs_are_isomorphic(g in arb_graph(7), seed in any::<u64>()) {
        let n = g.order();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h = relabel(&g, &perm);
        let m = find_isomorphism(&g, &h);
        prop_assert!(m.is_some_and(|m| is_isomorphism(&g, &h, &m)));
    }

    #[test]
    fn complement_is_an_involution(g in arb_graph(8)) {
        let c = g.complement();
        prop_assert_eq!(c.edge_count() + g.edge_count(), g.order() * (g.order() - 1) / 2);
        prop_assert_eq!(c.complement(), g);
    }

    #[test]
    fn transpose_is_an_involution(d in arb_digraph(7)) {
        let t = d.transpose();
        for (i, j) in d.arcs() {
            prop_assert!(t.has_arc(j, i));
        }
        prop_assert_eq!(t.transpose(), d);
    }

    #[test]
    fn strong_product_of_cliques(m in 1usize..5, n in 1usize..5) {
        let k = SimpleGraph::complete(m).strong_product(&SimpleGraph::complete(n));
        prop_assert_eq!(k.edge_count(), m * n * (m * n - 1) / 2);
    }

    #[test]
    fn graph_json_round_trip(g in arb_graph(7), d in arb_digraph(5)) {
        let doc = g.to_document();
        let back = GraphDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(back.to_simple().unwrap(), g);
        let doc = d.to_document();
        let back = GraphDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(back.to_digraph().unwrap(), d);
    }
}

fn heis() -> impl Strategy<Value = Element> {
    (-4i64..=4, -4i64..=4, -6i64..=6).prop_map(|(a, b, c)| Element::Triple(a, b, c))
}

fn rat() -> impl Strategy<Value = Rational64> {
    (-30i64..=30, 1i64..=12).prop_map(|(p, q)| Rational64::new(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn heisenberg_group_axioms(x in heis(), y in heis(), z in heis()) {
        let g = Group::Heisenberg;
        let e = g.identity();
        let xy = g.mul(&x, &y).unwrap();
        prop_assert_eq!(g.mul(&xy, &z).unwrap(), g.mul(&x, &g.mul(&y, &z).unwrap()).unwrap());
        prop_assert_eq!(g.mul(&x, &e).unwrap(), x);
        prop_assert_eq!(g.mul(&x, &g.inverse(&x)).unwrap(), e);
    }

    #[test]
    fn heisenberg_power_laws(x in heis(), m in -6i64..=6, n in -6i64..=6) {
        let g = Group::Heisenberg;
        let sum = g.power(&x, m + n);
        prop_assert_eq!(sum, g.mul(&g.power(&x, m), &g.power(&x, n)).unwrap());
        prop_assert_eq!(g.power(&g.power(&x, m), n), g.power(&x, m * n));
        // repeated multiplication
        let mut acc = g.identity();
        for _ in 0..n.unsigned_abs() {
            acc = g.mul(&acc, &x).unwrap();
        }
        if n < 0 {
            acc = g.inverse(&acc);
        }
        prop_assert_eq!(g.power(&x, n), acc);
    }

    #[test]
    fn solved_exponents_are_exact(x in heis(), n in -8i64..=8) {
        let g = Group::Heisenberg;
        let y = g.power(&x, n);
        let sol = g.solve_power_of(&y, &x);
        prop_assert!(sol.contains(n));
        for k in -10i64..=10 {
            prop_assert_eq!(sol.contains(k), g.power(&x, k) == y);
        }
    }

    #[test]
    fn cyclic_group_axioms(n in 1usize..20, a in 0usize..20, b in 0usize..20, k in -25i64..25) {
        let g = Group::cyclic(n);
        let (x, y) = (Element::Index(a % n), Element::Index(b % n));
        prop_assert_eq!(g.mul(&x, &y).unwrap(), Element::Index((a % n + b % n) % n));
        let expect = ((a % n) as i64 * k).rem_euclid(n as i64) as usize;
        prop_assert_eq!(g.power(&x, k), Element::Index(expect));
    }

    #[test]
    fn rational_powers_are_multiples(x in rat(), n in -9i64..=9) {
        let g = Group::Rational(HeightFunction::rationals());
        prop_assert_eq!(g.power(&Element::Rat(x), n), Element::Rat(x * n));
    }

    #[test]
    fn group_json_round_trip(spec in prop::sample::select(vec!["default=inf", "2=inf", "default=1,3=0", "5=2,7=inf"])) {
        let g = Group::Rational(HeightFunction::parse_spec(spec).unwrap());
        prop_assert_eq!(Group::from_json_value(&g.to_json_value()).unwrap(), g);
    }

    #[test]
    fn phi_is_an_involution(a in rat(), x in rat()) {
        prop_assume!(a != Rational64::from(0));
        prop_assert_eq!(phi_a(a, phi_a(a, x).unwrap()).unwrap(), x);
    }
}

/// Breadth-first search in the N-power graph on an explicit carrier.
fn bfs_connected(g: &Group, carrier: &[Element], x: usize, y: usize) -> bool {
    let mut seen = vec![false; carrier.len()];
    let mut queue = VecDeque::from([x]);
    seen[x] = true;
    while let Some(u) = queue.pop_front() {
        if u == y {
            return true;
        }
        for v in 0..carrier.len() {
            if !seen[v] && adjacent(g, &carrier[u], &carrier[v], VariantTag::Nplus) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rational_components_by_bfs(x in rat(), y in rat()) {
        prop_assume!(x != Rational64::from(0) && y != Rational64::from(0) && x != y);
        let g = Group::Rational(HeightFunction::rationals());
        // x and y are both multiples of r, with the sign of their own
        let r = Rational64::new(1, x.denom() * y.denom());
        let carrier: Vec<Element> = [x, -x, y, -y, r, -r].into_iter().map(Element::Rat).collect::<BTreeSet<_>>().into_iter().collect();
        let (xi, yi) = (carrier.iter().position(|e| *e == Element::Rat(x)).unwrap(), carrier.iter().position(|e| *e == Element::Rat(y)).unwrap());
        let sbar = sbar_same_component(&g, &Element::Rat(x), &Element::Rat(y)).unwrap();
        prop_assert_eq!(sbar, bfs_connected(&g, &carrier, xi, yi));
        prop_assert_eq!(sbar, (x > Rational64::from(0)) == (y > Rational64::from(0)));
    }

    #[test]
    fn heisenberg_components_by_bfs(x in heis(), y in heis()) {
        let g = Group::Heisenberg;
        let e = g.identity();
        prop_assume!(x != e && y != e && x != y);
        let carrier: Vec<Element> = ::powergraph::groups::heisenberg_box(2)
            .flat_map(|z| [z, g.inverse(&z)])
            .chain([x, y])
            .filter(|z| *z != e)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let (xi, yi) = (carrier.iter().position(|z| *z == x).unwrap(), carrier.iter().position(|z| *z == y).unwrap());
        let joined = bfs_connected(&g, &carrier, xi, yi);
        let sbar = sbar_same_component(&g, &x, &y).unwrap();
        // a window path implies the same component; the converse needs the common root in the window
        if joined {
            prop_assert!(sbar);
        }
        if sbar && g.local_cyclicity_witness(&x, &y, 2).is_some() {
            prop_assert!(joined);
        }
    }

    #[test]
    fn s_set_slice_is_brute_force(n in 4u64..25, a in -24i64..=24, b in -24i64..=24) {
        prop_assume!(a != 0 && b != 0 && a != b && a.unsigned_abs() <= n && b.unsigned_abs() <= n);
        let g = Group::Integers;
        let bundle = PowerGraphBundle::build(&g, &WindowSpec::Integers { max_abs: n }, VariantTag::Zpm).unwrap();
        let closed = |z: i64, c: i64| z == c || (z != 0 && c != 0 && (z % c == 0 || c % z == 0));
        let expect: BTreeSet<i64> = (-(n as i64)..=n as i64).filter(|&z| closed(z, b) && !closed(z, a)).collect();
        let d = s_set(&bundle, &Element::Int(a), &Element::Int(b)).unwrap();
        let got: BTreeSet<i64> = d.slice.iter().map(|e| if let Element::Int(k) = e { *k } else { unreachable!() }).collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn integer_verdicts_match_growth(a in -40i64..=40, b in -40i64..=40) {
        prop_assume!(a != 0 && b != 0 && a.abs() != b.abs());
        let g = Group::Integers;
        let (x, y) = (Element::Int(a), Element::Int(b));
        let finite = s_set_is_finite(&g, &x, &y).unwrap();
        prop_assert_eq!(finite, b % a == 0);
        let v = growth_oracle(&g, &x, &y, default_growth_base(&x, &y)).unwrap().verdict;
        prop_assert_eq!(v, if finite { GrowthVerdict::Finite } else { GrowthVerdict::Infinite });
    }

    #[test]
    fn preorders_symmetric_only_for_rationals(caps in prop::collection::vec(prop_oneof![Just(None), (0u32..3).prop_map(Some)], 4), default_inf in any::<bool>()) {
        let primes = [2u64, 3, 5, 7];
        let h = |c: &Option<u32>| c.map_or(Height::Infinite, Height::Finite);
        let default = if default_inf { Height::Infinite } else { Height::Finite(0) };
        let hf = HeightFunction::new(default, primes.iter().zip(&caps).map(|(&p, c)| (p, h(c)))).unwrap();
        let base_iso = neighbor_preorder(&hf, Side::Out).is_isomorphic(&neighbor_preorder(&hf, Side::In));
        // at base 1 the in-side caps are the heights
        let all_heights_infinite = default_inf && caps.iter().all(Option::is_none);
        if all_heights_infinite {
            prop_assert!(base_iso);
        }
        let r = ::powergraph::direction::is_rationals_by_neighbor_symmetry(&hf);
        prop_assert_eq!(r.is_q, all_heights_infinite);
    }

    #[test]
    fn window_graphs_are_induced(n in 2u64..15, k in 1u64..4) {
        let g = Group::Integers;
        let small = PowerGraphBundle::build(&g, &WindowSpec::Integers { max_abs: n }, VariantTag::Z).unwrap();
        let big = PowerGraphBundle::build(&g, &WindowSpec::Integers { max_abs: n * (k + 1) }, VariantTag::Z).unwrap();
        let idx: Vec<usize> = small.elements().iter().map(|e| big.index_of(e).unwrap()).collect();
        prop_assert_eq!(&big.graph().induced(&idx), small.graph());
    }

    #[test]
    fn zpm_twins_are_inverse_pairs(n in 2u64..40) {
        let b = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: n }, VariantTag::Zpm).unwrap();
        let p = b.boundary_corrected_twin_partition();
        for block in p.blocks() {
            let mut vals: Vec<i64> = block.iter().map(|&v| if let Element::Int(k) = b.element(v) { *k } else { unreachable!() }).collect();
            vals.sort();
            prop_assert!(vals == [0] || (vals.len() == 2 && vals[0] == -vals[1]), "{:?}", vals);
        }
    }

    #[test]
    fn variant_edge_difference_is_identity_star(n in 2u64..20) {
        let all = PowerGraphBundle::build_all(&Group::Integers, &WindowSpec::Integers { max_abs: n }, 5000).unwrap();
        let zpm: BTreeSet<(usize, usize)> = all.zpm.graph().edges().collect();
        let e = all.z.identity_index();
        let diff: Vec<(usize, usize)> = all.z.graph().edges().filter(|p| !zpm.contains(p)).collect();
        prop_assert_eq!(diff.len(), all.z.order() - 1);
        prop_assert!(diff.iter().all(|&(i, j)| i == e || j == e));
    }

    #[test]
    fn report_lines_parse(pass in any::<bool>(), name in "[a-z]{1,8}") {
        let r = Report::new(&name, "integers", "|n|<=3", "zpm").flag("x", pass);
        let line = r.to_json_line();
        prop_assert!(line.ends_with('\n') && !line[..line.len() - 1].contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        prop_assert_eq!(v["pass"].as_bool(), Some(pass));
        prop_assert_eq!(v["check"].as_str(), Some(name.as_str()));
    }
}
