//! Worked examples checked against brute-force enumerations written here.

use std::collections::BTreeSet;

use num_rational::Rational64;

use ::powergraph::direction::{
    growth_oracle, is_rationals_by_neighbor_symmetry, neighbor_split, s_set_verdict, GrowthVerdict, SVerdict,
};
use ::powergraph::powergraph::equiv_class_profile;
use ::powergraph::transforms::{sbar_same_component, split_component};
use ::powergraph::{Element, Group, HeightFunction, PowerGraphBundle, VariantTag, WindowSpec};

fn ints(b: &PowerGraphBundle, vs: &[usize]) -> BTreeSet<i64> {
    vs.iter().map(|&v| if let Element::Int(k) = b.element(v) { *k } else { unreachable!() }).collect()
}

/// `x^n = y^m` for some `1 <= n, m <= 12`.
fn exponent_scan(g: &Group, x: &Element, y: &Element) -> bool {
    (1..=12).any(|n| (1..=12).any(|m| g.power(x, n) == g.power(y, m)))
}

#[test]
fn sbar_examples_by_exponent_scan() {
    let z = Group::Integers;
    for (a, b) in [(2, 6), (2, -2), (3, 5), (-4, -6), (7, -14)] {
        let (x, y) = (Element::Int(a), Element::Int(b));
        assert_eq!(sbar_same_component(&z, &x, &y).unwrap(), exponent_scan(&z, &x, &y), "({a}, {b})");
    }
    let h = Group::Heisenberg;
    let pts: Vec<Element> = ::powergraph::groups::heisenberg_box(1).filter(|g| *g != h.identity()).collect();
    for x in &pts {
        for y in pts.iter().chain([&Element::Triple(2, 0, 1), &Element::Triple(2, 2, 2)]) {
            assert_eq!(sbar_same_component(&h, x, y).unwrap(), exponent_scan(&h, x, y), "{x} {y}");
        }
    }
    assert!(!sbar_same_component(&h, &Element::Triple(1, 0, 0), &Element::Triple(2, 0, 1)).unwrap());
}

#[test]
fn z6_center_and_blocks() {
    let b = PowerGraphBundle::build(&Group::cyclic(6), &WindowSpec::Full, VariantTag::Z).unwrap();
    // x ~ y iff one of gcd(x,6), gcd(y,6) divides the other
    let gcd6 = |x: usize| (1..=6).rev().find(|d| 6 % d == 0 && x % d == 0).unwrap();
    let adj = |x: usize, y: usize| gcd6(y) % gcd6(x) == 0 || gcd6(x) % gcd6(y) == 0;
    let center: BTreeSet<usize> = (0..6).filter(|&x| (0..6).all(|y| x == y || adj(x, y))).collect();
    let got: BTreeSet<usize> = b.center().iter().map(|e| if let Element::Index(i) = e { *i } else { unreachable!() }).collect();
    assert_eq!(got, center);
    let p = equiv_class_profile(&b);
    let mut sizes = p.sizes.clone();
    sizes.sort();
    assert_eq!(sizes, vec![1, 2, 3]);
    assert!(!p.z_signature);
}

#[test]
fn integer_build_counts() {
    let b = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 10 }, VariantTag::Zpm).unwrap();
    let mut edges = 0;
    for x in -10i64..=10 {
        for y in x + 1..=10 {
            if x != 0 && y != 0 && (x % y == 0 || y % x == 0) {
                edges += 1;
            }
        }
    }
    assert_eq!((b.order(), b.graph().edge_count()), (21, edges));
    assert_eq!(b.graph().isolated_vertices(), vec![b.index_of(&Element::Int(0)).unwrap()]);
}

#[test]
fn neighbor_split_by_divisibility() {
    let n = 12i64;
    let b = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: n as u64 }, VariantTag::Zpm).unwrap();
    for z in [2i64, -3, 3, 4, 5, 6, -6] {
        let s = neighbor_split(&b, &Element::Int(z)).unwrap();
        let out: BTreeSet<i64> = (-n..=n).filter(|&y| y != 0 && y != z && y != -z && y % z == 0).collect();
        let inn: BTreeSet<i64> = (-n..=n).filter(|&y| y != 0 && y != z && y != -z && z % y == 0).collect();
        assert_eq!(ints(&b, &s.out), out, "O({z})");
        assert_eq!(ints(&b, &s.inn), inn, "I({z})");
        assert!(s.out_closed, "O({z}) closed");
        // with only ±2z in the window, the two are adjacent and the complement splits them
        assert_eq!(s.out_connected, 3 * z.abs() <= n, "O({z}) connected");
    }
}

#[test]
fn rational_in_slice_by_ratio() {
    let q = Group::Rational(HeightFunction::rationals());
    let b = PowerGraphBundle::build(&q, &WindowSpec::Rational { max_num: 5, max_den: 5 }, VariantTag::Zpm).unwrap();
    let s = neighbor_split(&b, &Element::rational(1, 1)).unwrap();
    let got: BTreeSet<Rational64> = s.inn.iter().map(|&v| if let Element::Rat(r) = b.element(v) { *r } else { unreachable!() }).collect();
    let expect: BTreeSet<Rational64> =
        (2..=5).flat_map(|k| [Rational64::new(1, k), Rational64::new(-1, k)]).collect();
    assert_eq!(got, expect);
}

#[test]
fn rational_split_is_by_sign() {
    let q = Group::Rational(HeightFunction::rationals());
    let b = PowerGraphBundle::build(&q, &WindowSpec::Rational { max_num: 4, max_den: 4 }, VariantTag::Zpm).unwrap();
    let one = b.index_of(&Element::rational(1, 1)).unwrap();
    let comp = b.graph().connected_components().into_iter().find(|c| c.contains(&one)).unwrap();
    let split = split_component(&b, &comp).unwrap();
    let positive = |v: &usize| matches!(b.element(*v), Element::Rat(r) if *r > Rational64::from(0));
    let (pos, neg) = if positive(&split.psi1[0]) { (&split.psi1, &split.psi2) } else { (&split.psi2, &split.psi1) };
    assert!(pos.iter().all(positive) && !neg.iter().any(positive));
}

#[test]
fn rational_growth_example() {
    let q = Group::Rational(HeightFunction::rationals());
    let (x, y) = (Element::rational(1, 1), Element::rational(2, 1));
    let g = growth_oracle(&q, &x, &y, 4).unwrap();
    assert_eq!(g.verdict, GrowthVerdict::Infinite);
    assert!(matches!(s_set_verdict(&q, &x, &y).unwrap(), SVerdict::Infinite(_)));
}

#[test]
fn localization_finite_s_sets_by_enumeration() {
    // Z[1/2]: S(3, 12) consists of the y/k with k ∤ 4 and 4 ∤ k, among divisors allowed by heights
    let h = HeightFunction::localization(2).unwrap();
    let g = Group::Rational(h.clone());
    let (x, y) = (Element::rational(3, 1), Element::rational(12, 1));
    let SVerdict::Finite(set) = s_set_verdict(&g, &x, &y).unwrap() else { panic!("expected finite") };
    // brute force over a large box
    let closed = |z: Rational64, c: Rational64| z == c || (z / c).is_integer() || (c / z).is_integer();
    let mut expect = Vec::new();
    for den in [1i64, 2, 4, 8, 16, 32, 64] {
        for num in -400i64..=400 {
            let z = Rational64::new(num, den);
            if num != 0 && *z.denom() == den && closed(z, Rational64::from(12)) && !closed(z, Rational64::from(3)) {
                expect.push(Element::Rat(z).to_string());
            }
        }
    }
    let (mut a, mut b) = (set, expect);
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn height_one_detection() {
    let h = HeightFunction::parse_spec("default=1").unwrap();
    let r = is_rationals_by_neighbor_symmetry(&h);
    assert!(!r.is_q);
    assert_eq!(r.witness_prime, Some(2));
}
