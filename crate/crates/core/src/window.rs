//! Finite carriers ("windows") of possibly infinite groups.
//!
//! A window always contains the identity and is closed under inversion.
//! Adjacency is never computed from the window, only restricted to it.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;

use crate::arith::{zigzag, zigzag_range};
use crate::error::WindowError;
use crate::groups::{heisenberg_box, Element, Group};

/// Default maximum carrier size.
pub const DEFAULT_CAP: usize = 5000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WindowSpec {
    /// The whole (finite) group.
    Full,
    /// `{n : |n| <= max_abs}`.
    Integers { max_abs: u64 },
    /// Members `p/q` (lowest terms) with `|p| <= max_num`, `q <= max_den`.
    Rational { max_num: u64, max_den: u64 },
    /// Triples in `[-max_coord, max_coord]^3` together with their inverses.
    Heisenberg { max_coord: u64 },
    /// An explicit list of elements.
    Explicit(Vec<Element>),
}

impl WindowSpec {
    /// The family's natural window of size parameter `n`.
    pub fn for_group(group: &Group, n: u64) -> WindowSpec {
        match group {
            Group::Finite(_) => WindowSpec::Full,
            Group::Integers => WindowSpec::Integers { max_abs: n },
            Group::Rational(_) => WindowSpec::Rational { max_num: n, max_den: n },
            Group::Heisenberg => WindowSpec::Heisenberg { max_coord: n },
        }
    }

    /// Same shape with every bound multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> WindowSpec {
        match self {
            WindowSpec::Integers { max_abs } => WindowSpec::Integers { max_abs: max_abs * factor },
            WindowSpec::Rational { max_num, max_den } => {
                WindowSpec::Rational { max_num: max_num * factor, max_den: max_den * factor }
            }
            WindowSpec::Heisenberg { max_coord } => WindowSpec::Heisenberg { max_coord: max_coord * factor },
            other => other.clone(),
        }
    }

    fn size_estimate(&self, group: &Group) -> usize {
        let sat = |v: u64| usize::try_from(v).unwrap_or(usize::MAX);
        match self {
            WindowSpec::Full => match group {
                Group::Finite(t) => t.order(),
                _ => usize::MAX,
            },
            WindowSpec::Integers { max_abs } => sat(max_abs.saturating_mul(2).saturating_add(1)),
            WindowSpec::Rational { max_num, max_den } => {
                sat(max_num.saturating_mul(2).saturating_add(1).saturating_mul(*max_den))
            }
            WindowSpec::Heisenberg { max_coord } => {
                let side = max_coord.saturating_mul(2).saturating_add(1);
                sat(side.saturating_mul(side).saturating_mul(side).saturating_mul(2))
            }
            WindowSpec::Explicit(v) => v.len(),
        }
    }

    /// Enumerate the carrier, identity first, in a deterministic order.
    pub fn carrier(&self, group: &Group, cap: usize) -> Result<Vec<Element>, WindowError> {
        let mismatch = || WindowError::FamilyMismatch { window: self.to_string(), family: group.family_name() };
        if self.size_estimate(group) > cap.saturating_mul(64) {
            return Err(WindowError::TooLarge { size: self.size_estimate(group), cap });
        }
        let elements: Vec<Element> = match (self, group) {
            (WindowSpec::Full, Group::Finite(t)) => {
                let e = t.identity();
                std::iter::once(e).chain((0..t.order()).filter(|&i| i != e)).map(Element::Index).collect()
            }
            (WindowSpec::Integers { max_abs }, Group::Integers) => zigzag_range(*max_abs).map(Element::Int).collect(),
            (WindowSpec::Rational { max_num, max_den }, Group::Rational(h)) => {
                let (p, q) = (*max_num as i64, *max_den as i64);
                let mut out: Vec<Rational64> = (1..=q)
                    .flat_map(|den| (-p..=p).map(move |num| (num, den)))
                    .filter(|&(num, den)| num != 0 && num.gcd(&den) == 1)
                    .map(|(num, den)| Rational64::new(num, den))
                    .filter(|r| h.contains(r))
                    .collect();
                out.sort_by_key(|r| {
                    let (num, den) = (*r.numer(), *r.denom());
                    (num.abs().max(den), den, num.abs(), num < 0)
                });
                std::iter::once(Rational64::from_integer(0)).chain(out).map(Element::Rat).collect()
            }
            (WindowSpec::Heisenberg { max_coord }, Group::Heisenberg) => {
                let mut set: HashSet<Element> = HashSet::new();
                for g in heisenberg_box(*max_coord as i64) {
                    set.insert(group.inverse(&g));
                    set.insert(g);
                }
                let mut out: Vec<Element> = set.into_iter().collect();
                out.sort_by_key(|g| match g {
                    Element::Triple(a, b, c) => (
                        a.abs().max(b.abs()).max(c.abs()),
                        a.abs() + b.abs() + c.abs(),
                        zigzag(*a),
                        zigzag(*b),
                        zigzag(*c),
                    ),
                    _ => unreachable!(),
                });
                out
            }
            (WindowSpec::Explicit(list), _) => {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for g in list {
                    group.check(g)?;
                    if seen.insert(*g) {
                        out.push(*g);
                    }
                }
                if !seen.contains(&group.identity()) {
                    return Err(WindowError::Invalid("identity missing".into()));
                }
                if let Some(g) = out.iter().find(|g| !seen.contains(&group.inverse(g))) {
                    return Err(WindowError::Invalid(format!("not closed under inversion at {g}")));
                }
                out
            }
            _ => return Err(mismatch()),
        };
        if elements.len() > cap {
            return Err(WindowError::TooLarge { size: elements.len(), cap });
        }
        Ok(elements)
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSpec::Full => f.write_str("full"),
            WindowSpec::Integers { max_abs } => write!(f, "|n|<={max_abs}"),
            WindowSpec::Rational { max_num, max_den } => write!(f, "|num|<={max_num},den<={max_den}"),
            WindowSpec::Heisenberg { max_coord } => write!(f, "box<={max_coord}"),
            WindowSpec::Explicit(v) => write!(f, "explicit[{}]", v.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::HeightFunction;

    #[test]
    fn carriers_contain_identity_and_inverses() {
        let cases = [
            (Group::Integers, WindowSpec::Integers { max_abs: 5 }),
            (Group::Rational(HeightFunction::rationals()), WindowSpec::Rational { max_num: 4, max_den: 4 }),
            (Group::preset("z-inv-2").unwrap(), WindowSpec::Rational { max_num: 6, max_den: 8 }),
            (Group::Heisenberg, WindowSpec::Heisenberg { max_coord: 2 }),
            (Group::preset("q8").unwrap(), WindowSpec::Full),
        ];
        for (g, w) in cases {
            let c = w.carrier(&g, DEFAULT_CAP).unwrap();
            assert_eq!(c[0], g.identity());
            let set: HashSet<_> = c.iter().copied().collect();
            assert_eq!(set.len(), c.len());
            assert!(c.iter().all(|x| set.contains(&g.inverse(x)) && g.contains(x)));
        }
    }

    #[test]
    fn carrier_sizes() {
        assert_eq!(WindowSpec::Integers { max_abs: 10 }.carrier(&Group::Integers, 100).unwrap().len(), 21);
        let q = Group::Rational(HeightFunction::rationals());
        let c = WindowSpec::Rational { max_num: 3, max_den: 3 }.carrier(&q, 100).unwrap();
        // 0, ±1, ±2, ±3, ±1/2, ±3/2, ±1/3, ±2/3
        assert_eq!(c.len(), 15);
        assert_eq!(c[1], Element::rational(1, 1));
        let h = WindowSpec::Heisenberg { max_coord: 1 }.carrier(&Group::Heisenberg, 1000).unwrap();
        assert!(h.contains(&Element::Triple(-1, -1, 2)));
    }

    #[test]
    fn window_errors() {
        assert!(matches!(
            WindowSpec::Integers { max_abs: 10 }.carrier(&Group::Integers, 5),
            Err(WindowError::TooLarge { .. })
        ));
        assert!(matches!(
            WindowSpec::Integers { max_abs: 10 }.carrier(&Group::Heisenberg, 100),
            Err(WindowError::FamilyMismatch { .. })
        ));
        let w = WindowSpec::Explicit(vec![Element::Int(0), Element::Int(2)]);
        assert!(matches!(w.carrier(&Group::Integers, 100), Err(WindowError::Invalid(_))));
        let w = WindowSpec::Explicit(vec![Element::Int(1), Element::Int(-1)]);
        assert!(matches!(w.carrier(&Group::Integers, 100), Err(WindowError::Invalid(_))));
        assert!(WindowSpec::Integers { max_abs: u64::MAX }.carrier(&Group::Integers, 100).is_err());
    }
}
