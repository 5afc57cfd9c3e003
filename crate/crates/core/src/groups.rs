//! Symbolic group models with exact power arithmetic.
//!
//! Four families are supported: finite groups given by a Cayley table, the
//! integers, subgroups of the rationals described by a [`HeightFunction`],
//! and the discrete Heisenberg group of integer triples with
//! `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
//!
//! Every question the power-graph code asks ("is `y` a power of `x`, and
//! with which exponents?") is answered exactly by [`Group::solve_power_of`];
//! nothing here searches a finite window.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde_json::Value;

use crate::arith::{factorize, is_prime, pair_count, valuation, zigzag};
use crate::error::GroupError;

/// A group element. The variant always matches the owning [`Group`] family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Index(usize),
    Int(i64),
    Rat(Rational64),
    Triple(i64, i64, i64),
}

impl Element {
    pub fn rational(num: i64, den: i64) -> Self {
        Element::Rat(Rational64::new(num, den))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Index(i) => write!(f, "{i}"),
            Element::Int(n) => write!(f, "{n}"),
            Element::Rat(q) if *q.denom() == 1 => write!(f, "{}", q.numer()),
            Element::Rat(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Element::Triple(a, b, c) => write!(f, "({a},{b},{c})"),
        }
    }
}

/// Element order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    Infinite,
}

/// Exact description of `{n in Z : x^n = y}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentSet {
    Empty,
    Single(i64),
    /// All `n` with `n ≡ residue (mod modulus)`; `modulus >= 1`.
    Residue { residue: u64, modulus: u64 },
}

impl ExponentSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, ExponentSet::Empty)
    }

    pub fn contains(&self, n: i64) -> bool {
        match *self {
            ExponentSet::Empty => false,
            ExponentSet::Single(m) => m == n,
            ExponentSet::Residue { residue, modulus } => {
                n.rem_euclid(modulus as i64) as u64 == residue
            }
        }
    }

    /// Some exponent `n >= 1` belongs to the set.
    pub fn has_positive(&self) -> bool {
        match *self {
            ExponentSet::Empty => false,
            ExponentSet::Single(m) => m >= 1,
            ExponentSet::Residue { .. } => true,
        }
    }

    /// Some exponent `n != 0` belongs to the set.
    pub fn has_nonzero(&self) -> bool {
        match *self {
            ExponentSet::Empty => false,
            ExponentSet::Single(m) => m != 0,
            ExponentSet::Residue { .. } => true,
        }
    }
}

/// A height: a natural number or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Height {
    Finite(u32),
    Infinite,
}

impl Height {
    pub fn is_infinite(self) -> bool {
        self == Height::Infinite
    }

    pub fn admits(self, exponent: u32) -> bool {
        match self {
            Height::Finite(h) => exponent <= h,
            Height::Infinite => true,
        }
    }

    fn parse(text: &str) -> Option<Height> {
        match text.trim() {
            "inf" | "infinity" | "∞" => Some(Height::Infinite),
            t => t.parse().ok().map(Height::Finite),
        }
    }

    fn from_json(value: &Value) -> Option<Height> {
        match value {
            Value::String(s) => Height::parse(s),
            Value::Number(n) => n.as_u64().and_then(|v| u32::try_from(v).ok()).map(Height::Finite),
            _ => None,
        }
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("inf"),
        }
    }
}

/// Prime → height map with a default, describing the subgroup
/// `{q : v_p(q) >= -height(p) for every prime p}` of the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeightFunction {
    default: Height,
    exceptions: BTreeMap<u64, Height>,
}

impl HeightFunction {
    pub fn new(default: Height, exceptions: impl IntoIterator<Item = (u64, Height)>) -> Result<Self, GroupError> {
        let mut map = BTreeMap::new();
        for (p, h) in exceptions {
            if !is_prime(p) {
                return Err(GroupError::Parse {
                    key: format!("exceptions.{p}"),
                    reason: "not a prime".into(),
                });
            }
            if h != default {
                map.insert(p, h);
            }
        }
        Ok(HeightFunction { default, exceptions: map })
    }

    pub fn integers() -> Self {
        HeightFunction { default: Height::Finite(0), exceptions: BTreeMap::new() }
    }

    pub fn rationals() -> Self {
        HeightFunction { default: Height::Infinite, exceptions: BTreeMap::new() }
    }

    /// `Z[1/p]`.
    pub fn localization(p: u64) -> Result<Self, GroupError> {
        HeightFunction::new(Height::Finite(0), [(p, Height::Infinite)])
    }

    pub fn default_height(&self) -> Height {
        self.default
    }

    pub fn exceptions(&self) -> impl Iterator<Item = (u64, Height)> + '_ {
        self.exceptions.iter().map(|(p, h)| (*p, *h))
    }

    pub fn height(&self, p: u64) -> Height {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    pub fn contains(&self, q: &Rational64) -> bool {
        factorize(q.denom().unsigned_abs())
            .into_iter()
            .all(|(p, e)| self.height(p).admits(e))
    }

    /// Every prime has infinite height.
    pub fn is_all_rationals(&self) -> bool {
        self.default.is_infinite() && self.exceptions.values().all(|h| h.is_infinite())
    }

    /// Finitely many nonzero heights, all finite: the subgroup is cyclic.
    pub fn is_cyclic(&self) -> bool {
        self.default == Height::Finite(0) && self.exceptions.values().all(|h| !h.is_infinite())
    }

    /// Generator `1 / prod p^h(p)` when the subgroup is cyclic.
    pub fn cyclic_generator(&self) -> Option<Rational64> {
        if !self.is_cyclic() {
            return None;
        }
        let den = self.exceptions.iter().fold(1i64, |acc, (p, h)| match h {
            Height::Finite(e) => acc * (*p as i64).pow(*e),
            Height::Infinite => unreachable!(),
        });
        Some(Rational64::new(1, den))
    }

    /// Smallest prime whose height is finite, if any.
    pub fn first_finite_prime(&self) -> Option<u64> {
        if self.is_all_rationals() {
            return None;
        }
        (2..).filter(|&p| is_prime(p)).find(|&p| !self.height(p).is_infinite())
    }

    /// Parse `default=1,2=inf,3=0`. A missing `default` means 0.
    pub fn parse_spec(spec: &str) -> Result<Self, GroupError> {
        let mut default = Height::Finite(0);
        let mut exceptions = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| GroupError::Parse {
                key: part.to_string(),
                reason: "expected key=value".into(),
            })?;
            let height = Height::parse(value).ok_or_else(|| GroupError::Parse {
                key: key.trim().to_string(),
                reason: format!("bad height {value:?}"),
            })?;
            match key.trim() {
                "default" => default = height,
                p => {
                    let p: u64 = p.parse().map_err(|_| GroupError::Parse {
                        key: p.to_string(),
                        reason: "expected `default` or a prime".into(),
                    })?;
                    exceptions.push((p, height));
                }
            }
        }
        HeightFunction::new(default, exceptions)
    }
}

impl fmt::Display for HeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "default={}", self.default)?;
        for (p, h) in &self.exceptions {
            write!(f, ",{p}={h}")?;
        }
        Ok(())
    }
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyTable {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl CayleyTable {
    /// Validates closure, the Latin-square property, a two-sided identity,
    /// inverses and associativity.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        let bad = |reason: String| GroupError::InvalidTable(reason);
        if n == 0 {
            return Err(bad("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(bad(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(v) = row.iter().find(|&&v| v >= n) {
                return Err(bad(format!("row {i} contains out-of-range entry {v}")));
            }
            let mut seen = vec![false; n];
            for &v in row {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(bad(format!("row {i} repeats {v}")));
                }
            }
        }
        for j in 0..n {
            let mut seen = vec![false; n];
            for row in &table {
                if std::mem::replace(&mut seen[row[j]], true) {
                    return Err(bad(format!("column {j} repeats {}", row[j])));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| bad("no two-sided identity".into()))?;
        let mut inverses = vec![0; n];
        for (g, inv) in inverses.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| bad(format!("element {g} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(bad(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(CayleyTable { table, identity, inverses })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        CayleyTable::new(table).expect("cyclic table is a group")
    }

    /// Permutations of {0,1,2}, composed right to left.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        CayleyTable::new(table).expect("S3 table is a group")
    }

    /// Quaternion group, elements ordered 1, -1, i, -i, j, -j, k, -k.
    pub fn quaternion() -> Self {
        // unit index 0..4 = 1,i,j,k; product table of units with signs
        const UNIT: [[(usize, bool); 4]; 4] = [
            [(0, false), (1, false), (2, false), (3, false)],
            [(1, false), (0, true), (3, false), (2, true)],
            [(2, false), (3, true), (0, true), (1, false)],
            [(3, false), (2, false), (1, true), (0, true)],
        ];
        let table = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (u, neg) = UNIT[a / 2][b / 2];
                        let neg = neg ^ (a % 2 == 1) ^ (b % 2 == 1);
                        2 * u + usize::from(neg)
                    })
                    .collect()
            })
            .collect();
        CayleyTable::new(table).expect("Q8 table is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    fn element_order(&self, a: usize) -> u64 {
        let mut acc = a;
        let mut k = 1;
        while acc != self.identity {
            acc = self.mul(acc, a);
            k += 1;
        }
        k
    }
}

/// A group model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    Finite(CayleyTable),
    Integers,
    Rational(HeightFunction),
    Heisenberg,
}

/// Names accepted by [`Group::preset`].
pub const PRESETS: &[&str] = &[
    "z6", "z8", "s3", "q8", "integers", "rationals", "z-inv-2", "z-inv-3", "z-inv-6", "height-one",
    "heisenberg",
];

impl Group {
    pub fn cyclic(n: usize) -> Self {
        Group::Finite(CayleyTable::cyclic(n))
    }

    pub fn rational(h: HeightFunction) -> Self {
        Group::Rational(h)
    }

    /// Named presets: `z6 z8 s3 q8 integers rationals height-one heisenberg`,
    /// `zN` / `cyclic:N` for any cyclic group, and `z-inv-N` for `Z[1/N]`.
    pub fn preset(name: &str) -> Option<Self> {
        let group = match name {
            "s3" => Group::Finite(CayleyTable::symmetric3()),
            "q8" => Group::Finite(CayleyTable::quaternion()),
            "integers" | "z" => Group::Integers,
            "rationals" | "q" => Group::Rational(HeightFunction::rationals()),
            "height-one" => Group::Rational(HeightFunction::new(Height::Finite(1), []).ok()?),
            "heisenberg" => Group::Heisenberg,
            other => {
                if let Some(n) = other.strip_prefix("z-inv-") {
                    let n: u64 = n.parse().ok().filter(|&n| n >= 2)?;
                    let h = factorize(n).into_iter().map(|(p, _)| (p, Height::Infinite));
                    return Some(Group::Rational(HeightFunction::new(Height::Finite(0), h).ok()?));
                }
                let n = other
                    .strip_prefix("cyclic:")
                    .or_else(|| other.strip_prefix('z'))?
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 1)?;
                Group::cyclic(n)
            }
        };
        Some(group)
    }

    /// Parse a JSON group description (schema in the README).
    pub fn from_json(text: &str) -> Result<Self, GroupError> {
        let value: Value = serde_json::from_str(text).map_err(|e| GroupError::Parse {
            key: "<document>".into(),
            reason: e.to_string(),
        })?;
        Group::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self, GroupError> {
        let parse_err = |key: &str, reason: &str| GroupError::Parse { key: key.into(), reason: reason.into() };
        let obj = value.as_object().ok_or_else(|| parse_err("<document>", "expected an object"))?;
        let family = obj
            .get("family")
            .ok_or_else(|| parse_err("family", "missing"))?
            .as_str()
            .ok_or_else(|| parse_err("family", "expected a string"))?;
        match family {
            "integers" => Ok(Group::Integers),
            "heisenberg" => Ok(Group::Heisenberg),
            "finite_cayley" => {
                let rows = obj
                    .get("table")
                    .ok_or_else(|| parse_err("table", "missing"))?
                    .as_array()
                    .ok_or_else(|| parse_err("table", "expected an array of rows"))?;
                let mut table = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let key = format!("table[{i}]");
                    let row = row.as_array().ok_or_else(|| parse_err(&key, "expected an array"))?;
                    let row = row
                        .iter()
                        .map(|v| v.as_u64().map(|v| v as usize))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| parse_err(&key, "expected non-negative integers"))?;
                    table.push(row);
                }
                Ok(Group::Finite(CayleyTable::new(table)?))
            }
            "rational_subgroup" => {
                let default = match obj.get("default_height") {
                    None => Height::Finite(0),
                    Some(v) => Height::from_json(v)
                        .ok_or_else(|| parse_err("default_height", "expected a natural number or \"inf\""))?,
                };
                let mut exceptions = Vec::new();
                if let Some(ex) = obj.get("exceptions") {
                    let ex = ex.as_object().ok_or_else(|| parse_err("exceptions", "expected an object"))?;
                    for (k, v) in ex {
                        let key = format!("exceptions.{k}");
                        let p: u64 = k.parse().map_err(|_| parse_err(&key, "key must be a prime"))?;
                        let h = Height::from_json(v)
                            .ok_or_else(|| parse_err(&key, "expected a natural number or \"inf\""))?;
                        exceptions.push((p, h));
                    }
                }
                Ok(Group::Rational(HeightFunction::new(default, exceptions)?))
            }
            other => Err(parse_err("family", &format!("unknown family {other:?}"))),
        }
    }

    pub fn to_json_value(&self) -> Value {
        match self {
            Group::Finite(t) => serde_json::json!({"family": "finite_cayley", "table": t.rows()}),
            Group::Integers => serde_json::json!({"family": "integers"}),
            Group::Heisenberg => serde_json::json!({"family": "heisenberg"}),
            Group::Rational(h) => {
                let ex: serde_json::Map<String, Value> =
                    h.exceptions().map(|(p, v)| (p.to_string(), height_json(v))).collect();
                serde_json::json!({
                    "family": "rational_subgroup",
                    "default_height": height_json(h.default_height()),
                    "exceptions": ex,
                })
            }
        }
    }

    /// Parse an element written as `Display` prints it: `3`, `-1/2`,
    /// `(1,0,2)` (parentheses optional).
    pub fn parse_element(&self, text: &str) -> Result<Element, GroupError> {
        let t = text.trim();
        let bad = |reason: &str| GroupError::Parse { key: t.to_string(), reason: reason.to_string() };
        let g = match self {
            Group::Finite(_) => Element::Index(t.parse().map_err(|_| bad("expected an element index"))?),
            Group::Integers => Element::Int(t.parse().map_err(|_| bad("expected an integer"))?),
            Group::Rational(_) => {
                let (num, den) = t.split_once('/').unwrap_or((t, "1"));
                let num: i64 = num.trim().parse().map_err(|_| bad("expected p or p/q"))?;
                let den: i64 = den.trim().parse().map_err(|_| bad("expected p or p/q"))?;
                if den == 0 {
                    return Err(bad("zero denominator"));
                }
                Element::rational(num, den)
            }
            Group::Heisenberg => {
                let inner = t.trim_start_matches('(').trim_end_matches(')');
                let parts: Vec<i64> = inner
                    .split(',')
                    .map(|c| c.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("expected (a,b,c)"))?;
                match parts[..] {
                    [a, b, c] => Element::Triple(a, b, c),
                    _ => return Err(bad("expected three coordinates")),
                }
            }
        };
        self.check(&g)?;
        Ok(g)
    }

    /// Short description for reports: family plus parameters.
    pub fn label(&self) -> String {
        match self {
            Group::Finite(t) => format!("finite_cayley(order={})", t.order()),
            Group::Rational(h) => format!("rational_subgroup({h})"),
            other => other.family_name().to_string(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Group::Finite(_) => "finite_cayley",
            Group::Integers => "integers",
            Group::Rational(_) => "rational_subgroup",
            Group::Heisenberg => "heisenberg",
        }
    }

    pub fn is_torsion_free(&self) -> bool {
        match self {
            Group::Finite(t) => t.order() == 1,
            _ => true,
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            Group::Finite(t) => Element::Index(t.identity()),
            Group::Integers => Element::Int(0),
            Group::Rational(_) => Element::Rat(Rational64::from_integer(0)),
            Group::Heisenberg => Element::Triple(0, 0, 0),
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match (self, g) {
            (Group::Finite(t), Element::Index(i)) => *i < t.order(),
            (Group::Integers, Element::Int(_)) => true,
            (Group::Rational(h), Element::Rat(q)) => h.contains(q),
            (Group::Heisenberg, Element::Triple(..)) => true,
            _ => false,
        }
    }

    pub fn check(&self, g: &Element) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(GroupError::ElementNotInGroup { element: g.to_string(), family: self.family_name() })
        }
    }

    pub fn mul(&self, g: &Element, h: &Element) -> Result<Element, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.op(g, h))
    }

    /// Product without membership checks; both arguments must be valid.
    pub(crate) fn op(&self, g: &Element, h: &Element) -> Element {
        match (self, g, h) {
            (Group::Finite(t), Element::Index(a), Element::Index(b)) => Element::Index(t.mul(*a, *b)),
            (Group::Integers, Element::Int(a), Element::Int(b)) => Element::Int(a + b),
            (Group::Rational(_), Element::Rat(a), Element::Rat(b)) => Element::Rat(a + b),
            (Group::Heisenberg, Element::Triple(a, b, c), Element::Triple(a2, b2, c2)) => {
                Element::Triple(a + a2, b + b2, c + c2 + a * b2)
            }
            _ => panic!("element family does not match group {}", self.family_name()),
        }
    }

    pub fn inverse(&self, g: &Element) -> Element {
        match (self, g) {
            (Group::Finite(t), Element::Index(a)) => Element::Index(t.inverse(*a)),
            (Group::Integers, Element::Int(a)) => Element::Int(-a),
            (Group::Rational(_), Element::Rat(a)) => Element::Rat(-a),
            (Group::Heisenberg, Element::Triple(a, b, c)) => Element::Triple(-a, -b, a * b - c),
            _ => panic!("element family does not match group {}", self.family_name()),
        }
    }

    /// `g^n` for any integer `n`. Heisenberg powers use the closed form
    /// `(na, nb, nc + n(n-1)/2 ab)`.
    pub fn power(&self, g: &Element, n: i64) -> Element {
        match (self, g) {
            (Group::Finite(t), Element::Index(a)) => {
                let ord = t.element_order(*a) as i64;
                let k = n.rem_euclid(ord);
                let mut acc = t.identity();
                for _ in 0..k {
                    acc = t.mul(acc, *a);
                }
                Element::Index(acc)
            }
            (Group::Integers, Element::Int(a)) => Element::Int(a * n),
            (Group::Rational(_), Element::Rat(a)) => Element::Rat(a * n),
            (Group::Heisenberg, Element::Triple(a, b, c)) => {
                Element::Triple(n * a, n * b, n * c + pair_count(n) * a * b)
            }
            _ => panic!("element family does not match group {}", self.family_name()),
        }
    }

    pub fn element_order(&self, g: &Element) -> Order {
        match (self, g) {
            (Group::Finite(t), Element::Index(a)) => Order::Finite(t.element_order(*a)),
            _ if *g == self.identity() => Order::Finite(1),
            _ => Order::Infinite,
        }
    }

    /// The exponent set `{n : x^n = y}`.
    pub fn solve_power_of(&self, y: &Element, x: &Element) -> ExponentSet {
        let e = self.identity();
        if let (Group::Finite(t), Element::Index(a), Element::Index(b)) = (self, x, y) {
            let ord = t.element_order(*a);
            let mut acc = t.identity();
            for k in 0..ord {
                if acc == *b {
                    return ExponentSet::Residue { residue: k, modulus: ord };
                }
                acc = t.mul(acc, *a);
            }
            return ExponentSet::Empty;
        }
        if *x == e {
            return if *y == e { ExponentSet::Residue { residue: 0, modulus: 1 } } else { ExponentSet::Empty };
        }
        let candidate = match (x, y) {
            (Element::Int(a), Element::Int(b)) => (b % a == 0).then(|| b / a),
            (Element::Rat(a), Element::Rat(b)) => {
                let r = b / a;
                r.is_integer().then(|| r.to_integer())
            }
            (Element::Triple(a, b, c), Element::Triple(ya, yb, yc)) => {
                // the first nonzero coordinate among (a, b, c) fixes n
                let (num, den) = if *a != 0 {
                    (*ya, *a)
                } else if *b != 0 {
                    (*yb, *b)
                } else {
                    (*yc, *c)
                };
                (num % den == 0).then(|| num / den)
            }
            _ => panic!("element family does not match group {}", self.family_name()),
        };
        match candidate {
            Some(n) if self.power(x, n) == *y => ExponentSet::Single(n),
            _ => ExponentSet::Empty,
        }
    }

    pub fn is_power_of(&self, y: &Element, x: &Element) -> bool {
        !self.solve_power_of(y, x).is_empty()
    }

    fn commutator(&self, g: &Element, h: &Element) -> Element {
        let gi = self.inverse(g);
        let hi = self.inverse(h);
        self.op(&self.op(&gi, &hi), &self.op(g, h))
    }

    /// Every commutator is central. Exhaustive for finite groups; for the
    /// Heisenberg group the check runs over the coordinate box `[-2, 2]^3`.
    pub fn nilpotency_class_at_most_2(&self) -> bool {
        let elements: Vec<Element> = match self {
            Group::Integers | Group::Rational(_) => return true,
            Group::Finite(t) => (0..t.order()).map(Element::Index).collect(),
            Group::Heisenberg => {
                static CHECKED: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
                return *CHECKED.get_or_init(|| self.commutators_central(&heisenberg_box(2).collect::<Vec<_>>()));
            }
        };
        self.commutators_central(&elements)
    }

    pub(crate) fn commutators_central(&self, elements: &[Element]) -> bool {
        elements.iter().all(|g| {
            elements.iter().all(|h| {
                let c = self.commutator(g, h);
                elements.iter().all(|k| self.op(&c, k) == self.op(k, &c))
            })
        })
    }

    /// Candidate roots in a deterministic, small-first order.
    pub fn root_candidates(&self, bound: u64) -> Vec<Element> {
        match self {
            Group::Finite(t) => (0..t.order()).map(Element::Index).collect(),
            Group::Integers => (1..=bound as i64).flat_map(|k| [Element::Int(k), Element::Int(-k)]).collect(),
            Group::Rational(h) => {
                let b = bound as i64;
                let mut out: Vec<Rational64> = (1..=b)
                    .flat_map(|den| (-b..=b).map(move |num| (num, den)))
                    .filter(|&(num, den)| num != 0 && num.gcd(&den) == 1)
                    .map(|(num, den)| Rational64::new(num, den))
                    .filter(|q| h.contains(q))
                    .collect();
                out.sort_by_key(|q| (q.numer().abs() + q.denom(), *q.denom(), zigzag(*q.numer())));
                out.into_iter().map(Element::Rat).collect()
            }
            Group::Heisenberg => {
                let mut out: Vec<Element> =
                    heisenberg_box(bound as i64).filter(|g| *g != Element::Triple(0, 0, 0)).collect();
                out.sort_by_key(|g| match g {
                    Element::Triple(a, b, c) => (a.abs() + b.abs() + c.abs(), zigzag(*a), zigzag(*b), zigzag(*c)),
                    _ => unreachable!(),
                });
                out
            }
        }
    }

    /// Some `z` with `x, y ∈ ⟨z⟩` among [`Group::root_candidates`]`(bound)`.
    /// `None` only means no witness within the bound.
    pub fn local_cyclicity_witness(&self, x: &Element, y: &Element, bound: u64) -> Option<Element> {
        self.root_candidates(bound)
            .into_iter()
            .find(|z| self.is_power_of(x, z) && self.is_power_of(y, z))
    }
}

fn height_json(h: Height) -> Value {
    match h {
        Height::Finite(v) => Value::from(v),
        Height::Infinite => Value::from("inf"),
    }
}

/// All triples with coordinates in `[-bound, bound]`.
pub fn heisenberg_box(bound: i64) -> impl Iterator<Item = Element> {
    (-bound..=bound).flat_map(move |a| {
        (-bound..=bound).flat_map(move |b| (-bound..=bound).map(move |c| Element::Triple(a, b, c)))
    })
}

/// Result of testing whether a height function describes all of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RationalClass {
    IsQ,
    ProperSubgroup { witness_prime: u64 },
}

/// `IsQ` iff every prime has infinite height; otherwise the smallest prime
/// of finite height.
pub fn classify_rational_subgroup(h: &HeightFunction) -> RationalClass {
    match h.first_finite_prime() {
        None => RationalClass::IsQ,
        Some(p) => RationalClass::ProperSubgroup { witness_prime: p },
    }
}

/// p-adic valuation of a nonzero rational.
pub fn rational_valuation(q: &Rational64, p: u64) -> i64 {
    debug_assert!(*q.numer() != 0);
    valuation(q.numer().unsigned_abs(), p) as i64 - valuation(q.denom().unsigned_abs(), p) as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: i64, b: i64, c: i64) -> Element {
        Element::Triple(a, b, c)
    }

    #[test]
    fn multiplication_examples() {
        let h = Group::Heisenberg;
        assert_eq!(h.mul(&t(1, 0, 0), &t(0, 1, 0)).unwrap(), t(1, 1, 1));
        assert_eq!(Group::Integers.mul(&Element::Int(3), &Element::Int(-3)).unwrap(), Element::Int(0));
        // Z6 via the modular-addition oracle
        let z6 = Group::cyclic(6);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(z6.mul(&Element::Index(a), &Element::Index(b)).unwrap(), Element::Index((a + b) % 6));
            }
        }
        assert_eq!(z6.mul(&Element::Index(4), &Element::Index(5)).unwrap(), Element::Index(3));
    }

    #[test]
    fn rational_membership_is_enforced() {
        let z = Group::Rational(HeightFunction::integers());
        let half = Element::rational(1, 2);
        assert!(matches!(z.mul(&half, &half), Err(GroupError::ElementNotInGroup { .. })));
        let zhalf = Group::preset("z-inv-2").unwrap();
        assert_eq!(zhalf.mul(&half, &half).unwrap(), Element::rational(1, 1));
        assert!(!zhalf.contains(&Element::rational(1, 6)));
        assert!(!z.contains(&Element::Int(1)));
    }

    #[test]
    fn power_examples() {
        let h = Group::Heisenberg;
        assert_eq!(h.power(&t(1, 1, 0), 2), t(2, 2, 1));
        for g in [Group::Integers, Group::Heisenberg, Group::cyclic(5), Group::Rational(HeightFunction::rationals())] {
            let x = match g {
                Group::Integers => Element::Int(7),
                Group::Heisenberg => t(1, -2, 3),
                Group::Finite(_) => Element::Index(3),
                Group::Rational(_) => Element::rational(2, 3),
            };
            assert_eq!(g.power(&x, 0), g.identity());
        }
        assert_eq!(Group::Integers.power(&Element::Int(3), -2), Element::Int(-6));
        assert_eq!(h.power(&t(1, 1, 0), -1), h.inverse(&t(1, 1, 0)));
    }

    #[test]
    fn orders() {
        let z6 = Group::cyclic(6);
        assert_eq!(z6.element_order(&Element::Index(0)), Order::Finite(1));
        assert_eq!(z6.element_order(&Element::Index(2)), Order::Finite(3));
        assert_eq!(Group::Integers.element_order(&Element::Int(5)), Order::Infinite);
        assert_eq!(Group::Integers.element_order(&Element::Int(0)), Order::Finite(1));
        assert_eq!(Group::Heisenberg.element_order(&t(0, 0, 0)), Order::Finite(1));
        let q8 = Group::Finite(CayleyTable::quaternion());
        let orders: Vec<_> = (0..8).map(|i| q8.element_order(&Element::Index(i))).collect();
        assert_eq!(
            orders,
            [1, 2, 4, 4, 4, 4, 4, 4].map(Order::Finite).to_vec()
        );
    }

    /// Exhaustive exponent scan, independent of `solve_power_of`.
    fn scan(g: &Group, y: &Element, x: &Element, range: i64) -> Vec<i64> {
        let mut acc = g.identity();
        let mut out = Vec::new();
        let xi = g.inverse(x);
        for n in 0..=range {
            if acc == *y {
                out.push(n);
            }
            acc = g.op(&acc, x);
        }
        let mut acc = xi;
        for n in 1..=range {
            if acc == *y {
                out.push(-n);
            }
            acc = g.op(&acc, &xi);
        }
        out.sort();
        out
    }

    #[test]
    fn solve_examples() {
        assert_eq!(Group::Integers.solve_power_of(&Element::Int(6), &Element::Int(2)), ExponentSet::Single(3));
        let h = Group::Heisenberg;
        assert_eq!(scan(&h, &t(2, 2, 1), &t(1, 1, 0), 20), vec![2]);
        assert_eq!(h.solve_power_of(&t(2, 2, 1), &t(1, 1, 0)), ExponentSet::Single(2));
        assert_eq!(scan(&h, &t(0, 0, 1), &t(1, 1, 0), 20), Vec::<i64>::new());
        assert_eq!(h.solve_power_of(&t(0, 0, 1), &t(1, 1, 0)), ExponentSet::Empty);
        let z6 = Group::cyclic(6);
        assert_eq!(
            z6.solve_power_of(&Element::Index(4), &Element::Index(2)),
            ExponentSet::Residue { residue: 2, modulus: 3 }
        );
        assert_eq!(
            Group::Integers.solve_power_of(&Element::Int(0), &Element::Int(0)),
            ExponentSet::Residue { residue: 0, modulus: 1 }
        );
    }

    #[test]
    fn solve_matches_scan_on_windows() {
        let h = Group::Heisenberg;
        let elems: Vec<Element> = heisenberg_box(2).collect();
        for x in &elems {
            for y in &elems {
                let scanned = scan(&h, y, x, 12);
                let solved = h.solve_power_of(y, x);
                for n in -12..=12 {
                    assert_eq!(scanned.contains(&n), solved.contains(n), "x={x} y={y} n={n}");
                }
            }
        }
        let q = Group::Rational(HeightFunction::rationals());
        let qs: Vec<Element> = [(0, 1), (1, 2), (-3, 2), (2, 1), (3, 4), (-1, 3), (3, 1)]
            .iter()
            .map(|&(a, b)| Element::rational(a, b))
            .collect();
        for x in &qs {
            for y in &qs {
                let scanned = scan(&q, y, x, 12);
                let solved = q.solve_power_of(y, x);
                for n in -12..=12 {
                    assert_eq!(scanned.contains(&n), solved.contains(n));
                }
            }
        }
        for g in [Group::Finite(CayleyTable::symmetric3()), Group::Finite(CayleyTable::quaternion())] {
            let Group::Finite(tab) = &g else { unreachable!() };
            for a in 0..tab.order() {
                for b in 0..tab.order() {
                    let (x, y) = (Element::Index(a), Element::Index(b));
                    let scanned = scan(&g, &y, &x, 12);
                    let solved = g.solve_power_of(&y, &x);
                    for n in -12..=12 {
                        assert_eq!(scanned.contains(&n), solved.contains(n));
                    }
                }
            }
        }
    }

    #[test]
    fn heisenberg_closed_form_matches_iteration() {
        let h = Group::Heisenberg;
        for x in heisenberg_box(4) {
            let mut acc = h.identity();
            for n in 0..=8 {
                assert_eq!(h.power(&x, n), acc);
                acc = h.op(&acc, &x);
            }
            let xi = h.inverse(&x);
            let mut acc = xi;
            for n in 1..=8 {
                assert_eq!(h.power(&x, -n), acc);
                acc = h.op(&acc, &xi);
            }
        }
    }

    #[test]
    fn nilpotency() {
        assert!(Group::Integers.nilpotency_class_at_most_2());
        assert!(Group::Heisenberg.nilpotency_class_at_most_2());
        let window: Vec<Element> = heisenberg_box(3).collect();
        assert!(Group::Heisenberg.commutators_central(&window));
        assert!(!Group::Finite(CayleyTable::symmetric3()).nilpotency_class_at_most_2());
        assert!(Group::Finite(CayleyTable::quaternion()).nilpotency_class_at_most_2());
    }

    #[test]
    fn witnesses() {
        let h = Group::Heisenberg;
        assert_eq!(h.local_cyclicity_witness(&t(2, 0, 0), &t(3, 0, 0), 5), Some(t(1, 0, 0)));
        assert_eq!(h.local_cyclicity_witness(&t(1, 0, 0), &t(0, 1, 0), 10), None);
        let w = Group::Integers.local_cyclicity_witness(&Element::Int(4), &Element::Int(6), 5).unwrap();
        assert!(matches!(w, Element::Int(1 | -1 | 2 | -2)));
        let q = Group::Rational(HeightFunction::rationals());
        let w = q.local_cyclicity_witness(&Element::rational(1, 2), &Element::rational(1, 3), 6).unwrap();
        assert!(q.is_power_of(&Element::rational(1, 2), &w) && q.is_power_of(&Element::rational(1, 3), &w));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_rational_subgroup(&HeightFunction::rationals()), RationalClass::IsQ);
        assert_eq!(
            classify_rational_subgroup(&HeightFunction::integers()),
            RationalClass::ProperSubgroup { witness_prime: 2 }
        );
        let one = HeightFunction::new(Height::Finite(1), []).unwrap();
        assert_eq!(classify_rational_subgroup(&one), RationalClass::ProperSubgroup { witness_prime: 2 });
        let odd = HeightFunction::parse_spec("default=inf,2=0").unwrap();
        assert_eq!(classify_rational_subgroup(&odd), RationalClass::ProperSubgroup { witness_prime: 2 });
        let no3 = HeightFunction::parse_spec("default=inf,3=4").unwrap();
        assert_eq!(classify_rational_subgroup(&no3), RationalClass::ProperSubgroup { witness_prime: 3 });
    }

    #[test]
    fn height_spec_and_json() {
        let h = HeightFunction::parse_spec("default=1, 2=inf, 5=0").unwrap();
        assert_eq!(h.height(2), Height::Infinite);
        assert_eq!(h.height(5), Height::Finite(0));
        assert_eq!(h.height(7), Height::Finite(1));
        assert_eq!(h.to_string(), "default=1,2=inf,5=0");
        assert!(HeightFunction::parse_spec("4=1").is_err());
        let g = Group::from_json(r#"{"family":"rational_subgroup","default_height":1,"exceptions":{"2":"inf"}}"#)
            .unwrap();
        assert_eq!(g, Group::Rational(h.clone()).clone_with_exception_dropped(5));
        let back = Group::from_json(&g.to_json_value().to_string()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn json_errors_name_the_key() {
        let err = Group::from_json(r#"{"family":"rational_subgroup","default_height":"lots"}"#).unwrap_err();
        assert!(err.to_string().contains("default_height"), "{err}");
        let err = Group::from_json(r#"{"family":"finite_cayley","table":[[0,1],[1]]}"#).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        let err = Group::from_json(r#"{"family":"finite_cayley","table":[[0,"x"]]}"#).unwrap_err();
        assert!(err.to_string().contains("table[0]"), "{err}");
        let err = Group::from_json(r#"{"table":[]}"#).unwrap_err();
        assert!(err.to_string().contains("family"), "{err}");
        let err = Group::from_json(r#"{"family":"rational_subgroup","exceptions":{"4":1}}"#).unwrap_err();
        assert!(err.to_string().contains("exceptions.4"), "{err}");
        let g = Group::from_json(r#"{"family":"finite_cayley","table":[[0,1],[1,0]]}"#).unwrap();
        assert_eq!(g, Group::cyclic(2));
    }

    #[test]
    fn table_validation() {
        assert!(CayleyTable::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        // Latin square without associativity
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(CayleyTable::new(loop5).is_err());
    }

    impl Group {
        fn clone_with_exception_dropped(&self, p: u64) -> Group {
            match self {
                Group::Rational(h) => Group::Rational(
                    HeightFunction::new(h.default_height(), h.exceptions().filter(|(q, _)| *q != p)).unwrap(),
                ),
                g => g.clone(),
            }
        }
    }
}
