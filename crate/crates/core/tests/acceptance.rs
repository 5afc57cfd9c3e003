//! Acceptance criteria 1–12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Each criterion runs the suite check and,
//! where cheap, an independent oracle written here.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use ::powergraph::direction::{recover_orientation, Orientation};
use ::powergraph::groups::{classify_rational_subgroup, RationalClass};
use ::powergraph::powergraph::{GraphFormat, PowerGraphBundle, VariantTag};
use ::powergraph::suite::{criterion, determinism_cases, run_criterion, Profile, SuiteConfig, HEIGHT_CATALOG};
use ::powergraph::{Element, Group, HeightFunction, WindowSpec};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// In Z_n, `<x>` is the set of multiples of gcd(x, n).
fn cyclic_power_edges(n: usize) -> BTreeSet<(usize, usize)> {
    let within = |y: usize, x: usize| y % gcd(x, n).max(1) == 0 || gcd(x, n) == n && y == 0;
    let mut out = BTreeSet::new();
    for x in 0..n {
        for y in x + 1..n {
            if within(y, x) || within(x, y) {
                out.insert((x, y));
            }
        }
    }
    out
}

fn oracle_1() -> Result<(), String> {
    for n in 2..=32 {
        let edges = cyclic_power_edges(n);
        for v in VariantTag::ALL {
            let b = PowerGraphBundle::build(&Group::cyclic(n), &WindowSpec::Full, v).unwrap();
            let got: BTreeSet<(usize, usize)> = b
                .graph()
                .edges()
                .map(|(i, j)| {
                    let (Element::Index(a), Element::Index(c)) = (b.element(i), b.element(j)) else { unreachable!() };
                    (*a.min(c), *a.max(c))
                })
                .collect();
            if got != edges {
                return Err(format!("z{n} {v} differs from the gcd oracle"));
            }
        }
    }
    Ok(())
}

fn oracle_2() -> Result<(), String> {
    let b = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 20 }, VariantTag::Zpm).unwrap();
    let zero = b.index_of(&Element::Int(0)).unwrap();
    // every nonzero k is adjacent to 1
    match b.graph().isolated_vertices().as_slice() {
        [v] if *v == zero => Ok(()),
        other => Err(format!("isolated vertices {other:?}")),
    }
}

/// Twin classes of 𝒢(ℤ) on |n| <= N from divisibility over |n| <= 4N.
fn oracle_3() -> Result<(), String> {
    for n in [20i64, 50] {
        let far = 4 * n;
        let nbhd = |x: i64| -> BTreeSet<i64> {
            (-far..=far)
                .filter(|&z| z == x || x == 0 || z == 0 || x.abs() == 1 || z.abs() == 1 || z % x == 0 || x % z == 0)
                .collect()
        };
        let mut classes: Vec<BTreeSet<i64>> = Vec::new();
        for x in -n..=n {
            let nx = nbhd(x);
            match classes.iter_mut().find(|c| nbhd(*c.iter().next().unwrap()) == nx) {
                Some(c) => {
                    c.insert(x);
                }
                None => classes.push(BTreeSet::from([x])),
            }
        }
        for c in &classes {
            let v: Vec<i64> = c.iter().copied().collect();
            let ok = v == [-1, 0, 1] || (v.len() == 2 && v[0] == -v[1]);
            if !ok {
                return Err(format!("N={n}: class {v:?}"));
            }
        }
    }
    Ok(())
}

fn oracle_7() -> Result<(), String> {
    for n in [30i64, 60] {
        for x in -n..=n {
            for y in -n..=n {
                if x == 0 || y == 0 || x.abs() == y.abs() || (y % x != 0 && x % y != 0) {
                    continue;
                }
                let truth = if y % x == 0 { Orientation::XtoY } else { Orientation::YtoX };
                let got = recover_orientation(&Group::Integers, &Element::Int(x), &Element::Int(y)).map_err(|e| e.to_string())?;
                if got != truth {
                    return Err(format!("({x}, {y})"));
                }
            }
        }
    }
    Ok(())
}

fn oracle_10() -> Result<(), String> {
    // only the first catalog entry has every height infinite
    for (i, spec) in HEIGHT_CATALOG.iter().enumerate() {
        let h = HeightFunction::parse_spec(spec).unwrap();
        let expect_q = i == 0;
        if (classify_rational_subgroup(&h) == RationalClass::IsQ) != expect_q {
            return Err(format!("{spec} misclassified"));
        }
    }
    Ok(())
}

fn oracle_12() -> Result<(), String> {
    for (g, w, v, directed, format) in determinism_cases() {
        let a = PowerGraphBundle::build(&g, &w, v).unwrap().render(directed, format);
        let b = PowerGraphBundle::build(&g, &w, v).unwrap().render(directed, format);
        if a != b {
            return Err(format!("{} {w} differs", g.label()));
        }
    }
    let dot = PowerGraphBundle::build(&Group::Integers, &WindowSpec::Integers { max_abs: 10 }, VariantTag::Zpm)
        .unwrap()
        .render(false, GraphFormat::Dot);
    let vertices = dot.lines().filter(|l| l.trim_start().starts_with('"') && !l.contains("--")).count();
    if vertices != 21 {
        return Err(format!("expected 21 DOT vertices, found {vertices}"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cfg = SuiteConfig { profile: Profile::Desk, jobs: 1, seed: 0 };
    let oracles: [(usize, fn() -> Result<(), String>); 6] =
        [(1, oracle_1), (2, oracle_2), (3, oracle_3), (7, oracle_7), (10, oracle_10), (12, oracle_12)];
    let mut failed = 0;
    for id in 1..=12 {
        let c = criterion(id).expect("criteria 1-12 exist");
        let start = Instant::now();
        let outcome = run_criterion(c, &cfg);
        let oracle = oracles.iter().find(|(i, _)| *i == id).map(|(_, f)| f());
        let pass = outcome.pass && !matches!(oracle, Some(Err(_)));
        let mut line = format!(
            "criterion {id:>2} {:<20} {} ({:.2}s)",
            c.name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if let Some(Err(e)) = &oracle {
            line.push_str(&format!(" oracle: {e}"));
        }
        println!("{line}");
        if !pass {
            failed += 1;
            for r in outcome.reports.iter().filter(|r| !r.pass) {
                print!("    {}", r.to_json_line());
            }
        }
    }
    println!("acceptance: {} of 12 criteria pass", 12 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
