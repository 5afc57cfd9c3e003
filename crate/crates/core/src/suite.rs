//! The verification suite: twelve criteria, each producing JSON-lines
//! reports.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::checks;
use crate::direction::phi_closed_window;
use crate::error::CheckError;
use crate::groups::{Element, Group, HeightFunction};
use crate::powergraph::{equiv_class_profile, GraphFormat, PowerGraphBundle, VariantBundles, VariantTag};
use crate::report::Report;
use crate::window::{WindowSpec, DEFAULT_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Windows halved.
    Quick,
    Desk,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Profile::Quick),
            "desk" => Ok(Profile::Desk),
            other => Err(format!("unknown profile {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub profile: Profile,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { profile: Profile::Desk, jobs: 1, seed: 0 }
    }
}

impl SuiteConfig {
    fn n(&self, desk: u64) -> u64 {
        match self.profile {
            Profile::Desk => desk,
            Profile::Quick => (desk / 2).max(2),
        }
    }

    fn count(&self, desk: usize) -> usize {
        match self.profile {
            Profile::Desk => desk,
            Profile::Quick => (desk / 4).max(1),
        }
    }
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub run: fn(&SuiteConfig) -> Vec<Report>,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "torsion-coincidence", run: torsion_coincidence },
    Criterion { id: 2, name: "isolated-vertex", run: isolated_vertex },
    Criterion { id: 3, name: "integer-twins", run: integer_twins },
    Criterion { id: 4, name: "boxtimes", run: boxtimes },
    Criterion { id: 5, name: "doubling", run: doubling },
    Criterion { id: 6, name: "tau-lift", run: tau_lift },
    Criterion { id: 7, name: "orientation", run: orientation },
    Criterion { id: 8, name: "growth-oracle", run: growth_agreement },
    Criterion { id: 9, name: "phi-a", run: phi_a_checks },
    Criterion { id: 10, name: "is-q", run: q_detection },
    Criterion { id: 11, name: "directed-transfer", run: directed_transfer },
    Criterion { id: 12, name: "determinism", run: determinism },
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub reports: Vec<Report>,
}

impl CriterionOutcome {
    /// `c07-orientation`; sorts in criterion order.
    pub fn check_name(&self) -> String {
        format!("c{:02}-{}", self.id, self.name)
    }
}

pub fn criterion(id: usize) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

pub fn run_criterion(c: &Criterion, cfg: &SuiteConfig) -> CriterionOutcome {
    let mut reports = (c.run)(cfg);
    let name = format!("c{:02}-{}", c.id, c.name);
    for r in &mut reports {
        r.check = format!("{name}/{}", r.check);
    }
    let pass = !reports.is_empty() && reports.iter().all(|r| r.pass);
    CriterionOutcome { id: c.id, name: c.name, pass, reports }
}

/// Run the selected criteria on up to `cfg.jobs` threads. Outcomes are
/// sorted by check name regardless of completion order.
pub fn run_suite(cfg: &SuiteConfig, selection: &[usize]) -> Vec<CriterionOutcome> {
    let chosen: Vec<&Criterion> = CRITERIA.iter().filter(|c| selection.is_empty() || selection.contains(&c.id)).collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..cfg.jobs.clamp(1, chosen.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(c) = chosen.get(i) else { break };
                let outcome = run_criterion(c, cfg);
                done.lock().unwrap().push(outcome);
            });
        }
    });
    let mut out = done.into_inner().unwrap();
    out.sort_by_key(CriterionOutcome::check_name);
    out
}

fn bundle(g: &Group, w: &WindowSpec, v: VariantTag) -> PowerGraphBundle {
    PowerGraphBundle::build_with_cap(g, w, v, DEFAULT_CAP).expect("suite windows fit the default cap")
}

fn bundles(g: &Group, w: &WindowSpec) -> VariantBundles {
    PowerGraphBundle::build_all(g, w, DEFAULT_CAP).expect("suite windows fit the default cap")
}

fn report(check: &str, b: &PowerGraphBundle) -> Report {
    Report::new(check, b.group().label(), b.window().to_string(), b.variant().name())
}

fn must(r: Result<Report, CheckError>) -> Report {
    r.expect("suite inputs are valid for their checks")
}

fn height(spec: &str) -> HeightFunction {
    HeightFunction::parse_spec(spec).expect("catalog height functions parse")
}

/// Finite groups of the catalog.
pub fn finite_catalog() -> Vec<(String, Group)> {
    let mut out: Vec<(String, Group)> =
        ["z6", "z8", "s3", "q8"].iter().map(|n| (n.to_string(), Group::preset(n).unwrap())).collect();
    out.extend((2..=32).map(|n| (format!("z{n}"), Group::cyclic(n))));
    out
}

/// Torsion-free groups with their windows.
pub fn torsion_free_windows(cfg: &SuiteConfig) -> Vec<(Group, WindowSpec)> {
    let rat = |spec: &str, n: u64| (Group::Rational(height(spec)), WindowSpec::Rational { max_num: n, max_den: n });
    vec![
        (Group::Integers, WindowSpec::Integers { max_abs: cfg.n(20) }),
        rat("default=inf", cfg.n(3)),
        rat("2=inf", cfg.n(4)),
        rat("default=1", cfg.n(4)),
        (Group::Heisenberg, WindowSpec::Heisenberg { max_coord: cfg.n(2) }),
    ]
}

fn edge_set(b: &PowerGraphBundle) -> Vec<(usize, usize)> {
    b.graph().edges().collect()
}

fn torsion_coincidence(_cfg: &SuiteConfig) -> Vec<Report> {
    let mut mismatches = 0;
    let mut groups = Vec::new();
    for (name, g) in finite_catalog() {
        let all = bundles(&g, &WindowSpec::Full);
        let z = edge_set(&all.z);
        let m = [&all.nplus, &all.zpm].iter().filter(|b| edge_set(b) != z).count();
        mismatches += m;
        groups.push(json!({"group": name, "edges": z.len(), "mismatches": m}));
    }
    vec![Report::new("variants-coincide", "finite catalog", "full", "all")
        .flag("no_mismatches", mismatches == 0)
        .evidence(json!({ "groups": groups }))]
}

fn isolated_vertex(cfg: &SuiteConfig) -> Vec<Report> {
    let mut out: Vec<Report> =
        torsion_free_windows(cfg).iter().map(|(g, w)| must(checks::isolated(g, w, DEFAULT_CAP))).collect();
    let mut with_isolated = Vec::new();
    for (name, g) in finite_catalog() {
        let b = bundle(&g, &WindowSpec::Full, VariantTag::Zpm);
        if !b.graph().isolated_vertices().is_empty() {
            with_isolated.push(name);
        }
    }
    out.push(
        Report::new("none-isolated", "finite catalog", "full", "zpm")
            .flag("no_isolated", with_isolated.is_empty())
            .evidence(json!({ "groups_with_isolated": with_isolated })),
    );
    out
}

fn integer_twins(cfg: &SuiteConfig) -> Vec<Report> {
    [cfg.n(20), cfg.n(50)]
        .into_iter()
        .map(|n| {
            let w = WindowSpec::Integers { max_abs: n };
            let b = bundle(&Group::Integers, &w, VariantTag::Z);
            let p = equiv_class_profile(&b);
            let mut triple = Vec::new();
            let mut pairs_ok = true;
            for block in p.corrected.blocks() {
                let mut vals: Vec<i64> =
                    block.iter().map(|&v| if let Element::Int(k) = b.element(v) { *k } else { unreachable!() }).collect();
                vals.sort();
                match vals.len() {
                    3 => triple.push(vals),
                    2 => pairs_ok &= vals[0] == -vals[1],
                    _ => pairs_ok = false,
                }
            }
            must(checks::twins(&Group::Integers, &w, DEFAULT_CAP))
                .flag("one_triple_0_pm1", triple == vec![vec![-1, 0, 1]])
                .flag("pairs_pm_k", pairs_ok)
        })
        .collect()
}

fn boxtimes(cfg: &SuiteConfig) -> Vec<Report> {
    let q = Group::Rational(HeightFunction::rationals());
    let cases = [
        (Group::Integers, WindowSpec::Integers { max_abs: cfg.n(12) }),
        (q, WindowSpec::Rational { max_num: cfg.n(3), max_den: cfg.n(3) }),
        (Group::Heisenberg, WindowSpec::Heisenberg { max_coord: cfg.n(3) }),
    ];
    cases.iter().map(|(g, w)| must(checks::boxtimes(g, w, DEFAULT_CAP, None))).collect()
}

fn doubling(cfg: &SuiteConfig) -> Vec<Report> {
    torsion_free_windows(cfg).iter().map(|(g, w)| must(checks::doubling(g, w, DEFAULT_CAP))).collect()
}

fn tau_lift(cfg: &SuiteConfig) -> Vec<Report> {
    let q = Group::Rational(HeightFunction::rationals());
    let cases = [
        (Group::Integers, WindowSpec::Integers { max_abs: cfg.n(12) }),
        (q, WindowSpec::Rational { max_num: cfg.n(3), max_den: cfg.n(3) }),
        (Group::Heisenberg, WindowSpec::Heisenberg { max_coord: cfg.n(2) }),
        (Group::cyclic(6), WindowSpec::Full),
        (Group::preset("s3").unwrap(), WindowSpec::Full),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    cases.iter().map(|(g, w)| must(checks::tau_lift(g, w, DEFAULT_CAP, cfg.count(40), &mut rng))).collect()
}

fn orientation(cfg: &SuiteConfig) -> Vec<Report> {
    [cfg.n(30), cfg.n(60)]
        .into_iter()
        .map(|n| must(checks::orientation(&Group::Integers, &WindowSpec::Integers { max_abs: n }, DEFAULT_CAP)))
        .collect()
}

fn growth_agreement(cfg: &SuiteConfig) -> Vec<Report> {
    let cases = [
        (Group::Integers, WindowSpec::Integers { max_abs: cfg.n(30) }),
        (Group::Rational(height("2=inf")), WindowSpec::Rational { max_num: cfg.n(6), max_den: cfg.n(8) }),
        (Group::Rational(height("default=1")), WindowSpec::Rational { max_num: cfg.n(6), max_den: cfg.n(6) }),
    ];
    let mut out: Vec<Report> = cases.iter().map(|(g, w)| must(checks::growth(g, w, DEFAULT_CAP))).collect();
    let total: u64 = out.iter().map(|r| r.evidence["pairs"].as_u64().unwrap_or(0)).sum();
    out.push(
        Report::new("pair-count", "all", "all", "zpm").flag("at_least_500", total >= 500).evidence(json!({ "pairs": total })),
    );
    out
}

fn phi_a_checks(cfg: &SuiteConfig) -> Vec<Report> {
    [1, 2, 3].into_iter().map(|a| must(checks::phi_a(Rational64::from(a), cfg.n(3), DEFAULT_CAP))).collect()
}

/// Height functions for ℚ detection, as `parse_spec` strings.
pub const HEIGHT_CATALOG: &[&str] =
    &["default=inf", "default=0", "2=inf", "2=inf,3=inf", "default=1", "default=inf,2=0", "default=inf,3=1", "5=2"];

fn q_detection(_cfg: &SuiteConfig) -> Vec<Report> {
    let rows: Vec<Report> = HEIGHT_CATALOG.iter().map(|spec| checks::is_q(&height(spec))).collect();
    let positives = rows.iter().filter(|r| r.evidence["is_q"] == json!(true)).count();
    let agree = rows.iter().all(|r| r.pass);
    let rows: Vec<_> = rows.into_iter().map(|r| r.evidence).collect();
    vec![Report::new("neighbor-symmetry", "height catalog", "symbolic", "zpm")
        .flag("agrees_with_classification", agree)
        .flag("exactly_one_q", positives == 1)
        .evidence(json!({ "heights": HEIGHT_CATALOG, "rows": rows }))]
}

fn directed_transfer(cfg: &SuiteConfig) -> Vec<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let q = Group::Rational(HeightFunction::rationals());
    let one = Rational64::from(1);
    let cases = [
        (Group::Integers, WindowSpec::Integers { max_abs: cfg.n(12) }, None),
        (Group::Heisenberg, WindowSpec::Heisenberg { max_coord: cfg.n(2) }, None),
        (q, phi_closed_window(one, cfg.n(3)).expect("nonzero a"), Some(one)),
    ];
    cases
        .iter()
        .map(|(g, w, phi)| must(checks::transfer(g, w, DEFAULT_CAP, *phi, cfg.count(8), &mut rng)))
        .collect()
}

/// The builds compared for determinism.
pub fn determinism_cases() -> Vec<(Group, WindowSpec, VariantTag, bool, GraphFormat)> {
    vec![
        (Group::Integers, WindowSpec::Integers { max_abs: 10 }, VariantTag::Zpm, false, GraphFormat::Dot),
        (Group::cyclic(6), WindowSpec::Full, VariantTag::Z, false, GraphFormat::Json),
        (Group::Heisenberg, WindowSpec::Heisenberg { max_coord: 2 }, VariantTag::Zpm, false, GraphFormat::Dot),
        (Group::Rational(HeightFunction::rationals()), WindowSpec::Rational { max_num: 3, max_den: 3 }, VariantTag::Nplus, true, GraphFormat::Json),
    ]
}

fn determinism(_cfg: &SuiteConfig) -> Vec<Report> {
    determinism_cases()
        .into_iter()
        .map(|(g, w, v, directed, format)| {
            let first = bundle(&g, &w, v).render(directed, format);
            let second = bundle(&g, &w, v).render(directed, format);
            report("byte-identical", &bundle(&g, &w, v))
                .flag("identical", first == second)
                .evidence(json!({"bytes": first.len(), "directed": directed, "format": format!("{format:?}").to_lowercase()}))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::random_class_inversion;
    use crate::direction::check_directed_transfer;
    use crate::graphs::is_isomorphism;

    #[test]
    fn quick_profile_halves() {
        let cfg = SuiteConfig { profile: Profile::Quick, ..SuiteConfig::default() };
        assert_eq!(cfg.n(20), 10);
        assert_eq!(cfg.n(3), 2);
        assert_eq!(cfg.count(40), 10);
    }

    #[test]
    fn outcomes_sorted_by_name() {
        let cfg = SuiteConfig { profile: Profile::Quick, jobs: 3, seed: 1 };
        let out = run_suite(&cfg, &[12, 10, 1]);
        let names: Vec<String> = out.iter().map(CriterionOutcome::check_name).collect();
        assert_eq!(names, ["c01-torsion-coincidence", "c10-is-q", "c12-determinism"]);
        assert!(out.iter().all(|o| o.pass));
    }

    #[test]
    fn class_inversions_are_automorphisms() {
        let b = bundle(&Group::Heisenberg, &WindowSpec::Heisenberg { max_coord: 2 }, VariantTag::Zpm);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let m = random_class_inversion(&b, &mut rng);
            assert!(is_isomorphism(b.graph(), b.graph(), &m));
        }
    }

    #[test]
    fn window_twin_swaps_can_mix_directions() {
        // (1,0,0) and (2,0,0) are twins only inside the small window
        let b = bundle(&Group::Heisenberg, &WindowSpec::Heisenberg { max_coord: 2 }, VariantTag::Zpm);
        let (u, v) = (b.index_of(&Element::Triple(1, 0, 0)).unwrap(), b.index_of(&Element::Triple(2, 0, 0)).unwrap());
        let mut map: Vec<usize> = (0..b.order()).collect();
        map.swap(u, v);
        assert!(is_isomorphism(b.graph(), b.graph(), &map));
        let c = b.graph().connected_components().into_iter().find(|c| c.contains(&u)).unwrap();
        assert!(matches!(
            check_directed_transfer(&map, &b, &b, &c),
            Err(crate::error::DirectionError::MixedVerdict(_))
        ));
    }
}
