//! Named checks on a single group and window, each producing one report.

use num_rational::Rational64;
use rand::Rng;
use serde_json::json;

use crate::direction::{
    check_directed_transfer, check_phi_a, default_growth_base, growth_oracle, heisenberg_witness_bound,
    is_rationals_by_neighbor_symmetry, locally_cyclic_component_check, nontrivial_components, orientation_report,
    phi_closed_window, phi_map, s_set_is_finite, GrowthVerdict, TransferVerdict,
};
use crate::error::CheckError;
use crate::graphs::is_isomorphism;
use crate::groups::{classify_rational_subgroup, Element, Group, HeightFunction, RationalClass};
use crate::powergraph::{directed_adjacent, equiv_class_profile, PowerGraphBundle, VariantBundles, VariantTag};
use crate::report::Report;
use crate::transforms::{
    doubling_law, lift_pm_iso_to_power_iso, random_pm_automorphism, split_component, verify_boxtimes_decomposition,
};
use crate::window::WindowSpec;

pub const CHECK_NAMES: &[&str] = &[
    "boxtimes",
    "doubling",
    "growth",
    "is-q",
    "isolated",
    "local-cyclic",
    "orientation",
    "phi-a",
    "tau-lift",
    "transfer",
    "twins",
];

/// Everything a named check may need.
#[derive(Clone, Debug)]
pub struct CheckInput {
    pub group: Group,
    pub window: WindowSpec,
    pub cap: usize,
    pub seed: u64,
    /// Base element for `boxtimes` and `phi-a`; family default otherwise.
    pub element: Option<Element>,
    /// Window size parameter, for checks that build their own windows.
    pub n: u64,
    pub samples: usize,
}

pub fn run_check(name: &str, input: &CheckInput, rng: &mut impl Rng) -> Result<Report, CheckError> {
    let (g, w, cap) = (&input.group, &input.window, input.cap);
    match name {
        "boxtimes" => boxtimes(g, w, cap, input.element),
        "doubling" => doubling(g, w, cap),
        "growth" => growth(g, w, cap),
        "is-q" => match g {
            Group::Rational(h) => Ok(is_q(h)),
            _ => Err(CheckError::Config("is-q needs a rational subgroup (--heights)".into())),
        },
        "isolated" => isolated(g, w, cap),
        "local-cyclic" => local_cyclic(g, w, cap),
        "orientation" => orientation(g, w, cap),
        "phi-a" => {
            if !matches!(g, Group::Rational(h) if h.is_all_rationals()) {
                return Err(CheckError::Config("phi-a needs the rationals".into()));
            }
            let a = match input.element {
                Some(Element::Rat(a)) => a,
                _ => Rational64::from(1),
            };
            phi_a(a, input.n, cap)
        }
        "tau-lift" => tau_lift(g, w, cap, input.samples, rng),
        "transfer" => transfer(g, w, cap, None, input.samples, rng),
        "twins" => twins(g, w, cap),
        other => Err(CheckError::Unknown(other.to_string())),
    }
}

fn bundle(g: &Group, w: &WindowSpec, v: VariantTag, cap: usize) -> Result<PowerGraphBundle, CheckError> {
    Ok(PowerGraphBundle::build_with_cap(g, w, v, cap)?)
}

fn bundles(g: &Group, w: &WindowSpec, cap: usize) -> Result<VariantBundles, CheckError> {
    Ok(PowerGraphBundle::build_all(g, w, cap)?)
}

fn report(check: &str, b: &PowerGraphBundle) -> Report {
    Report::new(check, b.group().label(), b.window().to_string(), b.variant().name())
}

fn torsion_free(g: &Group, check: &str) -> Result<(), CheckError> {
    if g.is_torsion_free() {
        Ok(())
    } else {
        Err(CheckError::Config(format!("{check} needs a torsion-free group")))
    }
}

pub fn isolated(g: &Group, w: &WindowSpec, cap: usize) -> Result<Report, CheckError> {
    let b = bundle(g, w, VariantTag::Zpm, cap)?;
    let isolated = b.graph().isolated_vertices();
    let expected = if g.is_torsion_free() { vec![b.identity_index()] } else { Vec::new() };
    Ok(report("isolated", &b)
        .flag("expected_isolated", isolated == expected)
        .evidence(json!({"isolated": isolated.iter().map(|&v| b.element(v).to_string()).collect::<Vec<_>>()})))
}

pub fn twins(g: &Group, w: &WindowSpec, cap: usize) -> Result<Report, CheckError> {
    let b = bundle(g, w, VariantTag::Z, cap)?;
    let p = equiv_class_profile(&b);
    let label = |bl: &Vec<usize>| bl.iter().map(|&v| b.element(v).to_string()).collect::<Vec<_>>();
    let boundary: Vec<Vec<String>> = p.boundary_twins.iter().map(label).collect();
    let mut r = report("twins", &b).flag("symbolic_agrees", p.agrees);
    if matches!(g, Group::Integers) {
        r = r.flag("z_signature", p.z_signature);
    }
    Ok(r.evidence(json!({
        "blocks": p.corrected.len(),
        "z_signature": p.z_signature,
        "raw_window_sizes": p.sizes,
        "raw_window_exact": p.window_exact,
        "boundary_twins": boundary,
    })))
}

/// Wall-clock timer; wasm32-unknown-unknown has no clock, so it reads `None` there.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn secs(&self) -> Option<f64> {
        #[cfg(not(target_arch = "wasm32"))]
        return Some(self.0.elapsed().as_secs_f64());
        #[cfg(target_arch = "wasm32")]
        None
    }
}

fn default_base(g: &Group) -> Option<Element> {
    match g {
        Group::Integers => Some(Element::Int(1)),
        Group::Rational(_) => Some(Element::rational(1, 1)),
        Group::Heisenberg => Some(Element::Triple(1, 0, 0)),
        Group::Finite(_) => None,
    }
}

pub fn boxtimes(g: &Group, w: &WindowSpec, cap: usize, element: Option<Element>) -> Result<Report, CheckError> {
    torsion_free(g, "boxtimes")?;
    let b = bundle(g, w, VariantTag::Zpm, cap)?;
    let x = element.or_else(|| default_base(g)).expect("torsion-free families have a base element");
    let xi = b.index_of(&x).ok_or_else(|| CheckError::Config(format!("{x} is not in the window")))?;
    if xi == b.identity_index() {
        return Err(CheckError::Config("the base element must not be the identity".into()));
    }
    let watch = Stopwatch::start();
    let phi = b.graph().connected_components().into_iter().find(|c| c.contains(&xi)).unwrap();
    let r = split_component(&b, &phi).and_then(|s| verify_boxtimes_decomposition(&b, &s));
    let mut base = report("boxtimes", &b);
    if let Some(secs) = watch.secs() {
        base = base.flag("within_5s", secs < 5.0);
    }
    Ok(match r {
        Ok(r) => base
            .flag("halves_isomorphic", r.halves_isomorphic)
            .flag("product_isomorphic", r.product_isomorphic)
            .flag("quotient_isomorphic", r.quotient_isomorphic)
            .evidence(json!({"component_of": x.to_string(), "size": phi.len(), "window_twins_exact": r.window_twins_exact}))
            .witness(r.halves_map.unwrap_or_default()),
        Err(e) => base.flag("split", false).evidence(json!({"error": e.to_string()})),
    })
}

pub fn doubling(g: &Group, w: &WindowSpec, cap: usize) -> Result<Report, CheckError> {
    torsion_free(g, "doubling")?;
    let all = bundles(g, w, cap)?;
    let r = report("doubling", &all.zpm);
    Ok(match doubling_law(&all) {
        Ok(d) => r.flag("holds", d.holds).evidence(json!({ "rows": d.rows })),
        Err(e) => r.flag("holds", false).evidence(json!({"error": e.to_string()})),
    })
}

pub fn tau_lift(g: &Group, w: &WindowSpec, cap: usize, samples: usize, rng: &mut impl Rng) -> Result<Report, CheckError> {
    let all = bundles(g, w, cap)?;
    let mut ok = 0;
    let mut moved_identity = 0;
    for _ in 0..samples {
        let phi = random_pm_automorphism(&all.zpm, rng);
        moved_identity += usize::from(phi[all.zpm.identity_index()] != all.zpm.identity_index());
        if let Ok(lift) = lift_pm_iso_to_power_iso(&phi, &all.zpm, &all.zpm, &all.z, &all.z) {
            ok += usize::from(is_isomorphism(all.z.graph(), all.z.graph(), &lift));
        }
    }
    Ok(report("tau-lift", &all.z)
        .flag("all_lifted", ok == samples)
        .evidence(json!({"samples": samples, "verified": ok, "identity_moved": moved_identity})))
}

/// Orientation recovery on every admissible adjacent pair, plus growth of
/// `S(y, x)` over three doublings for each arc `x -> y`.
pub fn orientation(g: &Group, w: &WindowSpec, cap: usize) -> Result<Report, CheckError> {
    let b = bundle(g, w, VariantTag::Zpm, cap)?;
    let r = report("orientation", &b);
    let o = match orientation_report(&b) {
        Ok(o) => o,
        Err(e) => return Ok(r.flag("recovered", false).evidence(json!({"error": e.to_string()}))),
    };
    let window_n = match w {
        WindowSpec::Integers { max_abs } => Some(*max_abs),
        _ => None,
    };
    let mut arcs = 0;
    let mut not_growing = Vec::new();
    for (i, j) in b.graph().edges() {
        let (x, y) = (b.element(i), b.element(j));
        if *y == g.inverse(x) {
            continue;
        }
        let (x, y) = if directed_adjacent(g, x, y, VariantTag::Zpm) { (x, y) } else { (y, x) };
        arcs += 1;
        let base = window_n.unwrap_or_else(|| default_growth_base(y, x));
        match growth_oracle(g, y, x, base) {
            Ok(gr) if gr.sizes.windows(2).all(|w| w[0] < w[1]) => {}
            _ => not_growing.push([x.to_string(), y.to_string()]),
        }
    }
    Ok(r.flag("recovered", o.disagreements.is_empty())
        .flag("reverse_slices_grow", not_growing.is_empty())
        .evidence(json!({
            "pairs": o.pairs,
            "agreements": o.agreements,
            "disagreements": o.disagreements,
            "arcs": arcs,
            "not_growing": not_growing,
        })))
}

/// Symbolic S-set verdicts against the growth oracle on all admissible
/// pairs of the window.
pub fn growth(g: &Group, w: &WindowSpec, cap: usize) -> Result<Report, CheckError> {
    if matches!(g, Group::Finite(_)) {
        return Err(CheckError::Config("growth needs an infinite group".into()));
    }
    let carrier = w.carrier(g, cap)?;
    let e = g.identity();
    let mut pairs = 0;
    let mut finite = 0;
    let mut disagreements = Vec::new();
    for x in &carrier {
        for y in &carrier {
            if *x == e || *y == e || x == y || *x == g.inverse(y) {
                continue;
            }
            pairs += 1;
            let symbolic = s_set_is_finite(g, x, y).expect("admissible pair");
            finite += usize::from(symbolic);
            let growth = growth_oracle(g, x, y, default_growth_base(x, y)).expect("admissible pair");
            let expected = if symbolic { GrowthVerdict::Finite } else { GrowthVerdict::Infinite };
            if growth.verdict != expected {
                disagreements.push(json!({"x": x.to_string(), "y": y.to_string(), "sizes": growth.sizes}));
            }
        }
    }
    Ok(Report::new("growth", g.label(), w.to_string(), "zpm")
        .flag("agree", disagreements.is_empty())
        .evidence(json!({"pairs": pairs, "finite": finite, "disagreements": disagreements})))
}

/// `φ_a` on the `φ_a`-closed window built from the box of size `n`.
pub fn phi_a(a: Rational64, n: u64, cap: usize) -> Result<Report, CheckError> {
    let q = Group::Rational(HeightFunction::rationals());
    let w = phi_closed_window(a, n).map_err(|e| CheckError::Config(e.to_string()))?;
    let b = bundle(&q, &w, VariantTag::Zpm, cap)?;
    let r = report("phi-a", &b);
    Ok(match check_phi_a(a, &b) {
        Ok(p) => r
            .flag("involution", p.involution)
            .flag("preserves_adjacency", p.preserves_adjacency)
            .flag("reverses_arcs", p.reverses_arcs)
            .flag("maps_in_onto_out", p.maps_in_onto_out)
            .evidence(json!({"a": p.a, "vertices": p.vertices})),
        Err(e) => r.flag("checked", false).evidence(json!({"error": e.to_string()})),
    })
}

pub fn is_q(h: &HeightFunction) -> Report {
    let sym = is_rationals_by_neighbor_symmetry(h);
    let class = classify_rational_subgroup(h);
    Report::new("is-q", format!("rational_subgroup({h})"), "symbolic", "zpm")
        .flag("agrees_with_classification", sym.is_q == (class == RationalClass::IsQ))
        .evidence(json!({
            "is_q": sym.is_q,
            "witness_base": sym.witness_base,
            "witness_prime": sym.witness_prime,
            "classification": class,
        }))
}

/// Inverts a random subset of the classes `{x, x⁻¹}`; these are twins in
/// the whole group, so the map is an automorphism of any window.
pub fn random_class_inversion<R: Rng + ?Sized>(b: &PowerGraphBundle, rng: &mut R) -> Vec<usize> {
    use rand::RngExt;
    let mut map: Vec<usize> = (0..b.order()).collect();
    for v in 0..b.order() {
        let w = b.inverse_index(v);
        if v < w && rng.random_bool(0.5) {
            map.swap(v, w);
        }
    }
    map
}

fn compose(f: &[usize], g: &[usize]) -> Vec<usize> {
    g.iter().map(|&v| f[v]).collect()
}

/// Identity, inversion, `φ_a` when given, its composite with inversion, and
/// random class inversions composed with these.
pub fn transfer_family(b: &PowerGraphBundle, phi: Option<Rational64>, samples: usize, rng: &mut impl Rng) -> Vec<(String, Vec<usize>)> {
    let id: Vec<usize> = (0..b.order()).collect();
    let inv: Vec<usize> = (0..b.order()).map(|v| b.inverse_index(v)).collect();
    let mut family = vec![("identity".to_string(), id), ("inversion".to_string(), inv.clone())];
    if let Some(a) = phi {
        if let Ok(p) = phi_map(a, b) {
            family.push(("phi".into(), p.clone()));
            family.push(("phi*inversion".into(), compose(&p, &inv)));
        }
    }
    let base = family.len();
    for k in 0..samples {
        let r = random_class_inversion(b, rng);
        let other = family[k % base].1.clone();
        family.push((format!("class-inversion#{k}"), compose(&r, &other)));
    }
    family
}

pub fn transfer(
    g: &Group,
    w: &WindowSpec,
    cap: usize,
    phi: Option<Rational64>,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<Report, CheckError> {
    torsion_free(g, "transfer")?;
    let b = bundle(g, w, VariantTag::Zpm, cap)?;
    let comps = nontrivial_components(&b);
    let (mut iso, mut anti, mut failures) = (0, 0, Vec::new());
    for (name, map) in transfer_family(&b, phi, samples, rng) {
        for c in &comps {
            match check_directed_transfer(&map, &b, &b, c) {
                Ok(t) if t.slices_consistent => match t.verdict {
                    TransferVerdict::Iso => iso += 1,
                    TransferVerdict::AntiIso => anti += 1,
                },
                Ok(_) => failures.push(format!("{name}: slices differ")),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    let mut r = report("transfer", &b)
        .flag("clean_verdicts", failures.is_empty())
        .evidence(json!({"components": comps.len(), "iso": iso, "anti_iso": anti, "failures": failures}));
    if let WindowSpec::Heisenberg { max_coord } = w {
        let (ok, failing, bound) = local_cyclic_components(&b, *max_coord);
        r = r.flag("locally_cyclic", ok);
        r.evidence["root_bound"] = json!(bound);
        r.evidence["locally_cyclic_failures"] = json!(failing);
    }
    Ok(r)
}

fn local_cyclic_components(b: &PowerGraphBundle, max_coord: u64) -> (bool, Vec<[String; 2]>, u64) {
    let bound = heisenberg_witness_bound(max_coord);
    let failing: Vec<[String; 2]> = nontrivial_components(b)
        .iter()
        .map(|c| locally_cyclic_component_check(b, c, bound))
        .filter_map(|l| l.failing_pair)
        .collect();
    (failing.is_empty(), failing, bound)
}

pub fn local_cyclic(g: &Group, w: &WindowSpec, cap: usize) -> Result<Report, CheckError> {
    let WindowSpec::Heisenberg { max_coord } = w else {
        return Err(CheckError::Config("local-cyclic needs a Heisenberg window".into()));
    };
    let b = bundle(g, w, VariantTag::Zpm, cap)?;
    let (ok, failing, bound) = local_cyclic_components(&b, *max_coord);
    Ok(report("local-cyclic", &b)
        .flag("locally_cyclic", ok)
        .evidence(json!({"components": nontrivial_components(&b).len(), "root_bound": bound, "failures": failing})))
}
