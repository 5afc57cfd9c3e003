//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Each export has a plain Rust twin returning `Result<String, String>` so
//! it can be tested natively.

use powergraph::checks::{self, run_check, CheckInput};
use powergraph::powergraph::GraphFormat;
use powergraph::window::DEFAULT_CAP;
use powergraph::{Group, HeightFunction, PowerGraphBundle, VariantTag, WindowSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Browser builds stay small.
pub const WEB_CAP: usize = DEFAULT_CAP / 5;

fn group(spec: &str) -> Result<Group, String> {
    if let Some(g) = Group::preset(spec.trim()) {
        return Ok(g);
    }
    if spec.trim_start().starts_with('{') {
        return Group::from_json(spec).map_err(|e| e.to_string());
    }
    HeightFunction::parse_spec(spec).map(Group::Rational).map_err(|_| format!("unknown group {spec:?}"))
}

fn variant(name: &str) -> Result<VariantTag, String> {
    VariantTag::ALL.into_iter().find(|v| v.name() == name).ok_or_else(|| format!("unknown variant {name:?}"))
}

/// Graph JSON for a preset, inline JSON group, or height spec.
pub fn build_graph_json(group_spec: &str, window: u32, variant_name: &str, directed: bool) -> Result<String, String> {
    let g = group(group_spec)?;
    let w = WindowSpec::for_group(&g, u64::from(window));
    let b = PowerGraphBundle::build_with_cap(&g, &w, variant(variant_name)?, WEB_CAP).map_err(|e| e.to_string())?;
    Ok(b.render(directed, GraphFormat::Json))
}

/// One named check as a JSON report line.
pub fn check_report(name: &str, group_spec: &str, window: u32, seed: u64) -> Result<String, String> {
    let g = group(group_spec)?;
    let n = u64::from(window);
    let input = CheckInput { window: WindowSpec::for_group(&g, n), group: g, cap: WEB_CAP, seed, element: None, n, samples: 4 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_check(name, &input, &mut rng).map(|r| r.to_json_line()).map_err(|e| e.to_string())
}

/// Whether the subgroup of ℚ with these heights is ℚ itself.
pub fn is_q_report(heights: &str) -> Result<String, String> {
    let h = HeightFunction::parse_spec(heights).map_err(|e| e.to_string())?;
    Ok(checks::is_q(&h).to_json_line())
}

#[wasm_bindgen(js_name = buildGraph)]
pub fn build_graph(group_spec: &str, window: u32, variant_name: &str, directed: bool) -> Result<String, JsError> {
    build_graph_json(group_spec, window, variant_name, directed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = runCheck)]
pub fn run_check_js(name: &str, group_spec: &str, window: u32, seed: u64) -> Result<String, JsError> {
    check_report(name, group_spec, window, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = isQ)]
pub fn is_q(heights: &str) -> Result<String, JsError> {
    is_q_report(heights).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = checkNames)]
pub fn check_names() -> Vec<String> {
    checks::CHECK_NAMES.iter().map(|s| s.to_string()).collect()
}
