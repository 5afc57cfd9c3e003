//! `powergraph` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use powergraph::checks::{run_check, CheckInput, CHECK_NAMES};
use powergraph::error::{CheckError, WindowError};
use powergraph::groups::PRESETS;
use powergraph::powergraph::GraphFormat;
use powergraph::report::Report;
use powergraph::suite::{run_suite, Profile, SuiteConfig};
use powergraph::{Group, HeightFunction, PowerGraphBundle, VariantTag, WindowSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_CONFIG: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "powergraph", version, about = "Power graphs of groups: build, check, verify")]
struct Cli {
    /// Maximum window carrier size.
    #[arg(long, global = true, env = "POWERGRAPH_CAP", default_value_t = powergraph::window::DEFAULT_CAP)]
    cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one power graph and export it.
    Build(BuildArgs),
    /// Run one named check and print its JSON report.
    Check(CheckArgs),
    /// Run the verification suite.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct GroupArgs {
    /// Preset name, inline JSON, or path to a JSON file.
    #[arg(long, conflicts_with_all = ["table", "heights"])]
    group: Option<String>,
    /// Cayley table file: a JSON array of rows, or whitespace-separated rows.
    #[arg(long, value_name = "FILE", conflicts_with = "heights")]
    table: Option<PathBuf>,
    /// Rational subgroup by heights, e.g. `default=1` or `2=inf,3=inf`.
    #[arg(long, value_name = "SPEC")]
    heights: Option<String>,
    /// Window size: |n| <= N for integers, |p| <= N and q <= N for
    /// rationals, coordinates in [-N, N] for Heisenberg. Ignored for finite
    /// groups.
    #[arg(long, value_name = "N")]
    window: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Z,
    Nplus,
    Zpm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
    Report,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[arg(long, value_enum, default_value = "zpm")]
    variant: Variant,
    /// Export the directed graph.
    #[arg(long)]
    directed: bool,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(CHECK_NAMES))]
    name: String,
    #[command(flatten)]
    group: GroupArgs,
    /// Base element for `boxtimes` or `phi-a`, e.g. `2`, `1/3`, `(1,0,0)`.
    #[arg(long)]
    element: Option<String>,
    /// Random samples for `tau-lift` and `transfer`.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value = "desk")]
    profile: ProfileArg,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run only these criteria, e.g. `1,4,7`.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=12))]
    only: Vec<u8>,
    /// Write a machine-readable summary here.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Quick,
    Desk,
}

/// A failure mapped to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<WindowError> for Failure {
    fn from(e: WindowError) -> Self {
        let code = if matches!(e, WindowError::TooLarge { .. }) { EXIT_CAP } else { EXIT_CONFIG };
        Failure { code, message: e.to_string() }
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Window(w) => w.into(),
            other => Failure::config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => build(a, cli.cap),
        Command::Check(a) => check(a, cli.cap),
        Command::Suite(a) => suite(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn parse_table(text: &str) -> Result<Group, Failure> {
    let rows: Vec<Vec<usize>> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| Failure::config(format!("table: {e}")))?
    } else {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(str::parse).collect::<Result<Vec<usize>, _>>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::config(format!("table: {e}")))?
    };
    let table = powergraph::groups::CayleyTable::new(rows).map_err(|e| Failure::config(e.to_string()))?;
    Ok(Group::Finite(table))
}

fn resolve_group(a: &GroupArgs) -> Result<Group, Failure> {
    if let Some(path) = &a.table {
        return parse_table(&read(path)?);
    }
    if let Some(spec) = &a.heights {
        let h = HeightFunction::parse_spec(spec).map_err(|e| Failure::config(e.to_string()))?;
        return Ok(Group::Rational(h));
    }
    let Some(spec) = a.group.as_deref() else {
        return Err(Failure::config("one of --group, --table or --heights is required"));
    };
    if let Some(g) = Group::preset(spec) {
        return Ok(g);
    }
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else if Path::new(spec).is_file() {
        read(Path::new(spec))?
    } else {
        return Err(Failure::config(format!(
            "{spec:?} is not a preset ({}), inline JSON, or a file",
            PRESETS.join(", ")
        )));
    };
    Group::from_json(&text).map_err(|e| Failure::config(e.to_string()))
}

fn default_window(g: &Group) -> u64 {
    match g {
        Group::Finite(_) => 0,
        Group::Integers => 10,
        Group::Rational(_) => 4,
        Group::Heisenberg => 2,
    }
}

fn window_param(a: &GroupArgs, g: &Group) -> u64 {
    a.window.unwrap_or_else(|| default_window(g))
}

fn variant_tag(v: Variant) -> VariantTag {
    match v {
        Variant::Z => VariantTag::Z,
        Variant::Nplus => VariantTag::Nplus,
        Variant::Zpm => VariantTag::Zpm,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::config(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::config(e.to_string()))
        }
    }
}

fn build(a: &BuildArgs, cap: usize) -> Result<(), Failure> {
    let group = resolve_group(&a.group)?;
    let window = WindowSpec::for_group(&group, window_param(&a.group, &group));
    let b = PowerGraphBundle::build_with_cap(&group, &window, variant_tag(a.variant), cap)?;
    let text = match a.format {
        Format::Dot => b.render(a.directed, GraphFormat::Dot),
        Format::Json => b.render(a.directed, GraphFormat::Json),
        Format::Report => {
            let isolated: Vec<String> = b.graph().isolated_vertices().iter().map(|&v| b.element(v).to_string()).collect();
            let edges = if a.directed { b.digraph().arc_count() } else { b.graph().edge_count() };
            Report::new("build", group.label(), window.to_string(), b.variant().name())
                .flag("built", true)
                .evidence(json!({
                    "directed": a.directed,
                    "vertices": b.order(),
                    "edges": edges,
                    "components": b.graph().connected_components().len(),
                    "isolated": isolated,
                }))
                .to_json_line()
        }
    };
    emit(&text, a.out.as_deref())
}

fn check(a: &CheckArgs, cap: usize) -> Result<(), Failure> {
    let group = resolve_group(&a.group)?;
    let n = window_param(&a.group, &group);
    let element = match &a.element {
        Some(t) => Some(group.parse_element(t).map_err(|e| Failure::config(e.to_string()))?),
        None => None,
    };
    let input = CheckInput {
        window: WindowSpec::for_group(&group, n),
        group,
        cap,
        seed: a.seed,
        element,
        n,
        samples: a.samples,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let report = run_check(&a.name, &input, &mut rng)?;
    let line = report.to_json_line();
    emit(&line, None)?;
    if let Some(out) = &a.out {
        emit(&line, Some(out))?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_FAILED, message: format!("check {} failed", a.name) })
    }
}

fn suite(a: &SuiteArgs) -> Result<(), Failure> {
    let profile = match a.profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Desk => Profile::Desk,
    };
    let cfg = SuiteConfig { profile, jobs: a.jobs.max(1), seed: a.seed };
    let start = Instant::now();
    let only: Vec<usize> = a.only.iter().map(|&i| usize::from(i)).collect();
    let outcomes = run_suite(&cfg, &only);
    let elapsed = start.elapsed().as_secs_f64();
    let mut text = String::new();
    for o in &outcomes {
        text.push_str(&format!("{} {}\n", if o.pass { "PASS" } else { "FAIL" }, o.check_name()));
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    text.push_str(&format!("{passed}/{} criteria pass in {elapsed:.2}s\n", outcomes.len()));
    emit(&text, None)?;
    if let Some(path) = &a.json {
        let summary = json!({
            "profile": profile,
            "seed": a.seed,
            "jobs": cfg.jobs,
            "runtime_s": elapsed,
            "pass": passed == outcomes.len(),
            "criteria": outcomes,
        });
        let body = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        emit(&body, Some(path))?;
    }
    match outcomes.iter().find(|o| !o.pass) {
        None => Ok(()),
        Some(o) => Err(Failure { code: EXIT_FAILED, message: format!("criterion {} failed", o.check_name()) }),
    }
}
