//! The `drtsp` command line.
//!
//! Exit codes: 0 success, 1 validation or regime errors (including bad
//! flags), 2 solver errors, 3 `solve --verify` found an exact-mode gap
//! above [`VERIFY_TOL`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use drtsp_lp::{write_mps, LinearModel, MpsFormat};
use serde_json::{json, Value};

use crate::error::{DrtspError, Result};
use crate::flp::{cross_validate, crossval_csv, flp_to_drtsp, generate_flp, CrossValReport, FlpParams, FlpVariant};
use crate::io::{fmt_g9, instance_to_json, load_instance, report_json, to_stable_json, write_report};
use crate::model::{AmbiguitySet, DrtspInstance, NormP};
use crate::oracle::{oracle_zx, OracleReport};
use crate::reformulate::{build_deterministic, solve_drtsp_with, zx_with_regime, BuildOptions, Mode};
use crate::regime::{assess_regime, classify_regime, Regime, RegimeKind};
use crate::validate::{check_ambiguity, validate_instance};

/// Largest relative gap `solve --verify` accepts in exact mode.
pub const VERIFY_TOL: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "drtsp", version, about = "Distributionally robust two-stage programs under the ∞-Wasserstein ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dimensions, supports, sign marks and recourse cost.
    Validate(InstanceArgs),
    /// Print the regime the classifier (or --regime) selects.
    Select(InstanceArgs),
    /// Build the deterministic equivalent and report its size.
    Reformulate(ModelArgs),
    /// Solve min cᵀx + 𝒵(x).
    Solve(SolveArgs),
    /// Evaluate 𝒵(x) at a given x.
    EvalZx(PointArgs),
    /// Brute-force worst case of 𝒵(x) at a given x.
    Oracle(OracleArgs),
    /// Write a seeded facility-location instance as an instance file.
    FlpGen(FlpGenArgs),
    /// Sweep θ on a seeded facility-location instance against a holdout set.
    #[command(name = "crossval")]
    CrossVal(CrossValArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(short = 'i', long = "instance")]
    pub instance: PathBuf,
    /// Overrides the radius in the file.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Overrides the norm in the file; a number ≥ 1 or `inf`.
    #[arg(long, value_parser = parse_norm)]
    pub p: Option<NormP>,
    /// Force a regime instead of classifying.
    #[arg(long)]
    pub regime: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    /// Write the deterministic equivalent in free MPS.
    #[arg(long)]
    pub mps_dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Compare 𝒵(x*) with the brute-force oracle.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    /// First-stage point, comma separated; may be omitted when n1 = 0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// A reformulation value to report the gap against.
    #[arg(long)]
    pub compare: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FlpArgs {
    #[arg(long, default_value_t = 4)]
    pub sites: usize,
    #[arg(long, default_value_t = 4)]
    pub customers: usize,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    /// Per-site disruption probability.
    #[arg(long, default_value_t = 0.05)]
    pub disruption: f64,
    #[arg(long, default_value = "Box15", value_parser = parse_variant)]
    pub variant: FlpVariant,
}

#[derive(Debug, Args)]
pub struct FlpGenArgs {
    #[command(flatten)]
    pub flp: FlpArgs,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, value_parser = parse_norm)]
    pub p: Option<NormP>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CrossValArgs {
    #[command(flatten)]
    pub flp: FlpArgs,
    /// Ascending radii starting at 0, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.02,0.04,0.06,0.08,0.1")]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub holdout: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_norm(s: &str) -> std::result::Result<NormP, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(NormP::Inf),
        t => match t.parse::<f64>() {
            Ok(v) if v.is_infinite() && v > 0.0 => Ok(NormP::Inf),
            Ok(v) if v >= 1.0 => Ok(NormP::Finite(v)),
            _ => Err(format!("expected a number ≥ 1 or inf, got {:?}", s)),
        },
    }
}

fn parse_variant(s: &str) -> std::result::Result<FlpVariant, String> {
    s.parse().map_err(|e: DrtspError| e.to_string())
}

pub fn exit_code(e: &DrtspError) -> i32 {
    match e {
        DrtspError::Solver(_) | DrtspError::Infeasible(_) => 2,
        _ => 1,
    }
}

/// Parses `argv` (program name first) and runs one subcommand. Worker
/// threads are capped by `DRTSP_THREADS` when set.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let threads = std::env::var("DRTSP_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    // Buffered so the work can move onto the capped pool.
    let run = || {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let r = dispatch(&cli.command, &mut o, &mut e);
        (r, o, e)
    };
    let (result, o, e) = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => (Err(DrtspError::Solver(format!("thread pool: {}", e))), Vec::new(), Vec::new()),
        },
        None => run(),
    };
    let _ = out.write_all(&o);
    let _ = err.write_all(&e);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Validate(a) => cmd_validate(a, out, err),
        Command::Select(a) => cmd_select(a, out),
        Command::Reformulate(a) => cmd_reformulate(a, out),
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::EvalZx(a) => cmd_eval(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::FlpGen(a) => cmd_flp_gen(a, out),
        Command::CrossVal(a) => cmd_crossval(a, out),
    }
}

fn load(a: &InstanceArgs) -> Result<(DrtspInstance, AmbiguitySet)> {
    let (inst, mut amb) = load_instance(&a.instance)?;
    if let Some(t) = a.theta {
        amb.theta = t;
    }
    if let Some(p) = a.p {
        amb.p = p;
    }
    check_ambiguity(&inst, &amb)?;
    Ok((inst, amb))
}

fn regime_for(a: &InstanceArgs, inst: &DrtspInstance, amb: &AmbiguitySet) -> Result<Regime> {
    match &a.regime {
        None => Ok(classify_regime(inst, amb)),
        Some(name) => {
            let kind = RegimeKind::parse(name).ok_or_else(|| DrtspError::RegimeMismatch(format!("unknown regime {:?}", name)))?;
            assess_regime(kind, inst, amb)
        }
    }
}

fn point(a: &PointArgs, inst: &DrtspInstance) -> Result<Vec<f64>> {
    if a.x.len() != inst.n1 {
        return Err(DrtspError::Dimension(format!("--x has {} entries, the instance has n1 = {}", a.x.len(), inst.n1)));
    }
    Ok(a.x.clone())
}

fn g9_list(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|&e| fmt_g9(e)).collect::<Vec<_>>().join(", "))
}

/// `key,value` rows of the top-level fields; nested values as compact JSON.
fn flat_csv(v: &Value) -> String {
    let mut s = String::from("field,value\n");
    if let Value::Object(m) = v {
        let mut keys: Vec<&String> = m.keys().collect();
        keys.sort();
        for k in keys {
            let cell = match &m[k.as_str()] {
                Value::String(t) => t.clone(),
                Value::Number(n) => n.as_f64().map(fmt_g9).unwrap_or_else(|| n.to_string()),
                other => to_stable_json(other).split_whitespace().collect::<Vec<_>>().join(" "),
            };
            let quoted = if cell.contains([',', '"', '\n']) { format!("\"{}\"", cell.replace('"', "\"\"")) } else { cell };
            let _ = writeln!(s, "{},{}", k, quoted);
        }
    }
    s
}

fn emit(o: &OutputArgs, value: &Value, text: String, out: &mut dyn Write) -> Result<()> {
    let body = match o.format {
        Format::Json => to_stable_json(value),
        Format::Csv => flat_csv(value),
        Format::Text => text,
    };
    write_report(o.out.as_deref(), &body, out)
}

fn regime_json(r: &Regime) -> Value {
    json!({"regime": r.kind.name(), "exact": r.exact, "reasons": r.reasons})
}

fn regime_text(r: &Regime) -> String {
    let mut s = format!("regime: {}\nexact: {}\n", r.kind, r.exact);
    for reason in &r.reasons {
        let _ = writeln!(s, "  - {}", reason);
    }
    s
}

fn cmd_validate(a: &InstanceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (inst, amb) = load(a)?;
    let report = validate_instance(&inst, &amb)?;
    let mut text = String::new();
    for c in &report.checks {
        let _ = writeln!(text, "{:<6} {:<32} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    let value = json!({"passed": report.passed(), "checks": serde_json::to_value(&report.checks).expect("checks serialize")});
    emit(&a.output, &value, text, out)?;
    if report.passed() {
        Ok(0)
    } else {
        for c in report.failures() {
            let _ = writeln!(err, "validation failed: {}: {}", c.name, c.detail);
        }
        Ok(1)
    }
}

fn cmd_select(a: &InstanceArgs, out: &mut dyn Write) -> Result<i32> {
    let (inst, amb) = load(a)?;
    let r = regime_for(a, &inst, &amb)?;
    emit(&a.output, &regime_json(&r), regime_text(&r), out)?;
    Ok(0)
}

fn dump_mps(path: &Path, model: &LinearModel) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mps(model, &mut f, MpsFormat::Free)?;
    f.flush()?;
    Ok(())
}

fn cmd_reformulate(a: &ModelArgs, out: &mut dyn Write) -> Result<i32> {
    let (inst, amb) = load(&a.inst)?;
    let r = regime_for(&a.inst, &inst, &amb)?;
    let de = build_deterministic(&inst, &amb, &r)?;
    if let Some(p) = &a.mps_dump {
        dump_mps(p, &de.model)?;
    }
    let binaries = de.model.vars.iter().filter(|v| v.binary).count();
    let mut value = regime_json(&r);
    let obj = value.as_object_mut().expect("object");
    obj.insert("variables".into(), json!(de.model.num_vars()));
    obj.insert("rows".into(), json!(de.model.num_rows()));
    obj.insert("binaries".into(), json!(binaries));
    obj.insert("blocks".into(), json!(de.num_blocks()));
    obj.insert("cut_epigraphs".into(), json!(de.cuts.len()));
    let text = format!(
        "{}variables: {}\nrows: {}\nbinaries: {}\nblocks: {}\ncut epigraphs: {}\n",
        regime_text(&r),
        de.model.num_vars(),
        de.model.num_rows(),
        binaries,
        de.num_blocks(),
        de.cuts.len()
    );
    emit(&a.inst.output, &value, text, out)?;
    Ok(0)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let ia = &a.model.inst;
    let (inst, amb) = load(ia)?;
    let r = regime_for(ia, &inst, &amb)?;
    if let Some(p) = &a.model.mps_dump {
        dump_mps(p, &build_deterministic(&inst, &amb, &r)?.model)?;
    }
    let sol = solve_drtsp_with(&inst, &amb, &r)?;
    let mut value = json!({
        "objective": sol.objective,
        "x": sol.x,
        "first_stage_cost": sol.first_stage_cost,
        "zx": sol.zx.value,
        "per_sample": sol.zx.per_sample,
        "mode": format!("{:?}", sol.zx.mode),
        "regime": r.kind.name(),
        "exact": r.exact,
        "theta": amb.theta,
        "nodes": sol.nodes,
    });
    let mut text = format!(
        "regime: {} ({})\ntheta: {}\nobjective: {}\nx: {}\nfirst-stage cost: {}\nZ(x): {}\n",
        r.kind,
        if r.exact { "exact" } else { "upper bound" },
        fmt_g9(amb.theta),
        fmt_g9(sol.objective),
        g9_list(&sol.x),
        fmt_g9(sol.first_stage_cost),
        fmt_g9(sol.zx.value)
    );
    let mut code = 0;
    if a.verify {
        let orc = oracle_zx(&inst, &sol.x, &amb)?;
        let gap = rel_gap(sol.zx.value, orc.value);
        let obj = value.as_object_mut().expect("object");
        obj.insert("oracle".into(), json!(orc.value));
        obj.insert("oracle_exact".into(), json!(orc.exact));
        obj.insert("gap".into(), json!(gap));
        let _ = write!(text, "oracle: {}\ngap: {}\n", fmt_g9(orc.value), fmt_g9(gap));
        let below = sol.zx.value < orc.value - VERIFY_TOL * orc.value.abs().max(1.0);
        if (sol.zx.mode == Mode::Exact && orc.exact && gap > VERIFY_TOL) || below {
            let _ = writeln!(err, "verification failed: reformulation {} vs oracle {}", fmt_g9(sol.zx.value), fmt_g9(orc.value));
            code = 3;
        }
    }
    emit(&ia.output, &value, text, out)?;
    Ok(code)
}

fn cmd_eval(a: &PointArgs, out: &mut dyn Write) -> Result<i32> {
    let (inst, amb) = load(&a.inst)?;
    let x = point(a, &inst)?;
    let r = regime_for(&a.inst, &inst, &amb)?;
    let z = zx_with_regime(&inst, &x, &amb, &r, &BuildOptions::default())?;
    let mut text = format!("regime: {}\nmode: {:?}\nZ(x): {}\n", z.regime, z.mode, fmt_g9(z.value));
    for (j, (v, art)) in z.per_sample.iter().zip(&z.artifacts).enumerate() {
        let _ = writeln!(text, "  sample {}: {} ({})", j, fmt_g9(*v), art.block);
    }
    let value = serde_json::to_value(&z).map_err(|e| DrtspError::Parse(e.to_string()))?;
    emit(&a.inst.output, &value, text, out)?;
    Ok(0)
}

fn oracle_text(rep: &OracleReport) -> String {
    let mut s = format!("oracle: {}\nexact: {}\nscenarios: {}\n", fmt_g9(rep.value), rep.exact, rep.scenario_count);
    for (j, (v, sc)) in rep.per_sample.iter().zip(&rep.per_sample_argmax).enumerate() {
        let _ = writeln!(s, "  sample {}: {} at xi_q={} xi_T={}", j, fmt_g9(*v), g9_list(&sc.xi_q), g9_list(&sc.xi_t));
    }
    s
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let ia = &a.point.inst;
    let (inst, amb) = load(ia)?;
    let x = point(&a.point, &inst)?;
    let rep = oracle_zx(&inst, &x, &amb)?;
    let mut value = serde_json::from_str::<Value>(&report_json(&rep)?).map_err(|e| DrtspError::Parse(e.to_string()))?;
    let mut text = oracle_text(&rep);
    if let Some(c) = a.compare {
        let gap = rel_gap(c, rep.value);
        value.as_object_mut().expect("object").insert("gap".into(), json!(gap));
        let _ = writeln!(text, "gap vs {}: {}", fmt_g9(c), fmt_g9(gap));
    }
    emit(&ia.output, &value, text, out)?;
    Ok(0)
}

fn params(a: &FlpArgs) -> FlpParams {
    FlpParams {
        n_sites: a.sites,
        n_customers: a.customers,
        n_samples: a.samples,
        disruption_prob: a.disruption,
        ..FlpParams::default()
    }
}

fn cmd_flp_gen(a: &FlpGenArgs, out: &mut dyn Write) -> Result<i32> {
    let (flp, samples) = generate_flp(&params(&a.flp), a.seed)?;
    let (inst, mut amb) = flp_to_drtsp(&flp, &samples, a.flp.variant, a.theta)?;
    if let Some(p) = a.p {
        amb.p = p;
    }
    write_report(a.out.as_deref(), &instance_to_json(&inst, &amb), out)?;
    Ok(0)
}

fn crossval_text(r: &CrossValReport) -> String {
    let mut s = format!(
        "variant: {}\n{:>8} {:>14} {:>8} {:>16} {:>14} {:>14} {:>14}\n",
        r.variant, "theta", "opt_val", "time_s", "built", "holdout_mean", "ci_low", "ci_high"
    );
    for row in &r.rows {
        let built = if row.built_facilities.is_empty() {
            "----".to_string()
        } else {
            row.built_facilities.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
        };
        let mark = if row.theta == r.chosen_theta { " *" } else { "" };
        let _ = writeln!(
            s,
            "{:>8} {:>14} {:>8.3} {:>16} {:>14} {:>14} {:>14}{}",
            fmt_g9(row.theta),
            fmt_g9(row.opt_val),
            row.time_s,
            built,
            fmt_g9(row.holdout_mean),
            fmt_g9(row.ci_low),
            fmt_g9(row.ci_high),
            mark
        );
    }
    let _ = writeln!(s, "chosen theta: {}{}", fmt_g9(r.chosen_theta), if r.qualified { "" } else { " (no radius cleared its interval)" });
    s
}

fn cmd_crossval(a: &CrossValArgs, out: &mut dyn Write) -> Result<i32> {
    let seed = a.output.seed;
    let (flp, train) = generate_flp(&params(&a.flp), seed)?;
    let report = cross_validate(&flp, &train, a.flp.variant, &a.grid, seed.wrapping_add(2), a.holdout)?;
    let body = match a.output.format {
        Format::Csv => crossval_csv(&report)?,
        Format::Json => report_json(&report)?,
        Format::Text => crossval_text(&report),
    };
    write_report(a.output.out.as_deref(), &body, out)?;
    Ok(0)
}
