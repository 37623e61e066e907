//! `cvxint`: scripted access to the integral-functional operations.
//!
//! Every subcommand writes JSON-lines records (stdout or `--output`).
//! `conjugate` and `envelope` also write per-atom `(x, value)` curves to
//! `--csv`. Records carry a `pass` flag (agreement of the two routes
//! within tolerance); operation subcommands exit 0 once their records are
//! written, `suite` exits 1 when any case fails. Malformed input exits
//! with status 2 and a message naming the offending field.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use convex_interchange::io::{self as cio, Problem, Query, SCHEMA_VERSION};
use convex_interchange::subspace::{compliance_check, decomposability_check, DecomposabilityVariant};
use convex_interchange::verify::{compare_with_tolerance, default_suite, run_suite, Manifest, Tolerance, DEFAULT_SEED};
use convex_interchange::{ExtReal64, Function64, Functional64, Integrand64, LineSearch, ScalarSection, SubspaceSpec};

#[derive(Parser, Debug)]
#[command(name = "cvxint", version, about = "Integral functionals on finite weighted spaces")]
struct Cli {
    /// JSON-lines output file (stdout when absent).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// CSV output: curves for conjugate/envelope, the report for suite.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true, env = "CVXINT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_abs: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_rel: f64,
    /// Spacing of the CSV curves.
    #[arg(long, global = true, default_value_t = 0.05)]
    grid_step: f64,
    /// Curve range as `lo,hi`.
    #[arg(long, global = true, default_value = "-4,4", allow_hyphen_values = true)]
    range: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conjugate functional at `y`: formula vs direct maximization.
    Conjugate(PointArgs),
    /// Pointwise proximity operator at `x`.
    Prox(PointArgs),
    /// Moreau envelope at `x`: per-atom sum vs the value at the prox.
    Envelope(PointArgs),
    /// Recession functional in direction `d` from `z`.
    Recession(PointArgs),
    /// Infimum over a subspace vs integral of pointwise infima.
    Interchange(InterchangeArgs),
    /// Truncation (and optionally gluing) closure of a subspace.
    Compliance(ComplianceArgs),
    /// Dyadic epigraph sampler against the true per-atom infima.
    Normality(NormalityArgs),
    /// Runs the built-in or a supplied manifest.
    Suite(SuiteArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Integrand JSON file.
    #[arg(long)]
    integrand: Option<PathBuf>,
    /// Problem JSON file (integrand, subspace, witnesses, gamma, queries).
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    gamma: Option<f64>,
    /// Point per atom: `3,-0.5` or JSON like `[[1,0],[2,1]]`.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
}

#[derive(Args, Debug)]
struct InterchangeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Subspace JSON file (overrides the problem's).
    #[arg(long)]
    subspace: Option<PathBuf>,
    /// Supremum form; implied by a negated integrand.
    #[arg(long)]
    sup: bool,
}

#[derive(Args, Debug)]
struct ComplianceArgs {
    #[arg(long)]
    subspace: PathBuf,
    /// Number of atoms (taken from the integrand when given).
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
    /// Seeded random probes on top of the structured ones.
    #[arg(long, default_value_t = 8)]
    probes: usize,
    /// Also run the gluing test: `rockafellar` or `valadier`.
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Args, Debug)]
struct NormalityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1024)]
    budget: usize,
    /// Pass threshold on sampled minus true infimum.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Manifest JSON file (the built-in suite when absent).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
}

/// Input the user got wrong, as opposed to a failed computation.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!(InputError(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    tol: Tolerance,
}

/// Returns whether the exit status should be success.
fn run(cli: &Cli) -> Result<bool> {
    let tol = Tolerance { abs: cli.tol_abs, rel: cli.tol_rel };
    tol.validate().map_err(|e| input_err(format!("--tol-abs/--tol-rel: {e}")))?;
    if cli.grid_step.is_nan() || cli.grid_step <= 0.0 {
        return Err(input_err("--grid-step: must be > 0"));
    }
    let ctx = Ctx { cli, tol };
    let mut records = Vec::new();
    match &cli.command {
        Command::Conjugate(a) => conjugate(&ctx, a, &mut records)?,
        Command::Prox(a) => prox(&ctx, a, &mut records)?,
        Command::Envelope(a) => envelope(&ctx, a, &mut records)?,
        Command::Recession(a) => recession(&ctx, a, &mut records)?,
        Command::Interchange(a) => interchange(&ctx, a, &mut records)?,
        Command::Compliance(a) => compliance(&ctx, a, &mut records)?,
        Command::Normality(a) => normality(a, &mut records)?,
        Command::Suite(a) => return suite(&ctx, a),
    }
    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    emit(cli.output.as_deref(), &out)?;
    Ok(true)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_json(path: &Path, flag: &str) -> Result<Value> {
    cio::read_json(path).map_err(|e| input_err(format!("{flag}: {e}")))
}

/// The problem file, or a bare integrand file wrapped as a problem.
fn load_problem(input: &InputArgs) -> Result<Problem> {
    match (&input.problem, &input.integrand) {
        (Some(p), None) => {
            let v = load_json(p, "--problem")?;
            cio::problem_from_json(&v, p.parent()).map_err(|e| input_err(format!("{}: {e}", p.display())))
        }
        (None, Some(i)) => {
            let v = load_json(i, "--integrand")?;
            let integrand = cio::integrand_from_json(&v, "").map_err(|e| input_err(format!("{}: {e}", i.display())))?;
            Ok(Problem {
                integrand,
                subspace: None,
                witness: None,
                dual_witness: None,
                gamma: None,
                queries: Vec::new(),
            })
        }
        (Some(_), Some(_)) => Err(input_err("--integrand and --problem are mutually exclusive")),
        (None, None) => Err(input_err("one of --integrand or --problem is required")),
    }
}

/// `3,-0.5` (one real per atom) or a JSON array.
fn parse_point(text: &str, flag: &str) -> Result<Function64> {
    let t = text.trim();
    let v: Value = if t.starts_with('[') {
        serde_json::from_str(t).map_err(|e| input_err(format!("{flag}: invalid JSON: {e}")))?
    } else {
        let parts = t
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| input_err(format!("{flag}: {p:?} is not a number: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        json!(parts)
    };
    cio::function_from_json(&v, flag).map_err(input_err)
}

/// Query points: the CLI flags form one query and override the problem's list.
fn queries(problem: &Problem, a: &PointArgs) -> Result<Vec<Query>> {
    let parse = |s: &Option<String>, flag: &str| s.as_deref().map(|t| parse_point(t, flag)).transpose();
    let flagged = Query {
        x: parse(&a.x, "--x")?,
        y: parse(&a.y, "--y")?,
        d: parse(&a.d, "--d")?,
        z: parse(&a.z, "--z")?,
    };
    if flagged.x.is_some() || flagged.y.is_some() || flagged.d.is_some() || flagged.z.is_some() {
        Ok(vec![flagged])
    } else if problem.queries.is_empty() {
        Err(input_err("queries: none given (pass --x/--y/--d/--z or add queries to the problem)"))
    } else {
        Ok(problem.queries.clone())
    }
}

fn need<'q>(q: &'q Option<Function64>, i: usize, name: &str) -> Result<&'q Function64> {
    q.as_ref().ok_or_else(|| input_err(format!("queries[{i}].{name}: missing (pass --{name} or add it to the problem)")))
}

fn functional(problem: &Problem, dual: bool) -> Result<Functional64> {
    let f = Functional64::new(problem.integrand.clone());
    let w = match &problem.witness {
        Some(w) => w.clone(),
        None => f.canonical_witness()?,
    };
    let f = f.certify(w).map_err(|e| input_err(format!("witness: {e}")))?;
    if !dual {
        return Ok(f);
    }
    let d = match &problem.dual_witness {
        Some(d) => d.clone(),
        None => f.canonical_dual_witness()?,
    };
    f.certify_dual(d).map_err(|e| input_err(format!("dual_witness: {e}")))
}

fn gamma(problem: &Problem, a: &PointArgs) -> Result<f64> {
    let g = a.gamma.or(problem.gamma).ok_or_else(|| input_err("gamma: missing (pass --gamma or set it in the problem)"))?;
    if !(g > 0.0 && g.is_finite()) {
        return Err(input_err(format!("gamma: must be finite and > 0, got {g}")));
    }
    Ok(g)
}

fn record(ctx: &Ctx<'_>, op: &str, inputs: Value, lhs: ExtReal64, rhs: ExtReal64, extra: Value) -> Value {
    let cmp = compare_with_tolerance(lhs, rhs, ctx.tol);
    let mut r = json!({
        "schema_version": SCHEMA_VERSION,
        "op": op,
        "inputs": inputs,
        "lhs": lhs,
        "rhs": rhs,
        "gap": lhs.gap_to(rhs),
        "pass": cmp.pass,
    });
    if let (Value::Object(r), Value::Object(extra)) = (&mut r, extra) {
        r.extend(extra);
    }
    r
}

fn range(ctx: &Ctx<'_>) -> Result<Vec<f64>> {
    let parts: Vec<&str> = ctx.cli.range.split(',').collect();
    let bad = || input_err(format!("--range: expected lo,hi with lo < hi, got {:?}", ctx.cli.range));
    let [lo, hi] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    let n = ((hi - lo) / ctx.cli.grid_step).floor() as usize;
    if n > 10_000_000 {
        return Err(input_err("--grid-step: too many curve points for the range"));
    }
    Ok((0..=n).map(|k| lo + k as f64 * ctx.cli.grid_step).collect())
}

/// `atom,x,value` rows for every scalar section of the integrand.
fn write_curves(ctx: &Ctx<'_>, phi: &Integrand64, value: impl Fn(&ScalarSection<f64>, f64) -> Result<ExtReal64>) -> Result<()> {
    let Some(path) = &ctx.cli.csv else { return Ok(()) };
    let xs = range(ctx)?;
    let mut out = String::from("atom,component,x,value\n");
    for (i, s) in phi.sections().iter().enumerate() {
        for (k, c) in s.components().iter().enumerate() {
            for &x in &xs {
                out.push_str(&format!("{i},{k},{x},{}\n", value(c, x)?));
            }
        }
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

fn conjugate(ctx: &Ctx<'_>, a: &PointArgs, records: &mut Vec<Value>) -> Result<()> {
    let problem = load_problem(&a.input)?;
    let f = functional(&problem, false)?;
    for (i, q) in queries(&problem, a)?.iter().enumerate() {
        let y = need(&q.y, i, "y")?;
        let r = f.conjugate_functional(y)?;
        records.push(record(ctx, "conjugate_functional", json!({ "y": cio::function_to_json(y) }), r.formula, r.direct, json!({})));
    }
    write_curves(ctx, &problem.integrand, |s, y| Ok(s.conjugate_eval(y)))
}

fn prox(ctx: &Ctx<'_>, a: &PointArgs, records: &mut Vec<Value>) -> Result<()> {
    let problem = load_problem(&a.input)?;
    let g = gamma(&problem, a)?;
    let f = functional(&problem, true)?;
    for (i, q) in queries(&problem, a)?.iter().enumerate() {
        let x = need(&q.x, i, "x")?;
        let p = f.prox_functional(g, x)?;
        // objective at the prox against the per-atom envelope sum
        let objective = f.prox_objective(g, x, &p)?;
        let env = f.envelope_functional(g, x)?;
        records.push(record(
            ctx,
            "prox_functional",
            json!({ "gamma": g, "x": cio::function_to_json(x) }),
            objective,
            ExtReal64::finite(env.per_atom_sum),
            json!({ "p": cio::function_to_json(&p) }),
        ));
    }
    Ok(())
}

fn envelope(ctx: &Ctx<'_>, a: &PointArgs, records: &mut Vec<Value>) -> Result<()> {
    let problem = load_problem(&a.input)?;
    let g = gamma(&problem, a)?;
    let f = functional(&problem, true)?;
    for (i, q) in queries(&problem, a)?.iter().enumerate() {
        let x = need(&q.x, i, "x")?;
        let r = f.envelope_functional(g, x)?;
        records.push(record(
            ctx,
            "envelope_functional",
            json!({ "gamma": g, "x": cio::function_to_json(x) }),
            ExtReal64::finite(r.per_atom_sum),
            r.prox_route,
            json!({ "p": cio::function_to_json(&r.prox) }),
        ));
    }
    write_curves(ctx, &problem.integrand, |s, x| Ok(ExtReal64::finite(s.envelope(g, x)?)))
}

fn recession(ctx: &Ctx<'_>, a: &PointArgs, records: &mut Vec<Value>) -> Result<()> {
    let problem = load_problem(&a.input)?;
    let f = functional(&problem, false)?;
    for (i, q) in queries(&problem, a)?.iter().enumerate() {
        let d = need(&q.d, i, "d")?;
        let z = match &q.z {
            Some(z) => z.clone(),
            None => f.witness().cloned().expect("certified"),
        };
        let r = f.recession_functional(d, &z)?;
        let mut rec = record(
            ctx,
            "recession_functional",
            json!({ "d": cio::function_to_json(d), "z": cio::function_to_json(&z) }),
            r.closed_form,
            r.limit,
            json!({ "quotients": r.quotients, "monotone": r.monotone }),
        );
        if !r.monotone {
            rec["pass"] = json!(false);
        }
        records.push(rec);
    }
    Ok(())
}

fn interchange(ctx: &Ctx<'_>, a: &InterchangeArgs, records: &mut Vec<Value>) -> Result<()> {
    let problem = load_problem(&a.input)?;
    let spec: SubspaceSpec = match (&a.subspace, &problem.subspace) {
        (Some(p), _) => {
            let v = load_json(p, "--subspace")?;
            cio::subspace_from_json(&v, "").map_err(|e| input_err(format!("{}: {e}", p.display())))?
        }
        (None, Some(s)) => s.clone(),
        (None, None) => SubspaceSpec::FullSpace,
    };
    let sup = a.sup || problem.integrand.is_negated();
    let f = Functional64::new(problem.integrand.clone());
    let search = LineSearch::default();
    let r = if sup { f.interchange_sup(&spec, &search)? } else { f.interchange_inf(&spec, &search)? };
    let op = if sup { "interchange_sup" } else { "interchange_inf" };
    records.push(record(ctx, op, json!({ "subspace": cio::subspace_to_json(&spec) }), r.lhs, r.rhs, json!({})));
    Ok(())
}

fn compliance(ctx: &Ctx<'_>, a: &ComplianceArgs, records: &mut Vec<Value>) -> Result<()> {
    let v = load_json(&a.subspace, "--subspace")?;
    let spec = cio::subspace_from_json(&v, "").map_err(|e| input_err(format!("{}: {e}", a.subspace.display())))?;
    let m = match (a.m, a.input.integrand.is_some() || a.input.problem.is_some()) {
        (Some(m), _) => m,
        (None, true) => load_problem(&a.input)?.integrand.len(),
        (None, false) => bail!(InputError("--m: missing (or pass --integrand / --problem)".into())),
    };
    spec.validate(m).map_err(|e| input_err(format!("--subspace: {e}")))?;
    let inputs = json!({ "subspace": cio::subspace_to_json(&spec), "m": m, "probes": a.probes, "seed": ctx.cli.seed });
    let r = compliance_check::<f64>(&spec, m, a.probes, ctx.cli.seed)?;
    let replayed = r.counterexample.as_ref().is_none_or(|c| !c.replay(&spec));
    records.push(json!({
        "schema_version": SCHEMA_VERSION,
        "op": "compliance_check",
        "inputs": inputs,
        "compliant": r.compliant,
        "counterexample": r.counterexample.as_ref().map(counterexample_json),
        "subsets": r.subsets,
        "probes": r.probes,
        "pass": replayed,
    }));
    if let Some(variant) = &a.variant {
        let variant = match variant.as_str() {
            "rockafellar" => DecomposabilityVariant::Rockafellar,
            "valadier" => DecomposabilityVariant::Valadier,
            other => bail!(InputError(format!("--variant: unknown variant {other:?}; expected rockafellar or valadier"))),
        };
        let d = decomposability_check::<f64>(&spec, m, variant, a.probes, ctx.cli.seed)?;
        let replayed = d.counterexample.as_ref().is_none_or(|c| !c.replay(&spec));
        records.push(json!({
            "schema_version": SCHEMA_VERSION,
            "op": "decomposability_check",
            "inputs": inputs,
            "variant": format!("{:?}", d.variant).to_lowercase(),
            "decomposable": d.decomposable,
            "compliant": d.compliant,
            "implication_holds": d.implication_holds,
            "counterexample": d.counterexample.as_ref().map(counterexample_json),
            "subsets": d.subsets,
            "members": d.members,
            "pass": replayed && d.implication_holds,
        }));
    }
    Ok(())
}

fn counterexample_json(c: &convex_interchange::subspace::Counterexample<f64>) -> Value {
    json!({
        "subset": c.subset,
        "probe_index": c.probe_index,
        "z": cio::function_to_json(&c.z),
        "x": c.x.as_ref().map(cio::function_to_json),
        "glued": cio::function_to_json(&c.glued),
    })
}

fn normality(a: &NormalityArgs, records: &mut Vec<Value>) -> Result<()> {
    let problem = load_problem(&a.input)?;
    let phi = &problem.integrand;
    if a.budget == 0 {
        return Err(input_err("--budget: must be at least 1"));
    }
    let sample = phi.epigraph_dense_sample(a.budget)?;
    let reports = phi.verify_normality_inf(&sample, a.tol)?;
    for r in reports {
        let feasible = sample.pairs[r.atom]
            .iter()
            .all(|&(x, v)| phi.eval_at(r.atom, &[x]) <= ExtReal64::finite(v));
        records.push(json!({
            "schema_version": SCHEMA_VERSION,
            "op": "verify_normality_inf",
            "inputs": { "atom": r.atom, "budget": a.budget, "tol": a.tol },
            "lhs": r.sampled_inf,
            "rhs": r.true_inf,
            "gap": r.gap,
            "feasible": feasible,
            "pass": r.pass && feasible,
        }));
    }
    Ok(())
}

fn suite(ctx: &Ctx<'_>, a: &SuiteArgs) -> Result<bool> {
    let manifest = match &a.manifest {
        Some(p) => {
            let v = load_json(p, "--manifest")?;
            Manifest::from_json(&v).map_err(|e| input_err(format!("{}: {e}", p.display())))?
        }
        None => default_suite(ctx.cli.seed),
    };
    let report = run_suite(&manifest, a.parallelism).map_err(|e| input_err(format!("--parallelism: {e}")))?;
    emit(ctx.cli.output.as_deref(), &report.to_json_lines())?;
    if let Some(p) = &ctx.cli.csv {
        fs::write(p, report.to_csv()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(report.all_passed())
}
