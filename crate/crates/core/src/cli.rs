//! Command-line driver. `run` returns the process exit code.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::code::{brute_force_distance, compute_k, hypergraph_product_params, la_cross_seed, CodeSpec, QubitId, Role};
use crate::emit::{emit_circuit, NoiseParams};
use crate::error::{Error, Result};
use crate::metrics::{extract_couplers_with, fmt_ratio, metrics_report, predicted_degree, DistanceMode, Rational};
use crate::optimize::{optimize_ordering, SearchBudget};
use crate::router::{path_dump, route_multitier, validate_routing};
use crate::schedule::{build_louvre7, build_louvre8, build_regular_default, Louvre7Options, Louvre8Options, Schedule, Scheme};
use crate::tracker::{AbsentSiteMap, Strategy};
use crate::verify::{verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ROUTING: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "louvre", version, about = "Syndrome-extraction scheduling for generalized bicycle codes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Code file (key=value lines: l, m, A, B, optional boundary).
    #[arg(long, global = true)]
    code: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Instruction table to use instead of a builder.
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// Run the ordering search for l7r, l8r or cxswap-only.
    #[arg(long, global = true)]
    search: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Search budget in evaluations.
    #[arg(long, global = true, default_value_t = 2_000_000)]
    max_evals: u64,
    /// Search time limit in seconds.
    #[arg(long, global = true, default_value_t = 60)]
    time_limit: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Padding,
    ExtraCouplers,
}

#[derive(Args, Debug, Clone)]
struct AbsentArgs {
    /// Absent qubit, e.g. `L(0,1)`; repeatable.
    #[arg(long = "absent", value_parser = parse_qubit)]
    absent: Vec<QubitId>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Padding)]
    strategy: StrategyArg,
}

impl AbsentArgs {
    fn map(&self) -> AbsentSiteMap {
        let strategy = match self.strategy {
            StrategyArg::Padding => Strategy::Padding,
            StrategyArg::ExtraCouplers => Strategy::ExtraCouplers,
        };
        AbsentSiteMap { absent: self.absent.clone(), strategy }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a code file and print its parameters.
    Build,
    /// Print the instruction table.
    Schedule,
    /// Run the verifier suite.
    Verify {
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[command(flatten)]
        absent: AbsentArgs,
    },
    /// Average degree and total interaction distance.
    Metrics {
        /// Raw routed displacement instead of the torus minimum.
        #[arg(long)]
        unwrapped: bool,
        #[command(flatten)]
        absent: AbsentArgs,
    },
    /// Multi-tier coupler routing.
    Route,
    /// Write a noise-annotated circuit.
    Emit {
        #[arg(long, default_value_t = 6)]
        rounds: usize,
        #[arg(long, default_value_t = 0.001)]
        p: f64,
        #[arg(long, default_value_t = 1.5)]
        swap_factor: f64,
        #[command(flatten)]
        absent: AbsentArgs,
    },
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    Scheme::from_cli(s).ok_or_else(|| format!("unknown scheme `{s}` (regular|l7|l7r|l8|l8r|cxswap-only)"))
}

fn parse_qubit(s: &str) -> std::result::Result<QubitId, String> {
    let bad = || format!("expected ROLE(i,j), got `{s}`");
    let s = s.trim();
    let role = match s.chars().next() {
        Some('L') => Role::L,
        Some('R') => Role::R,
        Some('X') => Role::X,
        Some('Z') => Role::Z,
        _ => return Err(bad()),
    };
    let inner = s[1..].strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
    let (i, j) = inner.split_once(',').ok_or_else(bad)?;
    let i = i.trim().parse().map_err(|_| bad())?;
    let j = j.trim().parse().map_err(|_| bad())?;
    Ok(QubitId::new(i, j, role))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Verification(_) => EXIT_VERIFY,
        Error::Routing(_) => EXIT_ROUTING,
        _ => EXIT_INPUT,
    }
}

fn ratio_json(r: Rational) -> Value {
    json!({ "num": r.numer(), "den": r.denom(), "value": *r.numer() as f64 / *r.denom() as f64 })
}

struct Ctx<'a> {
    g: &'a Global,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn code(&self) -> Result<CodeSpec> {
        let path = self.g.code.as_ref().ok_or_else(|| Error::Usage("--code FILE is required".into()))?;
        CodeSpec::parse_file(&std::fs::read_to_string(path)?)
    }

    fn schedule(&mut self, code: &CodeSpec) -> Result<Schedule> {
        resolve_schedule(code, self.g, self.err)
    }

    /// Writes to `--out` when given, else to stdout.
    fn emit(&mut self, text: &str) -> Result<()> {
        match &self.g.out {
            Some(p) => std::fs::write(p, text)?,
            None => self.out.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_json(&mut self, mut v: Value) -> Result<()> {
        v.as_object_mut().expect("object").insert("schema".into(), json!(1));
        let text = serde_json::to_string_pretty(&v).map_err(|e| Error::Usage(e.to_string()))? + "\n";
        self.emit(&text)
    }
}

/// Builder output for regular/l7/l8, or a table, or the search result.
fn resolve_schedule(code: &CodeSpec, g: &Global, err: &mut dyn Write) -> Result<Schedule> {
    let scheme = g.scheme;
    if let Some(path) = &g.table {
        let mut s = Schedule::from_table(&std::fs::read_to_string(path)?)?;
        s.validate(code)?;
        if let Some(sc) = scheme {
            s.scheme = sc;
        }
        return Ok(s);
    }
    let scheme = scheme.ok_or_else(|| Error::Usage("--scheme or --table is required".into()))?;
    match scheme {
        Scheme::Regular => Ok(build_regular_default(code)),
        Scheme::Louvre7 => build_louvre7(code, &Louvre7Options::default()),
        Scheme::Louvre8 => build_louvre8(code, &Louvre8Options::default()),
        Scheme::Louvre7R | Scheme::Louvre8R | Scheme::CxSwapOnly if g.search => {
            let budget =
                SearchBudget { max_evaluations: g.max_evals, time_limit: Duration::from_secs(g.time_limit) };
            let r = optimize_ordering(code, scheme, &budget, g.seed)?;
            let _ = writeln!(
                err,
                "search: {} evaluations, {} ms{}",
                r.evaluations,
                r.elapsed_ms,
                if r.exhaustive { ", exhaustive" } else { "" }
            );
            Ok(r.schedule)
        }
        Scheme::Louvre7R | Scheme::Louvre8R | Scheme::CxSwapOnly => Err(Error::Usage(format!(
            "scheme {} has no builder; pass --table FILE with an instruction table or --search",
            scheme.cli_name()
        ))),
        Scheme::Custom => Err(Error::Usage("custom schedules need --table".into())),
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    let mut ctx = Ctx { g: &cli.global, out, err };
    match dispatch(&cli.command, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<i32> {
    match cmd {
        Command::Build => cmd_build(ctx),
        Command::Schedule => cmd_schedule(ctx),
        Command::Verify { rounds, absent } => cmd_verify(ctx, *rounds, &absent.map()),
        Command::Metrics { unwrapped, absent } => cmd_metrics(ctx, *unwrapped, &absent.map()),
        Command::Route => cmd_route(ctx),
        Command::Emit { rounds, p, swap_factor, absent } => {
            cmd_emit(ctx, *rounds, NoiseParams::new(*p, *swap_factor)?, &absent.map())
        }
    }
}

fn cmd_build(ctx: &mut Ctx) -> Result<i32> {
    let code = ctx.code()?;
    let k = compute_k(&code);
    let d = brute_force_distance(&code);
    let hp = la_cross_seed(&code)
        .map(|(n1, k1)| (n1, k1, hypergraph_product_params(n1, k1, code.boundary)))
        .and_then(|(n1, k1, r)| r.ok().map(|p| (n1, k1, p)));
    if ctx.g.format == Format::Json {
        return ctx
            .emit_json(json!({
                "l": code.l, "m": code.m, "A": code.a.to_string(), "B": code.b.to_string(),
                "boundary": format!("{:?}", code.boundary).to_lowercase(),
                "n": code.n(), "k": k, "d": d, "n_a": code.n_a(), "n_b": code.n_b(),
                "qubits": code.num_qubits(),
                "hypergraph_product": hp.map(|(n1, k1, (n, kk))| json!({"seed": [n1, k1], "n": n, "k": kk})),
            }))
            .map(|_| EXIT_OK);
    }
    let mut s = format!(
        "l={} m={}\nA={}\nB={}\nn={} k={}",
        code.l,
        code.m,
        code.a,
        code.b,
        code.n(),
        k
    );
    if let Some(d) = d {
        s.push_str(&format!(" d={d}"));
    }
    s.push_str(&format!("\nterms: {} + {}\nqubits: {}\n", code.n_a(), code.n_b(), code.num_qubits()));
    if let Some((n1, k1, (n, kk))) = hp {
        s.push_str(&format!("hypergraph product of [{n1},{k1}]: n={n} k={kk}\n"));
    }
    ctx.emit(&s)?;
    Ok(EXIT_OK)
}

fn cmd_schedule(ctx: &mut Ctx) -> Result<i32> {
    let code = ctx.code()?;
    let s = ctx.schedule(&code)?;
    if ctx.g.format == Format::Json {
        let v = json!({ "scheme": s.scheme.cli_name(), "depth": s.depth(), "table": s.to_table(), "schedule": s });
        ctx.emit_json(v)?;
    } else {
        ctx.emit(&s.to_table())?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &mut Ctx, rounds: usize, absent: &AbsentSiteMap) -> Result<i32> {
    let code = ctx.code()?;
    let s = ctx.schedule(&code)?;
    let report = verify(&code, &s, absent, &VerifyOptions { rounds, seed: ctx.g.seed, tableau: true })?;
    if ctx.g.format == Format::Json {
        let mut v = serde_json::to_value(&report).map_err(|e| Error::Usage(e.to_string()))?;
        v["passed"] = json!(report.passed());
        ctx.emit_json(v)?;
    } else {
        let flag = |b: bool| if b { "ok" } else { "FAIL" };
        let mut t = format!(
            "commutation: {}\ndeterminism: {}\nsingle faults: {}\nrestoration: {}\nlogicals: {}\n",
            flag(report.commutation_ok),
            flag(report.syndromes_deterministic),
            flag(report.single_fault_detection_ok),
            flag(report.restoration_ok),
            flag(report.logicals_preserved)
        );
        t.push_str(&format!(
            "rounds={} detectors={} logical qubits={}\n",
            report.rounds, report.detectors, report.logical_qubits
        ));
        for d in &report.diagnostics {
            t.push_str(&format!("  [{}] {}", d.check, d.message));
            if let Some(r) = d.round {
                t.push_str(&format!(" round={r}"));
            }
            if let Some(l) = d.layer {
                t.push_str(&format!(" layer={l}"));
            }
            if !d.qubits.is_empty() {
                t.push_str(&format!(" qubits={}", d.qubits.join(",")));
            }
            t.push('\n');
        }
        t.push_str(if report.passed() { "PASS\n" } else { "FAIL\n" });
        ctx.emit(&t)?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
}

fn metrics_row(code: &CodeSpec, s: &Schedule, absent: &AbsentSiteMap, mode: DistanceMode) -> Result<Value> {
    let g = extract_couplers_with(s, code, absent, mode)?;
    let m = metrics_report(&g);
    let predicted = predicted_degree(s.scheme, code.n_a(), code.n_b());
    Ok(json!({
        "scheme": s.scheme.cli_name(),
        "label": s.scheme.label(),
        "avg_degree": ratio_json(m.avg_degree),
        "avg_total_distance": ratio_json(m.avg_total_distance),
        "text": format!("{}, {}", fmt_ratio(m.avg_degree), fmt_ratio(m.avg_total_distance)),
        "couplers": m.couplers,
        "max_length": m.max_length,
        "predicted_degree": predicted.map(ratio_json),
        "formula_holds": predicted.map(|p| p == m.avg_degree),
    }))
}

fn cmd_metrics(ctx: &mut Ctx, unwrapped: bool, absent: &AbsentSiteMap) -> Result<i32> {
    let code = ctx.code()?;
    let mode = if unwrapped { DistanceMode::Unwrapped } else { DistanceMode::Torus };
    let schedules = if ctx.g.scheme.is_some() || ctx.g.table.is_some() {
        vec![ctx.schedule(&code)?]
    } else {
        vec![
            build_regular_default(&code),
            build_louvre7(&code, &Louvre7Options::default())?,
            build_louvre8(&code, &Louvre8Options::default())?,
        ]
    };
    let rows = schedules.iter().map(|s| metrics_row(&code, s, absent, mode)).collect::<Result<Vec<_>>>()?;
    if ctx.g.format == Format::Json {
        ctx.emit_json(json!({ "distance": if unwrapped { "unwrapped" } else { "torus" }, "rows": rows }))?;
    } else if rows.len() == 1 {
        ctx.emit(&format!("{}\n", rows[0]["text"].as_str().unwrap_or_default()))?;
    } else {
        let mut t = String::from("Scheme | Degree | Distance\n");
        for r in &rows {
            let (d, l) = r["text"].as_str().unwrap_or_default().split_once(", ").unwrap_or_default();
            t.push_str(&format!("{} | {} | {}\n", r["label"].as_str().unwrap_or_default(), d, l));
        }
        ctx.emit(&t)?;
    }
    Ok(EXIT_OK)
}

fn cmd_route(ctx: &mut Ctx) -> Result<i32> {
    let code = ctx.code()?;
    let s = ctx.schedule(&code)?;
    let g = extract_couplers_with(&s, &code, &AbsentSiteMap::none(), DistanceMode::Torus)?;
    let r = route_multitier(&g, ctx.g.seed)?;
    if !validate_routing(&g, &r) {
        return Err(Error::Routing("routed paths failed validation".into()));
    }
    if ctx.g.format == Format::Json {
        ctx.emit_json(json!({ "report": r.report, "paths": r.paths }))?;
    } else {
        ctx.emit(&path_dump(&r))?;
    }
    Ok(EXIT_OK)
}

fn cmd_emit(ctx: &mut Ctx, rounds: usize, noise: NoiseParams, absent: &AbsentSiteMap) -> Result<i32> {
    let code = ctx.code()?;
    let s = ctx.schedule(&code)?;
    let doc = emit_circuit(&code, &s, absent, rounds, noise)?;
    if ctx.g.format == Format::Json {
        ctx.emit_json(json!({
            "num_qubits": doc.num_qubits, "measurements": doc.measurements,
            "detectors": doc.detectors, "observables": doc.observables, "text": doc.text,
        }))?;
    } else {
        ctx.emit(&doc.text)?;
    }
    if ctx.g.out.is_some() {
        let _ = writeln!(
            ctx.err,
            "wrote {} qubits, {} detectors, {} observables",
            doc.num_qubits, doc.detectors, doc.observables
        );
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_labels_parse() {
        assert_eq!(parse_qubit("L(0,1)").unwrap(), QubitId::new(0, 1, Role::L));
        assert_eq!(parse_qubit("Z( 2, 3 )").unwrap(), QubitId::new(2, 3, Role::Z));
        assert!(parse_qubit("Q(0,0)").is_err());
        assert!(parse_qubit("L0,0").is_err());
    }

    #[test]
    fn missing_code_is_input_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["louvre", "build"], &mut o, &mut e), EXIT_INPUT);
        assert!(String::from_utf8(e).unwrap().contains("--code"));
    }
}
