use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wronski_core::labelpoly::{
    interior_labeling, lemma6_labeling, lemma7_labeling, predicted_support, validate_labeling, ArcSet,
    ArcSubsetW, Labeling,
};
use wronski_core::netcomb::{enumerate_nets, AnalyzedNet, NetClass};
use wronski_core::nettrace::{check_solution, label_drift, roundtrip_check, TraceConfig};
use wronski_core::numcore::{Plane2, Tolerances};
use wronski_core::render::{render_net_svg, render_tree_svg};
use wronski_core::solver::{random_problem, solve_shapiro, verify_theorems, ShapiroProblem, SolverConfig};

use crate::LabelMode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] wronski_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 1,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub seed: u64,
    pub tol: Tolerances,
}

impl Context {
    fn solver(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            seed,
            tolerances: self.tol,
            ..Default::default()
        }
    }
}

pub struct Outcome {
    pub result: Value,
    pub summary: String,
    pub passed: bool,
}

/// The record written for every command: tool, version, seed, tolerances
/// and the command's own result.
pub fn envelope(command: &str, seed: u64, tol: &Tolerances, outcome: &Outcome) -> Value {
    json!({
        "tool": "wronski",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "tolerances": tol,
        "passed": outcome.passed,
        "result": outcome.result,
    })
}

fn check_degree(d: usize, lo: usize, hi: usize) -> Result<()> {
    if !(lo..=hi).contains(&d) {
        return Err(CliError::Input(format!("degree must lie in {lo}..={hi}, got {d}")));
    }
    Ok(())
}

fn problem(ctx: &Context, d: usize, points: Option<&str>) -> Result<ShapiroProblem> {
    match points {
        Some(s) => {
            let pts = s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Input(format!("cannot parse point {p:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let p = ShapiroProblem { d, points: pts };
            p.validate(ctx.tol.point_separation)?;
            Ok(p)
        }
        None => Ok(random_problem(d, &mut ChaCha8Rng::seed_from_u64(ctx.seed))),
    }
}

/// Accepts `1-2,3-4` or net JSON.
pub fn parse_net(s: &str) -> Result<NetClass> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(NetClass::from_json(s)?);
    }
    let pairs = s
        .split(',')
        .map(|pair| {
            let (a, b) = pair
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::Input(format!("expected a pair like 1-2, got {pair:?}")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Input(format!("bad vertex {x:?}")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NetClass::new(pairs.len() + 1, pairs)?)
}

pub fn nets(_ctx: &Context, d: usize, svg_dir: Option<&Path>) -> Result<Outcome> {
    check_degree(d, 3, 8)?;
    let nets = enumerate_nets(d)?;
    let mut files = Vec::new();
    if let Some(dir) = svg_dir {
        std::fs::create_dir_all(dir)?;
        for (i, net) in nets.iter().enumerate() {
            let analyzed = AnalyzedNet::new(net)?;
            let name = format!("net_d{d}_{i:04}.svg");
            std::fs::write(dir.join(&name), render_net_svg(&analyzed))?;
            files.push(name);
            let name = format!("tree_d{d}_{i:04}.svg");
            std::fs::write(dir.join(&name), render_tree_svg(&analyzed.s_hat))?;
            files.push(name);
        }
    }
    let mut summary = format!("{} nets of degree {d}\n", nets.len());
    for net in &nets {
        let _ = writeln!(summary, "  {net}");
    }
    if !files.is_empty() {
        let _ = writeln!(summary, "wrote {} SVG files", files.len());
    }
    Ok(Outcome {
        result: json!({ "d": d, "count": nets.len(), "nets": nets, "svgFiles": files }),
        summary,
        passed: true,
    })
}

fn parse_w(net: &AnalyzedNet, s: &str) -> Result<ArcSubsetW> {
    Ok(ArcSubsetW::new(net, ArcSet::parse(s)?)?)
}

pub fn label(_ctx: &Context, net: &str, mode: LabelMode, w: Option<&str>, chain: Option<&str>) -> Result<Outcome> {
    let net = AnalyzedNet::new(&parse_net(net)?)?;
    let lab: Labeling = match mode {
        LabelMode::Interior => interior_labeling(&net)?,
        LabelMode::Lemma6 => {
            let w = w.ok_or_else(|| CliError::Input("lemma6 needs --w".into()))?;
            lemma6_labeling(&net, &parse_w(&net, w)?)?
        }
        LabelMode::Lemma7 => {
            let chain = chain.ok_or_else(|| CliError::Input("lemma7 needs --chain".into()))?;
            let sets = chain
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_w(&net, s))
                .collect::<Result<Vec<_>>>()?;
            lemma7_labeling(&net, &sets)?
        }
    };
    let violations: Vec<String> = validate_labeling(&net, &lab).iter().map(|v| v.to_string()).collect();
    let support = predicted_support(&net, &lab);
    let mut summary = format!("labeling of {} ({mode:?})\n", net.net);
    for (e, v) in lab.values() {
        let _ = writeln!(summary, "  {e:>6}  {v:.12}");
    }
    let _ = writeln!(summary, "support {support}");
    let _ = writeln!(
        summary,
        "{}",
        if violations.is_empty() { "valid".to_string() } else { violations.join("\n") }
    );
    Ok(Outcome {
        result: json!({
            "labeling": lab,
            "support": support.iter().map(|k| format!("t{k}")).collect::<Vec<_>>(),
            "violations": violations,
        }),
        passed: violations.is_empty(),
        summary,
    })
}

pub fn solve(ctx: &Context, d: usize, points: Option<&str>) -> Result<Outcome> {
    check_degree(d, 2, 8)?;
    let problem = problem(ctx, d, points)?;
    let start = Instant::now();
    let set = solve_shapiro(&problem, &ctx.solver(ctx.seed))?;
    let report = verify_theorems(&problem, &set, &ctx.tol);
    let mut summary = format!(
        "d={d} points {:?}\n{} solutions (expected {}), {} real, max residual {:.2e}, {:.2?}\n",
        problem.points,
        set.solutions.len(),
        report.expected_count,
        report.real_count,
        report.max_residual,
        start.elapsed()
    );
    for f in &report.failures {
        let _ = writeln!(summary, "FAIL {f}");
    }
    Ok(Outcome {
        result: json!({
            "problem": problem,
            "solutions": set,
            "theorems": report,
        }),
        passed: report.passed,
        summary,
    })
}

pub fn classify(ctx: &Context, input: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(input)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let body = value.get("result").unwrap_or(&value);
    let problem: ShapiroProblem = serde_json::from_value(body.get("problem").cloned().unwrap_or(Value::Null))
        .map_err(|e| CliError::Input(format!("problem: {e}")))?;
    problem.validate(ctx.tol.point_separation)?;
    let planes: Vec<Plane2> = match body.get("solutions").and_then(|s| s.get("solutions")) {
        Some(Value::Array(items)) => items
            .iter()
            .map(|s| {
                serde_json::from_value(s.get("plane").cloned().unwrap_or(Value::Null))
                    .map_err(|e| CliError::Input(format!("plane: {e}")))
            })
            .collect::<Result<_>>()?,
        _ => return Err(CliError::Input("no solutions array in input".into())),
    };
    let cfg = TraceConfig::default();
    let checks: Vec<_> = planes.iter().map(|p| check_solution(p, &problem, &ctx.tol, &cfg)).collect();
    let mut summary = String::new();
    for (i, c) in checks.iter().enumerate() {
        match (&c.net, &c.error) {
            (_, Some(e)) => {
                let _ = writeln!(summary, "solution {i}: error: {e}");
            }
            (Some(net), None) => {
                let _ = writeln!(summary, "solution {i}: {net}");
            }
            _ => {}
        }
    }
    let passed = checks.iter().all(|c| c.error.is_none());
    Ok(Outcome {
        result: json!({ "problem": problem, "checks": checks }),
        summary,
        passed,
    })
}

pub fn roundtrip(ctx: &Context, d: usize, points: Option<&str>, step: f64) -> Result<Outcome> {
    check_degree(d, 3, 5)?;
    let problem = problem(ctx, d, points)?;
    let cfg = TraceConfig::with_step(step);
    cfg.validate()?;
    let start = Instant::now();
    let report = roundtrip_check(&problem, &ctx.solver(ctx.seed), &cfg)?;
    let mut summary = format!(
        "d={d} points {:?}\n{} solutions, {} distinct nets, {:.2?}\n",
        problem.points,
        report.theorems.found_count,
        if report.nets_exhaustive { "all" } else { "not all" },
        start.elapsed()
    );
    for f in &report.failures {
        let _ = writeln!(summary, "FAIL {f}");
    }
    let _ = writeln!(summary, "{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(Outcome {
        passed: report.passed,
        result: serde_json::to_value(&report).expect("report serializes"),
        summary,
    })
}

pub fn verify(ctx: &Context, d: usize, instances: usize, drift: bool) -> Result<Outcome> {
    check_degree(d, 3, 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::new();
    let mut summary = String::new();
    let mut all = true;
    for i in 0..instances {
        let problem = random_problem(d, &mut rng);
        let solver = ctx.solver(ctx.seed.wrapping_add(i as u64));
        let start = Instant::now();
        let report = roundtrip_check(&problem, &solver, &TraceConfig::default())?;
        let mut failures = report.failures.clone();
        let mut max_drift: f64 = 0.0;
        if drift {
            let set = solve_shapiro(&problem, &solver)?;
            for s in &set.solutions {
                match label_drift(&s.plane, &problem, &[1e-2, 1e-3, 1e-4], &ctx.tol) {
                    Ok(x) => max_drift = max_drift.max(x),
                    Err(e) => failures.push(format!("drift: {e}")),
                }
            }
            if max_drift >= 1e-6 {
                failures.push(format!("label drift {max_drift:e} under step refinement"));
            }
        }
        let ok = failures.is_empty();
        all &= ok;
        let elapsed = start.elapsed();
        let _ = writeln!(
            summary,
            "instance {i}: {} ({} solutions, {:.2?})",
            if ok { "pass" } else { "FAIL" },
            report.theorems.found_count,
            elapsed
        );
        for f in &failures {
            let _ = writeln!(summary, "  {f}");
        }
        rows.push(json!({
            "points": problem.points,
            "passed": ok,
            "solutions": report.theorems.found_count,
            "maxResidual": report.theorems.max_residual,
            "labelDrift": if drift { Some(max_drift) } else { None },
            "failures": failures,
            "elapsedMs": elapsed.as_millis() as u64,
        }));
    }
    let _ = writeln!(summary, "{}", if all { "PASS" } else { "FAIL" });
    Ok(Outcome {
        result: json!({ "d": d, "instances": rows }),
        summary,
        passed: all,
    })
}
