//! Command-line driver: `verify-model`, `solve`, `diagnose`, `bench-appendix`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::appendix_bench::{bump_scaling, trace_scaling, BumpFamily, ScalingCheck, TraceExample};
use crate::config::RunConfig;
use crate::diagnostics::{
    default_ls_slack, find_clean_intervals, fit_shift, fit_tail_decay, holder_estimate, lewy_stampacchia_check,
    monotonicity_defect, stickiness_check, Side, StickinessParams,
};
use crate::discretize::{Interval, Profile};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::io::{energy_trace_csv, obstacle_csv, profile_csv, read_profile_csv, tail_csv, RunDir, RunManifest};
use crate::model::{verify_model, ProblemSpec, ValidationReport};
use crate::obstacles::{build_obstacles_on, BandPolicy, ObstaclePair};
use crate::solver::{continuation_run_with, limit_check, RunOptions, SolveResult, StageRecord};

#[derive(Debug, Parser)]
#[command(name = "nlhet", version, about = "Heteroclinic layers of nonlocal Peierls-Nabarro type equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the structural hypotheses of the configured model.
    VerifyModel {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Run the continuation and write profile, traces, obstacles and diagnostics.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Restart after the last stage dumped in `--out`.
        #[arg(long)]
        resume: bool,
    },
    /// Run diagnostics on a dumped profile.
    Diagnose {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        checks: Vec<Check>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        x1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x2: Option<f64>,
    },
    /// Norm scalings of the counterexample families.
    BenchAppendix {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    CleanIntervals,
    LewyStampacchia,
    Stickiness,
    Holder,
    TailDecay,
    Limit,
    Monotone,
}

/// Process exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::Parse { .. }
        | Error::Config(_)
        | Error::Precondition(_)
        | Error::GridMismatch(_)
        | Error::Domain(_)
        | Error::Clause { .. }
        | Error::InvalidPair { .. } => 2,
        Error::NonConvergence { .. }
        | Error::Stagnation { .. }
        | Error::EnergyIncrease { .. }
        | Error::Resolution(_)
        | Error::Solver { .. }
        | Error::DegenerateFit(_) => 1,
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    let outcome = match cli.command {
        Command::VerifyModel { config, out, samples } => cmd_verify_model(&config, out.as_deref(), samples),
        Command::Solve { config, out, resume } => cmd_solve(&config, &out, resume),
        Command::Diagnose {
            profile,
            config,
            checks,
            out,
            x1,
            x2,
        } => cmd_diagnose(&profile, &config, &checks, out.as_deref(), x1.zip(x2)),
        Command::BenchAppendix { config, out } => cmd_bench_appendix(&config, out.as_deref()),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("NLHET_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("NLHET_THREADS = {v:?} is not a positive integer")))?;
    // a pool already built by an earlier call in this process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn model_hash(spec: &ProblemSpec) -> String {
    let text = serde_json::to_string(spec).expect("problem serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn manifest(command: &str, cfg: &RunConfig, spec: &ProblemSpec) -> RunManifest {
    let digest = cfg.digest();
    RunManifest {
        run_id: format!("{command}-{}", &digest[..12]),
        command: command.to_string(),
        config_digest: digest,
        model_hash: model_hash(spec),
        outputs: Vec::new(),
        verdicts: BTreeMap::new(),
    }
}

fn verdict(pass: bool) -> Value {
    Value::from(if pass { "pass" } else { "fail" })
}

fn print_validation(report: &ValidationReport) {
    for c in &report.checks {
        let status = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "skipped",
        };
        let at = c.worst_at.map_or(String::new(), |x| format!(" at {x:.6}"));
        println!("{status:>7}  {:<28} margin {:+.6e}{at}  ({})", c.name, c.margin, c.description);
    }
    for d in &report.defaulted {
        println!("defaulted: {d}");
    }
}

fn cmd_verify_model(config: &Path, out: Option<&Path>, samples: usize) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.problem()?;
    let report = verify_model(&spec, samples);
    print_validation(&report);
    let pass = report.all_pass();
    if let Some(dir) = out {
        let mut run = RunDir::open(dir)?;
        run.write_json("validation.json", &report)?;
        let mut m = manifest("verify-model", &cfg, &spec);
        for c in &report.checks {
            let v = match c.passed {
                Some(p) => verdict(p),
                None => Value::from("skipped"),
            };
            m.verdicts.insert(c.name.to_string(), v);
        }
        run.finish(m)?;
    }
    if !pass {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        eprintln!("hypotheses violated: {}", names.join(", "));
    }
    Ok(pass)
}

#[derive(Debug, Serialize, Deserialize)]
struct StageDump {
    config_digest: String,
    record: StageRecord,
}

fn stage_name(index: usize) -> String {
    format!("stages/stage_{index:03}")
}

/// Highest stage with both dumps present, its record and profile, and the
/// records of all earlier stages.
fn load_resume_point(root: &Path, digest: &str) -> Result<Option<(Vec<StageRecord>, Profile)>> {
    let mut records = Vec::new();
    let mut profile = None;
    for index in 0.. {
        let base = root.join(stage_name(index));
        let (json, csv) = (base.with_extension("json"), base.with_extension("csv"));
        if !json.exists() || !csv.exists() {
            break;
        }
        let dump: StageDump = serde_json::from_str(&std::fs::read_to_string(&json)?)
            .map_err(|e| Error::Config(format!("unreadable stage dump {}: {e}", json.display())))?;
        if dump.config_digest != digest {
            return Err(Error::Config(format!(
                "{} was written for a different configuration",
                json.display()
            )));
        }
        records.push(dump.record);
        profile = Some(read_profile_csv(&std::fs::read_to_string(&csv)?)?.0);
    }
    Ok(profile.map(|p| (records, p)))
}

fn reflect_pair(pair: ObstaclePair) -> ObstaclePair {
    let neg = |p: &Profile| p.map(|v| -v);
    ObstaclePair {
        phi: neg(&pair.psi),
        psi: neg(&pair.phi),
        upper: neg(&pair.lower),
        lower: neg(&pair.upper),
        relaxed: pair.relaxed,
    }
}

fn cmd_solve(config: &Path, out: &Path, resume: bool) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.problem()?;
    let report = verify_model(&spec, 2000);
    if !report.all_pass() {
        print_validation(&report);
        let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
        eprintln!("model hypotheses violated: {}", names.join(", "));
        return Ok(false);
    }
    let grid = cfg.grid()?;
    let obstacle_cfg = cfg.obstacles(&spec)?;
    let solver_cfg = cfg.solver()?;
    let schedule = cfg.continuation.clone();
    let stages = schedule.stages()?;
    let digest = cfg.digest();
    let mut run = RunDir::open(out)?;
    let qsharp = EnergyModel::new(&spec, grid)?.qsharp().clone();

    let mut earlier = Vec::new();
    let mut opts = RunOptions::default();
    if resume {
        match load_resume_point(out, &digest)? {
            Some((records, profile)) => {
                let next = records.len().min(stages.len() - 1);
                earlier = records[..next].to_vec();
                println!("resuming at stage {next} of {}", stages.len());
                opts.resume = Some((next, profile));
            }
            None => println!("no stage dumps in {}; starting from stage 0", out.display()),
        }
    }
    let mut dump_error = None;
    let mut on_stage = |record: &StageRecord, profile: &Profile| -> Result<()> {
        let base = stage_name(record.stage.index);
        let written = profile_csv(profile, &qsharp).and_then(|text| {
            run.write(&format!("{base}.csv"), text.as_bytes())?;
            run.write_json(
                &format!("{base}.json"),
                &StageDump {
                    config_digest: digest.clone(),
                    record: *record,
                },
            )
        });
        if let Err(e) = written {
            let msg = e.to_string();
            dump_error = Some(e);
            return Err(Error::Io(std::io::Error::other(msg)));
        }
        Ok(())
    };
    opts.on_stage = Some(&mut on_stage);
    let res = continuation_run_with(&spec, grid, &obstacle_cfg, &schedule, &solver_cfg, opts);
    if let Some(e) = dump_error {
        return Err(e);
    }
    let res = res?;
    let mut trace = earlier;
    trace.extend(res.trace.iter().cloned());
    for r in &trace {
        println!(
            "stage {:>2}  eta {:<8.1e} mu {:<8.1e} iters {:>6}  E {:>14.8}  residual {:.3e}  contacts {}",
            r.stage.index, r.stage.eta, r.stage.mu, r.iterations, r.energy.total, r.residual_max, r.contact_count
        );
    }

    run.write("profile.csv", profile_csv(&res.profile, &qsharp)?.as_bytes())?;
    run.write("energy_trace.csv", energy_trace_csv(&res.iterations).as_bytes())?;
    let obstacle_eta = trace.iter().rev().find(|r| r.stage.constrained).map(|r| r.stage.eta);
    if let Some(eta) = obstacle_eta {
        let (canon, flipped) = spec.canonical();
        let pair = build_obstacles_on(&canon, grid, &obstacle_cfg, eta, BandPolicy::Relaxed)?;
        let pair = if flipped { reflect_pair(pair) } else { pair };
        run.write("obstacles.csv", obstacle_csv(&pair).as_bytes())?;
    }
    let diag = solve_diagnostics(&cfg, &spec, &res)?;
    if let Some(points) = diag.tail_points {
        run.write("tail.csv", tail_csv(&points).as_bytes())?;
    }
    run.write_json("diagnostics.json", &diag.report)?;

    let mut m = manifest("solve", &cfg, &spec);
    let limit_pass = res.limit.as_ref().is_some_and(|l| l.passed());
    m.verdicts.insert("converged".into(), verdict(res.converged));
    m.verdicts.insert("limit".into(), verdict(limit_pass));
    m.verdicts.insert("contact_free".into(), verdict(res.contact.is_empty()));
    m.verdicts.insert("residual_max".into(), json!(res.residual_max));
    m.verdicts.insert(
        "stages".into(),
        Value::Array(
            trace
                .iter()
                .map(|r| {
                    json!({
                        "stage": r.stage.index,
                        "eta": r.stage.eta,
                        "mu": r.stage.mu,
                        "iterations": r.iterations,
                        "energy": r.energy.total,
                        "residual_max": r.residual_max,
                        "contact_count": r.contact_count,
                    })
                })
                .collect(),
        ),
    );
    if let Some((shift, distance)) = diag.layer {
        m.verdicts.insert("layer_match".into(), verdict(distance <= LAYER_TOL));
        m.verdicts.insert("layer_distance".into(), json!(distance));
        m.verdicts.insert("layer_shift".into(), json!(shift));
        println!("explicit layer: shift {shift:.4}, sup distance {distance:.4e}");
    }
    run.finish(m)?;
    let layer_ok = diag.layer.is_none_or(|(_, d)| d <= LAYER_TOL);
    Ok(res.converged && limit_pass && layer_ok)
}

const LAYER_TOL: f64 = 0.05;

struct SolveDiagnostics {
    report: Value,
    tail_points: Option<Vec<(f64, f64)>>,
    layer: Option<(f64, f64)>,
}

fn solve_diagnostics(cfg: &RunConfig, spec: &ProblemSpec, res: &SolveResult) -> Result<SolveDiagnostics> {
    let q = &res.profile;
    let g = q.grid;
    let window = Interval::new(-g.half_width, g.half_width);
    let wells = [spec.potential.zeta1, spec.potential.zeta2];
    let clean = find_clean_intervals(q, cfg.diagnostics.rho, &window, &wells)?;
    let left = fit_tail_decay(q, Side::Left).ok();
    let right = fit_tail_decay(q, Side::Right).ok();
    let layer = spec
        .explicit_layer_rate()
        .map(|_| fit_shift(q, |x| spec.explicit_layer(x).expect("layer exists"), 5.0));
    let report = json!({
        "limit": res.limit,
        "contact": res.contact,
        "clean_intervals": clean,
        "tail_fit": {
            "left": left.as_ref().map(|f| (f.fitted_exponent, f.r_squared)),
            "right": right.as_ref().map(|f| (f.fitted_exponent, f.r_squared)),
            "expected": -2.0 * spec.kernel.s,
        },
        "monotonicity_defect": monotonicity_defect(q),
        "layer": layer.map(|(c, d)| json!({"shift": c, "distance": d})),
    });
    Ok(SolveDiagnostics {
        report,
        tail_points: right.map(|f| f.points),
        layer,
    })
}

struct CheckResult {
    name: &'static str,
    pass: Option<bool>,
    detail: Value,
}

fn cmd_diagnose(
    profile: &Path,
    config: &Path,
    checks: &[Check],
    out: Option<&Path>,
    pair_points: Option<(f64, f64)>,
) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.problem()?;
    let (q, qsharp) = read_profile_csv(&std::fs::read_to_string(profile)?)?;
    let model = EnergyModel::with_reference(&spec, qsharp)?;
    let g = q.grid;
    let d = &cfg.diagnostics;
    let window = Interval::new(-g.half_width, g.half_width);
    let wells = [spec.potential.zeta1, spec.potential.zeta2];
    let mut results = Vec::new();
    for check in checks {
        let r = match check {
            Check::CleanIntervals => {
                let rep = find_clean_intervals(&q, d.rho, &window, &wells)?;
                let left = rep.intervals.iter().any(|c| c.lo < 0.0 && c.well == q.left);
                let right = rep.intervals.iter().any(|c| c.hi > 0.0 && c.well == q.right);
                CheckResult {
                    name: "clean_intervals",
                    pass: Some(left && right),
                    detail: serde_json::to_value(&rep).expect("report serializes"),
                }
            }
            Check::LewyStampacchia => {
                let ocfg = cfg.obstacles(&spec)?;
                let (canon, flipped) = spec.canonical();
                let pair = build_obstacles_on(&canon, g, &ocfg, d.eta, BandPolicy::Relaxed)?;
                let pair = if flipped { reflect_pair(pair) } else { pair };
                let slack = d.ls_slack.unwrap_or_else(|| default_ls_slack(&model));
                let mut ivs = vec![
                    Interval::new(-g.half_width, ocfg.b1),
                    Interval::new(ocfg.b1, ocfg.b2),
                    Interval::new(ocfg.b2, g.half_width),
                ];
                if let Some((a, b)) = pair_points {
                    ivs.push(Interval::new(a, b));
                }
                let reports = ivs
                    .iter()
                    .map(|iv| lewy_stampacchia_check(&model, &q, &pair, d.eta, d.mu, iv, slack))
                    .collect::<Result<Vec<_>>>()?;
                CheckResult {
                    name: "lewy_stampacchia",
                    pass: Some(reports.iter().all(|r| r.pass)),
                    detail: serde_json::to_value(&reports).expect("report serializes"),
                }
            }
            Check::Stickiness => {
                let (x1, x2) = pair_points
                    .ok_or_else(|| Error::Config("stickiness needs --x1 and --x2".into()))?;
                let ocfg = cfg.obstacles(&spec)?;
                let mut params = StickinessParams::new(d.rho, ocfg.r);
                params.tol = d.stickiness_tol;
                let rep = stickiness_check(&model, &q, x1, x2, d.eta, d.mu, &params)?;
                CheckResult {
                    name: "stickiness",
                    pass: Some(rep.pass),
                    detail: serde_json::to_value(&rep).expect("report serializes"),
                }
            }
            Check::Holder => {
                let iv = match pair_points {
                    Some((a, b)) => Interval::new(a, b),
                    None => Interval::new(-g.half_width, g.half_width),
                };
                let v = holder_estimate(&q, &iv, d.holder_alpha)?;
                CheckResult {
                    name: "holder",
                    pass: None,
                    detail: json!({"alpha": d.holder_alpha, "lo": iv.lo, "hi": iv.hi, "estimate": v}),
                }
            }
            Check::TailDecay => {
                let expected = -2.0 * spec.kernel.s;
                let fits = [fit_tail_decay(&q, Side::Left)?, fit_tail_decay(&q, Side::Right)?];
                let pass = fits
                    .iter()
                    .all(|f| (f.fitted_exponent - expected).abs() <= 0.15 * expected.abs());
                CheckResult {
                    name: "tail_decay",
                    pass: Some(pass),
                    detail: json!({
                        "expected": expected,
                        "left": fits[0].fitted_exponent,
                        "right": fits[1].fitted_exponent,
                        "r_squared": [fits[0].r_squared, fits[1].r_squared],
                    }),
                }
            }
            Check::Limit => {
                let l = limit_check(&q, &spec);
                CheckResult {
                    name: "limit",
                    pass: Some(l.passed()),
                    detail: serde_json::to_value(&l).expect("report serializes"),
                }
            }
            Check::Monotone => CheckResult {
                name: "monotone",
                pass: None,
                detail: json!({"defect": monotonicity_defect(&q)}),
            },
        };
        let status = match r.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "measured",
        };
        println!("{status:>8}  {}  {}", r.name, r.detail_summary());
        results.push(r);
    }
    let pass = results.iter().all(|r| r.pass != Some(false));
    if let Some(dir) = out {
        let mut run = RunDir::open(dir)?;
        let body: BTreeMap<&str, &Value> = results.iter().map(|r| (r.name, &r.detail)).collect();
        run.write_json("diagnostics.json", &body)?;
        let mut m = manifest("diagnose", &cfg, &spec);
        for r in &results {
            let v = match r.pass {
                Some(p) => verdict(p),
                None => Value::from("measured"),
            };
            m.verdicts.insert(r.name.to_string(), v);
        }
        run.finish(m)?;
    }
    Ok(pass)
}

impl CheckResult {
    fn detail_summary(&self) -> String {
        match &self.detail {
            Value::Object(map) => map
                .iter()
                .filter(|(_, v)| v.is_number() || v.is_boolean())
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" "),
            Value::Array(items) => format!("{} subintervals", items.len()),
            _ => String::new(),
        }
    }
}

fn print_scaling(c: &ScalingCheck, drift: f64) {
    println!(
        "{:>4}  {}: expected ratios l2 {:.4} hs {:.4}, worst deviation {:.3e} (tol {}), drift {:.3e}",
        if c.pass && drift < 0.01 { "pass" } else { "FAIL" },
        c.family,
        c.expected_l2,
        c.expected_hs,
        c.worst,
        c.tol,
        drift
    );
}

fn cmd_bench_appendix(config: &Path, out: Option<&Path>) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let b = &cfg.bench;
    let families = b
        .s_values
        .iter()
        .map(|&s| BumpFamily::new(s).map(|f| f.with_cells(b.cells)))
        .collect::<Result<Vec<_>>>()?;
    let ks: Vec<u32> = (0..=b.k_max).collect();
    let mut checks = Vec::new();
    for fam in &families {
        let coarse = bump_scaling(fam, &ks, b.bump_tol)?;
        let fine = bump_scaling(&fam.with_cells(2 * fam.cells), &ks, b.bump_tol)?;
        let drift = coarse.ratio_drift(&fine);
        print_scaling(&coarse, drift);
        checks.push((format!("bump_s{}", fam.s), coarse, drift));
    }
    let ex = TraceExample::default();
    let tks: Vec<i32> = (0..=b.trace_k_max).collect();
    let coarse = trace_scaling(&ex, &tks, b.trace_tol)?;
    let fine = trace_scaling(&ex.refined(2), &tks, b.trace_tol)?;
    let drift = coarse.ratio_drift(&fine);
    print_scaling(&coarse, drift);
    checks.push(("trace".to_string(), coarse, drift));
    let pass = checks.iter().all(|(_, c, d)| c.pass && *d < 0.01);
    if let Some(dir) = out {
        let mut run = RunDir::open(dir)?;
        let mut m = RunManifest {
            run_id: format!("bench-appendix-{}", &cfg.digest()[..12]),
            command: "bench-appendix".into(),
            config_digest: cfg.digest(),
            ..RunManifest::default()
        };
        for (name, c, d) in &checks {
            run.write(&format!("{name}.csv"), c.to_csv().as_bytes())?;
            m.verdicts.insert(name.clone(), verdict(c.pass && *d < 0.01));
            m.verdicts.insert(format!("{name}_worst"), json!(c.worst));
            m.verdicts.insert(format!("{name}_drift"), json!(d));
        }
        run.finish(m)?;
    }
    Ok(pass)
}
