//! Subcommand definitions and their implementations.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use soap_sched_core::analytic::{
    hill_valley_response, mean_response, pathological_ratio_approx, ratio_bound,
    ratio_bound_thresholds,
};
use soap_sched_core::hillvalley::decompose;
use soap_sched_core::props::verify;
use soap_sched_core::rank::{gittins_rank, mserpt_rank, policy_rank, serpt_rank};
use soap_sched_core::sim::{compare_policies, simulate, simulate_traced, TraceEvent};
use soap_sched_core::{DiscreteDist, Mg1, PolicySpec, SimConfig, SimResult};

use crate::distspec::DistSpec;
use crate::output::{emit, json_document, num, Cell, Format, Manifest, Table};
use crate::{worker_pool, CliError, EXIT_INVARIANT, EXIT_OK};

#[derive(Debug, Parser)]
#[command(
    name = "soap-sched",
    version,
    about = "Rank-based scheduling in the M/G/1 queue"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate Gittins, SERPT and M-SERPT ranks at atoms and midpoints.
    RankDump(RankDumpArgs),
    /// Mean response time from the hill/valley formulas.
    Analyze(AnalyzeArgs),
    /// Simulate one policy.
    Simulate(SimulateArgs),
    /// Simulate several policies side by side.
    Compare(CompareArgs),
    /// Tabulate the M-SERPT/Gittins ratio bound against load.
    RatioCurve(RatioCurveArgs),
    /// Ratio of M-SERPT to Gittins on the pathological distribution.
    PathologicalSweep(SweepArgs),
    /// Run the randomized invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Distribution spec: a JSON file path or inline JSON.
    #[arg(long)]
    pub dist: String,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct LoadArgs {
    /// Arrival rate.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Load; the arrival rate becomes rho / E[X].
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RankDumpArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Interior sample points per segment between knots.
    #[arg(long, default_value_t = 4)]
    pub midpoints: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    pub load: LoadArgs,
    #[arg(long, default_value = "mserpt")]
    pub policy: String,
    /// Include the hill/valley decomposition in JSON output.
    #[arg(long)]
    pub decomposition: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Completions measured after warmup.
    #[arg(long, default_value_t = 1_000_000)]
    pub jobs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra completions discarded first, as a fraction of --jobs.
    #[arg(long, default_value_t = 0.1)]
    pub warmup: f64,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    pub load: LoadArgs,
    #[arg(long)]
    pub policy: String,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write an event log CSV (time,event,job_id,age,rank).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    pub load: LoadArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "gittins,serpt,mserpt,fb,fcfs"
    )]
    pub policies: Vec<String>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Give each policy its own random stream instead of common random numbers.
    #[arg(long)]
    pub independent: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RatioCurveArgs {
    /// Loads to tabulate, each in [0, 1).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Evenly spaced loads k/points for k < points, used without --grid.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    pub deltas: Vec<f64>,
    /// Also simulate both policies where the budget allows.
    #[arg(long)]
    pub simulate: bool,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Largest run length; rows needing more are reported analytic-only.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_jobs: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// A finished command: rendered output plus exit status.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub text: String,
    pub exit: i32,
    pub warnings: Vec<String>,
}

impl Rendered {
    fn ok(text: String) -> Self {
        Self {
            text,
            exit: EXIT_OK,
            warnings: Vec::new(),
        }
    }
}

fn build_mg1(dist: DiscreteDist, load: &LoadArgs) -> Result<Mg1, CliError> {
    let mg1 = match (load.lambda, load.rho) {
        (Some(l), None) => Mg1::new(dist, l)?,
        (None, Some(r)) => Mg1::with_load(dist, r)?,
        _ => {
            return Err(CliError::Input(
                "give exactly one of --lambda and --rho".into(),
            ))
        }
    };
    Ok(mg1)
}

fn parse_policy(s: &str) -> Result<PolicySpec, CliError> {
    Ok(s.parse::<PolicySpec>()?)
}

fn load_params(load: &LoadArgs, mg1: &Mg1) -> Value {
    json!({ "lambda": mg1.lambda(), "rho": mg1.rho(), "given": if load.lambda.is_some() { "lambda" } else { "rho" } })
}

pub fn rank_dump(args: &RankDumpArgs) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let spec = DistSpec::load(&args.dist.dist)?;
    let dist = spec.build()?;
    let (g, _) = gittins_rank(&dist);
    let s = serpt_rank(&dist);
    let m = mserpt_rank(&dist);
    let mut t = Table::new(vec!["age", "rank_gittins", "rank_serpt", "rank_mserpt"]);
    let k = args.midpoints;
    for w in dist.knots().windows(2) {
        for i in 0..=k {
            let a = w[0] + (w[1] - w[0]) * i as f64 / (k + 1) as f64;
            t.push(vec![
                Cell::Num(a),
                Cell::Num(g.value(a)),
                Cell::Num(s.value(a)),
                Cell::Num(m.value(a)),
            ]);
        }
    }
    let manifest = Manifest::new("rank-dump", json!({ "dist": spec, "midpoints": k }), None)
        .finish(start.elapsed());
    Ok(Rendered::ok(
        t.render(args.out.format.unwrap_or(Format::Csv), &manifest),
    ))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let spec = DistSpec::load(&args.dist.dist)?;
    let mg1 = build_mg1(spec.build()?, &args.load)?;
    let policy = parse_policy(&args.policy)?;
    let r = mean_response(&mg1, &policy)?;
    let mut params =
        json!({ "dist": spec, "policy": policy.name(), "decomposition": args.decomposition });
    params["load"] = load_params(&args.load, &mg1);
    let manifest = Manifest::new("analyze", params, None).finish(start.elapsed());
    let text = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = json!({
                "policy": policy.name(),
                "rho": mg1.rho(),
                "lambda": mg1.lambda(),
                "mean_waiting": r.mean_waiting,
                "mean_residence": r.mean_residence,
                "mean_response": r.mean_response,
                "exact": r.exact,
            });
            if args.decomposition {
                if let Ok(f) = policy_rank(&policy, mg1.dist()) {
                    let d = decompose(&f);
                    v["decomposition"] = json!({ "hills": d.hills(), "valleys": d.valleys() });
                }
            }
            json_document(&manifest, v)
        }
        Format::Csv => {
            let mut t = Table::new(vec![
                "size",
                "prob",
                "mean_waiting",
                "mean_residence",
                "mean_response",
                "exact",
            ]);
            for s in &r.per_size {
                t.push(vec![
                    Cell::Num(s.size),
                    Cell::Num(s.prob),
                    Cell::Num(s.waiting),
                    Cell::Num(s.residence),
                    Cell::Num(s.response),
                    Cell::Bool(r.exact),
                ]);
            }
            t.to_csv(&manifest)
        }
    };
    Ok(Rendered::ok(text))
}

fn sim_config(mg1: Mg1, policy: PolicySpec, s: &SimArgs) -> SimConfig {
    SimConfig {
        jobs: s.jobs,
        seed: s.seed,
        warmup: s.warmup,
        batches: s.batches,
        ..SimConfig::new(mg1, policy)
    }
}

fn sim_params(s: &SimArgs) -> Value {
    json!({ "jobs": s.jobs, "seed": s.seed, "warmup": s.warmup, "batches": s.batches })
}

fn sim_json(mg1: &Mg1, r: &SimResult) -> Value {
    json!({
        "policy": r.policy,
        "lambda": mg1.lambda(),
        "rho": mg1.rho(),
        "mean_response": r.mean_response,
        "ci_half_width": r.ci_half_width,
        "completions": r.completions,
        "seed": r.seed,
        "busy_time": r.busy_time,
        "work_done": r.work_done,
    })
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let spec = DistSpec::load(&args.dist.dist)?;
    let mg1 = build_mg1(spec.build()?, &args.load)?;
    let policy = parse_policy(&args.policy)?;
    let cfg = sim_config(mg1.clone(), policy.clone(), &args.sim);
    let r = match &args.trace {
        None => simulate(&cfg)?,
        Some(path) => {
            use std::io::Write;
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            let mut err: Option<std::io::Error> = None;
            let _ = writeln!(w, "time,event,job_id,age,rank");
            let r = simulate_traced(&cfg, |ev: TraceEvent| {
                if err.is_none() {
                    if let Err(e) = writeln!(
                        w,
                        "{},{},{},{},{}",
                        num(ev.time),
                        ev.kind.as_str(),
                        ev.job_id,
                        num(ev.age),
                        if ev.rank.is_nan() {
                            String::new()
                        } else {
                            num(ev.rank)
                        }
                    ) {
                        err = Some(e);
                    }
                }
            })?;
            if let Some(e) = err {
                return Err(CliError::Io(format!(
                    "cannot write {}: {e}",
                    path.display()
                )));
            }
            w.flush()
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            r
        }
    };
    let mut params = json!({ "dist": spec, "policy": policy.name(), "sim": sim_params(&args.sim) });
    params["load"] = load_params(&args.load, &mg1);
    let manifest = Manifest::new("simulate", params, Some(args.sim.seed)).finish(start.elapsed());
    let text = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => json_document(&manifest, sim_json(&mg1, &r)),
        Format::Csv => {
            let mut t = Table::new(vec![
                "policy",
                "lambda",
                "rho",
                "mean_response",
                "ci_half_width",
                "completions",
                "seed",
            ]);
            t.push(vec![
                Cell::Text(r.policy.into()),
                Cell::Num(mg1.lambda()),
                Cell::Num(mg1.rho()),
                Cell::Num(r.mean_response),
                Cell::Num(r.ci_half_width),
                Cell::Int(r.completions),
                Cell::Int(r.seed),
            ]);
            t.to_csv(&manifest)
        }
    };
    Ok(Rendered::ok(text))
}

/// Simulated result (absent for PS) and analytic (mean, exact) pair.
type CompareRow = (Option<SimResult>, Option<(f64, bool)>);

pub fn compare(args: &CompareArgs) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let spec = DistSpec::load(&args.dist.dist)?;
    let mg1 = build_mg1(spec.build()?, &args.load)?;
    let policies: Vec<PolicySpec> = args
        .policies
        .iter()
        .map(|p| parse_policy(p))
        .collect::<Result<_, _>>()?;
    let base = sim_config(mg1.clone(), PolicySpec::Fcfs, &args.sim);
    base.validate()?;
    let crn = !args.independent;
    let pool = worker_pool()?;
    let rows: Vec<Result<CompareRow, CliError>> = pool.install(|| {
        policies
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let sim = if *p == PolicySpec::Ps {
                    None
                } else {
                    let cfg = SimConfig {
                        policy: p.clone(),
                        seed: if crn {
                            base.seed
                        } else {
                            base.seed.wrapping_add(i as u64)
                        },
                        ..base.clone()
                    };
                    Some(simulate(&cfg)?)
                };
                let an = match mean_response(&mg1, p) {
                    Ok(r) => Some((r.mean_response, r.exact)),
                    Err(soap_sched_core::Error::Unsupported(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                Ok((sim, an))
            })
            .collect()
    });
    let mut t = Table::new(vec![
        "policy",
        "mean_response",
        "ci_half_width",
        "analytic_mean_response",
        "analytic_exact",
    ]);
    for (p, row) in policies.iter().zip(rows) {
        let (sim, an) = row?;
        t.push(vec![
            Cell::Text(p.name().into()),
            sim.as_ref()
                .map_or(Cell::Empty, |s| Cell::Num(s.mean_response)),
            sim.as_ref()
                .map_or(Cell::Empty, |s| Cell::Num(s.ci_half_width)),
            an.map_or(Cell::Empty, |a| Cell::Num(a.0)),
            an.map_or(Cell::Empty, |a| Cell::Bool(a.1)),
        ]);
    }
    let mut params = json!({
        "dist": spec,
        "policies": args.policies,
        "sim": sim_params(&args.sim),
        "common_random_numbers": crn,
    });
    params["load"] = load_params(&args.load, &mg1);
    let manifest = Manifest::new("compare", params, Some(args.sim.seed)).finish(start.elapsed());
    Ok(Rendered::ok(
        t.render(args.out.format.unwrap_or(Format::Csv), &manifest),
    ))
}

pub fn ratio_curve(args: &RatioCurveArgs) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let mut grid: Vec<f64> = match &args.grid {
        Some(g) => g.clone(),
        None => {
            if args.points == 0 {
                return Err(CliError::Input("--points must be positive".into()));
            }
            (0..args.points)
                .map(|k| k as f64 / args.points as f64)
                .collect()
        }
    };
    if let Some(bad) = grid.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(CliError::Input(format!("load {bad} is outside [0, 1)")));
    }
    let (r1, r2) = ratio_bound_thresholds();
    grid.push(r1);
    grid.push(r2);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut t = Table::new(vec!["rho", "bound"]);
    for r in &grid {
        t.push(vec![Cell::Num(*r), Cell::Num(ratio_bound(*r))]);
    }
    let manifest = Manifest::new(
        "ratio-curve",
        json!({ "grid": args.grid, "points": args.points, "thresholds": [r1, r2] }),
        None,
    )
    .finish(start.elapsed());
    Ok(Rendered::ok(
        t.render(args.out.format.unwrap_or(Format::Csv), &manifest),
    ))
}

/// Closed-form and quasi-analytic M-SERPT/Gittins ratios on the
/// pathological distribution at load `1 − δ^{3/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub closed_form: f64,
    pub mserpt_mean: f64,
    pub gittins_estimate: f64,
    pub quasi_analytic: f64,
}

pub fn sweep_row(delta: f64) -> Result<(SweepRow, Mg1), CliError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::Input(format!("delta {delta} must lie in (0, 1)")));
    }
    let epsilon = delta.powf(1.5);
    let dist = DiscreteDist::pathological(delta)?;
    let mg1 = Mg1::with_load(dist, 1.0 - epsilon)?;
    let ms = mean_response(&mg1, &PolicySpec::MSerpt)?.mean_response;
    let g = hill_valley_response(&mg1, &decompose(&gittins_rank(mg1.dist()).0)).mean_response;
    Ok((
        SweepRow {
            delta,
            epsilon,
            rho: mg1.rho(),
            closed_form: pathological_ratio_approx(delta, epsilon),
            mserpt_mean: ms,
            gittins_estimate: g,
            quasi_analytic: ms / g,
        },
        mg1,
    ))
}

/// Run length needed to see the slowest relaxation at load `1 − ε`.
fn sweep_jobs_needed(epsilon: f64, requested: u64) -> u64 {
    requested.max((100.0 / (epsilon * epsilon)).ceil() as u64)
}

pub fn pathological_sweep(args: &SweepArgs) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let rows: Vec<(SweepRow, Mg1)> = args
        .deltas
        .iter()
        .map(|&d| sweep_row(d))
        .collect::<Result<_, _>>()?;
    let mut warnings = Vec::new();
    let sims: Vec<Option<Result<(SimResult, SimResult), CliError>>> = if args.simulate {
        let pool = worker_pool()?;
        pool.install(|| {
            rows.par_iter()
                .map(|(row, mg1)| {
                    let jobs = sweep_jobs_needed(row.epsilon, args.sim.jobs);
                    if jobs > args.max_jobs {
                        return None;
                    }
                    let sim = SimArgs {
                        jobs,
                        ..args.sim.clone()
                    };
                    let base = sim_config(mg1.clone(), PolicySpec::MSerpt, &sim);
                    Some(
                        compare_policies(
                            mg1,
                            &[PolicySpec::MSerpt, PolicySpec::Gittins],
                            &base,
                            true,
                        )
                        .map(|mut v| {
                            let g = v.pop().unwrap();
                            (v.pop().unwrap(), g)
                        })
                        .map_err(CliError::from),
                    )
                })
                .collect()
        })
    } else {
        rows.iter().map(|_| None).collect()
    };

    let mut t = Table::new(vec![
        "delta",
        "epsilon",
        "rho",
        "closed_form_ratio",
        "quasi_analytic_ratio",
        "mserpt_mean",
        "gittins_estimate",
        "sim_ratio",
        "sim_ratio_ci",
        "sim_status",
    ]);
    for ((row, _), sim) in rows.iter().zip(sims) {
        let (ratio, ci, status) = match sim {
            Some(res) => {
                let (m, g) = res?;
                let q = m.mean_response / g.mean_response;
                let rel = ((m.ci_half_width / m.mean_response).powi(2)
                    + (g.ci_half_width / g.mean_response).powi(2))
                .sqrt();
                (Cell::Num(q), Cell::Num(q * rel), "ok")
            }
            None if args.simulate => {
                warnings.push(format!(
                    "delta {}: simulation needs more than {} jobs; reporting analytic columns only",
                    row.delta, args.max_jobs
                ));
                (Cell::Empty, Cell::Empty, "skipped")
            }
            None => (Cell::Empty, Cell::Empty, "off"),
        };
        t.push(vec![
            Cell::Num(row.delta),
            Cell::Num(row.epsilon),
            Cell::Num(row.rho),
            Cell::Num(row.closed_form),
            Cell::Num(row.quasi_analytic),
            Cell::Num(row.mserpt_mean),
            Cell::Num(row.gittins_estimate),
            ratio,
            ci,
            Cell::Text(status.into()),
        ]);
    }
    let manifest = Manifest::new(
        "pathological-sweep",
        json!({
            "deltas": args.deltas,
            "simulate": args.simulate,
            "sim": sim_params(&args.sim),
            "max_jobs": args.max_jobs,
        }),
        args.simulate.then_some(args.sim.seed),
    )
    .finish(start.elapsed());
    Ok(Rendered {
        text: t.render(args.out.format.unwrap_or(Format::Csv), &manifest),
        exit: EXIT_OK,
        warnings,
    })
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<Rendered, CliError> {
    if args.cases == 0 {
        return Err(CliError::Input("--cases must be at least 1".into()));
    }
    let start = Instant::now();
    let report = verify(args.cases, args.seed);
    let manifest = Manifest::new("verify", json!({ "cases": args.cases }), Some(args.seed))
        .finish(start.elapsed());
    let text = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => {
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| json!({ "case": f.case, "seed": f.seed, "check": f.check, "detail": f.detail }))
                .collect();
            json_document(
                &manifest,
                json!({
                    "passed": report.passed(),
                    "cases": report.cases,
                    "checks": report.checks,
                    "failing_seeds": report.failing_seeds(),
                    "failures": failures,
                }),
            )
        }
        Format::Csv => {
            let mut t = Table::new(vec!["case", "seed", "check", "detail"]);
            for f in &report.failures {
                t.push(vec![
                    Cell::Text(f.case.clone()),
                    Cell::Int(f.seed),
                    Cell::Text(f.check.into()),
                    Cell::Text(format!("\"{}\"", f.detail.replace('"', "'"))),
                ]);
            }
            t.to_csv(&manifest)
        }
    };
    let mut warnings = Vec::new();
    if !report.passed() {
        warnings.push(format!(
            "{} of {} checks failed; failing seeds: {:?}",
            report.failures.len(),
            report.checks,
            report.failing_seeds()
        ));
    }
    Ok(Rendered {
        text,
        exit: if report.passed() {
            EXIT_OK
        } else {
            EXIT_INVARIANT
        },
        warnings,
    })
}

impl Command {
    /// Runs the command without writing anything.
    pub fn render(&self) -> Result<Rendered, CliError> {
        match self {
            Command::RankDump(a) => rank_dump(a),
            Command::Analyze(a) => analyze(a),
            Command::Simulate(a) => simulate_cmd(a),
            Command::Compare(a) => compare(a),
            Command::RatioCurve(a) => ratio_curve(a),
            Command::PathologicalSweep(a) => pathological_sweep(a),
            Command::Verify(a) => verify_cmd(a),
        }
    }

    fn out_path(&self) -> Option<&std::path::Path> {
        let out = match self {
            Command::RankDump(a) => &a.out,
            Command::Analyze(a) => &a.out,
            Command::Simulate(a) => &a.out,
            Command::Compare(a) => &a.out,
            Command::RatioCurve(a) => &a.out,
            Command::PathologicalSweep(a) => &a.out,
            Command::Verify(a) => &a.out,
        };
        out.out.as_deref()
    }

    /// Runs the command, writes its output and returns the exit status.
    pub fn execute(&self) -> Result<i32, CliError> {
        let r = self.render()?;
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
        emit(&r.text, self.out_path())?;
        Ok(r.exit)
    }
}
