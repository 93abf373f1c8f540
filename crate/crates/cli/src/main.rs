//! `firm`: file-in, file-out front end for scenario building, optimization,
//! dispatch, analysis and temporal aggregation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use firm_core::aggregate::{daily_ldc_blocks, fit_blocks, sample_typical, SampleMode, Weights};
use firm_core::analysis::{
    build_cost_vector, cluster_candidates, filter_near_optimal, l1_distance, sensitivity_sweep,
    soc_spectrum, solution_vector, ClusterConfig, Redispatch, SolutionVector, SweepAxis,
};
use firm_core::costing::objective;
use firm_core::dispatch::{write_dispatch_csv, write_soc_csv};
use firm_core::evolve::{constrained_rerun, write_json, Archive, BoundOverride, DeConfig};
use firm_core::network::enumerate_routes;
use firm_core::scenario::{
    dump_scenario, load_scenario, make_synthetic, read_columns, scenario_hash, CandidateSolution,
    Scenario,
};

#[derive(Parser)]
#[command(
    name = "firm",
    version,
    about = "Business-rules capacity expansion planning"
)]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluation threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic scenario.
    Synth(SynthArgs),
    /// Search the decision box with differential evolution.
    Optimize(OptimizeArgs),
    /// Dispatch and price one candidate.
    Dispatch(DispatchArgs),
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Reprice a candidate along one-at-a-time parameter axes.
    Sensitivity(SensitivityArgs),
    #[command(subcommand)]
    Aggregate(AggregateCommand),
}

#[derive(Args, Serialize)]
struct ScenarioArgs {
    /// Scenario configuration JSON.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory holding demand.csv and availability.csv; defaults to the
    /// configuration's directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let dir = match &self.trace_dir {
            Some(d) => d.clone(),
            None => self
                .scenario
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default(),
        };
        Ok(load_scenario(&self.scenario, dir)?)
    }
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    years: usize,
    /// Interval length in hours.
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
}

#[derive(Args, Serialize)]
struct OptimizeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Search settings JSON; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON list of `{variable, min, max}` bound overrides.
    #[arg(long)]
    overrides: Option<PathBuf>,
    /// Candidate JSON files added to the initial population.
    #[arg(long = "initial")]
    initial: Vec<PathBuf>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
}

#[derive(Args, Serialize)]
struct DispatchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Candidate JSON mapping decision variable names to values.
    #[arg(long)]
    candidate: PathBuf,
    /// Skip pre-charging before deficit blocks.
    #[arg(long)]
    no_precharge: bool,
    /// Also write dispatch.csv and soc.csv.
    #[arg(long)]
    traces: bool,
    /// Also write solution.json for distance analysis.
    #[arg(long)]
    solution: bool,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Cost-weighted distance between two solution vectors.
    L1(L1Args),
    /// Normalized power spectrum of a stored-energy trace.
    Spectrum(SpectrumArgs),
    /// Cluster archived candidates by build-cost vector.
    Cluster(ClusterArgs),
    /// Keep archived candidates within a build-cost margin of a reference.
    Filter(FilterArgs),
}

#[derive(Args, Serialize)]
struct L1Args {
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    reference: PathBuf,
}

#[derive(Args, Serialize)]
struct SpectrumArgs {
    /// CSV of stored energy; every column except `interval` is summed.
    #[arg(long)]
    input: PathBuf,
    /// Restrict the sum to these columns.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
}

#[derive(Args, Serialize)]
struct ClusterArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
}

#[derive(Args, Serialize)]
struct FilterArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    threshold: f64,
    /// Reference annual build cost, $/yr; defaults to the archive's best entry.
    #[arg(long)]
    reference_build: Option<f64>,
    /// Drop penalized entries before filtering.
    #[arg(long)]
    feasible_only: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RedispatchArg {
    Never,
    FuelAxes,
    Always,
}

#[derive(Args, Serialize)]
struct SensitivityArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    candidate: PathBuf,
    /// JSON list of `{parameter, technology, values}` axes.
    #[arg(long)]
    axes: PathBuf,
    #[arg(long, value_enum, default_value_t = RedispatchArg::FuelAxes)]
    redispatch: RedispatchArg,
    #[arg(long)]
    no_precharge: bool,
}

#[derive(Subcommand)]
enum AggregateCommand {
    /// Chronological step-function fit of each day.
    Fit(FitArgs),
    /// Step-function fit of each day's duration curve.
    Ldc(FitArgs),
    /// Typical days per month or weeks per year.
    Sample(SampleArgs),
}

#[derive(Args, Serialize)]
struct TraceInput {
    /// CSV trace in MW; without `--column`, every column except `interval`
    /// is summed.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
}

#[derive(Args, Serialize)]
struct FitArgs {
    #[command(flatten)]
    trace: TraceInput,
    #[arg(long, default_value_t = 8)]
    blocks: usize,
    /// Weight polynomial coefficients a,b,c,d.
    #[arg(long, value_delimiter = ',', default_value = "0,1,0,0")]
    weights: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Days,
    Weeks,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    trace: TraceInput,
    #[arg(long, value_enum, default_value_t = ModeArg::Days)]
    mode: ModeArg,
    /// Clusters per month (days) or per year (weeks); defaults to 2 and 4.
    #[arg(long)]
    clusters: Option<usize>,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: &'static str,
    scenario_hash: Option<String>,
    seed: Option<u64>,
    config: serde_json::Value,
    artifacts: Vec<String>,
    duration_seconds: f64,
}

/// Collects artifact names and writes the manifest last.
struct Run {
    out: PathBuf,
    command: String,
    scenario_hash: Option<String>,
    seed: Option<u64>,
    config: serde_json::Value,
    artifacts: Vec<String>,
    started: Instant,
}

impl Run {
    fn new(out: &Path, command: &str, config: impl Serialize) -> Result<Self> {
        fs::create_dir_all(out)
            .with_context(|| format!("cannot create output directory {}", out.display()))?;
        Ok(Run {
            out: out.to_path_buf(),
            command: command.into(),
            scenario_hash: None,
            seed: None,
            config: serde_json::to_value(config)?,
            artifacts: vec![],
            started: Instant::now(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.into());
        self.out.join(name)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let p = self.path(name);
        write_json(&p, value).with_context(|| format!("cannot write {}", p.display()))
    }

    fn finish(mut self) -> Result<()> {
        let m = Manifest {
            command: self.command.clone(),
            version: env!("CARGO_PKG_VERSION"),
            scenario_hash: self.scenario_hash.clone(),
            seed: self.seed,
            config: self.config.clone(),
            artifacts: std::mem::take(&mut self.artifacts),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let p = self.out.join("manifest.json");
        write_json(&p, &m).with_context(|| format!("cannot write {}", p.display()))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

/// Reads `{name: value}` and orders it by the decision space.
fn read_candidate(s: &Scenario, path: &Path) -> Result<CandidateSolution> {
    let map: BTreeMap<String, f64> = read_json(path)?;
    let vars = s.decision_space();
    let mut x = Vec::with_capacity(vars.len());
    for v in &vars {
        match map.get(&v.name) {
            Some(&val) => x.push(val),
            None => bail!("{}: missing decision variable {}", path.display(), v.name),
        }
    }
    if let Some(extra) = map.keys().find(|k| !vars.iter().any(|v| &v.name == *k)) {
        bail!("{}: unknown decision variable {extra}", path.display());
    }
    let c = s.candidate_from_vector(&x)?;
    s.check_candidate(&c)?;
    Ok(c)
}

fn candidate_map(s: &Scenario, x: &[f64]) -> BTreeMap<String, f64> {
    s.decision_space()
        .into_iter()
        .zip(x)
        .map(|(v, &x)| (v.name, x))
        .collect()
}

fn read_trace(t: &TraceInput) -> Result<Vec<f64>> {
    let (headers, cols) = read_columns(&t.input)?;
    match &t.column {
        Some(c) => {
            let j = headers
                .iter()
                .position(|h| h == c)
                .with_context(|| format!("{}: no column {c}", t.input.display()))?;
            Ok(cols[j].clone())
        }
        None => {
            let keep: Vec<usize> = (0..headers.len())
                .filter(|&j| headers[j] != "interval")
                .collect();
            if keep.is_empty() {
                bail!("{}: no data columns", t.input.display());
            }
            let n = cols[keep[0]].len();
            Ok((0..n)
                .map(|i| keep.iter().map(|&j| cols[j][i]).sum())
                .collect())
        }
    }
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<u8> {
    let seed = cli.seed.unwrap_or(0);
    let mut run = Run::new(&cli.out, "synth", a)?;
    let s = make_synthetic(seed, a.nodes, a.years, a.resolution);
    dump_scenario(&s, &cli.out)?;
    for f in ["config.json", "demand.csv", "availability.csv"] {
        run.path(f);
    }
    run.seed = Some(seed);
    run.scenario_hash = Some(scenario_hash(&s));
    run.finish()?;
    Ok(0)
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Result<u8> {
    let s = a.scenario.load()?;
    let mut cfg: DeConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => DeConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(p) = a.population {
        cfg.population = p;
    }
    if let Some(g) = a.generations {
        cfg.generations = g;
    }
    for p in &a.initial {
        cfg.initial.push(read_candidate(&s, p)?.to_vector(&s));
    }
    let overrides: Vec<BoundOverride> = match &a.overrides {
        Some(p) => read_json(p)?,
        None => vec![],
    };
    let mut run = Run::new(
        &cli.out,
        "optimize",
        serde_json::json!({ "args": a, "search": cfg, "overrides": overrides }),
    )?;
    run.seed = Some(cfg.seed);
    run.scenario_hash = Some(scenario_hash(&s));
    let (t, opt) = constrained_rerun(&s, &cfg, &overrides)?;
    log::info!(
        "{} evaluations over {} generations, best score {}",
        opt.archive.len(),
        opt.generations,
        opt.score
    );
    let c = t.candidate_from_vector(&opt.x)?;
    let rt = enumerate_routes(&t, None);
    let report = objective(&t, &c, &rt, false, cfg.precharge).report;
    run.json("candidate.json", &candidate_map(&t, &opt.x))?;
    run.json(
        "best.json",
        &serde_json::json!({
            "score": opt.score,
            "feasible": opt.feasible,
            "generations": opt.generations,
            "converged": opt.converged,
            "evaluations": opt.archive.len(),
            "report": report,
        }),
    )?;
    let p = run.path("archive.csv");
    opt.archive.write_csv(&p)?;
    run.finish()?;
    if !opt.feasible {
        eprintln!("best candidate is penalized (score {})", opt.score);
        return Ok(2);
    }
    Ok(0)
}

fn dispatch(cli: &Cli, a: &DispatchArgs) -> Result<u8> {
    let s = a.scenario.load()?;
    let c = read_candidate(&s, &a.candidate)?;
    let mut run = Run::new(&cli.out, "dispatch", a)?;
    run.scenario_hash = Some(scenario_hash(&s));
    let rt = enumerate_routes(&s, None);
    let e = objective(&s, &c, &rt, false, !a.no_precharge);
    let d = e
        .dispatch
        .as_ref()
        .expect("full evaluation keeps the dispatch");
    run.json("report.json", &e.report)?;
    if a.traces {
        let p = run.path("dispatch.csv");
        write_dispatch_csv(&s, d, &p)?;
        let p = run.path("soc.csv");
        write_soc_csv(&s, d, &p)?;
    }
    if a.solution {
        run.json("solution.json", &solution_vector(&s, &c, d))?;
    }
    log::info!(
        "system cost {} $/MWh, unserved {} GWh",
        e.report.system_cost,
        e.report.unserved_gwh
    );
    run.finish()?;
    Ok(0)
}

fn analyze(cli: &Cli, cmd: &AnalyzeCommand) -> Result<u8> {
    match cmd {
        AnalyzeCommand::L1(a) => {
            let t: SolutionVector = read_json(&a.test)?;
            let r: SolutionVector = read_json(&a.reference)?;
            let mut run = Run::new(&cli.out, "analyze l1", a)?;
            let l1 = l1_distance(&t, &r)?;
            run.json("l1.json", &l1)?;
            println!("{}", l1.distance);
            run.finish()?;
        }
        AnalyzeCommand::Spectrum(a) => {
            let (headers, cols) = read_columns(&a.input)?;
            let keep: Vec<usize> = if a.columns.is_empty() {
                (0..headers.len())
                    .filter(|&j| headers[j] != "interval")
                    .collect()
            } else {
                a.columns
                    .iter()
                    .map(|c| {
                        headers
                            .iter()
                            .position(|h| h == c)
                            .with_context(|| format!("no column {c}"))
                    })
                    .collect::<Result<_>>()?
            };
            let n = keep.first().map_or(0, |&j| cols[j].len());
            let trace: Vec<f64> = (0..n)
                .map(|i| keep.iter().map(|&j| cols[j][i]).sum())
                .collect();
            let sp = soc_spectrum(&trace, a.resolution)?;
            let mut run = Run::new(&cli.out, "analyze spectrum", a)?;
            let p = run.path("spectrum.csv");
            write_csv(
                &p,
                &["frequency", "magnitude"],
                sp.frequency
                    .iter()
                    .zip(&sp.magnitude)
                    .map(|(f, m)| vec![f.to_string(), m.to_string()]),
            )?;
            let peak = sp.peak();
            run.json(
                "spectrum.json",
                &serde_json::json!({ "peak_frequency": peak, "peak_period_hours": peak.map(|f| 1.0 / f) }),
            )?;
            run.finish()?;
        }
        AnalyzeCommand::Cluster(a) => {
            let s = a.scenario.load()?;
            let archive = Archive::read_csv(&a.archive)?;
            let mut bcvs = Vec::with_capacity(archive.len());
            for e in &archive.entries {
                bcvs.push(build_cost_vector(&s.candidate_from_vector(&e.x)?, &s).values);
            }
            let seed = cli.seed.unwrap_or(0);
            let cfg = ClusterConfig {
                k: a.k,
                seed,
                batch_size: a.batch_size,
                iterations: a.iterations,
            };
            let cl = cluster_candidates(&bcvs, &cfg)?;
            let mut run = Run::new(&cli.out, "analyze cluster", a)?;
            run.seed = Some(seed);
            run.scenario_hash = Some(scenario_hash(&s));
            let p = run.path("clusters.csv");
            write_csv(
                &p,
                &["row", "cluster"],
                cl.labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| vec![i.to_string(), l.to_string()]),
            )?;
            let clusters: Vec<_> = cl
                .medoids
                .iter()
                .zip(&cl.sizes)
                .enumerate()
                .map(|(j, (m, n))| serde_json::json!({ "cluster": j, "medoid_row": m, "size": n }))
                .collect();
            run.json(
                "clusters.json",
                &serde_json::json!({ "k": a.k, "clusters": clusters }),
            )?;
            run.finish()?;
        }
        AnalyzeCommand::Filter(a) => {
            let mut archive = Archive::read_csv(&a.archive)?;
            if a.feasible_only {
                archive.entries.retain(|e| e.feasible);
            }
            let reference = match a.reference_build {
                Some(r) => r,
                None => archive.best().context("archive is empty")?.build,
            };
            let kept = filter_near_optimal(&archive, reference, a.threshold)?;
            let mut run = Run::new(&cli.out, "analyze filter", a)?;
            let p = run.path("filtered.csv");
            kept.write_csv(&p)?;
            log::info!("kept {} of {} entries", kept.len(), archive.len());
            run.finish()?;
        }
    }
    Ok(0)
}

fn sensitivity(cli: &Cli, a: &SensitivityArgs) -> Result<u8> {
    let s = a.scenario.load()?;
    let c = read_candidate(&s, &a.candidate)?;
    let axes: Vec<SweepAxis> = read_json(&a.axes)?;
    let policy = match a.redispatch {
        RedispatchArg::Never => Redispatch::Never,
        RedispatchArg::FuelAxes => Redispatch::FuelAxes,
        RedispatchArg::Always => Redispatch::Always,
    };
    let mut run = Run::new(
        &cli.out,
        "sensitivity",
        serde_json::json!({ "args": a, "axes": axes }),
    )?;
    run.scenario_hash = Some(scenario_hash(&s));
    let rt = enumerate_routes(&s, None);
    let points = sensitivity_sweep(&s, &c, &rt, &axes, policy, !a.no_precharge)?;
    let p = run.path("sweep.csv");
    write_csv(
        &p,
        &[
            "axis",
            "parameter",
            "technology",
            "value",
            "lcoe",
            "penalty",
            "redispatched",
            "flat",
        ],
        points.iter().map(|q| {
            vec![
                q.axis.map_or(String::new(), |i| i.to_string()),
                q.parameter.clone(),
                q.technology.clone().unwrap_or_default(),
                if q.value.is_nan() {
                    String::new()
                } else {
                    q.value.to_string()
                },
                q.lcoe.to_string(),
                q.penalty.to_string(),
                q.redispatched.to_string(),
                q.flat.to_string(),
            ]
        }),
    )?;
    run.finish()?;
    Ok(0)
}

fn whole_days(trace: &[f64], resolution: f64) -> Result<usize> {
    let per_day = (24.0 / resolution).round() as usize;
    if per_day == 0 || (per_day as f64 * resolution - 24.0).abs() > 1e-9 {
        bail!("resolution {resolution} h does not divide a day");
    }
    if trace.is_empty() || !trace.len().is_multiple_of(per_day) {
        bail!(
            "trace of {} intervals is not a whole number of days",
            trace.len()
        );
    }
    Ok(per_day)
}

fn aggregate(cli: &Cli, cmd: &AggregateCommand) -> Result<u8> {
    match cmd {
        AggregateCommand::Fit(a) | AggregateCommand::Ldc(a) => {
            let ldc = matches!(cmd, AggregateCommand::Ldc(_));
            let trace = read_trace(&a.trace)?;
            let per_day = whole_days(&trace, a.trace.resolution)?;
            let w: [f64; 4] = a
                .weights
                .clone()
                .try_into()
                .map_err(|_| anyhow::anyhow!("--weights takes exactly four coefficients"))?;
            let name = if ldc {
                "aggregate ldc"
            } else {
                "aggregate fit"
            };
            let mut rows = vec![];
            let mut order_rows = vec![];
            let mut error = 0.0;
            for (day, x) in trace.chunks(per_day).enumerate() {
                let fit = if ldc {
                    let l = daily_ldc_blocks(x, a.blocks, Weights(w))?;
                    for (rank, i) in l.order.iter().enumerate() {
                        order_rows.push(vec![day.to_string(), rank.to_string(), i.to_string()]);
                    }
                    l.fit
                } else {
                    fit_blocks(x, a.blocks, Weights(w))?
                };
                error += fit.error;
                for b in &fit.series.blocks {
                    rows.push(vec![
                        day.to_string(),
                        b.start.to_string(),
                        b.length.to_string(),
                        b.level.to_string(),
                    ]);
                }
            }
            let mut run = Run::new(&cli.out, name, a)?;
            let p = run.path("blocks.csv");
            write_csv(&p, &["day", "start", "length", "level"], rows)?;
            if ldc {
                let p = run.path("order.csv");
                write_csv(&p, &["day", "rank", "interval"], order_rows)?;
            }
            log::info!("total weighted error {error}");
            run.finish()?;
        }
        AggregateCommand::Sample(a) => {
            let trace = read_trace(&a.trace)?;
            let mode = match a.mode {
                ModeArg::Days => SampleMode::DaysPerMonth(a.clusters.unwrap_or(2)),
                ModeArg::Weeks => SampleMode::WeeksPerYear(a.clusters.unwrap_or(4)),
            };
            let seed = cli.seed.unwrap_or(0);
            let tp = sample_typical(&trace, a.trace.resolution, mode, seed)?;
            let mut run = Run::new(&cli.out, "aggregate sample", a)?;
            run.seed = Some(seed);
            run.json("typical.json", &tp)?;
            run.finish()?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FIRM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(&cli, a),
        Command::Optimize(a) => optimize(&cli, a),
        Command::Dispatch(a) => dispatch(&cli, a),
        Command::Analyze(c) => analyze(&cli, c),
        Command::Sensitivity(a) => sensitivity(&cli, a),
        Command::Aggregate(c) => aggregate(&cli, c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
