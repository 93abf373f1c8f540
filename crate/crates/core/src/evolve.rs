//! Differential evolution over the decision box, with an archive of every
//! evaluated candidate.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costing::{annual_build_costs, objective};
use crate::network::{enumerate_routes, RouteTable};
use crate::scenario::{Bounds, DecisionVariable, Scenario, Target};
use crate::{Error, Result};

/// Search settings. Unset fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeConfig {
    pub population: usize,
    /// Mutation factor range; each generation draws F uniformly from it.
    pub mutation: (f64, f64),
    pub crossover: f64,
    /// Generations including the initial one.
    pub generations: usize,
    /// Relative spread tolerance on population scores.
    pub tolerance: f64,
    /// Absolute spread tolerance on population scores.
    pub atol: f64,
    pub seed: u64,
    /// Decision vectors added to the initial generation.
    pub initial: Vec<Vec<f64>>,
    /// Evaluation threads; 0 means one per available core.
    pub workers: usize,
    pub early_exit: bool,
    pub precharge: bool,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            population: 20,
            mutation: (0.5, 1.0),
            crossover: 0.7,
            generations: 100,
            tolerance: 0.01,
            atol: 0.0,
            seed: 0,
            initial: vec![],
            workers: 0,
            early_exit: true,
            precharge: true,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.population < 4 {
            return bad(format!("population {} must be at least 4", self.population));
        }
        let (lo, hi) = self.mutation;
        if !(lo > 0.0 && lo <= hi && hi < 2.0) {
            return bad(format!(
                "mutation range ({lo}, {hi}) must satisfy 0 < lo <= hi < 2"
            ));
        }
        if !(self.crossover > 0.0 && self.crossover <= 1.0) {
            return bad(format!("crossover {} must lie in (0, 1]", self.crossover));
        }
        if !(self.tolerance >= 0.0 && self.atol >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        if self.generations == 0 && self.initial.is_empty() {
            return bad("zero generations needs at least one initial guess".into());
        }
        Ok(())
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveEntry {
    pub generation: usize,
    pub x: Vec<f64>,
    pub score: f64,
    /// Fixed costs over the horizon, $.
    pub fixed: f64,
    /// Annualized build cost for one year, $/yr.
    pub build: f64,
    /// New-build capacity summed per technology column.
    pub totals: Vec<f64>,
    pub feasible: bool,
}

/// Every evaluation in the order it was made.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Archive {
    pub names: Vec<String>,
    /// Column keys for `ArchiveEntry::totals`, `{technology}.{power|energy}`.
    pub technologies: Vec<String>,
    pub entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn new(s: &Scenario) -> Self {
        let vars = s.decision_space();
        let (technologies, _) = technology_columns(s, &vars);
        Archive {
            names: vars.into_iter().map(|v| v.name).collect(),
            technologies,
            entries: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowest-score feasible entry, else the lowest-score entry.
    pub fn best(&self) -> Option<&ArchiveEntry> {
        fn lowest<'a>(it: impl Iterator<Item = &'a ArchiveEntry>) -> Option<&'a ArchiveEntry> {
            it.fold(None, |b: Option<&ArchiveEntry>, e| match b {
                Some(b) if b.score <= e.score => Some(b),
                _ => Some(e),
            })
        }
        lowest(self.entries.iter().filter(|e| e.feasible)).or_else(|| lowest(self.entries.iter()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let csv_err = |e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
        let mut header = vec!["generation".to_string()];
        header.extend(self.names.iter().cloned());
        header.extend(self.technologies.iter().map(|t| format!("total:{t}")));
        header.extend(["build", "fixed", "score", "feasible"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;
        for e in &self.entries {
            let mut row = vec![e.generation.to_string()];
            row.extend(e.x.iter().map(|v| v.to_string()));
            row.extend(e.totals.iter().map(|v| v.to_string()));
            row.extend([
                e.build.to_string(),
                e.fixed.to_string(),
                e.score.to_string(),
                e.feasible.to_string(),
            ]);
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let csv_err = |e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header: Vec<String> = r
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect();
        let schema = |m: &str| Error::schema(path.display().to_string(), m);
        if header.len() < 5
            || header[0] != "generation"
            || header[header.len() - 4..] != ["build", "fixed", "score", "feasible"]
        {
            return Err(schema("not an archive file"));
        }
        let body = &header[1..header.len() - 4];
        let split = body
            .iter()
            .position(|h| h.starts_with("total:"))
            .unwrap_or(body.len());
        let names = body[..split].to_vec();
        let technologies: Vec<String> = body[split..]
            .iter()
            .map(|h| h.trim_start_matches("total:").to_string())
            .collect();
        let mut entries = vec![];
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let loc = |col: &str| {
                Error::schema(
                    format!("{}:{}", path.display(), row + 2),
                    format!("bad value in column {col}"),
                )
            };
            let num = |i: usize| rec[i].trim().parse::<f64>().map_err(|_| loc(&header[i]));
            let n = header.len();
            entries.push(ArchiveEntry {
                generation: rec[0].trim().parse().map_err(|_| loc("generation"))?,
                x: (1..1 + split).map(num).collect::<Result<_>>()?,
                totals: (1 + split..n - 4).map(num).collect::<Result<_>>()?,
                build: num(n - 4)?,
                fixed: num(n - 3)?,
                score: num(n - 2)?,
                feasible: rec[n - 1].trim().parse().map_err(|_| loc("feasible"))?,
            });
        }
        Ok(Archive {
            names,
            technologies,
            entries,
        })
    }
}

fn technology_columns(s: &Scenario, vars: &[DecisionVariable]) -> (Vec<String>, Vec<usize>) {
    let keys: Vec<String> = vars
        .iter()
        .map(|v| match v.target {
            Target::GeneratorPower(g) => format!("{}.power", s.generators[g].technology),
            Target::StoragePower(k) => format!("{}.power", s.storages[k].technology),
            Target::StorageEnergy(k) => format!("{}.energy", s.storages[k].technology),
            Target::LinePower(_) => "transmission.power".to_string(),
        })
        .collect();
    let mut columns: BTreeMap<&str, usize> = BTreeMap::new();
    for k in &keys {
        let n = columns.len();
        columns.entry(k).or_insert(n);
    }
    let mut names: Vec<(&str, usize)> = columns.iter().map(|(k, &i)| (*k, i)).collect();
    names.sort_by_key(|&(_, i)| i);
    let index = keys.iter().map(|k| columns[k.as_str()]).collect();
    (
        names.into_iter().map(|(k, _)| k.to_string()).collect(),
        index,
    )
}

/// What the optimizer keeps from one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub score: f64,
    pub fixed: f64,
    pub build: f64,
    pub feasible: bool,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

fn score_one(
    s: &Scenario,
    rt: &RouteTable,
    x: &[f64],
    early_exit: bool,
    precharge: bool,
) -> Result<Scored> {
    let c = s.candidate_from_vector(x)?;
    s.check_candidate(&c)?;
    let e = objective(s, &c, rt, early_exit, precharge);
    Ok(Scored {
        score: e.score,
        fixed: e.report.fixed,
        build: annual_build_costs(s, &c).iter().sum(),
        feasible: e.feasible(),
    })
}

fn score_all(
    pool: &rayon::ThreadPool,
    s: &Scenario,
    rt: &RouteTable,
    xs: &[Vec<f64>],
    early_exit: bool,
    precharge: bool,
) -> Result<Vec<Scored>> {
    pool.install(|| {
        xs.par_iter()
            .map(|x| score_one(s, rt, x, early_exit, precharge))
            .collect()
    })
}

/// Scores of decision vectors, in input order, using `workers` threads.
pub fn evaluate_population(
    s: &Scenario,
    rt: &RouteTable,
    xs: &[Vec<f64>],
    workers: usize,
    early_exit: bool,
) -> Result<Vec<f64>> {
    let p = pool(workers)?;
    Ok(score_all(&p, s, rt, xs, early_exit, true)?
        .into_iter()
        .map(|e| e.score)
        .collect())
}

/// Outcome of a search.
#[derive(Debug, Clone)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub score: f64,
    pub feasible: bool,
    pub archive: Archive,
    pub generations: usize,
    pub converged: bool,
}

fn sample(rng: &mut ChaCha8Rng, b: &Bounds) -> f64 {
    if b.max > b.min {
        rng.gen_range(b.min..=b.max)
    } else {
        b.min
    }
}

fn converged(scores: &[f64], tol: f64, atol: f64) -> bool {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return false;
    }
    let var = scores.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() <= atol + tol * mean.abs()
}

/// rand/1/bin differential evolution with per-generation dither and greedy
/// parent-versus-trial selection.
///
/// The initial generation evaluates `population` random vectors plus every
/// initial guess and keeps the best `population` of them; each later
/// generation evaluates `population` trials. With zero generations only the
/// guesses are evaluated.
pub fn optimize(s: &Scenario, cfg: &DeConfig) -> Result<Optimum> {
    cfg.validate()?;
    let vars = s.decision_space();
    let bounds: Vec<Bounds> = vars.iter().map(|v| v.bounds).collect();
    for (i, g) in cfg.initial.iter().enumerate() {
        if g.len() != vars.len() {
            return Err(Error::InvalidArgument(format!(
                "initial guess {i} has {} values, expected {}",
                g.len(),
                vars.len()
            )));
        }
        s.check_candidate(&s.candidate_from_vector(g)?)?;
    }
    let rt = enumerate_routes(s, None);
    let pool = pool(cfg.workers)?;
    let (_, tech_index) = technology_columns(s, &vars);
    let mut archive = Archive::new(s);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let record = |archive: &mut Archive, generation: usize, xs: &[Vec<f64>], scored: &[Scored]| {
        for (x, e) in xs.iter().zip(scored) {
            let mut totals = vec![0.0; archive.technologies.len()];
            for (v, &col) in x.iter().zip(&tech_index) {
                totals[col] += v;
            }
            archive.entries.push(ArchiveEntry {
                generation,
                x: x.clone(),
                score: e.score,
                fixed: e.fixed,
                build: e.build,
                totals,
                feasible: e.feasible,
            });
        }
    };

    let mut first: Vec<Vec<f64>> = Vec::new();
    if cfg.generations > 0 {
        for _ in 0..cfg.population {
            first.push(bounds.iter().map(|b| sample(&mut rng, b)).collect());
        }
    }
    first.extend(cfg.initial.iter().cloned());
    let scored = score_all(&pool, s, &rt, &first, cfg.early_exit, cfg.precharge)?;
    record(&mut archive, 0, &first, &scored);

    let mut order: Vec<usize> = (0..first.len()).collect();
    order.sort_by(|&a, &b| scored[a].score.total_cmp(&scored[b].score).then(a.cmp(&b)));
    order.truncate(cfg.population.max(1).min(first.len()));
    let mut pop: Vec<Vec<f64>> = order.iter().map(|&i| first[i].clone()).collect();
    let mut pop_scores: Vec<f64> = order.iter().map(|&i| scored[i].score).collect();

    let mut generations = usize::from(cfg.generations > 0);
    let mut done = pop.len() >= 2 && converged(&pop_scores, cfg.tolerance, cfg.atol);
    let d = bounds.len();
    while !done && generations < cfg.generations {
        let f = rng.gen_range(cfg.mutation.0..=cfg.mutation.1);
        let n = pop.len();
        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let mut pick = || loop {
                let j = rng.gen_range(0..n);
                if j != i {
                    break j;
                }
            };
            let r1 = pick();
            let r2 = loop {
                let j = pick();
                if j != r1 {
                    break j;
                }
            };
            let r3 = loop {
                let j = pick();
                if j != r1 && j != r2 {
                    break j;
                }
            };
            let j_rand = if d > 0 { rng.gen_range(0..d) } else { 0 };
            let mut trial = pop[i].clone();
            for j in 0..d {
                if j == j_rand || rng.gen::<f64>() < cfg.crossover {
                    let v = pop[r1][j] + f * (pop[r2][j] - pop[r3][j]);
                    trial[j] = if bounds[j].contains(v) {
                        v
                    } else {
                        sample(&mut rng, &bounds[j])
                    };
                }
            }
            trials.push(trial);
        }
        let scored = score_all(&pool, s, &rt, &trials, cfg.early_exit, cfg.precharge)?;
        record(&mut archive, generations, &trials, &scored);
        for (i, (t, e)) in trials.into_iter().zip(&scored).enumerate() {
            if e.score <= pop_scores[i] {
                pop[i] = t;
                pop_scores[i] = e.score;
            }
        }
        generations += 1;
        done = converged(&pop_scores, cfg.tolerance, cfg.atol);
        log::debug!(
            "generation {generations}: best {:.6}",
            pop_scores.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }

    let best = archive.best().expect("at least one evaluation").clone();
    Ok(Optimum {
        x: best.x,
        score: best.score,
        feasible: best.feasible,
        archive,
        generations,
        converged: done,
    })
}

/// Replacement bounds for one decision variable, by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundOverride {
    pub variable: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Copy of the scenario with tightened new-build bounds.
pub fn apply_overrides(s: &Scenario, overrides: &[BoundOverride]) -> Result<Scenario> {
    let vars = s.decision_space();
    let mut out = s.clone();
    for o in overrides {
        let v = vars.iter().find(|v| v.name == o.variable).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown decision variable {}", o.variable))
        })?;
        let b = match v.target {
            Target::GeneratorPower(g) => &mut out.generators[g].new_power,
            Target::StoragePower(k) => &mut out.storages[k].new_power,
            Target::StorageEnergy(k) => &mut out.storages[k].new_energy,
            Target::LinePower(l) => &mut out.lines[l].new_power,
        };
        let min = o.min.unwrap_or(b.min);
        let max = o.max.unwrap_or(b.max);
        if !(min >= 0.0 && min <= max) {
            return Err(Error::InvalidArgument(format!(
                "override for {} gives an empty box [{min}, {max}]",
                o.variable
            )));
        }
        *b = Bounds::new(min, max);
    }
    for v in out.decision_space() {
        if !(v.bounds.min <= v.bounds.max) {
            return Err(Error::InvalidArgument(format!(
                "overrides leave {} with an empty box",
                v.name
            )));
        }
    }
    Ok(out)
}

/// [`optimize`] under tightened bounds. Initial guesses are clipped into the
/// new box.
pub fn constrained_rerun(
    s: &Scenario,
    cfg: &DeConfig,
    overrides: &[BoundOverride],
) -> Result<(Scenario, Optimum)> {
    let t = apply_overrides(s, overrides)?;
    let vars = t.decision_space();
    let mut cfg = cfg.clone();
    for g in &mut cfg.initial {
        for (x, v) in g.iter_mut().zip(&vars) {
            *x = x.clamp(v.bounds.min, v.bounds.max);
        }
    }
    let opt = optimize(&t, &cfg)?;
    Ok((t, opt))
}

/// Writes `value` as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))
}
