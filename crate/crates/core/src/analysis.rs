//! Solution distances, build-cost vectors, near-optimal filtering,
//! clustering, state-of-charge spectra and sensitivity sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::costing::{
    annuity, fixed_costs, objective, system_lcoe, variable_costs, yearly_unserved_penalties,
};
use crate::dispatch::{unit_commit, DispatchOptions, DispatchState};
use crate::evolve::Archive;
use crate::network::RouteTable;
use crate::scenario::{CandidateSolution, GeneratorKind, Scenario};
use crate::{Error, Result};

/// Cost-weighted outcome vector of a solution.
///
/// Each asset contributes a new-build entry (a = annualized capital over the
/// horizon), a total-capacity entry (a = fixed O&M over the horizon) and an
/// output entry (a = variable cost per GWh), so `a · z` is FC + VC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionVector {
    pub labels: Vec<String>,
    pub a: Vec<f64>,
    pub z: Vec<f64>,
    /// FC + VC of the solution, $.
    pub cost: f64,
}

fn crf_of(c: &crate::scenario::CostParams) -> f64 {
    annuity(c.discount_rate, c.lifetime.max(1.0)).map_or(0.0, |a| a.crf)
}

/// Builds the outcome vector of a dispatched candidate.
pub fn solution_vector(s: &Scenario, c: &CandidateSolution, d: &DispatchState) -> SolutionVector {
    let years = s.years.len() as f64;
    let build_years = match s.annualization {
        crate::scenario::Annualization::PerYear => years,
        crate::scenario::Annualization::Once => 1.0,
    };
    let t_len = d.completed_intervals;
    let r = d.resolution;
    let mut v = SolutionVector {
        labels: vec![],
        a: vec![],
        z: vec![],
        cost: 0.0,
    };
    let mut push = |label: String, a: f64, z: f64| {
        v.labels.push(label);
        v.a.push(a);
        v.z.push(z);
    };
    let mut flex = 0;
    for (i, g) in s.generators.iter().enumerate() {
        let k = &g.costs;
        push(
            format!("{}.new_power", g.id),
            k.capital_power * crf_of(k) * 1e6 * build_years,
            c.generator_power[i],
        );
        push(
            format!("{}.power", g.id),
            k.fixed_om * 1e6 * years,
            c.generator_total(s, i),
        );
        let gwh = if g.kind == GeneratorKind::Flexible {
            let j = flex;
            flex += 1;
            (0..t_len)
                .map(|t| d.flexible_power[t * d.n_flexible + j])
                .sum::<f64>()
                * r
        } else {
            let cap = c.generator_total(s, i);
            s.availability(g)
                .map_or(0.0, |a| a[..t_len].iter().sum::<f64>() * cap * r)
        };
        push(
            format!("{}.generation", g.id),
            (k.variable_om + k.fuel) * 1000.0,
            gwh,
        );
    }
    for (i, st) in s.storages.iter().enumerate() {
        let k = &st.costs;
        let f = crf_of(k) * 1e6 * build_years;
        push(
            format!("{}.new_power", st.id),
            k.capital_power * f,
            c.storage_power[i],
        );
        push(
            format!("{}.new_energy", st.id),
            k.capital_energy * f,
            c.storage_energy[i],
        );
        push(
            format!("{}.power", st.id),
            k.fixed_om * 1e6 * years,
            c.storage_total_power(s, i),
        );
        let gwh: f64 = (0..t_len)
            .map(|t| d.storage_power[t * d.n_storages + i].max(0.0))
            .sum::<f64>()
            * r;
        push(format!("{}.discharge", st.id), k.variable_om * 1000.0, gwh);
    }
    for (i, l) in s.lines.iter().enumerate() {
        let k = &l.costs;
        push(
            format!("{}.new_power", l.id),
            k.capital_power * l.length * crf_of(k) * 1e6 * build_years,
            c.line_power[i],
        );
        push(
            format!("{}.power", l.id),
            k.fixed_om * l.length * 1e6 * years,
            c.line_total(s, i),
        );
        let gwh: f64 = (0..t_len)
            .map(|t| d.line_flow[t * d.n_lines + i].abs())
            .sum::<f64>()
            * r;
        push(format!("{}.flow", l.id), k.variable_om * 1000.0, gwh);
    }
    v.cost = v.a.iter().zip(&v.z).map(|(a, z)| a * z).sum();
    v
}

/// Normalized distance with the per-entry terms `|a_i (z_i − z_i^ref)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Distance {
    pub distance: f64,
    pub labels: Vec<String>,
    pub contributions: Vec<f64>,
}

/// `Σ |a_i (z_i − z_i^ref)| / SC^ref`, weighting by the reference's `a`.
pub fn l1_distance(test: &SolutionVector, reference: &SolutionVector) -> Result<L1Distance> {
    let n = reference.a.len();
    if test.z.len() != n || reference.z.len() != n || test.labels != reference.labels {
        return Err(Error::InvalidArgument(format!(
            "solution vectors are not aligned ({} vs {} entries)",
            test.z.len(),
            reference.z.len()
        )));
    }
    if !(reference.cost > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference cost {} must be positive",
            reference.cost
        )));
    }
    let contributions: Vec<f64> = (0..n)
        .map(|i| (reference.a[i] * (test.z[i] - reference.z[i])).abs())
        .collect();
    Ok(L1Distance {
        distance: contributions.iter().sum::<f64>() / reference.cost,
        labels: reference.labels.clone(),
        contributions,
    })
}

/// Annualized build cost per asset, $/yr. Storages give a power and an
/// energy entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildCostVector {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl BuildCostVector {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn build_cost_vector(c: &CandidateSolution, s: &Scenario) -> BuildCostVector {
    let mut labels = vec![];
    let mut values = vec![];
    for (g, &np) in s.generators.iter().zip(&c.generator_power) {
        labels.push(format!("{}.power", g.id));
        values.push(np * crf_of(&g.costs) * g.costs.capital_power * 1e6);
    }
    for (i, k) in s.storages.iter().enumerate() {
        let f = crf_of(&k.costs) * 1e6;
        labels.push(format!("{}.power", k.id));
        values.push(c.storage_power[i] * f * k.costs.capital_power);
        labels.push(format!("{}.energy", k.id));
        values.push(c.storage_energy[i] * f * k.costs.capital_energy);
    }
    for (l, &np) in s.lines.iter().zip(&c.line_power) {
        labels.push(format!("{}.power", l.id));
        values.push(np * l.length * crf_of(&l.costs) * l.costs.capital_power * 1e6);
    }
    BuildCostVector { labels, values }
}

/// Entries whose annual build cost is at most `(1 + threshold) × reference`.
/// The bound is closed; order is kept.
pub fn filter_near_optimal(
    archive: &Archive,
    reference_build: f64,
    threshold: f64,
) -> Result<Archive> {
    if !(reference_build > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference build cost {reference_build} must be positive"
        )));
    }
    let limit = (1.0 + threshold) * reference_build;
    let slack = 1e-12 * limit.abs();
    Ok(Archive {
        names: archive.names.clone(),
        technologies: archive.technologies.clone(),
        entries: archive
            .entries
            .iter()
            .filter(|e| e.build <= limit + slack)
            .cloned()
            .collect(),
    })
}

/// Mini-batch k-means settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub iterations: usize,
}

impl ClusterConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        ClusterConfig {
            k,
            seed,
            batch_size: 256,
            iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Cluster of each input vector.
    pub labels: Vec<usize>,
    /// Mean of each cluster's members.
    pub means: Vec<Vec<f64>>,
    /// Input index of the member nearest each cluster mean.
    pub medoids: Vec<usize>,
    pub sizes: Vec<usize>,
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = dist2(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub(crate) fn kmeans_pp(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| dist2(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Mini-batch k-means with k-means++ seeding, then medoid selection.
///
/// Empty clusters take the point farthest from its center among clusters
/// with more than one member, so every cluster has at least one member.
pub fn cluster_candidates(points: &[Vec<f64>], cfg: &ClusterConfig) -> Result<Clustering> {
    let n = points.len();
    let k = cfg.k;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {n} vectors"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidArgument("vectors differ in length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centers = kmeans_pp(points, k, &mut rng);
    let mut counts = vec![0usize; k];
    let batch = cfg.batch_size.clamp(1, n);
    let mut idx = vec![0usize; batch];
    let mut assign = vec![0usize; batch];
    for _ in 0..cfg.iterations {
        for i in idx.iter_mut() {
            *i = rng.gen_range(0..n);
        }
        for (a, &i) in assign.iter_mut().zip(&idx) {
            *a = nearest(&points[i], &centers).0;
        }
        for (&j, &i) in assign.iter().zip(&idx) {
            counts[j] += 1;
            let eta = 1.0 / counts[j] as f64;
            for (c, x) in centers[j].iter_mut().zip(&points[i]) {
                *c += eta * (x - *c);
            }
        }
    }

    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    loop {
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            break;
        };
        let donor = (0..n)
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| {
                dist2(&points[a], &centers[labels[a]])
                    .total_cmp(&dist2(&points[b], &centers[labels[b]]))
                    .then(b.cmp(&a))
            })
            .expect("k <= n leaves a cluster with spare members");
        labels[donor] = empty;
        centers[empty] = points[donor].clone();
    }

    let mut means = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &l) in points.iter().zip(&labels) {
        sizes[l] += 1;
        for (m, x) in means[l].iter_mut().zip(p) {
            *m += x;
        }
    }
    for (m, &s) in means.iter_mut().zip(&sizes) {
        for v in m.iter_mut() {
            *v /= s as f64;
        }
    }
    let medoids = (0..k)
        .map(|j| {
            (0..n)
                .filter(|&i| labels[i] == j)
                .min_by(|&a, &b| {
                    dist2(&points[a], &means[j])
                        .total_cmp(&dist2(&points[b], &means[j]))
                        .then(a.cmp(&b))
                })
                .expect("cluster is nonempty")
        })
        .collect();
    Ok(Clustering {
        labels,
        means,
        medoids,
        sizes,
    })
}

/// Power spectrum with the DC bin removed, normalized to a peak of 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Cycles per hour.
    pub frequency: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl Spectrum {
    /// Frequency of the largest bin, if any bin is nonzero.
    pub fn peak(&self) -> Option<f64> {
        let (i, &m) = self
            .magnitude
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        (m > 0.0).then(|| self.frequency[i])
    }
}

/// `|X_k|²` for k = 1..=n/2 of the stored-energy series, over the largest.
pub fn soc_spectrum(trace: &[f64], r: f64) -> Result<Spectrum> {
    let n = trace.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "spectrum needs at least 2 samples, got {n}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resolution {r} must be positive"
        )));
    }
    // Removing the mean first keeps a large offset from leaking into the bins.
    let mean = trace.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = trace.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2;
    let frequency: Vec<f64> = (1..=bins).map(|k| k as f64 / (n as f64 * r)).collect();
    let mut magnitude: Vec<f64> = buf[1..=bins].iter().map(|z| (z * z.conj()).re).collect();
    let energy: f64 = trace.iter().map(|x| (x - mean).powi(2)).sum();
    let scale: f64 = trace
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let max = magnitude.iter().cloned().fold(0.0, f64::max);
    if max <= 1e-20 * n as f64 * scale || energy <= 1e-24 * scale {
        magnitude.iter_mut().for_each(|m| *m = 0.0);
    } else {
        magnitude.iter_mut().for_each(|m| *m /= max);
    }
    Ok(Spectrum {
        frequency,
        magnitude,
    })
}

/// Cost input varied by a sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    DiscountRate,
    Fuel,
    CapitalPower,
    CapitalEnergy,
    Lifetime,
    /// $/t of emissions; `intensity` t/MWh is added to fuel at each value.
    CarbonPrice {
        intensity: f64,
    },
}

impl Parameter {
    fn touches_dispatch(&self) -> bool {
        matches!(self, Parameter::Fuel | Parameter::CarbonPrice { .. })
    }
}

/// One-at-a-time axis. `technology` restricts it to matching assets; `None`
/// applies to every asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: Parameter,
    #[serde(default)]
    pub technology: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Redispatch {
    /// Costs are always repriced on the baseline dispatch.
    Never,
    /// Dispatch is re-run when fuel or carbon prices change.
    #[default]
    FuelAxes,
    Always,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Index into the axes, or `None` for the baseline.
    pub axis: Option<usize>,
    pub parameter: String,
    pub technology: Option<String>,
    pub value: f64,
    /// (FC + VC) / demand, $/MWh.
    pub lcoe: f64,
    /// Unserved and fixed-cost penalties at this point.
    pub penalty: f64,
    pub redispatched: bool,
    /// True when the axis matched no asset.
    pub flat: bool,
}

fn apply(s: &mut Scenario, p: &Parameter, tech: Option<&str>, value: f64) -> bool {
    let mut hit = false;
    let matches = |t: &str| tech.is_none_or(|w| w == t);
    let mut costs: Vec<(&mut crate::scenario::CostParams, bool)> = vec![];
    for g in &mut s.generators {
        let m = matches(&g.technology);
        costs.push((&mut g.costs, m));
    }
    for k in &mut s.storages {
        let m = matches(&k.technology);
        costs.push((&mut k.costs, m));
    }
    for l in &mut s.lines {
        let m = matches("transmission");
        costs.push((&mut l.costs, m));
    }
    for (c, m) in costs {
        if !m {
            continue;
        }
        let touched = match p {
            Parameter::DiscountRate => {
                c.discount_rate = value;
                true
            }
            Parameter::Lifetime => {
                c.lifetime = value;
                true
            }
            Parameter::Fuel => {
                c.fuel = value;
                true
            }
            Parameter::CapitalPower => {
                c.capital_power = value;
                true
            }
            Parameter::CapitalEnergy => {
                c.capital_energy = value;
                true
            }
            Parameter::CarbonPrice { intensity } => {
                c.fuel += value * intensity;
                true
            }
        };
        hit |= touched;
    }
    hit
}

/// Prices the candidate at a baseline point and at every axis value.
pub fn sensitivity_sweep(
    s: &Scenario,
    c: &CandidateSolution,
    rt: &RouteTable,
    axes: &[SweepAxis],
    redispatch: Redispatch,
    precharge: bool,
) -> Result<Vec<SweepPoint>> {
    for a in axes {
        let bad = match a.parameter {
            Parameter::DiscountRate => a.values.iter().any(|&v| !(v > -1.0)),
            Parameter::Lifetime => a.values.iter().any(|&v| !(v >= 1.0)),
            _ => a.values.iter().any(|v| !v.is_finite()),
        };
        if bad {
            return Err(Error::InvalidArgument(format!(
                "axis {:?} has an invalid value",
                a.parameter
            )));
        }
    }
    let base = objective(s, c, rt, false, precharge);
    let d0 = base
        .dispatch
        .as_ref()
        .expect("full evaluation keeps the dispatch");
    let mut points = vec![SweepPoint {
        axis: None,
        parameter: "baseline".into(),
        technology: None,
        value: f64::NAN,
        lcoe: base.report.lcoe,
        penalty: base.report.penalty_unserved + base.report.penalty_fixed,
        redispatched: false,
        flat: false,
    }];
    let jobs: Vec<(usize, f64)> = axes
        .iter()
        .enumerate()
        .flat_map(|(i, a)| a.values.iter().map(move |&v| (i, v)))
        .collect();
    let name = |p: &Parameter| match p {
        Parameter::DiscountRate => "discount_rate",
        Parameter::Fuel => "fuel",
        Parameter::CapitalPower => "capital_power",
        Parameter::CapitalEnergy => "capital_energy",
        Parameter::Lifetime => "lifetime",
        Parameter::CarbonPrice { .. } => "carbon_price",
    };
    let swept: Vec<SweepPoint> = jobs
        .par_iter()
        .map(|&(i, value)| {
            let axis = &axes[i];
            let mut t = s.clone();
            let hit = apply(&mut t, &axis.parameter, axis.technology.as_deref(), value);
            let rerun = hit
                && match redispatch {
                    Redispatch::Never => false,
                    Redispatch::FuelAxes => axis.parameter.touches_dispatch(),
                    Redispatch::Always => true,
                };
            let fc = fixed_costs(&t, c).total;
            let demand = t.total_demand_mwh();
            let owned;
            let d = if rerun {
                let opts = DispatchOptions {
                    precharge,
                    ..DispatchOptions::default()
                };
                owned = unit_commit(&t, c, rt, &opts);
                &owned
            } else {
                d0
            };
            let vc = variable_costs(d, &t, c).total;
            let pf_ue: f64 = yearly_unserved_penalties(&t, d).iter().sum();
            let pf_fc =
                crate::costing::penalty_fixed(fc, demand, t.fixed_cost_threshold, t.penalty_scale);
            SweepPoint {
                axis: Some(i),
                parameter: name(&axis.parameter).into(),
                technology: axis.technology.clone(),
                value,
                lcoe: system_lcoe(fc, vc, demand),
                penalty: pf_ue + pf_fc,
                redispatched: rerun,
                flat: !hit,
            }
        })
        .collect();
    points.extend(swept);
    Ok(points)
}
