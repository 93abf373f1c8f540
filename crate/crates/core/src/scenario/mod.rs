//! Immutable planning-problem data model.
//!
//! Units are GW for power, GWh for energy and hours for time. Cost rates keep
//! their customary units: $/kW and $/kWh for capital, $/kW-yr for fixed O&M
//! and $/MWh for variable O&M and fuel. Line rates are per km.

mod io;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use io::{dump_scenario, load_scenario, read_columns, scenario_hash, write_columns};
pub use synth::make_synthetic;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Pv,
    Wind,
    Baseload,
    Flexible,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Pv => "pv",
            GeneratorKind::Wind => "wind",
            GeneratorKind::Baseload => "baseload",
            GeneratorKind::Flexible => "flexible",
        }
    }
}

/// How capital cost is spread over a multi-year horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annualization {
    /// Annualized capital is charged in every year of the horizon.
    #[default]
    PerYear,
    /// Annualized capital is charged once; fixed O&M is still charged per year.
    Once,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub const ZERO: Bounds = Bounds { min: 0.0, max: 0.0 };

    pub fn new(min: f64, max: f64) -> Self {
        Bounds { min, max }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::ZERO
    }
}

/// Fully resolved cost block for one asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// $/kW (lines: $/kW-km).
    pub capital_power: f64,
    /// $/kWh, storage only.
    pub capital_energy: f64,
    /// $/kW-yr (lines: $/kW-km-yr).
    pub fixed_om: f64,
    /// $/MWh.
    pub variable_om: f64,
    /// Average fuel cost, $/MWh.
    pub fuel: f64,
    pub discount_rate: f64,
    /// Economic lifetime in years.
    pub lifetime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub id: String,
    pub node: usize,
    pub kind: GeneratorKind,
    /// Free-form label used to group assets, e.g. "gas" or "pumped_hydro".
    pub technology: String,
    pub existing_power: f64,
    pub new_power: Bounds,
    /// GWh per year, flexible generators only.
    pub annual_energy: Option<f64>,
    /// Availability column, non-flexible generators only.
    pub trace: Option<String>,
    pub costs: CostParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageSpec {
    pub id: String,
    pub node: usize,
    pub technology: String,
    pub existing_power: f64,
    pub existing_energy: f64,
    pub new_power: Bounds,
    pub new_energy: Bounds,
    /// When set, new energy is tied to new power by this many hours.
    pub duration: Option<f64>,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub costs: CostParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSpec {
    pub id: String,
    pub from: usize,
    pub to: usize,
    /// km.
    pub length: f64,
    pub existing_power: f64,
    pub new_power: Bounds,
    pub costs: CostParams,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceSet {
    /// Per node, GW per interval.
    pub demand: Vec<Vec<f64>>,
    /// Availability fraction per interval, keyed by column id.
    pub availability: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<String>,
    pub lines: Vec<LineSpec>,
    pub generators: Vec<GeneratorSpec>,
    pub storages: Vec<StorageSpec>,
    pub traces: TraceSet,
    /// Hours per interval.
    pub resolution: f64,
    /// Interval count of each year segment.
    pub years: Vec<usize>,
    pub reliability: f64,
    /// $/MWh; `f64::INFINITY` disables the fixed-cost penalty.
    pub fixed_cost_threshold: f64,
    pub penalty_scale: f64,
    pub annualization: Annualization,
}

impl Scenario {
    pub fn n_intervals(&self) -> usize {
        self.years.iter().sum()
    }

    /// Interval ranges of each year on the flat time axis.
    pub fn year_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.years
            .iter()
            .map(|&len| {
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    /// Availability trace of a non-flexible generator.
    pub fn availability(&self, g: &GeneratorSpec) -> Option<&[f64]> {
        g.trace
            .as_ref()
            .and_then(|c| self.traces.availability.get(c))
            .map(|v| v.as_slice())
    }

    /// Total demand over the horizon in MWh.
    pub fn total_demand_mwh(&self) -> f64 {
        let gw: f64 = self.traces.demand.iter().flat_map(|d| d.iter()).sum();
        gw * 1000.0 * self.resolution
    }

    /// The decision variables of this scenario in vector order.
    ///
    /// Generators come first, then storages (power, then energy unless the
    /// duration is fixed), then lines.
    pub fn decision_space(&self) -> Vec<DecisionVariable> {
        let mut vars = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            vars.push(DecisionVariable {
                name: format!("{}.power", g.id),
                bounds: g.new_power,
                target: Target::GeneratorPower(i),
            });
        }
        for (i, s) in self.storages.iter().enumerate() {
            let power_bounds = match s.duration {
                Some(h) if h > 0.0 => Bounds::new(
                    s.new_power.min.max(s.new_energy.min / h),
                    s.new_power.max.min(s.new_energy.max / h),
                ),
                _ => s.new_power,
            };
            vars.push(DecisionVariable {
                name: format!("{}.power", s.id),
                bounds: power_bounds,
                target: Target::StoragePower(i),
            });
            if s.duration.is_none() {
                vars.push(DecisionVariable {
                    name: format!("{}.energy", s.id),
                    bounds: s.new_energy,
                    target: Target::StorageEnergy(i),
                });
            }
        }
        for (i, l) in self.lines.iter().enumerate() {
            vars.push(DecisionVariable {
                name: format!("{}.power", l.id),
                bounds: l.new_power,
                target: Target::LinePower(i),
            });
        }
        vars
    }

    /// Builds a candidate from a decision vector laid out as in
    /// [`Scenario::decision_space`].
    pub fn candidate_from_vector(&self, x: &[f64]) -> Result<CandidateSolution> {
        let vars = self.decision_space();
        if x.len() != vars.len() {
            return Err(Error::InvalidArgument(format!(
                "decision vector has {} entries, scenario has {} variables",
                x.len(),
                vars.len()
            )));
        }
        let mut c = CandidateSolution::zeros(self);
        for (v, &xi) in vars.iter().zip(x) {
            match v.target {
                Target::GeneratorPower(i) => c.generator_power[i] = xi,
                Target::StoragePower(i) => {
                    c.storage_power[i] = xi;
                    if let Some(h) = self.storages[i].duration {
                        c.storage_energy[i] = xi * h;
                    }
                }
                Target::StorageEnergy(i) => c.storage_energy[i] = xi,
                Target::LinePower(i) => c.line_power[i] = xi,
            }
        }
        Ok(c)
    }

    /// Checks every entry of a candidate against its build bounds.
    pub fn check_candidate(&self, c: &CandidateSolution) -> Result<()> {
        if c.generator_power.len() != self.generators.len()
            || c.storage_power.len() != self.storages.len()
            || c.storage_energy.len() != self.storages.len()
            || c.line_power.len() != self.lines.len()
        {
            return Err(Error::InvalidArgument(
                "candidate does not match the scenario's assets".into(),
            ));
        }
        let check = |name: String, value: f64, b: Bounds| {
            // A small slack absorbs round-off from fixed-duration coupling.
            let slack = 1e-9 * (1.0 + b.max.abs());
            if value.is_nan() || value < b.min - slack || value > b.max + slack {
                Err(Error::OutOfBounds {
                    variable: name,
                    value,
                    min: b.min,
                    max: b.max,
                })
            } else {
                Ok(())
            }
        };
        for (g, &x) in self.generators.iter().zip(&c.generator_power) {
            check(format!("{}.power", g.id), x, g.new_power)?;
        }
        for (i, s) in self.storages.iter().enumerate() {
            check(format!("{}.power", s.id), c.storage_power[i], s.new_power)?;
            check(
                format!("{}.energy", s.id),
                c.storage_energy[i],
                s.new_energy,
            )?;
        }
        for (l, &x) in self.lines.iter().zip(&c.line_power) {
            check(format!("{}.power", l.id), x, l.new_power)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    GeneratorPower(usize),
    StoragePower(usize),
    StorageEnergy(usize),
    LinePower(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVariable {
    pub name: String,
    pub bounds: Bounds,
    pub target: Target,
}

/// New-build capacities of one candidate portfolio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSolution {
    /// GW per generator.
    pub generator_power: Vec<f64>,
    /// GW per storage.
    pub storage_power: Vec<f64>,
    /// GWh per storage.
    pub storage_energy: Vec<f64>,
    /// GW per line.
    pub line_power: Vec<f64>,
}

impl CandidateSolution {
    pub fn zeros(s: &Scenario) -> Self {
        CandidateSolution {
            generator_power: vec![0.0; s.generators.len()],
            storage_power: vec![0.0; s.storages.len()],
            storage_energy: vec![0.0; s.storages.len()],
            line_power: vec![0.0; s.lines.len()],
        }
    }

    /// Decision vector in the layout of [`Scenario::decision_space`].
    pub fn to_vector(&self, s: &Scenario) -> Vec<f64> {
        s.decision_space()
            .iter()
            .map(|v| match v.target {
                Target::GeneratorPower(i) => self.generator_power[i],
                Target::StoragePower(i) => self.storage_power[i],
                Target::StorageEnergy(i) => self.storage_energy[i],
                Target::LinePower(i) => self.line_power[i],
            })
            .collect()
    }

    pub fn generator_total(&self, s: &Scenario, g: usize) -> f64 {
        s.generators[g].existing_power + self.generator_power[g]
    }

    pub fn storage_total_power(&self, s: &Scenario, k: usize) -> f64 {
        s.storages[k].existing_power + self.storage_power[k]
    }

    pub fn storage_total_energy(&self, s: &Scenario, k: usize) -> f64 {
        s.storages[k].existing_energy + self.storage_energy[k]
    }

    pub fn line_total(&self, s: &Scenario, l: usize) -> f64 {
        s.lines[l].existing_power + self.line_power[l]
    }
}

/// One broken rule found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

/// Lists every invariant the scenario breaks. An empty list means valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |entity: &str, rule: String| {
        out.push(Violation {
            entity: entity.to_string(),
            rule,
        })
    };
    let n_nodes = s.nodes.len();
    let horizon = s.n_intervals();

    if s.nodes.is_empty() {
        push("scenario", "at least one node is required".into());
    }
    let mut seen = HashSet::new();
    for n in &s.nodes {
        if !seen.insert(n.as_str()) {
            push(n, "node ids must be unique".into());
        }
    }
    if !(s.resolution > 0.0) {
        push("horizon", "resolution must be positive".into());
    }
    if s.years.is_empty() || s.years.contains(&0) {
        push(
            "horizon",
            "every year must contain at least one interval".into(),
        );
    }
    if !(s.reliability > 0.0 && s.reliability <= 1.0) {
        push("reliability", "standard must lie in (0, 1]".into());
    }
    if !(s.penalty_scale >= 0.0) {
        push("reliability", "penalty scale must be non-negative".into());
    }
    if s.fixed_cost_threshold.is_nan() {
        push(
            "reliability",
            "fixed cost threshold must be a number".into(),
        );
    }

    let mut ids = HashSet::new();
    let asset_ids = s
        .generators
        .iter()
        .map(|g| &g.id)
        .chain(s.storages.iter().map(|k| &k.id))
        .chain(s.lines.iter().map(|l| &l.id));
    for id in asset_ids {
        if !ids.insert(id.as_str()) {
            push(id, "asset ids must be unique".into());
        }
    }

    let check_costs = |id: &str, c: &CostParams, out: &mut Vec<Violation>| {
        let rates = [
            ("capital_power", c.capital_power),
            ("capital_energy", c.capital_energy),
            ("fixed_om", c.fixed_om),
            ("variable_om", c.variable_om),
            ("fuel", c.fuel),
        ];
        for (name, v) in rates {
            if !v.is_finite() {
                out.push(Violation {
                    entity: id.to_string(),
                    rule: format!("cost {name} must be finite"),
                });
            }
        }
        if !(c.discount_rate > -1.0) {
            out.push(Violation {
                entity: id.to_string(),
                rule: "discount rate must exceed -1".into(),
            });
        }
        if !(c.lifetime >= 1.0) {
            out.push(Violation {
                entity: id.to_string(),
                rule: "lifetime must be at least 1 year".into(),
            });
        }
    };
    let check_bounds = |id: &str, what: &str, b: &Bounds, out: &mut Vec<Violation>| {
        if !(b.min >= 0.0 && b.max >= 0.0) {
            out.push(Violation {
                entity: id.to_string(),
                rule: format!("{what} bounds must be non-negative"),
            });
        }
        if !(b.min <= b.max) {
            out.push(Violation {
                entity: id.to_string(),
                rule: format!("{what} lower bound must not exceed upper bound"),
            });
        }
    };

    let mut asset_checks = Vec::new();
    for g in &s.generators {
        if g.node >= n_nodes {
            push(&g.id, "generator must reference an existing node".into());
        }
        if !(g.existing_power >= 0.0) {
            push(&g.id, "existing power must be non-negative".into());
        }
        match g.kind {
            GeneratorKind::Flexible => {
                if g.trace.is_some() {
                    push(
                        &g.id,
                        "flexible generators have no availability trace".into(),
                    );
                }
                match g.annual_energy {
                    Some(e) if e >= 0.0 => {}
                    Some(_) => push(&g.id, "annual energy must be non-negative".into()),
                    None => push(
                        &g.id,
                        "flexible generators need an annual energy limit".into(),
                    ),
                }
            }
            _ => {
                if g.annual_energy.is_some() {
                    push(
                        &g.id,
                        "non-flexible generators have no annual energy limit".into(),
                    );
                }
                match &g.trace {
                    None => push(
                        &g.id,
                        "non-flexible generators need an availability trace".into(),
                    ),
                    Some(col) => match s.traces.availability.get(col) {
                        None => push(&g.id, format!("availability column {col} is missing")),
                        Some(v) => {
                            if v.len() != horizon {
                                push(
                                    &g.id,
                                    format!(
                                    "availability column {col} has {} rows, horizon has {horizon}",
                                    v.len()
                                ),
                                );
                            }
                            if v.iter().any(|a| !(0.0..=1.0).contains(a)) {
                                push(
                                    &g.id,
                                    format!("availability column {col} must lie in [0, 1]"),
                                );
                            }
                        }
                    },
                }
            }
        }
        check_bounds(&g.id, "new power", &g.new_power, &mut asset_checks);
        check_costs(&g.id, &g.costs, &mut asset_checks);
    }
    out.append(&mut asset_checks);

    for k in &s.storages {
        let mut push = |rule: String| {
            out.push(Violation {
                entity: k.id.clone(),
                rule,
            })
        };
        if k.node >= n_nodes {
            push("storage must reference an existing node".into());
        }
        if !(k.charge_efficiency > 0.0 && k.charge_efficiency <= 1.0) {
            push("charge efficiency must lie in (0, 1]".into());
        }
        if !(k.discharge_efficiency > 0.0 && k.discharge_efficiency <= 1.0) {
            push("discharge efficiency must lie in (0, 1]".into());
        }
        if !(k.existing_power >= 0.0 && k.existing_energy >= 0.0) {
            push("existing capacity must be non-negative".into());
        }
        if let Some(h) = k.duration {
            if !(h > 0.0) {
                push("duration must be positive".into());
            }
        }
        check_bounds(&k.id, "new power", &k.new_power, &mut out);
        check_bounds(&k.id, "new energy", &k.new_energy, &mut out);
        check_costs(&k.id, &k.costs, &mut out);
    }

    for l in &s.lines {
        let mut push = |rule: String| {
            out.push(Violation {
                entity: l.id.clone(),
                rule,
            })
        };
        if l.from >= n_nodes || l.to >= n_nodes {
            push("line must reference existing nodes".into());
        }
        if l.from == l.to {
            push("line endpoints must be distinct".into());
        }
        if !(l.length >= 0.0) {
            push("length must be non-negative".into());
        }
        if !(l.existing_power >= 0.0) {
            push("existing power must be non-negative".into());
        }
        check_bounds(&l.id, "new power", &l.new_power, &mut out);
        check_costs(&l.id, &l.costs, &mut out);
    }

    if s.traces.demand.len() != n_nodes {
        out.push(Violation {
            entity: "demand".into(),
            rule: format!(
                "demand has {} node columns, scenario has {n_nodes} nodes",
                s.traces.demand.len()
            ),
        });
    }
    for (i, d) in s.traces.demand.iter().enumerate() {
        let name = s.nodes.get(i).map(String::as_str).unwrap_or("demand");
        if d.len() != horizon {
            out.push(Violation {
                entity: name.into(),
                rule: format!("demand has {} rows, horizon has {horizon}", d.len()),
            });
        }
        if d.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            out.push(Violation {
                entity: name.into(),
                rule: "demand must be finite and non-negative".into(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Scenario {
        make_synthetic(3, 2, 1, 1.0)
    }

    #[test]
    fn synthetic_is_valid() {
        assert!(validate_scenario(&tiny()).is_empty());
    }

    #[test]
    fn efficiency_above_one_is_one_violation() {
        let mut s = tiny();
        s.storages[0].discharge_efficiency = 1.2;
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].entity, s.storages[0].id);
        assert!(v[0].rule.contains("discharge efficiency"));
    }

    #[test]
    fn self_loop_line_is_one_violation() {
        let mut s = tiny();
        s.lines[0].to = s.lines[0].from;
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("distinct"));
    }

    #[test]
    fn decision_vector_round_trip() {
        let s = make_synthetic(1, 3, 1, 1.0);
        let vars = s.decision_space();
        let x: Vec<f64> = vars
            .iter()
            .map(|v| 0.5 * (v.bounds.min + v.bounds.max))
            .collect();
        let c = s.candidate_from_vector(&x).unwrap();
        assert_eq!(c.to_vector(&s), x);
        s.check_candidate(&c).unwrap();
    }

    #[test]
    fn fixed_duration_couples_energy() {
        let mut s = tiny();
        s.storages[0].duration = Some(4.0);
        s.storages[0].new_energy = Bounds::new(0.0, 100.0);
        let vars = s.decision_space();
        assert!(!vars
            .iter()
            .any(|v| v.name == format!("{}.energy", s.storages[0].id)));
        let x: Vec<f64> = vars.iter().map(|v| v.bounds.max).collect();
        let c = s.candidate_from_vector(&x).unwrap();
        assert!((c.storage_energy[0] - 4.0 * c.storage_power[0]).abs() < 1e-12);
        s.check_candidate(&c).unwrap();
    }

    #[test]
    fn out_of_bounds_names_variable() {
        let s = tiny();
        let mut c = CandidateSolution::zeros(&s);
        c.generator_power[0] = -1.0;
        match s.check_candidate(&c) {
            Err(Error::OutOfBounds { variable, .. }) => {
                assert_eq!(variable, format!("{}.power", s.generators[0].id))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_never_panics_on_garbage() {
        let mut s = tiny();
        s.nodes.clear();
        s.years = vec![];
        s.resolution = f64::NAN;
        s.reliability = -3.0;
        s.generators[0].node = 99;
        s.lines[0].from = 42;
        let v = validate_scenario(&s);
        assert!(v.len() >= 5);
    }
}
