//! Small hand-built scenarios for unit tests. Every asset is existing
//! capacity with zero build bounds, so the zero candidate is the portfolio.

use std::collections::BTreeMap;

use crate::scenario::{
    Annualization, Bounds, CandidateSolution, CostParams, GeneratorKind, GeneratorSpec, LineSpec,
    Scenario, StorageSpec, TraceSet,
};

pub fn zero_costs() -> CostParams {
    CostParams {
        capital_power: 0.0,
        capital_energy: 0.0,
        fixed_om: 0.0,
        variable_om: 0.0,
        fuel: 0.0,
        discount_rate: 0.05,
        lifetime: 20.0,
    }
}

/// Hourly, single-year scenario with demand in GW per node.
pub fn scenario(demand: Vec<Vec<f64>>) -> Scenario {
    let t = demand[0].len();
    Scenario {
        nodes: (0..demand.len()).map(|i| format!("n{i}")).collect(),
        lines: vec![],
        generators: vec![],
        storages: vec![],
        traces: TraceSet {
            demand,
            availability: BTreeMap::new(),
        },
        resolution: 1.0,
        years: vec![t],
        reliability: 1.0,
        fixed_cost_threshold: f64::INFINITY,
        penalty_scale: 1e6,
        annualization: Annualization::PerYear,
    }
}

pub fn add_flexible(
    s: &mut Scenario,
    id: &str,
    node: usize,
    power: f64,
    annual_energy: f64,
    srmc: f64,
) {
    s.generators.push(GeneratorSpec {
        id: id.into(),
        node,
        kind: GeneratorKind::Flexible,
        technology: id.into(),
        existing_power: power,
        new_power: Bounds::ZERO,
        annual_energy: Some(annual_energy),
        trace: None,
        costs: CostParams {
            fuel: srmc,
            ..zero_costs()
        },
    });
}

pub fn add_storage(
    s: &mut Scenario,
    id: &str,
    node: usize,
    power: f64,
    energy: f64,
    eta_ch: f64,
    eta_dis: f64,
) {
    s.storages.push(StorageSpec {
        id: id.into(),
        node,
        technology: id.into(),
        existing_power: power,
        existing_energy: energy,
        new_power: Bounds::ZERO,
        new_energy: Bounds::ZERO,
        duration: None,
        charge_efficiency: eta_ch,
        discharge_efficiency: eta_dis,
        costs: zero_costs(),
    });
}

pub fn add_line(s: &mut Scenario, from: usize, to: usize, power: f64) {
    let id = format!("l{}", s.lines.len());
    s.lines.push(LineSpec {
        id,
        from,
        to,
        length: 0.0,
        existing_power: power,
        new_power: Bounds::ZERO,
        costs: zero_costs(),
    });
}

pub fn add_pv(s: &mut Scenario, id: &str, node: usize, power: f64, availability: Vec<f64>) {
    s.traces.availability.insert(id.into(), availability);
    s.generators.push(GeneratorSpec {
        id: id.into(),
        node,
        kind: GeneratorKind::Pv,
        technology: "pv".into(),
        existing_power: power,
        new_power: Bounds::ZERO,
        annual_energy: None,
        trace: Some(id.into()),
        costs: zero_costs(),
    });
}

pub fn zero_candidate(s: &Scenario) -> CandidateSolution {
    CandidateSolution::zeros(s)
}
