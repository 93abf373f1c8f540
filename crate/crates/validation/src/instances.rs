//! Hand-built scenarios. Assets are existing capacity with zero build
//! bounds unless a builder says otherwise.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use firm_core::scenario::{
    Annualization, Bounds, CostParams, GeneratorKind, GeneratorSpec, LineSpec, Scenario,
    StorageSpec, TraceSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

/// Hourly single-year scenario with demand in GW per node.
pub fn empty(demand: Vec<Vec<f64>>) -> Scenario {
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

pub fn add_flexible(
    s: &mut Scenario,
    id: &str,
    node: usize,
    power: f64,
    annual_energy: f64,
    fuel: f64,
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
            fuel,
            ..zero_costs()
        },
    });
}

pub fn add_storage(s: &mut Scenario, id: &str, node: usize, power: f64, energy: f64) {
    s.storages.push(StorageSpec {
        id: id.into(),
        node,
        technology: id.into(),
        existing_power: power,
        existing_energy: energy,
        new_power: Bounds::ZERO,
        new_energy: Bounds::ZERO,
        duration: None,
        charge_efficiency: 1.0,
        discharge_efficiency: 1.0,
        costs: zero_costs(),
    });
}

pub fn add_line(s: &mut Scenario, from: usize, to: usize, power: f64) {
    s.lines.push(LineSpec {
        id: format!("l{}", s.lines.len()),
        from,
        to,
        length: 0.0,
        existing_power: power,
        new_power: Bounds::ZERO,
        costs: zero_costs(),
    });
}

fn quarters(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> f64 {
    rng.gen_range(lo..=hi) as f64 * 0.25
}

/// Two nodes over 24 hours with every quantity on a 0.25 GW grid: PV and a
/// lossless storage at each node, one energy-limited flexible unit at a
/// random node and one line.
pub fn oracle_instance(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demand: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..24).map(|_| quarters(&mut rng, 1, 8)).collect())
        .collect();
    let mut s = empty(demand);
    for n in 0..2 {
        let avail: Vec<f64> = (0..24)
            .map(|h| {
                if (6..18).contains(&h) {
                    rng.gen_range(0..=8) as f64 / 8.0
                } else {
                    0.0
                }
            })
            .collect();
        add_pv(&mut s, &format!("pv{n}"), n, 2.0, avail);
        let power = quarters(&mut rng, 1, 4);
        let energy = rng.gen_range(1..=4) as f64 * 0.5;
        add_storage(&mut s, &format!("store{n}"), n, power, energy);
    }
    let at = rng.gen_range(0..2);
    let power = quarters(&mut rng, 1, 4);
    let energy = quarters(&mut rng, 2, 16);
    let fuel = rng.gen_range(50..=150) as f64;
    add_flexible(&mut s, "gas", at, power, energy, fuel);
    let cap = quarters(&mut rng, 0, 4);
    add_line(&mut s, 0, 1, cap);
    s
}

/// One node served only by a buildable flexible unit. Demand follows a
/// daily cycle peaking at `peak` GW.
pub fn flexible_only(peak: f64, days: usize) -> Scenario {
    let demand: Vec<f64> = (0..24 * days)
        .map(|t| peak * (0.75 + 0.25 * (2.0 * PI * (t as f64 - 18.0) / 24.0).cos()))
        .collect();
    let mut s = empty(vec![demand]);
    add_flexible(&mut s, "gas", 0, 0.0, 1e9, 50.0);
    s.generators[0].new_power = Bounds::new(0.0, 3.0 * peak);
    s.generators[0].costs.capital_power = 1000.0;
    s
}
