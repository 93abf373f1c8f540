use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Annualization, Bounds, CostParams, GeneratorKind, GeneratorSpec, LineSpec, Scenario,
    StorageSpec, TraceSet,
};

fn costs(
    capital_power: f64,
    capital_energy: f64,
    fixed_om: f64,
    variable_om: f64,
    fuel: f64,
    lifetime: f64,
) -> CostParams {
    CostParams {
        capital_power,
        capital_energy,
        fixed_om,
        variable_om,
        fuel,
        discount_rate: 0.05,
        lifetime,
    }
}

/// Desk-scale synthetic scenario, a pure function of its arguments.
///
/// Every node gets PV and wind; node 0 hosts a gas unit and a battery, the
/// last node a hydro unit and pumped hydro. Nodes are joined in a ring.
pub fn make_synthetic(seed: u64, n_nodes: usize, n_years: usize, r: f64) -> Scenario {
    assert!(n_nodes >= 1 && n_years >= 1 && r > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_year = ((8760.0 / r).round() as usize).max(1);
    let horizon = per_year * n_years;
    let nodes: Vec<String> = (0..n_nodes).map(|i| format!("N{i}")).collect();

    let mut demand = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let scale = 1.0 + 0.5 * i as f64 + rng.gen_range(0.0..0.3);
        let phase = rng.gen_range(-1.0..1.0);
        let d: Vec<f64> = (0..horizon)
            .map(|t| {
                let h = t as f64 * r;
                let diurnal = 1.0 + 0.25 * (2.0 * PI * (h - 18.0 + phase) / 24.0).cos();
                let seasonal = 1.0 + 0.15 * (2.0 * PI * h / 8760.0).cos();
                scale * diurnal * seasonal * (1.0 + rng.gen_range(-0.05..0.05))
            })
            .collect();
        demand.push(d);
    }

    let mut availability = BTreeMap::new();
    let mut generators = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        let days = (horizon as f64 * r / 24.0).ceil() as usize + 1;
        let cloud: Vec<f64> = (0..days).map(|_| rng.gen_range(0.3..1.0)).collect();
        let pv: Vec<f64> = (0..horizon)
            .map(|t| {
                let h = t as f64 * r;
                let sun = (PI * ((h % 24.0) - 6.0) / 12.0).sin().max(0.0);
                (sun * cloud[(h / 24.0) as usize]).clamp(0.0, 1.0)
            })
            .collect();

        let mut z: f64 = 0.0;
        let rho = (-r / 12.0f64).exp();
        let wind: Vec<f64> = (0..horizon)
            .map(|_| {
                z = rho * z + (1.0 - rho * rho).sqrt() * rng.gen_range(-1.7..1.7);
                1.0 / (1.0 + (-1.5 * z + 0.4).exp())
            })
            .collect();

        let pv_id = format!("pv_{node}");
        let wind_id = format!("wind_{node}");
        availability.insert(pv_id.clone(), pv);
        availability.insert(wind_id.clone(), wind);
        generators.push(GeneratorSpec {
            id: pv_id.clone(),
            node: i,
            kind: GeneratorKind::Pv,
            technology: "pv".into(),
            existing_power: 0.0,
            new_power: Bounds::new(0.0, 10.0),
            annual_energy: None,
            trace: Some(pv_id),
            costs: costs(1200.0, 0.0, 15.0, 0.0, 0.0, 30.0),
        });
        generators.push(GeneratorSpec {
            id: wind_id.clone(),
            node: i,
            kind: GeneratorKind::Wind,
            technology: "wind".into(),
            existing_power: 0.0,
            new_power: Bounds::new(0.0, 10.0),
            annual_energy: None,
            trace: Some(wind_id),
            costs: costs(2000.0, 0.0, 25.0, 2.0, 0.0, 25.0),
        });
    }
    let peak: f64 = demand
        .iter()
        .map(|d| d.iter().cloned().fold(0.0, f64::max))
        .sum();
    generators.push(GeneratorSpec {
        id: "gas".into(),
        node: 0,
        kind: GeneratorKind::Flexible,
        technology: "gas".into(),
        existing_power: 0.0,
        new_power: Bounds::new(0.0, (1.5 * peak).ceil()),
        annual_energy: Some(1e9),
        trace: None,
        costs: costs(1000.0, 0.0, 10.0, 5.0, 100.0, 25.0),
    });
    let last = n_nodes - 1;
    generators.push(GeneratorSpec {
        id: "hydro".into(),
        node: last,
        kind: GeneratorKind::Flexible,
        technology: "hydro".into(),
        existing_power: 0.5,
        new_power: Bounds::ZERO,
        annual_energy: Some(800.0 * n_nodes as f64 / 3.0),
        trace: None,
        costs: costs(0.0, 0.0, 20.0, 3.0, 0.0, 50.0),
    });

    let storages = vec![
        StorageSpec {
            id: "battery".into(),
            node: 0,
            technology: "battery".into(),
            existing_power: 0.0,
            existing_energy: 0.0,
            new_power: Bounds::new(0.0, 5.0),
            new_energy: Bounds::new(0.0, 20.0),
            duration: None,
            charge_efficiency: 0.92,
            discharge_efficiency: 0.92,
            costs: costs(300.0, 250.0, 5.0, 0.0, 0.0, 15.0),
        },
        StorageSpec {
            id: "pumped_hydro".into(),
            node: last,
            technology: "pumped_hydro".into(),
            existing_power: 0.0,
            existing_energy: 0.0,
            new_power: Bounds::new(0.0, 5.0),
            new_energy: Bounds::new(0.0, 200.0),
            duration: None,
            charge_efficiency: 0.87,
            discharge_efficiency: 0.92,
            costs: costs(2000.0, 50.0, 8.0, 0.0, 0.0, 60.0),
        },
    ];

    let mut lines = Vec::new();
    let ring: Vec<(usize, usize)> = match n_nodes {
        1 => vec![],
        2 => vec![(0, 1)],
        n => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    };
    for (from, to) in ring {
        lines.push(LineSpec {
            id: format!("{}-{}", nodes[from], nodes[to]),
            from,
            to,
            length: 100.0 + 300.0 * rng.gen::<f64>().round(),
            existing_power: 1.0,
            new_power: Bounds::new(0.0, 5.0),
            costs: costs(1.5, 0.0, 0.01, 0.0, 0.0, 50.0),
        });
    }

    Scenario {
        nodes,
        lines,
        generators,
        storages,
        traces: TraceSet {
            demand,
            availability,
        },
        resolution: r,
        years: vec![per_year; n_years],
        reliability: 0.99998,
        fixed_cost_threshold: f64::INFINITY,
        penalty_scale: 1e6,
        annualization: Annualization::PerYear,
    }
}
