//! Annuities, fixed and variable costs, penalties and the system-cost objective.
//!
//! Capital rates are $/kW or $/kWh, capacities GW or GWh, so a build cost
//! in dollars is rate × capacity × 10^6. Energy-priced terms convert GW to
//! MW and multiply by the interval length.

use serde::Serialize;

use crate::dispatch::{unit_commit, DispatchOptions, DispatchState};
use crate::network::RouteTable;
use crate::scenario::{Annualization, CandidateSolution, CostParams, GeneratorKind, Scenario};
use crate::{Error, Result};

/// Annuity factor and its reciprocal, the capital recovery factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnuityFactor {
    /// Years-equivalent present value of one unit per year.
    pub af: f64,
    /// Annual payment per unit of upfront cost.
    pub crf: f64,
}

/// `AF = (1 − (1 + dr)^−Y) / dr`, with the limit `AF = Y` at `dr = 0`.
pub fn annuity(discount_rate: f64, lifetime: f64) -> Result<AnnuityFactor> {
    if !(lifetime >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lifetime {lifetime} must be at least 1 year"
        )));
    }
    if !(discount_rate > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "discount rate {discount_rate} must exceed -1"
        )));
    }
    let af = if discount_rate.abs() < 1e-12 {
        lifetime
    } else {
        (1.0 - (1.0 + discount_rate).powf(-lifetime)) / discount_rate
    };
    Ok(AnnuityFactor { af, crf: 1.0 / af })
}

fn crf(c: &CostParams) -> f64 {
    // Validated scenarios always satisfy the annuity preconditions.
    annuity(c.discount_rate, c.lifetime.max(1.0)).map_or(0.0, |a| a.crf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetClass {
    Generator,
    Storage,
    Line,
}

/// Horizon cost of one asset, in dollars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetCost {
    pub id: String,
    pub class: AssetClass,
    pub technology: String,
    pub build: f64,
    pub fixed_om: f64,
    pub variable_om: f64,
    pub fuel: f64,
}

impl AssetCost {
    pub fn total(&self) -> f64 {
        self.build + self.fixed_om + self.variable_om + self.fuel
    }
}

fn asset_rows(s: &Scenario) -> Vec<AssetCost> {
    let row = |id: &str, class, technology: &str| AssetCost {
        id: id.to_string(),
        class,
        technology: technology.to_string(),
        build: 0.0,
        fixed_om: 0.0,
        variable_om: 0.0,
        fuel: 0.0,
    };
    s.generators
        .iter()
        .map(|g| row(&g.id, AssetClass::Generator, &g.technology))
        .chain(
            s.storages
                .iter()
                .map(|k| row(&k.id, AssetClass::Storage, &k.technology)),
        )
        .chain(
            s.lines
                .iter()
                .map(|l| row(&l.id, AssetClass::Line, "transmission")),
        )
        .collect()
}

/// Annualized build cost of each asset for one year, $/yr, in the order
/// generators, storages, lines. Storages sum power and energy.
pub fn annual_build_costs(s: &Scenario, c: &CandidateSolution) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.generators.len() + s.storages.len() + s.lines.len());
    for (g, &np) in s.generators.iter().zip(&c.generator_power) {
        out.push(g.costs.capital_power * np * crf(&g.costs) * 1e6);
    }
    for (i, k) in s.storages.iter().enumerate() {
        let f = crf(&k.costs);
        out.push(
            (k.costs.capital_power * c.storage_power[i]
                + k.costs.capital_energy * c.storage_energy[i])
                * f
                * 1e6,
        );
    }
    for (l, &np) in s.lines.iter().zip(&c.line_power) {
        out.push(l.costs.capital_power * np * l.length * crf(&l.costs) * 1e6);
    }
    out
}

/// Fixed costs with their per-asset split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedCosts {
    pub total: f64,
    /// Only `build` and `fixed_om` are filled.
    pub assets: Vec<AssetCost>,
}

/// Annualized build plus fixed O&M over every year of the horizon.
pub fn fixed_costs(s: &Scenario, c: &CandidateSolution) -> FixedCosts {
    let years = s.years.len() as f64;
    let build_years = match s.annualization {
        Annualization::PerYear => years,
        Annualization::Once => 1.0,
    };
    let build = annual_build_costs(s, c);
    let mut fom = Vec::with_capacity(build.len());
    for (i, g) in s.generators.iter().enumerate() {
        fom.push(g.costs.fixed_om * c.generator_total(s, i) * 1e6);
    }
    for (i, k) in s.storages.iter().enumerate() {
        fom.push(k.costs.fixed_om * c.storage_total_power(s, i) * 1e6);
    }
    for (i, l) in s.lines.iter().enumerate() {
        fom.push(l.costs.fixed_om * c.line_total(s, i) * l.length * 1e6);
    }
    let mut assets = asset_rows(s);
    let mut total = 0.0;
    for (row, (b, f)) in assets.iter_mut().zip(build.iter().zip(&fom)) {
        row.build = b * build_years;
        row.fixed_om = f * years;
        total += row.build + row.fixed_om;
    }
    FixedCosts { total, assets }
}

/// Variable costs with their per-asset split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableCosts {
    pub total: f64,
    /// Only `variable_om` and `fuel` are filled.
    pub assets: Vec<AssetCost>,
}

/// Generator VOM and fuel on output, storage VOM on discharge and line VOM
/// on absolute flow, over the simulated intervals.
pub fn variable_costs(d: &DispatchState, s: &Scenario, c: &CandidateSolution) -> VariableCosts {
    let t_len = d.completed_intervals;
    let mwh = 1000.0 * d.resolution;
    let mut assets = asset_rows(s);
    let mut flex_index = 0;
    for (gi, g) in s.generators.iter().enumerate() {
        let energy_gw: f64 = if g.kind == GeneratorKind::Flexible {
            let j = flex_index;
            flex_index += 1;
            (0..t_len)
                .map(|t| d.flexible_power[t * d.n_flexible + j])
                .sum()
        } else {
            let cap = c.generator_total(s, gi);
            s.availability(g)
                .map_or(0.0, |a| a[..t_len].iter().sum::<f64>() * cap)
        };
        assets[gi].variable_om = g.costs.variable_om * energy_gw * mwh;
        assets[gi].fuel = g.costs.fuel * energy_gw * mwh;
    }
    let off = s.generators.len();
    for (k, spec) in s.storages.iter().enumerate() {
        let discharged: f64 = (0..t_len)
            .map(|t| d.storage_power[t * d.n_storages + k].max(0.0))
            .sum();
        assets[off + k].variable_om = spec.costs.variable_om * discharged * mwh;
    }
    let off = off + s.storages.len();
    for (l, spec) in s.lines.iter().enumerate() {
        let carried: f64 = (0..t_len)
            .map(|t| d.line_flow[t * d.n_lines + l].abs())
            .sum();
        assets[off + l].variable_om = spec.costs.variable_om * carried * mwh;
    }
    let total = assets.iter().map(|a| a.variable_om + a.fuel).sum();
    VariableCosts { total, assets }
}

/// Penalty for serving less than the reliability standard in one year.
///
/// Sums are in GW over the year's intervals; the shortfall is measured in MW.
pub fn penalty_unserved(
    unserved_gw: f64,
    load_gw: f64,
    reliability: f64,
    r: f64,
    scale: f64,
) -> f64 {
    let excess = unserved_gw - (1.0 - reliability) * load_gw;
    // Rounding in (1 − RS)·ΣL must not turn an exact boundary into a penalty.
    if excess <= 1e-12 * load_gw.abs().max(1.0) {
        return 0.0;
    }
    scale * r * excess * 1000.0
}

/// Penalty for fixed costs per MWh above the threshold.
pub fn penalty_fixed(fixed: f64, demand_mwh: f64, threshold: f64, scale: f64) -> f64 {
    if !threshold.is_finite() {
        return 0.0;
    }
    (fixed / demand_mwh - threshold).max(0.0) * scale
}

/// Cost breakdown of one evaluated candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    /// Fixed costs over the horizon, $.
    pub fixed: f64,
    /// Variable costs over the simulated intervals, $.
    pub variable: f64,
    pub assets: Vec<AssetCost>,
    /// Sum of the yearly unserved-energy penalties, $/MWh.
    pub penalty_unserved: f64,
    pub penalty_fixed: f64,
    pub demand_mwh: f64,
    pub unserved_gwh: f64,
    /// (fixed + variable) / demand + penalties, $/MWh.
    pub system_cost: f64,
    /// (fixed + variable) / demand, $/MWh.
    pub lcoe: f64,
    /// False when evaluation stopped early.
    pub complete: bool,
}

impl CostReport {
    /// Combines fixed costs with an optional dispatch into a report.
    pub fn assemble(
        s: &Scenario,
        c: &CandidateSolution,
        fc: FixedCosts,
        d: Option<&DispatchState>,
    ) -> Self {
        let demand_mwh = s.total_demand_mwh();
        let mut assets = fc.assets;
        let (variable, pf_ue, unserved_gwh, complete) = match d {
            Some(d) => {
                let vc = variable_costs(d, s, c);
                for (a, v) in assets.iter_mut().zip(&vc.assets) {
                    a.variable_om = v.variable_om;
                    a.fuel = v.fuel;
                }
                let pf: f64 = yearly_unserved_penalties(s, d).iter().sum();
                (
                    vc.total,
                    pf,
                    d.total_unserved_energy(),
                    d.completed_intervals == d.n_intervals,
                )
            }
            None => (0.0, 0.0, 0.0, false),
        };
        let pf_fc = penalty_fixed(
            fc.total,
            demand_mwh,
            s.fixed_cost_threshold,
            s.penalty_scale,
        );
        let lcoe = system_lcoe(fc.total, variable, demand_mwh);
        CostReport {
            fixed: fc.total,
            variable,
            assets,
            penalty_unserved: pf_ue,
            penalty_fixed: pf_fc,
            demand_mwh,
            unserved_gwh,
            system_cost: lcoe + pf_ue + pf_fc,
            lcoe,
            complete,
        }
    }
}

/// (fixed + variable) / demand. Every LCOE in the crate goes through here.
pub fn system_lcoe(fixed: f64, variable: f64, demand_mwh: f64) -> f64 {
    (fixed + variable) / demand_mwh
}

/// Unserved-energy penalty of each simulated year.
pub fn yearly_unserved_penalties(s: &Scenario, d: &DispatchState) -> Vec<f64> {
    let n = d.n_nodes;
    d.years
        .iter()
        .filter(|r| r.end <= d.completed_intervals)
        .map(|r| {
            let ue: f64 = d.unserved[r.start * n..r.end * n].iter().sum();
            let load: f64 = d.load[r.start * n..r.end * n].iter().sum();
            penalty_unserved(ue, load, s.reliability, s.resolution, s.penalty_scale)
        })
        .collect()
}

/// Score and report of one candidate.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// The value minimized by the optimizer, $/MWh.
    pub score: f64,
    pub report: CostReport,
    /// Absent when the fixed-cost penalty skipped dispatch.
    pub dispatch: Option<DispatchState>,
}

impl Evaluation {
    /// No unserved or fixed-cost penalty applies.
    pub fn feasible(&self) -> bool {
        self.report.complete
            && self.report.penalty_unserved == 0.0
            && self.report.penalty_fixed == 0.0
    }
}

/// The system-cost objective.
///
/// With `early_exit`, a positive fixed-cost penalty is returned alone without
/// dispatch, and dispatch stops at the first year with an unserved-energy
/// penalty, whose value becomes the score. Otherwise the score is
/// `(FC + VC) / demand + ΣPF_UE + PF_FC` over the full horizon.
pub fn objective(
    s: &Scenario,
    c: &CandidateSolution,
    rt: &RouteTable,
    early_exit: bool,
    precharge: bool,
) -> Evaluation {
    let fc = fixed_costs(s, c);
    let demand_mwh = s.total_demand_mwh();
    let pf_fc = penalty_fixed(
        fc.total,
        demand_mwh,
        s.fixed_cost_threshold,
        s.penalty_scale,
    );
    if early_exit && pf_fc > 0.0 {
        let report = CostReport::assemble(s, c, fc, None);
        return Evaluation {
            score: pf_fc,
            report,
            dispatch: None,
        };
    }
    let opts = DispatchOptions {
        precharge,
        stop_on_unserved_penalty: early_exit,
        max_lookback: None,
    };
    let d = unit_commit(s, c, rt, &opts);
    let report = CostReport::assemble(s, c, fc, Some(&d));
    let score = if early_exit {
        match yearly_unserved_penalties(s, &d)
            .into_iter()
            .find(|&p| p > 0.0)
        {
            Some(p) => p,
            None => report.system_cost,
        }
    } else {
        report.system_cost
    };
    Evaluation {
        score,
        report,
        dispatch: Some(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::enumerate_routes;
    use crate::scenario::make_synthetic;
    use crate::testutil::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn annuity_footnote_values() {
        assert!((annuity(0.03, 75.0).unwrap().crf - 0.034).abs() <= 0.0005);
        assert!((annuity(0.07, 40.0).unwrap().crf - 0.075).abs() <= 0.0005);
        assert_relative_eq!(
            annuity(0.07, 1.0).unwrap().af,
            1.0 / 1.07,
            max_relative = 1e-15
        );
        assert_eq!(annuity(0.0, 30.0).unwrap().af, 30.0);
        assert!(annuity(0.05, 0.5).is_err());
    }

    #[test]
    fn annuity_near_zero_rate_is_continuous() {
        let a = annuity(1e-9, 40.0).unwrap().af;
        assert!((a - 40.0).abs() < 1e-5);
        let big = annuity(0.05, 5000.0).unwrap().af;
        assert!((big - 20.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn af_times_crf_is_one(dr in -0.5f64..0.5, y in 1.0f64..200.0) {
            let a = annuity(dr, y).unwrap();
            prop_assert!((a.af * a.crf - 1.0).abs() < 1e-12);
            prop_assert!(a.af > 0.0);
        }
    }

    fn one_storage(capital_energy: f64, dr: f64, lifetime: f64) -> (Scenario, CandidateSolution) {
        let mut s = scenario(vec![vec![1.0; 2]]);
        add_storage(&mut s, "b", 0, 0.0, 0.0, 1.0, 1.0);
        s.storages[0].new_energy = crate::scenario::Bounds::new(0.0, 5000.0);
        s.storages[0].new_power = crate::scenario::Bounds::new(0.0, 100.0);
        s.storages[0].costs.capital_energy = capital_energy;
        s.storages[0].costs.discount_rate = dr;
        s.storages[0].costs.lifetime = lifetime;
        let c = CandidateSolution::zeros(&s);
        (s, c)
    }

    #[test]
    fn battery_build_cost() {
        let (s, mut c) = one_storage(190.0, 0.07, 20.0);
        c.storage_energy[0] = 1200.0;
        c.storage_power[0] = 50.0;
        let fc = fixed_costs(&s, &c).total;
        assert!((fc / 21e9 - 1.0).abs() <= 0.05, "{fc}");
    }

    #[test]
    fn zero_build_zero_fom() {
        let s = make_synthetic(0, 2, 1, 24.0);
        let mut s = s;
        for g in &mut s.generators {
            g.costs.fixed_om = 0.0;
        }
        for k in &mut s.storages {
            k.costs.fixed_om = 0.0;
        }
        for l in &mut s.lines {
            l.costs.fixed_om = 0.0;
        }
        assert_eq!(fixed_costs(&s, &CandidateSolution::zeros(&s)).total, 0.0);
    }

    #[test]
    fn fixed_costs_linear_in_each_variable() {
        let s = make_synthetic(3, 3, 2, 24.0);
        let vars = s.decision_space();
        let x0: Vec<f64> = vars.iter().map(|v| 0.3 * v.bounds.max).collect();
        let base = fixed_costs(&s, &s.candidate_from_vector(&x0).unwrap()).total;
        for i in 0..vars.len() {
            let mut x = x0.clone();
            x[i] += 1.0;
            let bumped = fixed_costs(&s, &s.candidate_from_vector(&x).unwrap()).total;
            let c1 = s.candidate_from_vector(&x).unwrap();
            let mut x2 = x0.clone();
            x2[i] += 2.0;
            let bumped2 = fixed_costs(&s, &s.candidate_from_vector(&x2).unwrap()).total;
            let slope = bumped - base;
            assert!(
                ((bumped2 - bumped) - slope).abs() <= 1e-9 * base.abs().max(1.0),
                "{}",
                vars[i].name
            );
            // Slope matches the asset's rates.
            let years = s.years.len() as f64;
            let expected = match vars[i].target {
                crate::scenario::Target::GeneratorPower(g) => {
                    let k = &s.generators[g].costs;
                    (k.capital_power * crf(k) + k.fixed_om) * 1e6 * years
                }
                crate::scenario::Target::StoragePower(j) => {
                    let k = &s.storages[j].costs;
                    (k.capital_power * crf(k) + k.fixed_om) * 1e6 * years
                }
                crate::scenario::Target::StorageEnergy(j) => {
                    let k = &s.storages[j].costs;
                    k.capital_energy * crf(k) * 1e6 * years
                }
                crate::scenario::Target::LinePower(l) => {
                    let k = &s.lines[l].costs;
                    (k.capital_power * crf(k) + k.fixed_om) * s.lines[l].length * 1e6 * years
                }
            };
            assert_relative_eq!(slope, expected, max_relative = 1e-6);
            drop(c1);
        }
    }

    #[test]
    fn once_annualization_charges_capital_once() {
        let mut s = make_synthetic(3, 1, 3, 24.0);
        let vars = s.decision_space();
        let x: Vec<f64> = vars.iter().map(|v| v.bounds.max).collect();
        let c = s.candidate_from_vector(&x).unwrap();
        let per_year = fixed_costs(&s, &c);
        s.annualization = Annualization::Once;
        let once = fixed_costs(&s, &c);
        for (a, b) in per_year.assets.iter().zip(&once.assets) {
            assert_relative_eq!(a.build, 3.0 * b.build, max_relative = 1e-12);
            assert_eq!(a.fixed_om, b.fixed_om);
        }
    }

    #[test]
    fn variable_cost_examples() {
        let mut s = scenario(vec![vec![2.0; 3]]);
        add_flexible(&mut s, "gas", 0, 2.0, 1e6, 100.0);
        let rt = enumerate_routes(&s, None);
        let c = zero_candidate(&s);
        let d = unit_commit(&s, &c, &rt, &DispatchOptions::default());
        assert_relative_eq!(
            variable_costs(&d, &s, &c).total,
            600_000.0,
            max_relative = 1e-12
        );

        let mut s = scenario(vec![vec![0.0; 2]]);
        add_pv(&mut s, "pv", 0, 1.0, vec![1.0, 1.0]);
        add_storage(&mut s, "b", 0, 1.0, 4.0, 1.0, 1.0);
        s.storages[0].costs.variable_om = 10.0;
        let c = zero_candidate(&s);
        let d = unit_commit(
            &s,
            &c,
            &enumerate_routes(&s, None),
            &DispatchOptions::default(),
        );
        assert!(d.storage_power.iter().all(|&p| p < 0.0));
        assert_eq!(variable_costs(&d, &s, &c).assets[1].variable_om, 0.0);

        let s = scenario(vec![vec![0.0; 2]]);
        let c = zero_candidate(&s);
        let d = unit_commit(
            &s,
            &c,
            &enumerate_routes(&s, None),
            &DispatchOptions::default(),
        );
        assert_eq!(variable_costs(&d, &s, &c).total, 0.0);
    }

    #[test]
    fn unserved_penalty_examples() {
        assert_eq!(penalty_unserved(0.0, 100.0, 0.99998, 1.0, 1e6), 0.0);
        let load = 1234.5;
        assert_eq!(
            penalty_unserved(0.00002 * load, load, 0.99998, 1.0, 1e6),
            0.0
        );
        // One GWh short with a perfect standard.
        assert_relative_eq!(penalty_unserved(1.0, 50.0, 1.0, 1.0, 1e6), 1e9);
    }

    #[test]
    fn fixed_penalty_examples() {
        assert_eq!(penalty_fixed(500.0, 10.0, 50.0, 1e6), 0.0);
        assert_relative_eq!(penalty_fixed(510.0, 10.0, 50.0, 1e6), 1e6);
        assert_eq!(penalty_fixed(1e12, 1.0, f64::INFINITY, 1e6), 0.0);
    }

    fn reliable_toy() -> Scenario {
        let mut s = scenario(vec![vec![1.0, 1.5, 0.8, 1.2]]);
        add_flexible(&mut s, "gas", 0, 0.0, 1e6, 60.0);
        s.generators[0].new_power = crate::scenario::Bounds::new(0.0, 3.0);
        s.generators[0].costs.capital_power = 800.0;
        s.generators[0].costs.fixed_om = 12.0;
        s
    }

    #[test]
    fn objective_composition_and_early_exit() {
        let s = reliable_toy();
        let rt = enumerate_routes(&s, None);
        let mut c = CandidateSolution::zeros(&s);
        c.generator_power[0] = 2.0;
        let on = objective(&s, &c, &rt, true, true);
        let off = objective(&s, &c, &rt, false, true);
        assert_eq!(on.score, off.score);
        let r = &off.report;
        assert_eq!(on.score, (r.fixed + r.variable) / r.demand_mwh);
        let parts: f64 = r.assets.iter().map(AssetCost::total).sum();
        assert_relative_eq!(parts, r.fixed + r.variable, max_relative = 1e-6);
        assert!(on.feasible());

        c.generator_power[0] = 1.0;
        let short = objective(&s, &c, &rt, true, true);
        assert!(!short.feasible());
        assert_relative_eq!(short.score, 1e6 * 1000.0 * 0.7, max_relative = 1e-9);

        let mut s = reliable_toy();
        s.fixed_cost_threshold = 1.0;
        c.generator_power[0] = 2.0;
        let skipped = objective(&s, &c, &rt, true, true);
        assert!(skipped.dispatch.is_none());
        assert_eq!(skipped.score, skipped.report.penalty_fixed);
        assert!(skipped.score > 0.0);
    }

    #[test]
    fn report_decomposition_on_synthetic() {
        let s = make_synthetic(2, 3, 1, 6.0);
        let rt = enumerate_routes(&s, None);
        let vars = s.decision_space();
        let x: Vec<f64> = vars.iter().map(|v| 0.5 * v.bounds.max).collect();
        let c = s.candidate_from_vector(&x).unwrap();
        let e = objective(&s, &c, &rt, false, true);
        let r = &e.report;
        let sc = (r.fixed + r.variable) / r.demand_mwh + r.penalty_unserved + r.penalty_fixed;
        assert_relative_eq!(r.system_cost, sc, max_relative = 1e-9);
        let parts: f64 = r.assets.iter().map(AssetCost::total).sum();
        assert_relative_eq!(parts, r.fixed + r.variable, max_relative = 1e-6);
    }
}
