//! Business-rules unit commitment over the full chronology.
//!
//! Each interval is balanced by a fixed rule sequence: transmit surplus to
//! deficits, dispatch local storage, share spare storage discharge, dispatch
//! local flexible generation, share spare flexible output, and finally send
//! leftover surplus to charge storage elsewhere. After each run of deficit
//! intervals the engine walks backwards in time to pre-charge storage, see
//! [`precharge`].

mod export;
pub mod precharge;

use std::ops::Range;

use crate::costing::penalty_unserved;
use crate::network::{transmit, FlowState, RouteTable};
use crate::scenario::{CandidateSolution, GeneratorKind, Scenario};

pub use export::{write_dispatch_csv, write_soc_csv};
pub use precharge::PrechargePlan;

/// Σ UE above this (GW) marks an interval as part of a deficit block.
pub const DEFICIT_TOL: f64 = 1e-9;
const TOL: f64 = 1e-12;
/// Slack allowed when checking a stored dispatch against recomputed limits.
const FEASIBLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchOptions {
    /// Run the backward pre-charging pass after each deficit block.
    pub precharge: bool,
    /// Stop after the first year whose unserved-energy penalty is positive.
    pub stop_on_unserved_penalty: bool,
    /// Limit on how many intervals pre-charging may reach back before a
    /// block. `None` allows walking back to the first interval.
    pub max_lookback: Option<usize>,
}

impl Default for DispatchOptions {
    fn default() -> Self {
        DispatchOptions {
            precharge: true,
            stop_on_unserved_penalty: false,
            max_lookback: None,
        }
    }
}

/// Loads and non-dispatchable generation per interval and node, in GW.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLoad {
    pub n_nodes: usize,
    /// All arrays are indexed `[t * n_nodes + n]`.
    pub load: Vec<f64>,
    pub pv: Vec<f64>,
    pub wind: Vec<f64>,
    pub baseload: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Load minus availability-weighted PV, wind and baseload capacity.
pub fn residual_load(s: &Scenario, c: &CandidateSolution) -> ResidualLoad {
    let n = s.nodes.len();
    let t_len = s.n_intervals();
    let mut load = vec![0.0; t_len * n];
    for (i, d) in s.traces.demand.iter().enumerate() {
        for (t, &x) in d.iter().enumerate().take(t_len) {
            load[t * n + i] = x;
        }
    }
    let mut pv = vec![0.0; t_len * n];
    let mut wind = vec![0.0; t_len * n];
    let mut baseload = vec![0.0; t_len * n];
    for (gi, g) in s.generators.iter().enumerate() {
        let target = match g.kind {
            GeneratorKind::Pv => &mut pv,
            GeneratorKind::Wind => &mut wind,
            GeneratorKind::Baseload => &mut baseload,
            GeneratorKind::Flexible => continue,
        };
        let cap = c.generator_total(s, gi);
        if cap == 0.0 {
            continue;
        }
        if let Some(a) = s.availability(g) {
            for (t, &x) in a.iter().enumerate().take(t_len) {
                target[t * n + g.node] += cap * x;
            }
        }
    }
    let residual = (0..t_len * n)
        .map(|i| load[i] - pv[i] - wind[i] - baseload[i])
        .collect();
    ResidualLoad {
        n_nodes: n,
        load,
        pv,
        wind,
        baseload,
        residual,
    }
}

/// Stored energy before the first interval: half of each storage's capacity.
pub fn init_storage(s: &Scenario, c: &CandidateSolution) -> Vec<f64> {
    (0..s.storages.len())
        .map(|k| 0.5 * c.storage_total_energy(s, k))
        .collect()
}

/// Energy drawn from a storage by dispatching `phi` for one interval.
/// Negative when charging.
#[inline]
pub fn energy_drop(phi: f64, r: f64, eta_ch: f64, eta_dis: f64) -> f64 {
    r * (phi.max(0.0) / eta_dis + eta_ch * phi.min(0.0))
}

/// Stored energy after dispatching `phi` from `gamma_prev`.
#[inline]
pub fn storage_energy_after(gamma_prev: f64, phi: f64, r: f64, eta_ch: f64, eta_dis: f64) -> f64 {
    gamma_prev - energy_drop(phi, r, eta_ch, eta_dis)
}

/// Discharge and charge power limits of one storage.
///
/// Forward in time `gamma` is the energy before the interval; in reverse it
/// is the energy after it.
#[inline]
pub fn storage_limits(
    gamma: f64,
    te: f64,
    tp: f64,
    eta_ch: f64,
    eta_dis: f64,
    r: f64,
    dir: Direction,
) -> (f64, f64) {
    let (dis, ch) = match dir {
        Direction::Forward => (gamma * eta_dis / r, (te - gamma) / (r * eta_ch)),
        Direction::Reverse => ((te - gamma) * eta_dis / r, gamma / (r * eta_ch)),
    };
    (dis.min(tp).max(0.0), ch.min(tp).max(0.0))
}

/// Power limit of a flexible unit holding `energy` GWh for this interval.
#[inline]
pub fn flexible_limit(energy: f64, tp: f64, r: f64) -> f64 {
    (energy / r).min(tp).max(0.0)
}

/// Splits a nodal storage power along the merit order. Each storage takes
/// what is left, clamped to its own limits. Returns the nodal dispatch.
pub fn dispatch_node_storage(
    nl: f64,
    order: &[usize],
    dis: &[f64],
    ch: &[f64],
    phi: &mut [f64],
) -> f64 {
    let s_dis: f64 = order.iter().map(|&k| dis[k]).sum();
    let s_ch: f64 = order.iter().map(|&k| ch[k]).sum();
    let total = nl.min(s_dis).max(-s_ch);
    let mut rest = total;
    for &k in order {
        let p = rest.min(dis[k]).max(-ch[k]);
        phi[k] = p;
        rest -= p;
    }
    total
}

/// Splits a nodal flexible requirement along ascending marginal cost.
pub fn dispatch_node_flexible(nl: f64, order: &[usize], lim: &[f64], phi: &mut [f64]) -> f64 {
    let s_flex: f64 = order.iter().map(|&g| lim[g]).sum();
    let total = nl.min(s_flex).max(0.0);
    let mut rest = total;
    for &g in order {
        let p = rest.min(lim[g]).max(0.0);
        phi[g] = p;
        rest -= p;
    }
    total
}

/// Limits for one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalLimits {
    pub direction: Direction,
    pub discharge: Vec<f64>,
    pub charge: Vec<f64>,
    pub flexible: Vec<f64>,
    pub node_discharge: Vec<f64>,
    pub node_charge: Vec<f64>,
    pub node_flexible: Vec<f64>,
}

impl IntervalLimits {
    fn new(n: usize, k: usize, g: usize) -> Self {
        IntervalLimits {
            direction: Direction::Forward,
            discharge: vec![0.0; k],
            charge: vec![0.0; k],
            flexible: vec![0.0; g],
            node_discharge: vec![0.0; n],
            node_charge: vec![0.0; n],
            node_flexible: vec![0.0; n],
        }
    }
}

/// Dispatch of one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDispatch {
    pub storage: Vec<f64>,
    pub flexible: Vec<f64>,
    pub line_flow: Vec<f64>,
    pub imports: Vec<f64>,
    pub exports: Vec<f64>,
    pub unserved: Vec<f64>,
    pub spillage: Vec<f64>,
}

impl IntervalDispatch {
    fn new(n: usize, k: usize, g: usize, l: usize) -> Self {
        IntervalDispatch {
            storage: vec![0.0; k],
            flexible: vec![0.0; g],
            line_flow: vec![0.0; l],
            imports: vec![0.0; n],
            exports: vec![0.0; n],
            unserved: vec![0.0; n],
            spillage: vec![0.0; n],
        }
    }

    pub fn is_deficit(&self) -> bool {
        self.unserved.iter().sum::<f64>() > DEFICIT_TOL
    }
}

/// Full dispatch record of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchState {
    pub n_nodes: usize,
    pub n_storages: usize,
    pub n_flexible: usize,
    pub n_lines: usize,
    pub n_intervals: usize,
    pub resolution: f64,
    pub years: Vec<Range<usize>>,
    /// Generator index of each flexible unit.
    pub flexible_generators: Vec<usize>,
    pub storage_node: Vec<usize>,
    pub flexible_node: Vec<usize>,
    /// Initial stored energy of each storage.
    pub initial_energy: Vec<f64>,
    /// Per interval and node, `[t * n_nodes + n]`, GW.
    pub load: Vec<f64>,
    pub residual_load: Vec<f64>,
    pub pv: Vec<f64>,
    pub wind: Vec<f64>,
    pub baseload: Vec<f64>,
    pub imports: Vec<f64>,
    pub exports: Vec<f64>,
    pub unserved: Vec<f64>,
    pub spillage: Vec<f64>,
    /// Per interval and storage, `[t * n_storages + k]`. Power in GW
    /// (discharge positive); energy in GWh at the end of the interval.
    pub storage_power: Vec<f64>,
    pub storage_energy: Vec<f64>,
    /// Per interval and flexible unit, `[t * n_flexible + g]`. Remaining
    /// annual energy is measured at the end of the interval.
    pub flexible_power: Vec<f64>,
    pub flexible_remaining: Vec<f64>,
    /// Per interval and line, `[t * n_lines + l]`.
    pub line_flow: Vec<f64>,
    /// Intervals actually simulated; shorter than the horizon after an
    /// early stop.
    pub completed_intervals: usize,
    /// Number of deficit blocks for which pre-charging changed the dispatch.
    pub precharged_blocks: usize,
}

impl DispatchState {
    pub fn unserved_at(&self, t: usize) -> f64 {
        self.unserved[t * self.n_nodes..(t + 1) * self.n_nodes]
            .iter()
            .sum()
    }

    pub fn is_deficit(&self, t: usize) -> bool {
        self.unserved_at(t) > DEFICIT_TOL
    }

    /// Unserved energy in GWh over a range of intervals.
    pub fn unserved_energy(&self, range: Range<usize>) -> f64 {
        let r = self.resolution;
        range.map(|t| self.unserved_at(t)).sum::<f64>() * r
    }

    pub fn total_unserved_energy(&self) -> f64 {
        self.unserved_energy(0..self.completed_intervals)
    }

    /// Net storage power at a node (discharge positive).
    pub fn node_storage(&self, t: usize, n: usize) -> f64 {
        (0..self.n_storages)
            .filter(|&k| self.storage_node[k] == n)
            .map(|k| self.storage_power[t * self.n_storages + k])
            .sum()
    }

    pub fn node_flexible(&self, t: usize, n: usize) -> f64 {
        (0..self.n_flexible)
            .filter(|&g| self.flexible_node[g] == n)
            .map(|g| self.flexible_power[t * self.n_flexible + g])
            .sum()
    }

    /// Supply minus use at a node; zero when the interval balances.
    pub fn balance_residual(&self, t: usize, n: usize) -> f64 {
        let i = t * self.n_nodes + n;
        let (mut dis, mut ch) = (0.0, 0.0);
        for k in (0..self.n_storages).filter(|&k| self.storage_node[k] == n) {
            let p = self.storage_power[t * self.n_storages + k];
            dis += p.max(0.0);
            ch += (-p).max(0.0);
        }
        let supply = self.pv[i]
            + self.wind[i]
            + self.baseload[i]
            + dis
            + self.node_flexible(t, n)
            + self.imports[i];
        let use_ = self.load[i] + ch + self.exports[i].abs() + self.spillage[i] - self.unserved[i];
        supply - use_
    }

    /// Summed stored energy across storages at the end of each interval.
    pub fn total_storage_energy(&self) -> Vec<f64> {
        (0..self.n_intervals)
            .map(|t| {
                self.storage_energy[t * self.n_storages..(t + 1) * self.n_storages]
                    .iter()
                    .sum()
            })
            .collect()
    }

    fn read_interval(&self, t: usize, iv: &mut IntervalDispatch) {
        let (n, k, g, l) = (self.n_nodes, self.n_storages, self.n_flexible, self.n_lines);
        iv.storage
            .copy_from_slice(&self.storage_power[t * k..(t + 1) * k]);
        iv.flexible
            .copy_from_slice(&self.flexible_power[t * g..(t + 1) * g]);
        iv.line_flow
            .copy_from_slice(&self.line_flow[t * l..(t + 1) * l]);
        iv.imports
            .copy_from_slice(&self.imports[t * n..(t + 1) * n]);
        iv.exports
            .copy_from_slice(&self.exports[t * n..(t + 1) * n]);
        iv.unserved
            .copy_from_slice(&self.unserved[t * n..(t + 1) * n]);
        iv.spillage
            .copy_from_slice(&self.spillage[t * n..(t + 1) * n]);
    }

    fn write_interval(&mut self, t: usize, iv: &IntervalDispatch) {
        let (n, k, g, l) = (self.n_nodes, self.n_storages, self.n_flexible, self.n_lines);
        self.storage_power[t * k..(t + 1) * k].copy_from_slice(&iv.storage);
        self.flexible_power[t * g..(t + 1) * g].copy_from_slice(&iv.flexible);
        self.line_flow[t * l..(t + 1) * l].copy_from_slice(&iv.line_flow);
        self.imports[t * n..(t + 1) * n].copy_from_slice(&iv.imports);
        self.exports[t * n..(t + 1) * n].copy_from_slice(&iv.exports);
        self.unserved[t * n..(t + 1) * n].copy_from_slice(&iv.unserved);
        self.spillage[t * n..(t + 1) * n].copy_from_slice(&iv.spillage);
    }
}

/// Per-candidate constants shared by every interval.
pub(crate) struct Model<'a> {
    pub rt: &'a RouteTable,
    pub r: f64,
    pub n: usize,
    pub k: usize,
    pub g: usize,
    pub l: usize,
    pub sto_node: Vec<usize>,
    pub sto_tp: Vec<f64>,
    pub sto_te: Vec<f64>,
    pub eta_ch: Vec<f64>,
    pub eta_dis: Vec<f64>,
    pub flex_node: Vec<usize>,
    pub flex_tp: Vec<f64>,
    pub flex_te: Vec<f64>,
    pub line_cap: Vec<f64>,
    /// Storages per node, shortest duration first.
    pub sto_order: Vec<Vec<usize>>,
    /// Flexible units per node, cheapest first.
    pub flex_order: Vec<Vec<usize>>,
    pub year_of: Vec<usize>,
    pub years: Vec<Range<usize>>,
    pub reliability: f64,
    pub penalty_scale: f64,
}

impl<'a> Model<'a> {
    fn new(s: &Scenario, c: &CandidateSolution, rt: &'a RouteTable) -> Self {
        let n = s.nodes.len();
        let k = s.storages.len();
        let flex: Vec<usize> = (0..s.generators.len())
            .filter(|&i| s.generators[i].kind == GeneratorKind::Flexible)
            .collect();
        let sto_tp: Vec<f64> = (0..k).map(|i| c.storage_total_power(s, i)).collect();
        let sto_te: Vec<f64> = (0..k).map(|i| c.storage_total_energy(s, i)).collect();
        let flex_tp: Vec<f64> = flex.iter().map(|&i| c.generator_total(s, i)).collect();

        let mut sto_order = vec![Vec::new(); n];
        for i in 0..k {
            if sto_tp[i] > 0.0 && sto_te[i] > 0.0 {
                sto_order[s.storages[i].node].push(i);
            }
        }
        for order in &mut sto_order {
            order.sort_by(|&a, &b| {
                let da = sto_te[a] / sto_tp[a];
                let db = sto_te[b] / sto_tp[b];
                da.total_cmp(&db)
                    .then_with(|| s.storages[a].id.cmp(&s.storages[b].id))
                    .then(a.cmp(&b))
            });
        }
        let mut flex_order = vec![Vec::new(); n];
        for (j, &gi) in flex.iter().enumerate() {
            if flex_tp[j] > 0.0 {
                flex_order[s.generators[gi].node].push(j);
            }
        }
        let srmc = |j: usize| {
            let c = &s.generators[flex[j]].costs;
            c.variable_om + c.fuel
        };
        for order in &mut flex_order {
            order.sort_by(|&a, &b| {
                srmc(a)
                    .total_cmp(&srmc(b))
                    .then_with(|| s.generators[flex[a]].id.cmp(&s.generators[flex[b]].id))
                    .then(a.cmp(&b))
            });
        }
        let years = s.year_ranges();
        let mut year_of = vec![0; s.n_intervals()];
        for (y, range) in years.iter().enumerate() {
            for t in range.clone() {
                year_of[t] = y;
            }
        }
        Model {
            rt,
            r: s.resolution,
            n,
            k,
            g: flex.len(),
            l: s.lines.len(),
            sto_node: s.storages.iter().map(|x| x.node).collect(),
            sto_tp,
            sto_te,
            eta_ch: s.storages.iter().map(|x| x.charge_efficiency).collect(),
            eta_dis: s.storages.iter().map(|x| x.discharge_efficiency).collect(),
            flex_node: flex.iter().map(|&i| s.generators[i].node).collect(),
            flex_tp,
            flex_te: flex
                .iter()
                .map(|&i| s.generators[i].annual_energy.unwrap_or(0.0))
                .collect(),
            line_cap: (0..s.lines.len()).map(|l| c.line_total(s, l)).collect(),
            sto_order,
            flex_order,
            year_of,
            years,
            reliability: s.reliability,
            penalty_scale: s.penalty_scale,
        }
    }

    fn is_year_start(&self, t: usize) -> bool {
        self.years[self.year_of[t]].start == t
    }

    fn drop(&self, k: usize, phi: f64) -> f64 {
        energy_drop(phi, self.r, self.eta_ch[k], self.eta_dis[k])
    }
}

/// Scratch buffers reused across intervals.
pub(crate) struct Work {
    pub fs: FlowState,
    pub nl_base: Vec<f64>,
    pub sto_n: Vec<f64>,
    pub flex_n: Vec<f64>,
}

impl Work {
    fn new(m: &Model) -> Self {
        Work {
            fs: FlowState::new(m.n, m.l),
            nl_base: vec![0.0; m.n],
            sto_n: vec![0.0; m.n],
            flex_n: vec![0.0; m.n],
        }
    }
}

fn any_deficit(w: &Work) -> bool {
    (0..w.nl_base.len()).any(|i| w.nl_base[i] - w.sto_n[i] - w.flex_n[i] > TOL)
}

fn apply_flows(rl: &[f64], w: &mut Work) {
    for i in 0..rl.len() {
        w.nl_base[i] = rl[i] - w.fs.imports[i] - w.fs.exports[i];
    }
}

fn storage_all(m: &Model, lim: &IntervalLimits, w: &mut Work, phi: &mut [f64]) {
    for i in 0..m.n {
        w.sto_n[i] = dispatch_node_storage(
            w.nl_base[i] - w.flex_n[i],
            &m.sto_order[i],
            &lim.discharge,
            &lim.charge,
            phi,
        );
    }
}

fn flexible_all(m: &Model, lim: &IntervalLimits, w: &mut Work, phi: &mut [f64]) {
    for i in 0..m.n {
        w.flex_n[i] = dispatch_node_flexible(
            w.nl_base[i] - w.sto_n[i],
            &m.flex_order[i],
            &lim.flexible,
            phi,
        );
    }
}

/// The interval rule sequence on residual loads `rl`.
pub(crate) fn balance(
    m: &Model,
    rl: &[f64],
    lim: &IntervalLimits,
    w: &mut Work,
    out: &mut IntervalDispatch,
) {
    w.fs.reset();
    out.storage.iter_mut().for_each(|x| *x = 0.0);
    out.flexible.iter_mut().for_each(|x| *x = 0.0);
    w.nl_base.copy_from_slice(rl);
    w.sto_n.iter_mut().for_each(|x| *x = 0.0);
    w.flex_n.iter_mut().for_each(|x| *x = 0.0);
    let nl = |w: &Work, i: usize| w.nl_base[i] - w.sto_n[i] - w.flex_n[i];

    // Surplus generation to deficits.
    if any_deficit(w) {
        for i in 0..m.n {
            let x = nl(w, i);
            w.fs.fill[i] = x.max(0.0);
            w.fs.surplus[i] = (-x).max(0.0);
        }
        transmit(&mut w.fs, m.rt, &m.line_cap);
        apply_flows(rl, w);
    }

    storage_all(m, lim, w, &mut out.storage);

    // Spare storage discharge to deficits, then local flexible.
    if any_deficit(w) {
        for i in 0..m.n {
            let x = nl(w, i);
            w.fs.fill[i] = x.max(0.0);
            w.fs.surplus[i] = if x <= 0.0 {
                (lim.node_discharge[i] - w.sto_n[i]).max(0.0)
            } else {
                0.0
            };
        }
        transmit(&mut w.fs, m.rt, &m.line_cap);
        apply_flows(rl, w);
        storage_all(m, lim, w, &mut out.storage);
    }
    flexible_all(m, lim, w, &mut out.flexible);

    // Spare flexible output to deficits.
    if any_deficit(w) {
        for i in 0..m.n {
            let x = nl(w, i);
            w.fs.fill[i] = x.max(0.0);
            w.fs.surplus[i] = if x <= 0.0 {
                (lim.node_flexible[i] - w.flex_n[i]).max(0.0)
            } else {
                0.0
            };
        }
        transmit(&mut w.fs, m.rt, &m.line_cap);
        apply_flows(rl, w);
        flexible_all(m, lim, w, &mut out.flexible);
    }

    // Leftover surplus to charge storage elsewhere.
    let spare: f64 = (0..m.n).map(|i| (-nl(w, i)).max(0.0)).sum();
    if spare > TOL {
        for i in 0..m.n {
            let x = nl(w, i);
            w.fs.surplus[i] = (-x).max(0.0);
            w.fs.fill[i] = if x >= -TOL {
                x.max(0.0) + (lim.node_charge[i] + w.sto_n[i]).max(0.0)
            } else {
                0.0
            };
        }
        transmit(&mut w.fs, m.rt, &m.line_cap);
        apply_flows(rl, w);
        storage_all(m, lim, w, &mut out.storage);
    }

    for i in 0..m.n {
        let x = nl(w, i);
        out.unserved[i] = x.max(0.0);
        out.spillage[i] = (-x).max(0.0);
    }
    out.line_flow.copy_from_slice(&w.fs.line_flow);
    out.imports.copy_from_slice(&w.fs.imports);
    out.exports.copy_from_slice(&w.fs.exports);
}

/// Dispatch engine for one candidate.
pub struct Engine<'a> {
    pub(crate) m: Model<'a>,
    pub state: DispatchState,
    pub(crate) w: Work,
    pub(crate) lim: IntervalLimits,
    pub(crate) iv: IntervalDispatch,
    pub(crate) opts: DispatchOptions,
}

impl<'a> Engine<'a> {
    pub fn new(
        s: &Scenario,
        c: &CandidateSolution,
        rt: &'a RouteTable,
        opts: DispatchOptions,
    ) -> Self {
        let m = Model::new(s, c, rt);
        let rl = residual_load(s, c);
        let t_len = s.n_intervals();
        let state = DispatchState {
            n_nodes: m.n,
            n_storages: m.k,
            n_flexible: m.g,
            n_lines: m.l,
            n_intervals: t_len,
            resolution: m.r,
            years: m.years.clone(),
            flexible_generators: (0..s.generators.len())
                .filter(|&i| s.generators[i].kind == GeneratorKind::Flexible)
                .collect(),
            storage_node: m.sto_node.clone(),
            flexible_node: m.flex_node.clone(),
            initial_energy: init_storage(s, c),
            load: rl.load,
            residual_load: rl.residual,
            pv: rl.pv,
            wind: rl.wind,
            baseload: rl.baseload,
            imports: vec![0.0; t_len * m.n],
            exports: vec![0.0; t_len * m.n],
            unserved: vec![0.0; t_len * m.n],
            spillage: vec![0.0; t_len * m.n],
            storage_power: vec![0.0; t_len * m.k],
            storage_energy: vec![0.0; t_len * m.k],
            flexible_power: vec![0.0; t_len * m.g],
            flexible_remaining: vec![0.0; t_len * m.g],
            line_flow: vec![0.0; t_len * m.l],
            completed_intervals: 0,
            precharged_blocks: 0,
        };
        let w = Work::new(&m);
        let lim = IntervalLimits::new(m.n, m.k, m.g);
        let iv = IntervalDispatch::new(m.n, m.k, m.g, m.l);
        Engine {
            m,
            state,
            w,
            lim,
            iv,
            opts,
        }
    }

    pub(crate) fn new_interval(&self) -> IntervalDispatch {
        IntervalDispatch::new(self.m.n, self.m.k, self.m.g, self.m.l)
    }

    pub(crate) fn new_limits(&self) -> IntervalLimits {
        IntervalLimits::new(self.m.n, self.m.k, self.m.g)
    }

    /// Stored energy of storage `k` before interval `t`.
    pub fn gamma_before(&self, t: usize, k: usize) -> f64 {
        if t == 0 {
            self.state.initial_energy[k]
        } else {
            self.state.storage_energy[(t - 1) * self.m.k + k]
        }
    }

    /// Remaining annual energy of flexible unit `g` before interval `t`.
    pub fn flex_before(&self, t: usize, g: usize) -> f64 {
        if self.m.is_year_start(t) {
            self.m.flex_te[g]
        } else {
            self.state.flexible_remaining[(t - 1) * self.m.g + g]
        }
    }

    pub(crate) fn fill_node_limits(m: &Model, lim: &mut IntervalLimits) {
        lim.node_discharge.iter_mut().for_each(|x| *x = 0.0);
        lim.node_charge.iter_mut().for_each(|x| *x = 0.0);
        lim.node_flexible.iter_mut().for_each(|x| *x = 0.0);
        for (i, order) in m.sto_order.iter().enumerate() {
            for &k in order {
                lim.node_discharge[i] += lim.discharge[k];
                lim.node_charge[i] += lim.charge[k];
            }
        }
        for (i, order) in m.flex_order.iter().enumerate() {
            for &g in order {
                lim.node_flexible[i] += lim.flexible[g];
            }
        }
    }

    /// Forward limits for interval `t` from the committed state before it.
    pub fn interval_limits(&self, t: usize) -> IntervalLimits {
        let mut lim = self.new_limits();
        self.forward_limits_into(t, &mut lim);
        lim
    }

    pub(crate) fn forward_limits_into(&self, t: usize, lim: &mut IntervalLimits) {
        let m = &self.m;
        lim.direction = Direction::Forward;
        for k in 0..m.k {
            let (d, c) = storage_limits(
                self.gamma_before(t, k),
                m.sto_te[k],
                m.sto_tp[k],
                m.eta_ch[k],
                m.eta_dis[k],
                m.r,
                Direction::Forward,
            );
            lim.discharge[k] = d;
            lim.charge[k] = c;
        }
        for g in 0..m.g {
            lim.flexible[g] = flexible_limit(self.flex_before(t, g), m.flex_tp[g], m.r);
        }
        Self::fill_node_limits(m, lim);
    }

    /// Writes an interval's dispatch and advances stored energies from it.
    pub(crate) fn commit(&mut self, t: usize, iv: &IntervalDispatch) {
        let (k_n, g_n) = (self.m.k, self.m.g);
        for k in 0..k_n {
            let e = storage_energy_after(
                self.gamma_before(t, k),
                iv.storage[k],
                self.m.r,
                self.m.eta_ch[k],
                self.m.eta_dis[k],
            );
            self.state.storage_energy[t * k_n + k] = e.clamp(0.0, self.m.sto_te[k]);
        }
        for g in 0..g_n {
            let e = self.flex_before(t, g) - self.m.r * iv.flexible[g];
            self.state.flexible_remaining[t * g_n + g] = e.max(0.0);
        }
        self.state.write_interval(t, iv);
    }

    /// Balances interval `t` with forward limits and commits it.
    pub fn balance_interval(&mut self, t: usize) {
        let mut lim = std::mem::replace(&mut self.lim, IntervalLimits::new(0, 0, 0));
        let mut iv = std::mem::replace(&mut self.iv, IntervalDispatch::new(0, 0, 0, 0));
        self.forward_limits_into(t, &mut lim);
        let n = self.m.n;
        balance(
            &self.m,
            &self.state.residual_load[t * n..(t + 1) * n],
            &lim,
            &mut self.w,
            &mut iv,
        );
        self.commit(t, &iv);
        self.lim = lim;
        self.iv = iv;
    }

    /// True when `iv` respects the limits computed for its interval.
    pub(crate) fn feasible(&self, iv: &IntervalDispatch, lim: &IntervalLimits) -> bool {
        (0..self.m.k).all(|k| {
            iv.storage[k] <= lim.discharge[k] + FEASIBLE_EPS
                && -iv.storage[k] <= lim.charge[k] + FEASIBLE_EPS
        }) && (0..self.m.g).all(|g| iv.flexible[g] <= lim.flexible[g] + FEASIBLE_EPS)
    }

    fn year_penalty(&self, y: usize) -> f64 {
        let range = self.m.years[y].clone();
        let n = self.m.n;
        let ue: f64 = self.state.unserved[range.start * n..range.end * n]
            .iter()
            .sum();
        let load: f64 = self.state.load[range.start * n..range.end * n].iter().sum();
        penalty_unserved(ue, load, self.m.reliability, self.m.r, self.m.penalty_scale)
    }

    /// Runs every year in order; see [`unit_commit`].
    pub fn run(mut self) -> DispatchState {
        for y in 0..self.m.years.len() {
            let range = self.m.years[y].clone();
            let mut lower = range.start;
            let mut armed = false;
            for t in range.clone() {
                self.balance_interval(t);
                if self.state.is_deficit(t) {
                    armed = true;
                } else if armed {
                    armed = false;
                    if self.opts.precharge {
                        self.precharge_block(t, lower, true);
                        lower = t;
                        armed = self.state.is_deficit(t);
                    }
                }
            }
            if armed && self.opts.precharge {
                self.precharge_block(range.end, lower, false);
            }
            self.state.completed_intervals = range.end;
            if self.opts.stop_on_unserved_penalty && self.year_penalty(y) > 0.0 {
                break;
            }
        }
        self.state
    }
}

/// Simulates the whole horizon for one candidate.
pub fn unit_commit(
    s: &Scenario,
    c: &CandidateSolution,
    rt: &RouteTable,
    opts: &DispatchOptions,
) -> DispatchState {
    Engine::new(s, c, rt, opts.clone()).run()
}
