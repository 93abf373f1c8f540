//! Backward-time pre-charging of storage ahead of deficit blocks.
//!
//! A deficit block is re-run backwards from its end with every storage
//! empty, which gives the least energy each storage must hold when the
//! block begins. Storages short of that amount are pre-chargers; storages
//! holding more are trickle-chargers that may donate their excess. The
//! engine then walks back from the block start, moving spilled generation,
//! trickle-charger energy and spare flexible energy into the pre-chargers,
//! and finally replays the affected intervals forward, re-balancing any
//! interval whose adjusted dispatch breaks its true limits.

use super::{balance, flexible_limit, storage_limits, Direction, Engine, IntervalDispatch};
use crate::network::{transmit, FlowState};

const ENERGY_EPS: f64 = 1e-9;
const POWER_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PrechargePlan {
    /// First interval of the deficit block.
    pub block_start: usize,
    /// First interval after the block.
    pub block_end: usize,
    /// Energy each storage must gain before the block, GWh.
    pub required: Vec<f64>,
    /// Energy each storage holds beyond what the block needs, GWh.
    pub trickle: Vec<f64>,
    /// Flexible energy left after the block's own use, GWh.
    pub flexible: Vec<f64>,
    /// Running extremes of the backward energy trace within the block.
    pub max_in_block: Vec<f64>,
    pub min_in_block: Vec<f64>,
    /// Energy the backward pass needs at the block start.
    pub needed_at_start: Vec<f64>,
    /// Dispatch found by the backward pass, indexed from `block_start`.
    pub(crate) reverse: Vec<IntervalDispatch>,
}

impl PrechargePlan {
    pub fn is_precharger(&self, k: usize) -> bool {
        self.required[k] > ENERGY_EPS
    }

    pub fn is_trickle_charger(&self, k: usize) -> bool {
        self.trickle[k] > ENERGY_EPS
    }

    pub fn reverse_dispatch(&self) -> &[IntervalDispatch] {
        &self.reverse
    }
}

/// Extra charging power that raises stored energy by `gain`, starting from
/// dispatch `phi`. Reducing discharge comes first.
fn charge_for_gain(phi: f64, gain: f64, r: f64, eta_ch: f64, eta_dis: f64) -> f64 {
    if gain <= 0.0 {
        return 0.0;
    }
    let from_discharge = r * phi.max(0.0) / eta_dis;
    if gain <= from_discharge {
        gain * eta_dis / r
    } else {
        phi.max(0.0) + (gain - from_discharge) / (r * eta_ch)
    }
}

/// Extra discharging power that lowers stored energy by `loss`. Reducing
/// charge comes first.
fn discharge_for_loss(phi: f64, loss: f64, r: f64, eta_ch: f64, eta_dis: f64) -> f64 {
    if loss <= 0.0 {
        return 0.0;
    }
    let from_charge = r * eta_ch * (-phi).max(0.0);
    if loss <= from_charge {
        loss / (r * eta_ch)
    } else {
        (-phi).max(0.0) + (loss - from_charge) * eta_dis / r
    }
}

/// Mutable bookkeeping for one backward walk.
struct Walk {
    pre: Vec<usize>,
    donors: Vec<usize>,
    need: Vec<f64>,
    room: Vec<f64>,
    floor: Vec<f64>,
    budget: Vec<f64>,
    /// Dispatch of the interval before adjustment.
    orig_sto: Vec<f64>,
    orig_flex: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Source {
    Spill,
    Trickle,
    Flexible,
}

impl<'a> Engine<'a> {
    /// Backward pass over the deficit block ending just before `t_end`.
    ///
    /// The block start is found by scanning back over deficit intervals, but
    /// never before `lower`.
    pub fn scan_deficit_block(&mut self, t_end: usize, lower: usize) -> PrechargePlan {
        let mut b = t_end;
        while b > lower && self.state.is_deficit(b - 1) {
            b -= 1;
        }
        let (n, k_n, g_n) = (self.m.n, self.m.k, self.m.g);
        let avail: Vec<f64> = (0..g_n).map(|g| self.flex_before(b, g)).collect();
        let forward_start: Vec<f64> = (0..k_n).map(|k| self.gamma_before(b, k)).collect();
        let mut gamma = vec![0.0; k_n];
        let mut max_db = vec![0.0; k_n];
        let mut min_db = vec![0.0; k_n];
        let mut used = vec![0.0; g_n];
        let mut reverse = vec![self.new_interval(); t_end - b];
        let mut lim = self.new_limits();
        lim.direction = Direction::Reverse;
        let m = &self.m;
        for t in (b..t_end).rev() {
            for k in 0..k_n {
                let (d, c) = storage_limits(
                    gamma[k],
                    m.sto_te[k],
                    m.sto_tp[k],
                    m.eta_ch[k],
                    m.eta_dis[k],
                    m.r,
                    Direction::Reverse,
                );
                lim.discharge[k] = d;
                lim.charge[k] = c;
            }
            for g in 0..g_n {
                lim.flexible[g] = flexible_limit(avail[g] - used[g], m.flex_tp[g], m.r);
            }
            Engine::fill_node_limits(m, &mut lim);
            let iv = &mut reverse[t - b];
            balance(
                m,
                &self.state.residual_load[t * n..(t + 1) * n],
                &lim,
                &mut self.w,
                iv,
            );
            for k in 0..k_n {
                gamma[k] = (gamma[k] + m.drop(k, iv.storage[k])).clamp(0.0, m.sto_te[k]);
                max_db[k] = f64::max(max_db[k], gamma[k]);
                min_db[k] = f64::min(min_db[k], gamma[k]);
            }
            for g in 0..g_n {
                used[g] += m.r * iv.flexible[g];
            }
        }
        let active = |k: usize| m.sto_tp[k] > 0.0 && m.sto_te[k] > 0.0;
        let required = (0..k_n)
            .map(|k| {
                if active(k) {
                    (gamma[k] - forward_start[k]).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        let trickle = (0..k_n)
            .map(|k| {
                if active(k) {
                    (forward_start[k] - gamma[k]).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        let flexible = (0..g_n).map(|g| (avail[g] - used[g]).max(0.0)).collect();
        PrechargePlan {
            block_start: b,
            block_end: t_end,
            required,
            trickle,
            flexible,
            max_in_block: max_db,
            min_in_block: min_db,
            needed_at_start: gamma,
            reverse,
        }
    }

    /// Walks back from the block start adjusting dispatch so pre-chargers
    /// gain their required energy. Returns the earliest adjusted interval,
    /// or the block start when nothing changed.
    ///
    /// Stored energies are left stale; [`Engine::reconcile_forward`]
    /// recomputes them.
    pub fn adjust_precharge(&mut self, plan: &PrechargePlan) -> usize {
        let b = plan.block_start;
        let (k_n, g_n) = (self.m.k, self.m.g);
        let pre: Vec<usize> = (0..k_n).filter(|&k| plan.is_precharger(k)).collect();
        if pre.is_empty() || b == 0 {
            return b;
        }
        let mut walk = Walk {
            donors: (0..k_n).filter(|&k| plan.is_trickle_charger(k)).collect(),
            pre,
            need: plan.required.clone(),
            room: vec![f64::INFINITY; k_n],
            floor: plan.trickle.clone(),
            budget: plan.flexible.clone(),
            orig_sto: vec![0.0; k_n],
            orig_flex: vec![0.0; g_n],
        };
        let mut last_gain = vec![0.0; k_n];
        let mut last_loss = vec![0.0; k_n];
        let mut year = self.m.year_of[b];
        let stop = self.opts.max_lookback.map_or(0, |l| b.saturating_sub(l));
        let mut iv = self.new_interval();
        let mut fs = FlowState::new(self.m.n, self.m.l);
        let mut t_pc = b;

        for t in (stop..b).rev() {
            if self.m.year_of[t] != year {
                year = self.m.year_of[t];
                let last = self.m.years[year].end - 1;
                for g in 0..g_n {
                    walk.budget[g] = self.state.flexible_remaining[last * g_n + g];
                }
            }
            for &k in &walk.pre {
                let gamma = self.state.storage_energy[t * k_n + k];
                walk.room[k] = (walk.room[k] - last_gain[k]).min(self.m.sto_te[k] - gamma);
                last_gain[k] = 0.0;
            }
            for &k in &walk.donors {
                let gamma = self.state.storage_energy[t * k_n + k];
                walk.floor[k] = (walk.floor[k] - last_loss[k]).min(gamma);
                last_loss[k] = 0.0;
            }
            if walk
                .pre
                .iter()
                .all(|&k| walk.need[k] <= ENERGY_EPS || walk.room[k] <= ENERGY_EPS)
            {
                break;
            }

            self.state.read_interval(t, &mut iv);
            walk.orig_sto.copy_from_slice(&iv.storage);
            walk.orig_flex.copy_from_slice(&iv.flexible);
            for src in [Source::Spill, Source::Trickle, Source::Flexible] {
                self.feed_local(src, &walk, &mut iv);
                self.feed_transmitted(src, &walk, &mut iv, &mut fs);
            }

            let mut changed = false;
            for &k in &walk.pre {
                let gain = self.m.drop(k, walk.orig_sto[k]) - self.m.drop(k, iv.storage[k]);
                if gain != 0.0 {
                    changed = true;
                }
                walk.need[k] -= gain;
                last_gain[k] = gain;
            }
            for &k in &walk.donors {
                last_loss[k] = self.m.drop(k, iv.storage[k]) - self.m.drop(k, walk.orig_sto[k]);
            }
            for g in 0..g_n {
                walk.budget[g] -= self.m.r * (iv.flexible[g] - walk.orig_flex[g]);
            }
            if changed {
                self.state.write_interval(t, &iv);
                t_pc = t;
            }
        }
        t_pc
    }

    /// Extra charging power pre-charger `k` can still take this interval.
    fn precharger_cap(&self, walk: &Walk, iv: &IntervalDispatch, k: usize) -> f64 {
        let m = &self.m;
        let gained = m.drop(k, walk.orig_sto[k]) - m.drop(k, iv.storage[k]);
        let want = (walk.need[k].min(walk.room[k]) - gained).max(0.0);
        let by_energy = charge_for_gain(iv.storage[k], want, m.r, m.eta_ch[k], m.eta_dis[k]);
        (m.sto_tp[k] + iv.storage[k]).min(by_energy).max(0.0)
    }

    /// Extra power a source unit can still give this interval.
    fn source_cap(&self, src: Source, walk: &Walk, iv: &IntervalDispatch, unit: usize) -> f64 {
        let m = &self.m;
        match src {
            Source::Spill => iv.spillage[unit],
            Source::Trickle => {
                let d = unit;
                let lost = m.drop(d, iv.storage[d]) - m.drop(d, walk.orig_sto[d]);
                let allow = (walk.floor[d] - lost).max(0.0);
                let by_energy =
                    discharge_for_loss(iv.storage[d], allow, m.r, m.eta_ch[d], m.eta_dis[d]);
                (m.sto_tp[d] - iv.storage[d]).min(by_energy).max(0.0)
            }
            Source::Flexible => {
                let g = unit;
                let taken = m.r * (iv.flexible[g] - walk.orig_flex[g]);
                let allow = (walk.budget[g] - taken).max(0.0) / m.r;
                (m.flex_tp[g] - iv.flexible[g]).min(allow).max(0.0)
            }
        }
    }

    /// Source units located at `node`, in dispatch order.
    fn source_units(&self, src: Source, walk: &Walk, node: usize) -> Vec<usize> {
        match src {
            Source::Spill => vec![node],
            Source::Trickle => self.m.sto_order[node]
                .iter()
                .copied()
                .filter(|k| walk.donors.contains(k))
                .collect(),
            Source::Flexible => self.m.flex_order[node].clone(),
        }
    }

    fn take_from_source(src: Source, iv: &mut IntervalDispatch, unit: usize, x: f64) {
        match src {
            Source::Spill => iv.spillage[unit] = (iv.spillage[unit] - x).max(0.0),
            Source::Trickle => iv.storage[unit] += x,
            Source::Flexible => iv.flexible[unit] += x,
        }
    }

    fn node_prechargers(&self, walk: &Walk, node: usize) -> Vec<usize> {
        self.m.sto_order[node]
            .iter()
            .copied()
            .filter(|k| walk.pre.contains(k))
            .collect()
    }

    fn feed_local(&self, src: Source, walk: &Walk, iv: &mut IntervalDispatch) {
        for node in 0..self.m.n {
            let pre = self.node_prechargers(walk, node);
            if pre.is_empty() {
                continue;
            }
            let units = self.source_units(src, walk, node);
            for &k in &pre {
                for &u in &units {
                    let x = self
                        .precharger_cap(walk, iv, k)
                        .min(self.source_cap(src, walk, iv, u));
                    if x > POWER_EPS {
                        iv.storage[k] -= x;
                        Self::take_from_source(src, iv, u, x);
                    }
                }
            }
        }
    }

    fn feed_transmitted(
        &self,
        src: Source,
        walk: &Walk,
        iv: &mut IntervalDispatch,
        fs: &mut FlowState,
    ) {
        if self.m.l == 0 {
            return;
        }
        fs.reset();
        fs.line_flow.copy_from_slice(&iv.line_flow);
        let mut any_fill = false;
        let mut any_surplus = false;
        for node in 0..self.m.n {
            fs.fill[node] = self
                .node_prechargers(walk, node)
                .iter()
                .map(|&k| self.precharger_cap(walk, iv, k))
                .sum();
            fs.surplus[node] = self
                .source_units(src, walk, node)
                .iter()
                .map(|&u| self.source_cap(src, walk, iv, u))
                .sum();
            any_fill |= fs.fill[node] > POWER_EPS;
            any_surplus |= fs.surplus[node] > POWER_EPS;
        }
        if !any_fill || !any_surplus {
            return;
        }
        transmit(fs, self.m.rt, &self.m.line_cap);
        iv.line_flow.copy_from_slice(&fs.line_flow);
        for node in 0..self.m.n {
            let mut received = fs.imports[node];
            let mut sent = -fs.exports[node];
            iv.imports[node] += received;
            iv.exports[node] -= sent;
            for k in self.node_prechargers(walk, node) {
                let x = self.precharger_cap(walk, iv, k).min(received);
                iv.storage[k] -= x;
                received -= x;
            }
            for u in self.source_units(src, walk, node) {
                let x = self.source_cap(src, walk, iv, u).min(sent);
                Self::take_from_source(src, iv, u, x);
                sent -= x;
            }
        }
    }

    /// Replays intervals from `t_pc` through the block with true forward
    /// limits. Adjusted intervals and the backward-pass block dispatch are
    /// kept where feasible; anything else is re-balanced.
    pub fn reconcile_forward(&mut self, plan: &PrechargePlan, t_pc: usize, rebalance_end: bool) {
        let b = plan.block_start;
        let n = self.m.n;
        let mut lim = self.new_limits();
        let mut iv = self.new_interval();
        for t in t_pc..plan.block_end {
            self.forward_limits_into(t, &mut lim);
            if t < b {
                self.state.read_interval(t, &mut iv);
            } else {
                iv.clone_from(&plan.reverse[t - b]);
            }
            if !self.feasible(&iv, &lim) {
                balance(
                    &self.m,
                    &self.state.residual_load[t * n..(t + 1) * n],
                    &lim,
                    &mut self.w,
                    &mut iv,
                );
            }
            self.commit(t, &iv);
        }
        if rebalance_end && plan.block_end < self.state.n_intervals {
            self.balance_interval(plan.block_end);
        }
    }

    pub(crate) fn precharge_block(&mut self, t_end: usize, lower: usize, rebalance_end: bool) {
        let plan = self.scan_deficit_block(t_end, lower);
        if plan.required.iter().sum::<f64>() <= ENERGY_EPS {
            return;
        }
        let t_pc = self.adjust_precharge(&plan);
        if t_pc == plan.block_start {
            return;
        }
        self.reconcile_forward(&plan, t_pc, rebalance_end);
        self.state.precharged_blocks += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::energy_drop;

    #[test]
    fn gain_inverse_matches_energy_drop() {
        let (r, ec, ed) = (0.5, 0.8, 0.9);
        for phi in [-2.0, -0.3, 0.0, 0.4, 3.0] {
            for g in [0.1, 0.5, 2.0] {
                let x = charge_for_gain(phi, g, r, ec, ed);
                let got = energy_drop(phi, r, ec, ed) - energy_drop(phi - x, r, ec, ed);
                assert!((got - g).abs() < 1e-12, "phi {phi} g {g}");
                let y = discharge_for_loss(phi, g, r, ec, ed);
                let lost = energy_drop(phi + y, r, ec, ed) - energy_drop(phi, r, ec, ed);
                assert!((lost - g).abs() < 1e-12, "phi {phi} loss {g}");
            }
        }
    }
}
