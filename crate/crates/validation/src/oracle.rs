//! Exhaustive dispatch of small hourly instances.
//!
//! Every quantity is an integer multiple of a power step, storages are
//! lossless and there is at most one line, so dispatch reduces to a
//! lexicographic (unserved energy, variable cost) shortest path over the
//! joint state of stored and remaining flexible energy. The search visits
//! every discretized dispatch, and with integral data a discretized optimum
//! is also a continuous one.

use firm_core::scenario::{GeneratorKind, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct Store {
    pub power: i64,
    pub energy: i64,
    pub initial: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flex {
    pub power: i64,
    pub energy: i64,
    /// $/MWh.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleNode {
    pub demand: Vec<i64>,
    pub supply: Vec<i64>,
    pub storage: Option<Store>,
    pub flexible: Option<Flex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleProblem {
    /// GW per unit; with hourly intervals also GWh per unit.
    pub step: f64,
    pub nodes: Vec<OracleNode>,
    pub line: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptimum {
    /// GWh.
    pub unserved: f64,
    /// $.
    pub variable: f64,
}

fn units(x: f64, step: f64, what: &str) -> Result<i64, String> {
    let u = (x / step).round();
    if (u * step - x).abs() > 1e-9 {
        return Err(format!("{what} = {x} is not a multiple of {step}"));
    }
    Ok(u as i64)
}

impl OracleProblem {
    /// Reads the existing portfolio of a scenario. Build bounds are ignored.
    pub fn from_scenario(s: &Scenario, step: f64) -> Result<Self, String> {
        if s.resolution != 1.0 || s.years.len() != 1 {
            return Err("oracle needs a single hourly year".into());
        }
        if s.nodes.len() > 2 || s.lines.len() > 1 {
            return Err("oracle handles at most two nodes and one line".into());
        }
        let t_len = s.n_intervals();
        let mut nodes = Vec::new();
        for n in 0..s.nodes.len() {
            let demand = s.traces.demand[n][..t_len]
                .iter()
                .map(|&x| units(x, step, "demand"))
                .collect::<Result<Vec<_>, _>>()?;
            let mut supply = vec![0.0; t_len];
            let mut flexible = None;
            for g in s.generators.iter().filter(|g| g.node == n) {
                if g.kind == GeneratorKind::Flexible {
                    if flexible.is_some() {
                        return Err("oracle handles one flexible unit per node".into());
                    }
                    flexible = Some(Flex {
                        power: units(g.existing_power, step, "flexible power")?,
                        energy: units(
                            g.annual_energy
                                .ok_or("oracle needs a flexible energy limit")?,
                            step,
                            "flexible energy",
                        )?,
                        cost: g.costs.fuel + g.costs.variable_om,
                    });
                } else if let Some(a) = g
                    .trace
                    .as_ref()
                    .and_then(|id| s.traces.availability.get(id))
                {
                    if g.costs.variable_om != 0.0 || g.costs.fuel != 0.0 {
                        return Err("oracle needs free non-dispatchable output".into());
                    }
                    for (t, x) in supply.iter_mut().enumerate() {
                        *x += g.existing_power * a[t];
                    }
                }
            }
            let supply = supply
                .iter()
                .map(|&x| units(x, step, "supply"))
                .collect::<Result<Vec<_>, _>>()?;
            let mut storage = None;
            for k in s.storages.iter().filter(|k| k.node == n) {
                if storage.is_some() {
                    return Err("oracle handles one storage per node".into());
                }
                if k.charge_efficiency != 1.0
                    || k.discharge_efficiency != 1.0
                    || k.costs.variable_om != 0.0
                {
                    return Err("oracle needs lossless, free storage".into());
                }
                storage = Some(Store {
                    power: units(k.existing_power, step, "storage power")?,
                    energy: units(k.existing_energy, step, "storage energy")?,
                    initial: units(0.5 * k.existing_energy, step, "initial storage")?,
                });
            }
            nodes.push(OracleNode {
                demand,
                supply,
                storage,
                flexible,
            });
        }
        let line = match s.lines.first() {
            Some(l) if l.costs.variable_om != 0.0 => {
                return Err("oracle needs free transmission".into())
            }
            Some(l) => units(l.existing_power, step, "line capacity")?,
            None => 0,
        };
        Ok(OracleProblem { step, nodes, line })
    }

    /// Minimal unserved energy, then minimal variable cost among dispatches
    /// achieving it.
    pub fn solve(&self) -> OracleOptimum {
        let dims: Vec<(i64, i64)> = self
            .nodes
            .iter()
            .map(|n| {
                (
                    n.storage.as_ref().map_or(0, |s| s.energy) + 1,
                    n.flexible.as_ref().map_or(0, |f| f.energy) + 1,
                )
            })
            .collect();
        let radix: Vec<i64> = dims.iter().flat_map(|&(a, b)| [a, b]).collect();
        let n_states: usize = radix.iter().product::<i64>() as usize;
        let encode = |v: &[i64]| -> usize {
            let mut i = 0i64;
            for (x, r) in v.iter().zip(&radix) {
                i = i * r + x;
            }
            i as usize
        };
        let decode = |mut i: i64| -> Vec<i64> {
            let mut v = vec![0; radix.len()];
            for j in (0..radix.len()).rev() {
                v[j] = i % radix[j];
                i /= radix[j];
            }
            v
        };

        let unreached = (i64::MAX, f64::INFINITY);
        let mut best = vec![unreached; n_states];
        let start: Vec<i64> = self
            .nodes
            .iter()
            .flat_map(|n| {
                [
                    n.storage.as_ref().map_or(0, |s| s.initial),
                    n.flexible.as_ref().map_or(0, |f| f.energy),
                ]
            })
            .collect();
        best[encode(&start)] = (0, 0.0);

        let t_len = self.nodes[0].demand.len();
        for t in 0..t_len {
            let mut next = vec![unreached; n_states];
            for (i, &(ue, vc)) in best.iter().enumerate() {
                if ue == i64::MAX {
                    continue;
                }
                let state = decode(i as i64);
                let options: Vec<Vec<(i64, i64, i64, i64)>> = self
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(n, node)| node_options(node, state[2 * n], state[2 * n + 1], t))
                    .collect();
                let mut visit = |choice: &[(i64, i64, i64, i64)]| {
                    let mut net: Vec<i64> = choice.iter().map(|c| c.0).collect();
                    if net.len() == 2 {
                        let moved = if net[0] > 0 && net[1] < 0 {
                            self.line.min(net[0]).min(-net[1])
                        } else if net[1] > 0 && net[0] < 0 {
                            -self.line.min(net[1]).min(-net[0])
                        } else {
                            0
                        };
                        net[0] -= moved;
                        net[1] += moved;
                    }
                    let mut step_ue = 0;
                    let mut step_vc = 0.0;
                    let mut after = Vec::with_capacity(radix.len());
                    for (n, (c, x)) in choice.iter().zip(&net).enumerate() {
                        let deficit = (-x).max(0);
                        if deficit > self.nodes[n].demand[t] {
                            return;
                        }
                        step_ue += deficit;
                        if let Some(f) = &self.nodes[n].flexible {
                            step_vc += f.cost * c.3 as f64;
                        }
                        after.push(c.1);
                        after.push(c.2);
                    }
                    let cand = (ue + step_ue, vc + step_vc);
                    let slot = &mut next[encode(&after)];
                    if cand.0 < slot.0 || (cand.0 == slot.0 && cand.1 < slot.1) {
                        *slot = cand;
                    }
                };
                match options.len() {
                    1 => options[0].iter().for_each(|a| visit(&[*a])),
                    _ => {
                        for a in &options[0] {
                            for b in &options[1] {
                                visit(&[*a, *b]);
                            }
                        }
                    }
                }
            }
            best = next;
        }
        let (ue, vc) = best.into_iter().fold(unreached, |acc, x| {
            if x.0 < acc.0 || (x.0 == acc.0 && x.1 < acc.1) {
                x
            } else {
                acc
            }
        });
        OracleOptimum {
            unserved: ue as f64 * self.step,
            variable: vc * self.step * 1000.0,
        }
    }
}

/// Every (net position, stored energy after, flexible energy after,
/// flexible output) reachable at one node in interval `t`.
fn node_options(
    node: &OracleNode,
    stored: i64,
    remaining: i64,
    t: usize,
) -> Vec<(i64, i64, i64, i64)> {
    let base = node.supply[t] - node.demand[t];
    let (lo, hi) = match &node.storage {
        Some(s) => ((-s.power).max(stored - s.energy), s.power.min(stored)),
        None => (0, 0),
    };
    let g_max = node.flexible.as_ref().map_or(0, |f| f.power.min(remaining));
    let mut out = Vec::with_capacity(((hi - lo + 1) * (g_max + 1)) as usize);
    for phi in lo..=hi {
        for g in 0..=g_max {
            out.push((base + phi + g, stored - phi, remaining - g, g));
        }
    }
    out
}
