//! Temporal aggregation: step-function fits, load-duration blocks and
//! typical-period sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{dist2, kmeans_pp, nearest};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub length: usize,
    pub level: f64,
}

/// Ordered blocks tiling `0..span`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSeries {
    pub blocks: Vec<Block>,
    pub span: usize,
}

impl BlockSeries {
    /// Expands the blocks back to one value per interval.
    pub fn values(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.level, b.length))
            .collect()
    }
}

/// Polynomial sample weight `a + b·x + c·x² + d·x³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights(pub [f64; 4]);

impl Weights {
    pub const LINEAR: Weights = Weights([0.0, 1.0, 0.0, 0.0]);
    pub const UNIFORM: Weights = Weights([1.0, 0.0, 0.0, 0.0]);

    pub fn at(&self, x: f64) -> f64 {
        let [a, b, c, d] = self.0;
        a + x * (b + x * (c + x * d))
    }
}

/// Weighted mean and weighted squared error of a span. A span whose weights
/// are all zero takes the plain mean and costs nothing.
pub fn segment_fit(x: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return (x.iter().sum::<f64>() / x.len() as f64, 0.0);
    }
    let level = x.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let err = x.iter().zip(w).map(|(x, w)| w * (x - level).powi(2)).sum();
    (level, err)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockFit {
    pub series: BlockSeries,
    /// Σ w(x)·(x − level)² over the day.
    pub error: f64,
}

/// Optimal `k`-block piecewise-constant fit by dynamic programming over
/// breakpoints.
pub fn fit_blocks(day: &[f64], k: usize, weights: Weights) -> Result<BlockFit> {
    let n = day.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot fit {k} blocks to {n} intervals"
        )));
    }
    let w: Vec<f64> = day.iter().map(|&x| weights.at(x)).collect();
    if let Some(i) = w.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "weight at interval {i} is negative"
        )));
    }

    // cost[i][j]: error of one block over i..=j, by weighted running moments.
    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..n {
        let (mut sw, mut mean, mut m2) = (0.0, 0.0, 0.0);
        for j in i..n {
            if w[j] > 0.0 {
                sw += w[j];
                let delta = day[j] - mean;
                mean += delta * w[j] / sw;
                m2 += w[j] * delta * (day[j] - mean);
            }
            cost[i][j] = m2.max(0.0);
        }
    }

    // best[b][j]: least error covering 0..j with b blocks.
    let inf = f64::INFINITY;
    let mut best = vec![vec![inf; n + 1]; k + 1];
    let mut cut = vec![vec![0usize; n + 1]; k + 1];
    best[0][0] = 0.0;
    for b in 1..=k {
        for j in b..=n - (k - b) {
            for i in (b - 1)..j {
                let v = best[b - 1][i] + cost[i][j - 1];
                if v < best[b][j] {
                    best[b][j] = v;
                    cut[b][j] = i;
                }
            }
        }
    }
    let mut bounds = vec![n];
    let mut j = n;
    for b in (1..=k).rev() {
        j = cut[b][j];
        bounds.push(j);
    }
    bounds.reverse();
    let mut blocks = Vec::with_capacity(k);
    let mut error = 0.0;
    for pair in bounds.windows(2) {
        let (s, e) = (pair[0], pair[1]);
        let (level, err) = segment_fit(&day[s..e], &w[s..e]);
        error += err;
        blocks.push(Block {
            start: s,
            length: e - s,
            level,
        });
    }
    Ok(BlockFit {
        series: BlockSeries { blocks, span: n },
        error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdcFit {
    /// Blocks over duration rank.
    pub fit: BlockFit,
    /// Original interval at each duration rank.
    pub order: Vec<usize>,
}

/// Sorts the day descending and fits blocks to the duration curve.
pub fn daily_ldc_blocks(day: &[f64], k: usize, weights: Weights) -> Result<LdcFit> {
    let mut order: Vec<usize> = (0..day.len()).collect();
    order.sort_by(|&a, &b| day[b].total_cmp(&day[a]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| day[i]).collect();
    Ok(LdcFit {
        fit: fit_blocks(&sorted, k, weights)?,
        order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Days clustered within each calendar month.
    DaysPerMonth(usize),
    /// Weeks clustered within each 52-week year.
    WeeksPerYear(usize),
}

const MONTH_DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representative {
    /// Month or year the period was drawn from.
    pub group: usize,
    /// Period index in the trace.
    pub period: usize,
    /// Number of periods it stands for.
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalPeriods {
    /// Intervals per period.
    pub period_length: usize,
    pub representatives: Vec<Representative>,
    /// Representative index of each period.
    pub assignment: Vec<usize>,
}

impl TypicalPeriods {
    /// Rebuilds a full-length trace from the representatives.
    pub fn expand(&self, trace: &[f64]) -> Vec<f64> {
        let l = self.period_length;
        self.assignment
            .iter()
            .flat_map(|&r| {
                let p = self.representatives[r].period;
                trace[p * l..(p + 1) * l].iter().copied()
            })
            .collect()
    }
}

/// Lloyd's k-means from k-means++ seeds; returns a label per point.
fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut centers = kmeans_pp(points, k, rng);
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    for _ in 0..300 {
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

/// Clusters whole-period profiles within each group and keeps the member
/// nearest each centroid. Empty clusters are dropped and clusters with
/// identical representatives are merged.
pub fn sample_typical(
    trace: &[f64],
    resolution: f64,
    mode: SampleMode,
    seed: u64,
) -> Result<TypicalPeriods> {
    let per_day = (24.0 / resolution).round() as usize;
    if !(resolution > 0.0) || per_day == 0 || (per_day as f64 * resolution - 24.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} h does not divide a day"
        )));
    }
    let (period_length, k) = match mode {
        SampleMode::DaysPerMonth(k) => (per_day, k),
        SampleMode::WeeksPerYear(k) => (7 * per_day, k),
    };
    if k == 0 {
        return Err(Error::InvalidArgument(
            "at least one cluster is required".into(),
        ));
    }
    if trace.is_empty() || !trace.len().is_multiple_of(period_length) {
        return Err(Error::InvalidArgument(format!(
            "trace of {} intervals is not a whole number of {period_length}-interval periods",
            trace.len()
        )));
    }
    let n_periods = trace.len() / period_length;
    let group_of: Vec<usize> = match mode {
        SampleMode::DaysPerMonth(_) => {
            let mut g = Vec::with_capacity(n_periods);
            let mut month = 0;
            'outer: loop {
                for &d in &MONTH_DAYS {
                    for _ in 0..d {
                        if g.len() == n_periods {
                            break 'outer;
                        }
                        g.push(month);
                    }
                    month += 1;
                }
            }
            g
        }
        SampleMode::WeeksPerYear(_) => (0..n_periods).map(|p| p / 52).collect(),
    };
    let n_groups = group_of.last().map_or(0, |g| g + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut representatives: Vec<Representative> = vec![];
    let mut assignment = vec![0usize; n_periods];
    for g in 0..n_groups {
        let members: Vec<usize> = (0..n_periods).filter(|&p| group_of[p] == g).collect();
        if members.len() < k {
            return Err(Error::InvalidArgument(format!(
                "group {g} has {} periods, fewer than {k} clusters",
                members.len()
            )));
        }
        let profiles: Vec<Vec<f64>> = members
            .iter()
            .map(|&p| trace[p * period_length..(p + 1) * period_length].to_vec())
            .collect();
        let labels = lloyd(&profiles, k, &mut rng);
        let first_rep = representatives.len();
        for j in 0..k {
            let idx: Vec<usize> = (0..members.len()).filter(|&i| labels[i] == j).collect();
            if idx.is_empty() {
                continue;
            }
            let dim = period_length;
            let mean: Vec<f64> = (0..dim)
                .map(|t| idx.iter().map(|&i| profiles[i][t]).sum::<f64>() / idx.len() as f64)
                .collect();
            let rep = *idx
                .iter()
                .min_by(|&&a, &&b| {
                    dist2(&profiles[a], &mean)
                        .total_cmp(&dist2(&profiles[b], &mean))
                        .then(a.cmp(&b))
                })
                .expect("nonempty");
            let existing = (first_rep..representatives.len()).find(|&r| {
                let p = representatives[r].period;
                trace[p * period_length..(p + 1) * period_length] == profiles[rep][..]
            });
            let r = match existing {
                Some(r) => {
                    representatives[r].weight += idx.len();
                    r
                }
                None => {
                    representatives.push(Representative {
                        group: g,
                        period: members[rep],
                        weight: idx.len(),
                    });
                    representatives.len() - 1
                }
            };
            for &i in &idx {
                assignment[members[i]] = r;
            }
        }
    }
    Ok(TypicalPeriods {
        period_length,
        representatives,
        assignment,
    })
}
