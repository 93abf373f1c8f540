//! Brute-force piecewise-constant segmentation.

use firm_core::aggregate::Weights;

/// Σ w·(x − m)² at the weighted mean m; segments with no weight cost nothing.
pub fn segment_cost(x: &[f64], weights: &Weights) -> f64 {
    let w: Vec<f64> = x.iter().map(|&v| weights.at(v)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
    x.iter()
        .zip(&w)
        .map(|(a, b)| b * (a - mean) * (a - mean))
        .sum()
}

/// Lowest total cost over every split of `x` into exactly `k` contiguous
/// non-empty segments, with the segment lengths achieving it.
pub fn best_split(x: &[f64], k: usize, weights: &Weights) -> (f64, Vec<usize>) {
    assert!(k >= 1 && k <= x.len());
    let n = x.len();
    let mut best = (f64::INFINITY, vec![]);
    // Each subset of the n − 1 inner boundaries with k − 1 members is a split.
    for mask in 0u32..(1 << (n - 1)) {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        let mut lengths = Vec::with_capacity(k);
        let mut start = 0;
        let mut cost = 0.0;
        for cut in 1..=n {
            if cut == n || mask & (1 << (cut - 1)) != 0 {
                cost += segment_cost(&x[start..cut], weights);
                lengths.push(cut - start);
                start = cut;
            }
        }
        if cost < best.0 {
            best = (cost, lengths);
        }
    }
    best
}
