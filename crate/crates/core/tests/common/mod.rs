#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use firm_core::scenario::{load_scenario, CandidateSolution, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load(name: &str) -> Scenario {
    let dir = fixture(name);
    load_scenario(dir.join("config.json"), &dir).unwrap()
}

pub fn candidate(s: &Scenario, name: &str) -> CandidateSolution {
    let text = std::fs::read_to_string(fixture(name).join("candidate.json")).unwrap();
    let map: BTreeMap<String, f64> = serde_json::from_str(&text).unwrap();
    let x: Vec<f64> = s.decision_space().iter().map(|v| map[&v.name]).collect();
    s.candidate_from_vector(&x).unwrap()
}

pub fn random_vectors(s: &Scenario, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = s.decision_space();
    (0..n)
        .map(|_| {
            vars.iter()
                .map(|v| {
                    if v.bounds.max > v.bounds.min {
                        rng.gen_range(v.bounds.min..v.bounds.max)
                    } else {
                        v.bounds.min
                    }
                })
                .collect()
        })
        .collect()
}
