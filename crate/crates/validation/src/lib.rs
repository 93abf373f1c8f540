//! Independent oracles and scenario builders used to check `firm-core`
//! against ground truth it cannot see.

pub mod instances;
pub mod oracle;
pub mod segments;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use firm_core::scenario::{load_scenario, CandidateSolution, Scenario};

/// Directory of a fixture bundled with `firm-core`.
pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

/// Scenario of a bundled fixture, with traces beside its config.
pub fn load_fixture(name: &str) -> Scenario {
    let dir = fixture_dir(name);
    load_scenario(dir.join("config.json"), &dir).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Candidate from a `{"variable": value}` JSON file.
pub fn load_candidate(s: &Scenario, path: &Path) -> CandidateSolution {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let map: BTreeMap<String, f64> =
        serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let x: Vec<f64> = s
        .decision_space()
        .iter()
        .map(|v| {
            *map.get(&v.name)
                .unwrap_or_else(|| panic!("{} lacks {}", path.display(), v.name))
        })
        .collect();
    s.candidate_from_vector(&x)
        .expect("candidate within bounds")
}
