use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn firm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_firm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run firm")
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = firm(args, out);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    v.sort();
    v
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn dispatch_fixture(name: &str, extra: &[&str], out: &Path) -> Output {
    let (cfg, cand) = (
        fixture(name).join("config.json"),
        fixture(name).join("candidate.json"),
    );
    let mut args = vec!["dispatch", "--scenario", p(&cfg), "--candidate", p(&cand)];
    args.extend_from_slice(extra);
    firm(&args, out)
}

#[test]
fn golden_traces_are_byte_identical() {
    let out = tempfile::tempdir().unwrap();
    let o = dispatch_fixture("golden", &["--traces"], out.path());
    assert!(o.status.success());
    for name in ["dispatch.csv", "soc.csv"] {
        let got = fs::read(out.path().join(name)).unwrap();
        let want = fs::read(fixture("golden").join("expected").join(name)).unwrap();
        assert!(got == want, "{name} differs from the reference simulation");
    }
    let report = json(&out.path().join("report.json"));
    let summary = json(&fixture("golden").join("expected/summary.json"));
    let (got, want) = (
        report["system_cost"].as_f64().unwrap(),
        summary["system_cost"].as_f64().unwrap(),
    );
    assert!((got - want).abs() < 1e-9 * want);
}

#[test]
fn dispatch_without_traces_writes_report_and_manifest() {
    let out = tempfile::tempdir().unwrap();
    assert!(dispatch_fixture("golden", &[], out.path()).status.success());
    assert_eq!(files(out.path()), ["manifest.json", "report.json"]);
    let m = json(&out.path().join("manifest.json"));
    assert_eq!(m["command"], "dispatch");
    assert!(m["scenario_hash"].as_str().is_some_and(|h| !h.is_empty()));
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 1);
}

#[test]
fn disabling_precharge_leaves_unserved_energy() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(dispatch_fixture("precharge", &[], a.path())
        .status
        .success());
    assert!(dispatch_fixture("precharge", &["--no-precharge"], b.path())
        .status
        .success());
    let with = json(&a.path().join("report.json"))["unserved_gwh"]
        .as_f64()
        .unwrap();
    let without = json(&b.path().join("report.json"))["unserved_gwh"]
        .as_f64()
        .unwrap();
    assert!(with < 1e-9 && without > 1.0, "{with} vs {without}");
}

#[test]
fn candidate_outside_bounds_names_the_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cand = dir.path().join("c.json");
    fs::write(
        &cand,
        r#"{"pv.power": 99, "gas.power": 1, "bat.power": 1, "bat.energy": 1}"#,
    )
    .unwrap();
    let cfg = fixture("golden").join("config.json");
    let o = firm(
        &["dispatch", "--scenario", p(&cfg), "--candidate", p(&cand)],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pv.power"));

    fs::write(&cand, r#"{"pv.power": 1, "gas.power": 1, "bat.power": 1}"#).unwrap();
    let o = firm(
        &["dispatch", "--scenario", p(&cfg), "--candidate", p(&cand)],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bat.energy"));
}

#[test]
fn unwritable_output_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = dispatch_fixture("golden", &[], &blocker.join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn optimize_archives_every_evaluation() {
    let out = tempfile::tempdir().unwrap();
    let cfg = fixture("golden").join("config.json");
    let seed = fixture("golden").join("candidate.json");
    let args = [
        "optimize",
        "--scenario",
        p(&cfg),
        "--initial",
        p(&seed),
        "--population",
        "5",
        "--generations",
        "3",
        "--seed",
        "7",
    ];
    ok(&args, out.path());
    assert_eq!(
        files(out.path()),
        [
            "archive.csv",
            "best.json",
            "candidate.json",
            "manifest.json"
        ]
    );
    let archive = fs::read_to_string(out.path().join("archive.csv")).unwrap();
    assert_eq!(archive.lines().count(), 1 + 5 * 3 + 1);
    let header = archive.lines().next().unwrap();
    assert!(header.starts_with("generation,pv.power,gas.power,bat.power,bat.energy,total:"));
    assert!(header.ends_with(",build,fixed,score,feasible"));
    let best = json(&out.path().join("best.json"));
    assert_eq!(best["evaluations"], 16);
    // The seeded candidate is feasible, so the best is too.
    assert_eq!(best["feasible"], true);
    let m = json(&out.path().join("manifest.json"));
    assert_eq!(m["seed"], 7);

    // The written candidate feeds straight back into dispatch.
    let again = tempfile::tempdir().unwrap();
    let cand = out.path().join("candidate.json");
    ok(
        &["dispatch", "--scenario", p(&cfg), "--candidate", p(&cand)],
        again.path(),
    );
    let report = json(&again.path().join("report.json"));
    let score = best["score"].as_f64().unwrap();
    assert!((report["system_cost"].as_f64().unwrap() - score).abs() <= 1e-9 * score);

    let rerun = tempfile::tempdir().unwrap();
    ok(&args, rerun.path());
    assert_eq!(
        archive,
        fs::read_to_string(rerun.path().join("archive.csv")).unwrap()
    );
}

#[test]
fn empty_build_box_exits_with_infeasible_status() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = json(&fixture("golden").join("config.json"));
    for group in ["generators", "storages"] {
        for asset in cfg[group].as_array_mut().unwrap() {
            for key in ["new_power", "new_energy"] {
                if asset.get(key).is_some() {
                    asset[key] = serde_json::json!({"min": 0, "max": 0});
                }
            }
        }
    }
    fs::write(dir.path().join("config.json"), cfg.to_string()).unwrap();
    for f in ["demand.csv", "availability.csv"] {
        fs::copy(fixture("golden").join(f), dir.path().join(f)).unwrap();
    }
    let c = dir.path().join("config.json");
    let o = firm(
        &[
            "optimize",
            "--scenario",
            p(&c),
            "--population",
            "4",
            "--generations",
            "2",
        ],
        &dir.path().join("out"),
    );
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let best = json(&dir.path().join("out/best.json"));
    assert_eq!(best["feasible"], false);
}

#[test]
fn identical_solutions_are_zero_apart() {
    let out = tempfile::tempdir().unwrap();
    assert!(dispatch_fixture("golden", &["--solution"], out.path())
        .status
        .success());
    let sol = out.path().join("solution.json");
    let l1 = tempfile::tempdir().unwrap();
    let o = ok(
        &["analyze", "l1", "--test", p(&sol), "--reference", p(&sol)],
        l1.path(),
    );
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "0");
    assert_eq!(json(&l1.path().join("l1.json"))["distance"], 0.0);
}

#[test]
fn perturbed_solution_has_positive_distance() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(dispatch_fixture("golden", &["--solution"], a.path())
        .status
        .success());
    let cand = b.path().join("c.json");
    fs::write(
        &cand,
        r#"{"pv.power": 5, "gas.power": 2.5, "bat.power": 1.5, "bat.energy": 6}"#,
    )
    .unwrap();
    let cfg = fixture("golden").join("config.json");
    ok(
        &[
            "dispatch",
            "--scenario",
            p(&cfg),
            "--candidate",
            p(&cand),
            "--solution",
        ],
        b.path(),
    );
    let l1 = tempfile::tempdir().unwrap();
    let (t, r) = (
        b.path().join("solution.json"),
        a.path().join("solution.json"),
    );
    let o = ok(
        &["analyze", "l1", "--test", p(&t), "--reference", p(&r)],
        l1.path(),
    );
    let d: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!(d > 0.0);
}

#[test]
fn sinusoid_peaks_at_daily_frequency() {
    let out = tempfile::tempdir().unwrap();
    let input = fixture("sinusoid").join("soc.csv");
    ok(&["analyze", "spectrum", "--input", p(&input)], out.path());
    let s = json(&out.path().join("spectrum.json"));
    assert!((s["peak_period_hours"].as_f64().unwrap() - 24.0).abs() < 1e-9);
    let rows = fs::read_to_string(out.path().join("spectrum.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 1 + 120);
}

#[test]
fn clustering_and_filtering_an_archive() {
    let work = tempfile::tempdir().unwrap();
    let cfg = fixture("golden").join("config.json");
    ok(
        &[
            "optimize",
            "--scenario",
            p(&cfg),
            "--population",
            "6",
            "--generations",
            "4",
            "--seed",
            "2",
        ],
        work.path(),
    );
    let archive = work.path().join("archive.csv");

    let out = tempfile::tempdir().unwrap();
    ok(
        &[
            "analyze",
            "cluster",
            "--scenario",
            p(&cfg),
            "--archive",
            p(&archive),
            "--k",
            "3",
        ],
        out.path(),
    );
    let c = json(&out.path().join("clusters.json"));
    let clusters = c["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 3);
    assert_eq!(
        clusters
            .iter()
            .map(|c| c["size"].as_u64().unwrap())
            .sum::<u64>(),
        24
    );
    let labels = fs::read_to_string(out.path().join("clusters.csv")).unwrap();
    for c in clusters {
        let row = c["medoid_row"].as_u64().unwrap() as usize;
        let line = labels.lines().nth(1 + row).unwrap();
        assert_eq!(line, format!("{row},{}", c["cluster"]));
    }

    let o = firm(
        &[
            "analyze",
            "cluster",
            "--scenario",
            p(&cfg),
            "--archive",
            p(&archive),
            "--k",
            "25",
        ],
        out.path(),
    );
    assert_eq!(o.status.code(), Some(1));

    let filtered = tempfile::tempdir().unwrap();
    ok(
        &[
            "analyze",
            "filter",
            "--archive",
            p(&archive),
            "--threshold",
            "0",
            "--feasible-only",
        ],
        filtered.path(),
    );
    let kept = fs::read_to_string(filtered.path().join("filtered.csv")).unwrap();
    assert!(kept.lines().count() >= 2);
    let everything = tempfile::tempdir().unwrap();
    ok(
        &[
            "analyze",
            "filter",
            "--archive",
            p(&archive),
            "--reference-build",
            "1e30",
        ],
        everything.path(),
    );
    assert_eq!(
        fs::read_to_string(everything.path().join("filtered.csv")).unwrap(),
        fs::read_to_string(&archive).unwrap()
    );
}

#[test]
fn sensitivity_sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let axes = dir.path().join("axes.json");
    fs::write(
        &axes,
        r#"[{"parameter": "fuel", "technology": "flexible", "values": [45, 90, 180]},
            {"parameter": "discount_rate", "values": [0.03, 0.07]},
            {"parameter": "fuel", "technology": "nuclear", "values": [10]}]"#,
    )
    .unwrap();
    let (cfg, cand) = (
        fixture("golden").join("config.json"),
        fixture("golden").join("candidate.json"),
    );
    let out = dir.path().join("out");
    ok(
        &[
            "sensitivity",
            "--scenario",
            p(&cfg),
            "--candidate",
            p(&cand),
            "--axes",
            p(&axes),
        ],
        &out,
    );
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 1 + 3 + 2 + 1);
    let lcoe = |row: &Vec<&str>| row[4].parse::<f64>().unwrap();
    let fuel: Vec<f64> = rows
        .iter()
        .filter(|r| r[2] == "flexible")
        .map(lcoe)
        .collect();
    assert!(fuel.windows(2).all(|w| w[0] < w[1]), "{fuel:?}");
    // No asset has the technology, so the axis is marked flat.
    assert_eq!(rows.last().unwrap()[7], "true");
    assert!(rows[1..6].iter().all(|r| r[7] == "false"));
}

#[test]
fn synth_is_deterministic_per_seed() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    let args = ["synth", "--nodes", "2", "--resolution", "24", "--seed", "5"];
    ok(&args, a.path());
    ok(&args, b.path());
    ok(
        &["synth", "--nodes", "2", "--resolution", "24", "--seed", "6"],
        c.path(),
    );
    for f in ["config.json", "demand.csv", "availability.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert_ne!(
        fs::read(a.path().join("demand.csv")).unwrap(),
        fs::read(c.path().join("demand.csv")).unwrap()
    );

    let run = tempfile::tempdir().unwrap();
    let cfg = a.path().join("config.json");
    ok(
        &[
            "optimize",
            "--scenario",
            p(&cfg),
            "--population",
            "4",
            "--generations",
            "1",
        ],
        run.path(),
    );
}

#[test]
fn aggregate_commands_write_their_tables() {
    let input = fixture("tutorial").join("demand.csv");
    let fit = tempfile::tempdir().unwrap();
    ok(
        &[
            "aggregate",
            "fit",
            "--input",
            p(&input),
            "--column",
            "N0",
            "--blocks",
            "4",
        ],
        fit.path(),
    );
    let blocks = fs::read_to_string(fit.path().join("blocks.csv")).unwrap();
    assert_eq!(blocks.lines().count(), 1 + 365 * 4);

    let ldc = tempfile::tempdir().unwrap();
    ok(
        &[
            "aggregate",
            "ldc",
            "--input",
            p(&input),
            "--blocks",
            "3",
            "--weights",
            "1,0,0,0",
        ],
        ldc.path(),
    );
    assert_eq!(
        files(ldc.path()),
        ["blocks.csv", "manifest.json", "order.csv"]
    );

    let sample = tempfile::tempdir().unwrap();
    ok(
        &[
            "aggregate",
            "sample",
            "--input",
            p(&input),
            "--mode",
            "days",
            "--clusters",
            "2",
            "--seed",
            "1",
        ],
        sample.path(),
    );
    let t = json(&sample.path().join("typical.json"));
    assert!(t["representatives"].as_array().unwrap().len() <= 24);

    let bad = tempfile::tempdir().unwrap();
    let o = firm(
        &[
            "aggregate",
            "fit",
            "--input",
            p(&input),
            "--column",
            "N0",
            "--blocks",
            "30",
        ],
        bad.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}
