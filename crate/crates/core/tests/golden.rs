mod common;

use firm_core::costing::objective;
use firm_core::network::enumerate_routes;
use firm_core::scenario::read_columns;

fn summary() -> serde_json::Value {
    let text =
        std::fs::read_to_string(common::fixture("golden").join("expected/summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn costs_match_reference_simulation() {
    let s = common::load("golden");
    let c = common::candidate(&s, "golden");
    let eval = objective(&s, &c, &enumerate_routes(&s, None), false, true);
    let want = summary();
    let r = &eval.report;
    for (got, key) in [
        (r.fixed, "fixed"),
        (r.variable, "variable"),
        (r.demand_mwh, "demand_mwh"),
        (r.system_cost, "system_cost"),
        (r.unserved_gwh, "unserved_gwh"),
    ] {
        let w = want[key].as_f64().unwrap();
        assert!(
            (got - w).abs() <= 1e-9 * w.abs().max(1.0),
            "{key}: {got} vs {w}"
        );
    }
    assert!(eval.feasible());
    assert_eq!(eval.score, r.system_cost);
}

#[test]
fn dispatch_matches_reference_trace() {
    let s = common::load("golden");
    let c = common::candidate(&s, "golden");
    let eval = objective(&s, &c, &enumerate_routes(&s, None), false, true);
    let d = eval.dispatch.unwrap();
    let (header, cols) =
        read_columns(&common::fixture("golden").join("expected/dispatch.csv")).unwrap();
    let col = |name: &str| &cols[header.iter().position(|h| h == name).unwrap()];
    for t in 0..d.n_intervals {
        assert!(
            (col("bat.power")[t] - d.storage_power[t]).abs() < 1e-12,
            "bat at {t}"
        );
        assert!(
            (col("gas.power")[t] - d.flexible_power[t]).abs() < 1e-12,
            "gas at {t}"
        );
        assert!(
            (col("A.spillage")[t] - d.spillage[t]).abs() < 1e-12,
            "spillage at {t}"
        );
    }
    let (header, cols) = read_columns(&common::fixture("golden").join("expected/soc.csv")).unwrap();
    let bat = &cols[header.iter().position(|h| h == "bat").unwrap()];
    for (t, e) in bat.iter().enumerate() {
        assert!((e - d.storage_energy[t]).abs() < 1e-12, "soc at {t}");
    }
}

#[test]
fn precharge_fixture_needs_the_backward_pass() {
    let s = common::load("precharge");
    let c = common::candidate(&s, "precharge");
    let rt = enumerate_routes(&s, None);
    let with = objective(&s, &c, &rt, false, true);
    let without = objective(&s, &c, &rt, false, false);
    assert!(with.report.unserved_gwh < 1e-9);
    assert!((without.report.unserved_gwh - 5.0).abs() < 1e-9);
    assert!(with.feasible() && !without.feasible());
}
