mod common;

use firm_core::costing::objective;
use firm_core::evolve::{evaluate_population, optimize, DeConfig};
use firm_core::network::enumerate_routes;

#[test]
fn worker_count_does_not_change_scores() {
    let s = common::load("tutorial");
    let rt = enumerate_routes(&s, None);
    let xs = common::random_vectors(&s, 64, 8);
    let one = evaluate_population(&s, &rt, &xs, 1, true).unwrap();
    let eight = evaluate_population(&s, &rt, &xs, 8, true).unwrap();
    assert_eq!(one, eight);
    for (x, score) in xs.iter().zip(&one).take(4) {
        let c = s.candidate_from_vector(x).unwrap();
        assert_eq!(objective(&s, &c, &rt, true, true).score, *score);
    }
}

#[test]
fn worker_count_does_not_change_the_archive() {
    let s = common::load("tutorial");
    let cfg = DeConfig {
        population: 6,
        generations: 3,
        workers: 1,
        seed: 12,
        ..DeConfig::default()
    };
    let a = optimize(&s, &cfg).unwrap();
    let b = optimize(&s, &DeConfig { workers: 4, ..cfg }).unwrap();
    assert_eq!(a.archive, b.archive);
    assert_eq!(a.x, b.x);
}
