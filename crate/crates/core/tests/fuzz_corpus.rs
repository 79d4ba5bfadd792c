//! Replays the checked-in fuzz corpus with the fuzz targets' assertions.

use std::fs;
use std::path::Path;

use choi_moments::scenario::{parse_complex_matrix, parse_knots, parse_scenario, render_scenario};

fn corpus(target: &str) -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut seeds: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| String::from_utf8_lossy(&fs::read(e.unwrap().path()).unwrap()).into_owned())
        .collect();
    seeds.sort();
    assert!(!seeds.is_empty());
    seeds
}

#[test]
fn scenario_seeds() {
    let mut accepted = 0;
    for text in corpus("parse_scenario") {
        if let Ok(config) = parse_scenario(&text) {
            assert_eq!(parse_scenario(&render_scenario(&config)).unwrap(), config);
            accepted += 1;
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn matrix_seeds() {
    for text in corpus("parse_complex_matrix") {
        if let Ok(m) = parse_complex_matrix(&text) {
            assert!(m.is_square());
        }
    }
}

#[test]
fn knot_seeds() {
    for text in corpus("parse_knots") {
        let _ = parse_knots(&text);
    }
}
