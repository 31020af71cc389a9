//! The bundled datasets are exactly what the generators produce.

use std::path::PathBuf;

use abduce_core::qa::{oracle_label, templates, Example};
use abduce_core::{Label, Logic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bundled(name: &str) -> Vec<Example> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(p).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn birds_fixture_is_reproducible() {
    assert_eq!(bundled("birds1.jsonl"), templates::birds(40, &mut ChaCha8Rng::seed_from_u64(1)));
}

#[test]
fn electricity_fixture_is_reproducible() {
    let ex = bundled("electricity1.jsonl");
    assert_eq!(ex, templates::electricity(40, 3, &mut ChaCha8Rng::seed_from_u64(1)));
    let divergent = ex.iter().filter(|e| oracle_label(e, Logic::Classical).unwrap() != oracle_label(e, Logic::Intuitionistic).unwrap()).count();
    assert_eq!(divergent, 3);
    assert!(ex.iter().all(|e| e.label == Some(oracle_label(e, Logic::Intuitionistic).unwrap())));
    assert!(ex.iter().any(|e| e.label == Some(Label::Unknown)));
}
