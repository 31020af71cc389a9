use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hol::parse_formula_unscoped;
use crate::proof::{Logic, Params, Proof};

fn f(s: &str) -> Formula {
    parse_formula_unscoped(s).unwrap()
}

fn theory(axioms: &[&str]) -> Theory {
    Theory::from_draws(axioms.iter().map(|a| f(a)).collect::<Vec<_>>().iter())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9 * (1.0 + a.abs().max(b.abs()))
}

// Σ_k e^{-k²}, enough terms for double precision
fn name_z() -> f64 {
    (0..8).map(|k: i32| (-f64::from(k * k)).exp()).sum()
}

#[test]
fn empty_theory_is_zero() {
    assert_eq!(log_prior_theory(&Theory::new(), &PriorConfig::default()), 0.0);
}

#[test]
fn atom_with_constant_under_no_symbols() {
    let cfg = PriorConfig::default();
    // node type 1/8; H_p new 1/1; one arg: 1/(0+1) · H_c new 1/1
    assert!(close(log_base_density(&f("p(a)"), &cfg), (1.0f64 / 8.0).ln()));
    // ∀x p(x): the argument is the variable with probability 1/2
    assert!(close(log_base_density(&f("![x]:(p(x))"), &cfg), 2.0 * (1.0f64 / 8.0).ln() + 0.5f64.ln()));
    assert_eq!(log_base_density(&f("p(a)"), &cfg), log_base_density(&f("p(a)"), &cfg));
    assert_eq!(log_base_density(&Formula::falsum(), &cfg), f64::NEG_INFINITY);
}

#[test]
fn repeated_draw_versus_distinct_axioms() {
    let cfg = PriorConfig { name_lambda: (-1.0f64).exp(), ..PriorConfig::default() };
    let lz = name_z().ln();
    let l8 = 8f64.ln();
    let twice = -l8 + (1.0f64 / 1.1).ln() - lz;
    // q(b) after p(a): H_p new 1/2, H_c new 1/2
    let distinct = -l8 + (0.1f64 / 1.1).ln() + (-l8 - 2.0 * 2f64.ln()) - 2.0 * lz;
    assert!(close(log_prior_theory(&theory(&["p(a)", "p(a)"]), &cfg), twice));
    assert!(close(log_prior_theory(&theory(&["p(a)", "q(b)"]), &cfg), distinct));
}

#[test]
fn shared_name_costs_exactly_the_penalty() {
    let cfg = PriorConfig::default();
    let shared = theory(&["name(c1)=\"Bob\"", "name(c2)=\"Bob\""]);
    let unique = theory(&["name(c1)=\"Bob\"", "name(c2)=\"Ann\""]);
    let gap = log_prior_theory(&unique, &cfg) - log_prior_theory(&shared, &cfg);
    assert!((gap - 2000.0).abs() < 1e-9, "{gap}");
}

#[test]
fn inconsistent_theory_is_impossible() {
    let t = theory(&["cat(a)", "~cat(a)"]);
    assert_eq!(log_prior_theory(&t, &PriorConfig::default()), f64::NEG_INFINITY);
}

#[test]
fn ewens_matches_sequential_seating() {
    let cfg = PriorConfig::default();
    let t1 = theory(&["p(a)", "q(b)", "p(a)", "r(c)", "p(a)", "q(b)"]);
    let t2 = theory(&["p(a)", "q(b)", "s(a)"]);
    let direct = log_prior_ratio(&t1, &t2, &cfg);
    let diff = log_prior_theory(&t1, &cfg) - log_prior_theory(&t2, &cfg);
    assert!(close(direct, diff), "{direct} vs {diff}");
}

#[test]
fn set_size_uses_the_geometric() {
    let cfg = PriorConfig::default();
    let a = log_base_density(&f("size(^[x]:(planet(x)))=8"), &cfg);
    let b = log_base_density(&f("size(^[x]:(planet(x)))=9"), &cfg);
    assert!(close(a - b, -(-1e-4f64).ln_1p()));
}

#[test]
fn poisson_is_exact() {
    // Poisson(3; 20) = e^-20 20³ / 6
    assert!(close(log_poisson(3, 20.0), -20.0 + 3.0 * 20f64.ln() - 6f64.ln()));
}

#[test]
fn one_step_proof() {
    let cfg = PriorConfig::default();
    let p = Proof::axiom(f("q"), Logic::Classical);
    let want = log_poisson(1, 20.0) + (1.0f64 / 15.0).ln();
    assert!(close(log_prior_proof(&p, &theory(&["q"]), &cfg), want));
}

#[test]
fn modus_ponens_premise_terms() {
    let cfg = PriorConfig::default();
    let l = Logic::Intuitionistic;
    let inst = Proof::join(
        Rule::ForAllE,
        Params::term(Formula::constant("bob")),
        f("cat(bob) => mammal(bob)"),
        vec![Proof::axiom(f("![x]:(cat(x) => mammal(x))"), l)],
        l,
    );
    let p = Proof::join(Rule::ImpliesE, Params::default(), f("mammal(bob)"), vec![Proof::axiom(f("cat(bob)"), l), inst], l);
    let t = theory(&["![x]:(cat(x) => mammal(x))", "cat(bob)"]);
    let rule = (1.0f64 / 14.0).ln();
    // step 3 picks one of 2 earlier steps and a term among {bob, new};
    // step 4 picks two premises among 3
    let want = log_poisson(4, 20.0) + 4.0 * rule + 0.5f64.ln() + 0.5f64.ln() + 2.0 * (1.0f64 / 3.0).ln();
    let got = log_prior_proof(&p, &t, &cfg);
    assert!(close(got, want), "{got} vs {want}");
    assert_eq!(got, log_prior_proof(&p, &t, &cfg));
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    assert!(PriorConfig::from_json(r#"{"crp_alpha": 0.5}"#).is_ok());
    assert!(PriorConfig::from_json(r#"{"alpha": 0.5}"#).is_err());
    assert!(PriorConfig::from_json(r#"{"set_size_geometric_p": 1.5}"#).is_err());
    assert!(PriorConfig::from_json(r#"{"deduction_rule_weights": {"Bogus": 1}}"#).is_err());
    assert!(PriorConfig::from_json(r#"{"node_type_weights": {"atom": 0}}"#).is_err());
}

#[test]
fn forced_atoms() {
    let mut cfg = PriorConfig::default();
    cfg.node_type_weights = NodeTypeWeights { atom: 1.0, equality: 1e-300, not: 1e-300, and: 1e-300, or: 1e-300, implies: 1e-300, forall: 1e-300, exists: 1e-300 };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        assert_eq!(NodeType::of(&sample_axiom(&cfg, &Theory::new(), &mut rng)), Some(NodeType::Atom));
    }
}

#[test]
fn node_type_frequencies_within_three_sigma() {
    let mut cfg = PriorConfig::default();
    cfg.node_type_weights.atom = 3.0;
    cfg.node_type_weights.exists = 0.5;
    let t = theory(&["cat(bob)", "![x]:(cat(x) => mammal(x))"]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let mut counts = [0usize; 8];
    for i in 0..n {
        let a = sample_axiom(&cfg, &t, &mut rng);
        let k = NodeType::ALL.iter().position(|x| Some(*x) == NodeType::of(&a)).unwrap();
        counts[k] += 1;
        if i % 97 == 0 {
            assert!(log_base_density(&a, &cfg).is_finite(), "{a}");
        }
    }
    let total: f64 = NodeType::ALL.iter().map(|t| cfg.node_type_weights.get(*t)).sum();
    for (k, t) in NodeType::ALL.iter().enumerate() {
        let p = cfg.node_type_weights.get(*t) / total;
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((counts[k] as f64 - mean).abs() <= 3.0 * sd, "{t:?}: {} vs {mean}±{sd}", counts[k]);
    }
}
