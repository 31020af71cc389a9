mod common;

use abduce_core::mh::MHState;
use abduce_core::proof::Logic;
use common::{f, toy::Toy};

fn start(toy: &Toy) -> MHState {
    toy.states.values().map(|(s, _)| s.clone()).next().unwrap()
}

#[test]
fn two_disjunctions_over_two_constants() {
    let toy = Toy::new(&[f("p(a) | p(b)"), f("~p(a) | p(b)")], Logic::Classical);
    // p(a) with ~p(a) is inconsistent
    assert_eq!(toy.states.len(), 3);
    let (tv, worst) = toy.check_chain(start(&toy), 20_000, 1);
    assert!(tv < 0.05, "tv {tv}");
    assert!(worst < 1e-9, "ratio mismatch {worst}");
}

#[test]
fn disjunction_beside_a_fact() {
    let toy = Toy::new(&[f("p(a)"), f("p(a) | p(b)")], Logic::Intuitionistic);
    assert_eq!(toy.states.len(), 2);
    let (tv, worst) = toy.check_chain(start(&toy), 20_000, 2);
    assert!(tv < 0.05, "tv {tv}");
    assert!(worst < 1e-9, "ratio mismatch {worst}");
}


#[test]
fn bimodal_space_ratios_are_exact() {
    // modes p(a),p(a) and p(b),p(b) are joined only through a state of
    // mass ~1e-3, so only the ratios are checked here
    let toy = Toy::new(&[f("p(a) | p(b)"), f("p(a) | p(b)")], Logic::Classical);
    assert_eq!(toy.states.len(), 4);
    let (_, worst) = toy.check_chain(start(&toy), 5_000, 1);
    assert!(worst < 1e-9, "ratio mismatch {worst}");
}
