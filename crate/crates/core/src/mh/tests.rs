use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::moves::{self, Ctx, TruncatedGeometric};
use super::*;
use crate::hol::{parse_formula_unscoped, Node};
use crate::proof::{Params, Rule};

fn f(s: &str) -> Formula {
    parse_formula_unscoped(s).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const W: ProposalWeights = ProposalWeights { merge_alpha: 2.0, split_beta: 0.001 };

fn ctx(cfg: &PriorConfig) -> Ctx<'_> {
    Ctx { w: &W, cfg, exploratory: false }
}

/// State whose proofs cite each observation as an axiom.
fn axioms_state(obs: &[&str], cfg: &PriorConfig) -> MHState {
    let obs: Vec<Formula> = obs.iter().map(|s| f(s)).collect();
    let proofs = obs.iter().map(|x| Proof::axiom(x.clone(), Logic::Classical)).collect();
    MHState::from_proofs(obs, proofs, Logic::Classical, cfg).unwrap()
}

fn read_all(obs: &[&str], logic: Logic, seed: u64, cfg: &PriorConfig) -> MHState {
    let mut r = rng(seed);
    obs.iter().fold(MHState::new(logic), |s, x| read_logical_form(s, &f(x), cfg, &W, &mut r, 0).unwrap())
}

/// The key with constants renamed in order of first appearance.
fn canonical_key(s: &MHState) -> String {
    let mut order: Vec<Symbol> = Vec::new();
    for p in &s.proofs {
        for st in &p.steps {
            for c in st.conclusion.free_constants().into_iter().chain(st.params.term.iter().flat_map(|t| t.free_constants())) {
                if !order.contains(&c) {
                    order.push(c);
                }
            }
        }
    }
    let map: BTreeMap<Symbol, Symbol> = order.iter().enumerate().map(|(i, c)| (c.clone(), Symbol::new(&format!("k{i}")))).collect();
    let g = |c: &Symbol| map.get(c).cloned();
    s.proofs
        .iter()
        .map(|p| p.steps.iter().map(|st| format!("{}|{}|{:?}", st.rule, st.conclusion.rename_constants(&g), st.premises)).collect::<Vec<_>>().join(";"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn empty_state_has_no_sites() {
    let s = MHState::new(Logic::Classical);
    assert_eq!(enumerate_sites(&s).counts(), [0; 6]);
    assert_eq!(enumerate_sites(&s).normalizer(&W, false), 0.0);
    assert!(propose(&s, &W, &PriorConfig::default(), &mut rng(0), false).is_none());
}

#[test]
fn three_grounded_atoms() {
    let cfg = PriorConfig::default();
    let s = axioms_state(&["cat(bob)", "dog(rex)", "owl(hoot)"], &cfg);
    // brute scan: axioms that are a unary predicate applied to a constant
    let brute = s
        .theory
        .axioms()
        .filter(|(a, _)| matches!(a.node(), Node::Atom(_, xs) if xs.len() == 1 && xs[0].as_const().is_some()))
        .count();
    assert_eq!(brute, 3);
    assert_eq!(enumerate_sites(&s).counts(), [3, 0, 0, 0, 0, 0]);
    assert_eq!(enumerate_sites(&s).normalizer(&W, false), 3.0);
}

#[test]
fn normalizer_weights_merges_and_splits() {
    let one_merge = Sites { merges: vec![(Symbol::new("c1"), Symbol::new("c2"))], ..Default::default() };
    assert_eq!(one_merge.normalizer(&W, false), 2.0);
    let one_split = Sites { splits: vec![Symbol::new("c1")], ..Default::default() };
    assert_eq!(one_split.normalizer(&W, false), 0.001);
    assert_eq!(one_merge.normalizer(&W, true), 0.0);
}

#[test]
fn atom_to_universal_and_back() {
    let cfg = PriorConfig::default();
    let s = axioms_state(&["rectangle(c1)", "rhombus(c1)", "square(c1)"], &cfg);
    let n = enumerate_sites(&s).normalizer(&W, false);
    let mut seen = BTreeMap::new();
    for seed in 0..40 {
        let out = moves::atom_to_universal(&s, &f("square(c1)"), n, &ctx(&cfg), &mut rng(seed));
        let next = out.new_state.clone().expect("valid");
        next.validate(&cfg).unwrap();
        // three equally likely antecedents: {rectangle}, {rhombus}, both
        assert!((out.log_forward - (-(n.ln()) + (1.0f64 / 3.0).ln())).abs() < 1e-12);
        let sites = enumerate_sites(&next);
        assert_eq!(sites.universals.len(), 1);
        let (u, c) = &sites.universals[0];
        seen.insert(u.to_string(), ());
        assert!(!next.theory.contains(&f("square(c1)")));
        assert!(next.theory.provable(&f("square(c1)")));
        let n2 = sites.normalizer(&W, false);
        let back = moves::universal_to_atom(&next, u, c, n2, &ctx(&cfg));
        assert_eq!(back.new_state.as_ref().unwrap().key(), s.key());
        assert!((back.log_forward - out.log_reverse).abs() < 1e-12);
        assert!((back.log_reverse - out.log_forward).abs() < 1e-12);
        let r1 = acceptance_log_ratio(&s, &out);
        let r2 = acceptance_log_ratio(&next, &back);
        assert!((r1 + r2).abs() < 1e-9, "{r1} vs {r2}");
    }
    assert!(seen.contains_key(&f("![x]:((rectangle(x) & rhombus(x)) => square(x))").canonical().to_string()));
    assert_eq!(seen.len(), 3);
}

#[test]
fn atom_without_siblings_self_rejects() {
    let cfg = PriorConfig::default();
    let s = axioms_state(&["cat(bob)", "dog(rex)"], &cfg);
    let out = moves::atom_to_universal(&s, &f("cat(bob)"), 2.0, &ctx(&cfg), &mut rng(0));
    assert!(out.new_state.is_none());
    assert_eq!(acceptance_log_ratio(&s, &out), f64::NEG_INFINITY);
    let (next, kind, accepted) = step(s.clone(), &W, &cfg, &mut rng(0));
    assert_eq!(kind, Some(Kind::AtomToUniversal));
    assert!(!accepted);
    assert_eq!(next.key(), s.key());
}

#[test]
fn truncated_geometric_is_normalized_and_sampled() {
    let d = TruncatedGeometric::new(0.3, 3, Some(7)).unwrap();
    let total: f64 = (0..20).map(|k| d.log_prob(k).exp()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(d.log_prob(2), f64::NEG_INFINITY);
    assert_eq!(d.log_prob(8), f64::NEG_INFINITY);
    let n = 20000;
    let mut hist = [0usize; 8];
    let mut r = rng(5);
    for _ in 0..n {
        hist[d.sample(&mut r) as usize] += 1;
    }
    for k in 3..8 {
        let q = d.log_prob(k as u64).exp();
        let sd = (q * (1.0 - q) / n as f64).sqrt();
        assert!((hist[k] as f64 / n as f64 - q).abs() < 4.0 * sd, "{k}");
    }
    // unbounded with the default parameter: mean offset 1/p − 1
    let g = TruncatedGeometric::new(1e-4, 3, None).unwrap();
    assert!((g.log_prob(3) - 1e-4f64.ln()).abs() < 1e-12);
    let mean = (0..n).map(|_| g.sample(&mut r) as f64 - 3.0).sum::<f64>() / n as f64;
    let want = 1.0 / 1e-4 - 1.0;
    assert!((mean - want).abs() < 4.0 * want / (n as f64).sqrt());
    assert!(TruncatedGeometric::new(0.5, 4, Some(3)).is_none());
}

/// `∃n size(λx.cat(x)) = n`, proved with the number already known from
/// `size(λx.dog(x)) = 3`.
fn size_state(cfg: &PriorConfig) -> MHState {
    let dogs = f("size(^[x]:(dog(x)))=3");
    let obs = f("?[n]:(size(^[x]:(cat(x)))=n)");
    let Node::Exists(body) = obs.node() else { unreachable!() };
    let three = Formula::number(3);
    let inst = body.substitute(&three);
    let l = Logic::Classical;
    let p = Proof::join(Rule::ExistsI, Params::term(three), obs.clone(), vec![Proof::axiom(inst, l)], l);
    let cats = [f("cat(tom)"), f("cat(kit)")];
    let mut observations = vec![dogs.clone(), obs];
    let mut proofs = vec![Proof::axiom(dogs, l), p];
    for c in cats {
        proofs.push(Proof::axiom(c.clone(), l));
        observations.push(c);
    }
    MHState::from_proofs(observations, proofs, l, cfg).unwrap()
}

#[test]
fn set_size_resampling_respects_bounds() {
    let cfg = PriorConfig { set_size_geometric_p: 0.2, ..Default::default() };
    let s = size_state(&cfg);
    s.validate(&cfg).unwrap();
    let sites = enumerate_sites(&s);
    assert_eq!(sites.sizes.len(), 2);
    let n = sites.normalizer(&W, false);
    let ax = f("size(^[x]:(cat(x)))=3");
    let bounds = TruncatedGeometric::new(0.2, 2, None).unwrap();
    let mut moved = 0;
    for seed in 0..200 {
        let out = moves::resample_size(&s, &ax, n, &ctx(&cfg), &mut rng(seed));
        let next = out.new_state.expect("existential hides the number");
        next.validate(&cfg).unwrap();
        let (a, _) = next.theory.axioms().find(|(a, _)| a.to_string().contains("cat")).map(|(a, k)| (a.clone(), k)).unwrap();
        let Node::Equality(_, rhs) = a.node() else { panic!() };
        let Node::Number(k) = rhs.node() else { panic!() };
        let k = k.to_u64().unwrap();
        assert!(k >= 2, "two cats are provable");
        assert!((out.log_forward - (-n.ln() + bounds.log_prob(k))).abs() < 1e-12);
        assert!((out.log_reverse - (-n.ln() + bounds.log_prob(3))).abs() < 1e-12);
        moved += usize::from(k != 3);
    }
    assert!(moved > 100);
    // the literal size of dogs is visible in its observation
    let out = moves::resample_size(&s, &f("size(^[x]:(dog(x)))=3"), n, &ctx(&cfg), &mut rng(1));
    assert!(out.new_state.is_none() || out.new_state.unwrap().key() == s.key());
}

/// `∃e∃x∃y(chase(e) ∧ arg1(e)=x ∧ arg2(e)=y)` witnessed by `(e, x, y)`.
fn event_proof(e: &str, x: &str, y: &str) -> (Formula, Proof) {
    let obs = f("?[e]:(?[x]:(?[y]:(chase(e) & arg1(e)=x & arg2(e)=y)))");
    let l = Logic::Classical;
    let mut chain = vec![obs.clone()];
    for w in [e, x, y] {
        let Node::Exists(body) = chain.last().unwrap().node() else { unreachable!() };
        chain.push(body.substitute(&Formula::constant(w)));
    }
    let Node::And(cs) = chain[3].node() else { unreachable!() };
    let mut p = Proof::join(Rule::AndI, Params::default(), chain[3].clone(), cs.iter().map(|c| Proof::axiom(c.clone(), l)).collect(), l);
    for (k, w) in [y, x, e].into_iter().enumerate() {
        p = Proof::join(Rule::ExistsI, Params::term(Formula::constant(w)), chain[2 - k].clone(), vec![p], l);
    }
    (obs, p)
}

fn events_state(triples: &[(&str, &str, &str)], cfg: &PriorConfig) -> MHState {
    let (obs, proofs): (Vec<_>, Vec<_>) = triples.iter().map(|(e, x, y)| event_proof(e, x, y)).unzip();
    MHState::from_proofs(obs, proofs, Logic::Classical, cfg).unwrap()
}

#[test]
fn merge_then_split_round_trip() {
    let cfg = PriorConfig::default();
    let s = events_state(&[("c1", "c2", "c3"), ("c4", "c5", "c6")], &cfg);
    s.validate(&cfg).unwrap();
    let sites = enumerate_sites(&s);
    assert_eq!(sites.merges, vec![(Symbol::new("c1"), Symbol::new("c4"))]);
    assert!(sites.splits.is_empty());
    // chase(c1), chase(c4); six ExistsI nodes; one mergeable pair
    assert_eq!(sites.counts(), [2, 0, 0, 6, 1, 0]);
    let n = sites.normalizer(&W, false);
    assert_eq!(n, 10.0);
    let merged = events::merge(&s, &sites.merges[0], n, &ctx(&cfg));
    let m = merged.new_state.clone().unwrap();
    m.validate(&cfg).unwrap();
    assert_eq!(canonical_key(&m), canonical_key(&events_state(&[("c1", "c2", "c3"), ("c1", "c2", "c3")], &cfg)));
    assert!((merged.log_forward - 0.2f64.ln()).abs() < 1e-12);
    let ms = enumerate_sites(&m);
    assert_eq!(ms.splits, vec![Symbol::new("c1")]);
    let n2 = ms.normalizer(&W, false);
    // two subsets that are mirror images, two role flags that must both be set
    let want = (0.001 / n2).ln() + 2f64.ln() - 2f64.ln() + 0.25f64.ln();
    assert!((merged.log_reverse - want).abs() < 1e-12);
    let mut restored = 0;
    for seed in 0..64 {
        let out = events::split(&m, &Symbol::new("c1"), n2, &ctx(&cfg), &mut rng(seed));
        assert!((out.log_forward - merged.log_reverse).abs() < 1e-12);
        let next = out.new_state.clone().unwrap();
        next.validate(&cfg).unwrap();
        if canonical_key(&next) == canonical_key(&s) {
            restored += 1;
            assert!((out.log_reverse - merged.log_forward).abs() < 1e-12);
            let r = acceptance_log_ratio(&m, &out) + acceptance_log_ratio(&s, &merged);
            assert!(r.abs() < 1e-9);
        } else {
            // a partial split leaves a role shared, which is not the inverse of any merge here
            assert!(next.theory.axioms().count() > 0);
        }
    }
    assert!(restored > 5);
}

#[test]
fn events_sharing_proofs_do_not_merge() {
    let cfg = PriorConfig::default();
    let (o1, p1) = event_proof("c1", "c2", "c3");
    let (_, p2) = event_proof("c4", "c2", "c3");
    let both = Proof::join(Rule::AndI, Params::default(), Formula::and(vec![o1.clone(), o1.clone()]), vec![p1, p2], Logic::Classical);
    let s = MHState::from_proofs(vec![both.conclusion().clone()], vec![both], Logic::Classical, &cfg).unwrap();
    assert!(enumerate_sites(&s).merges.is_empty());
}

#[test]
fn reading_sentences() {
    let cfg = PriorConfig::default();
    let s = read_all(&["cat(bob)"], Logic::Intuitionistic, 0, &cfg);
    assert!(s.theory.contains(&f("cat(bob)")));
    let twice = read_all(&["cat(bob)", "cat(bob)"], Logic::Intuitionistic, 0, &cfg);
    assert_eq!(twice.theory.count(&f("cat(bob)")), 2);
    assert!(twice.theory.is_consistent());
    let cats = read_all(&["mammal(alice)", "cat(bob)", "![x]:(cat(x) => mammal(x))"], Logic::Intuitionistic, 0, &cfg);
    cats.validate(&cfg).unwrap();
    assert!(cats.theory.provable(&f("mammal(bob)")));
    let mut r = rng(0);
    let err = read_logical_form(cats, &f("~mammal(bob)"), &cfg, &W, &mut r, 0);
    assert!(matches!(err, Err(MhError::Unreadable(_))));
}

#[test]
fn cold_restart_reorders_initialization() {
    let cfg = PriorConfig::default();
    // warm start commits to `a`; only proving `~a | b`… first works
    let mut r = rng(3);
    let s = read_all(&["a | b"], Logic::Classical, 7, &cfg);
    let s = match read_logical_form(s, &f("~a"), &cfg, &W, &mut r, 0) {
        Ok(s) => s,
        Err(e) => panic!("{e}"),
    };
    s.validate(&cfg).unwrap();
    assert!(s.theory.contains(&f("~a")) && s.theory.contains(&f("b")));
    assert_eq!(s.observations, vec![f("a | b"), f("~a")]);
}

#[test]
fn schedule_shape_and_determinism() {
    let cfg = PriorConfig::default();
    let s = read_all(&["cat(bob) | dog(bob)", "?[x]:(cat(x))"], Logic::Classical, 1, &cfg);
    let (same, none) = run_schedule(s.clone(), &cfg, &W, &mut rng(0), 0, None);
    assert!(none.is_empty());
    assert_eq!(same.key(), s.key());
    let mut lines = Vec::new();
    let mut sink = |t: &TraceLine| lines.push(t.clone());
    let (_, samples) = run_schedule(s.clone(), &cfg, &W, &mut rng(9), 400, Some(&mut sink));
    assert_eq!(samples.len(), 400);
    let bursts: BTreeMap<usize, usize> = lines.iter().filter(|t| t.exploratory.is_some()).fold(BTreeMap::new(), |mut m, t| {
        *m.entry(t.iteration).or_default() += 1;
        m
    });
    assert_eq!(bursts, BTreeMap::from([(100, 20), (200, 20), (300, 20)]));
    assert_eq!(lines.len(), 460);
    assert_eq!(lines[0].to_string().split('\t').count(), 4);
    let (_, again) = run_schedule(s, &cfg, &W, &mut rng(9), 400, None);
    assert_eq!(samples, again);
}

fn random_formula(r: &mut ChaCha8Rng, vars: u32, depth: u32) -> Formula {
    use rand::Rng;
    if depth == 0 || r.gen_bool(0.35) {
        let p = ["p", "q", "r"][r.gen_range(0..3)];
        let arg = if vars > 0 && r.gen_bool(0.6) { Formula::var(r.gen_range(0..vars)) } else { Formula::constant(["a", "b"][r.gen_range(0..2)]) };
        return Formula::atom(p, vec![arg]);
    }
    let k = r.gen_range(0..6);
    let mut sub = |v| random_formula(r, v, depth - 1);
    match k {
        0 => Formula::and(vec![sub(vars), sub(vars)]),
        1 => Formula::or(vec![sub(vars), sub(vars)]),
        2 => Formula::not(sub(vars)),
        3 => Formula::implies(sub(vars), sub(vars)),
        4 => Formula::forall(sub(vars + 1)),
        _ => Formula::exists(sub(vars + 1)),
    }
}

/// Read random sentences, then check every state the chain visits.
pub(crate) fn fuzz_validity(seed: u64, steps: usize, cfg: &PriorConfig) -> usize {
    use rand::Rng;
    let mut r = rng(seed);
    let logic = if r.gen_bool(0.5) { Logic::Classical } else { Logic::Intuitionistic };
    let mut s = MHState::new(logic);
    for _ in 0..r.gen_range(1..5) {
        let x = random_formula(&mut r, 0, 3);
        if let Ok(next) = read_logical_form(s.clone(), &x, cfg, &W, &mut r, 0) {
            s = next;
        }
    }
    let mut accepted = 0;
    for _ in 0..steps {
        let (next, _, acc) = if r.gen_bool(0.1) { explore(s, &W, cfg, &mut r) } else { step(s, &W, cfg, &mut r) };
        s = next;
        if acc {
            accepted += 1;
            if let Err(e) = s.validate(cfg) {
                panic!("seed {seed}: {e}\n{}", s.key());
            }
        }
    }
    accepted
}

#[test]
fn random_chains_stay_valid() {
    let cfg = PriorConfig::default();
    let accepted: usize = (0..40).map(|seed| fuzz_validity(seed, 150, &cfg)).sum();
    assert!(accepted > 100, "{accepted}");
}
