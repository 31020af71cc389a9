//! Brute-force posterior and proposal probabilities on a tiny state space.
//!
//! States are enumerated as products of every proof the initializer can
//! return for each observation. Proposal probabilities come from counting
//! sites directly and enumerating the initializer's random decisions, so
//! nothing here goes through the sampler's own bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use abduce_core::abduction::{enumerate, Abducer};
use abduce_core::hol::{Formula, Node};
use abduce_core::mh::{self, MHState, ProposalWeights};
use abduce_core::prior::PriorConfig;
use abduce_core::proof::{axioms_of, Logic, Proof, Rule};
use abduce_core::theory::Theory;

pub struct Toy {
    pub observations: Vec<Formula>,
    pub logic: Logic,
    pub cfg: PriorConfig,
    /// key → (state, posterior probability)
    pub states: BTreeMap<String, (MHState, f64)>,
}

fn proofs_from(a: &Formula, base: &Theory, logic: Logic) -> Vec<(Proof, f64)> {
    let mut out: BTreeMap<String, (Proof, f64)> = BTreeMap::new();
    for (p, q) in enumerate(|s| {
        let mut t = base.clone();
        Abducer::new(&mut t, logic, s).prove(a)
    }) {
        if let Some(p) = p {
            out.entry(p.to_string()).or_insert((p, 0.0)).1 += q;
        }
    }
    out.into_values().collect()
}

impl Toy {
    pub fn new(obs: &[Formula], logic: Logic) -> Toy {
        let cfg = PriorConfig::default();
        let per: Vec<Vec<Proof>> =
            obs.iter().map(|a| proofs_from(a, &Theory::new(), logic).into_iter().map(|(p, _)| p).collect()).collect();
        let mut combos: Vec<Vec<Proof>> = vec![vec![]];
        for options in &per {
            combos = combos.iter().flat_map(|c| options.iter().map(move |p| [c.clone(), vec![p.clone()]].concat())).collect();
        }
        let mut states = BTreeMap::new();
        for proofs in combos {
            if let Some(s) = MHState::from_proofs(obs.to_vec(), proofs, logic, &cfg) {
                states.insert(s.key(), (s, 0.0));
            }
        }
        let max = states.values().map(|(s, _)| s.log_joint).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = states.values().map(|(s, _)| (s.log_joint - max).exp()).sum();
        for (s, p) in states.values_mut() {
            *p = (s.log_joint - max).exp() / z;
        }
        Toy { observations: obs.to_vec(), logic, cfg, states }
    }

    /// Sites counted by scanning: distinct grounded unary atoms plus the
    /// OrI/ExistsI (and classical ImpliesI) nodes.
    fn normalizer(s: &MHState) -> f64 {
        let atoms: BTreeSet<&Formula> = s
            .theory
            .axioms()
            .map(|(a, _)| a)
            .filter(|a| matches!(a.node(), Node::Atom(_, xs) if xs.len() == 1 && xs[0].as_const().is_some()))
            .collect();
        let nodes: usize = s
            .proofs
            .iter()
            .map(|p| {
                p.steps
                    .iter()
                    .filter(|st| matches!(st.rule, Rule::OrI | Rule::ExistsI) || (st.rule == Rule::ImpliesI && s.logic == Logic::Classical))
                    .count()
            })
            .sum();
        (atoms.len() + nodes) as f64
    }

    /// Probability that one proposal from `s` lands on `target` (≠ `s`).
    /// Only whole-proof resampling changes state in these spaces.
    pub fn q(&self, s: &MHState, target: &str) -> f64 {
        let n = Self::normalizer(s);
        let mut total = 0.0;
        for (i, p) in s.proofs.iter().enumerate() {
            if !matches!(p.root().rule, Rule::OrI | Rule::ExistsI | Rule::ImpliesI) {
                continue;
            }
            let others: Vec<Formula> = s.proofs.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, p)| axioms_of(p)).collect();
            let base = Theory::from_draws(others.iter());
            for (r, q) in proofs_from(&self.observations[i], &base, self.logic) {
                let mut proofs = s.proofs.clone();
                proofs[i] = r;
                if let Some(next) = MHState::from_proofs(self.observations.clone(), proofs, self.logic, &self.cfg) {
                    if next.key() == target {
                        total += q / n;
                    }
                }
            }
        }
        total
    }

    /// `log π(t)/π(s) + log q(t→s) − log q(s→t)`.
    pub fn log_ratio(&self, s: &MHState, t: &MHState) -> f64 {
        let ps = self.states[&s.key()].1;
        let pt = self.states[&t.key()].1;
        (pt / ps).ln() + self.q(t, &s.key()).ln() - self.q(s, &t.key()).ln()
    }

    /// Run the chain; returns the total-variation distance to the exact
    /// posterior and the largest ratio mismatch seen.
    pub fn check_chain(&self, start: MHState, steps: usize, seed: u64) -> (f64, f64) {
        use rand::SeedableRng;
        let w = ProposalWeights::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = start;
        let mut visits: BTreeMap<String, usize> = BTreeMap::new();
        let mut worst: f64 = 0.0;
        let mut ratios: BTreeMap<(String, String), f64> = BTreeMap::new();
        for _ in 0..steps {
            let out = mh::propose(&s, &w, &self.cfg, &mut rng, false).expect("sites");
            let ratio = mh::acceptance_log_ratio(&s, &out);
            if let Some(t) = out.new_state.as_ref().filter(|t| t.key() != s.key()) {
                let key = (s.key(), t.key());
                let want = *ratios.entry(key).or_insert_with(|| self.log_ratio(&s, t));
                worst = worst.max((ratio - want).abs());
            }
            let accept = ratio >= 0.0 || rand::Rng::gen::<f64>(&mut rng).ln() < ratio;
            if accept {
                if let Some(t) = out.new_state {
                    s = t;
                }
            }
            *visits.entry(s.key()).or_default() += 1;
        }
        let tv = self
            .states
            .iter()
            .map(|(k, (_, p))| (visits.get(k).copied().unwrap_or(0) as f64 / steps as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        (tv, worst)
    }
}
