//! Metropolis–Hastings over theories and proofs.

mod events;
mod moves;
mod schedule;

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hol::{Formula, Symbol};
use crate::prior::{log_prior_proof, log_prior_theory, PriorConfig};
use crate::proof::{axioms_of, check_proof, Logic, Proof};
use crate::theory::Theory;

pub use schedule::{read_logical_form, run_schedule, Sample, TraceLine, EXPLORATORY_STEPS, INIT_RETRIES, REINIT_EVERY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProposalWeights {
    pub merge_alpha: f64,
    pub split_beta: f64,
}

impl Default for ProposalWeights {
    fn default() -> Self {
        ProposalWeights { merge_alpha: 2.0, split_beta: 0.001 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    AtomToUniversal,
    UniversalToAtom,
    ResampleSetSize,
    ResampleProofNode,
    MergeEvents,
    SplitEvents,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::AtomToUniversal => "atom-to-universal",
            Kind::UniversalToAtom => "universal-to-atom",
            Kind::ResampleSetSize => "resample-set-size",
            Kind::ResampleProofNode => "resample-proof-node",
            Kind::MergeEvents => "merge-events",
            Kind::SplitEvents => "split-events",
        })
    }
}

#[derive(Debug, Error)]
pub enum MhError {
    #[error("could not initialize a proof of {0}")]
    Unreadable(Formula),
}

/// Theory, one proof per observation, and the cached log joint.
#[derive(Debug, Clone)]
pub struct MHState {
    pub theory: Theory,
    pub proofs: Vec<Proof>,
    pub observations: Vec<Formula>,
    pub logic: Logic,
    pub log_joint: f64,
}

/// `log p(T) + Σ log p(π_i | T)`.
pub fn log_joint(theory: &Theory, proofs: &[Proof], cfg: &PriorConfig) -> f64 {
    let lt = log_prior_theory(theory, cfg);
    if lt == f64::NEG_INFINITY {
        return lt;
    }
    lt + proofs.iter().map(|p| log_prior_proof(p, theory, cfg)).sum::<f64>()
}

impl MHState {
    pub fn new(logic: Logic) -> Self {
        MHState { theory: Theory::new(), proofs: Vec::new(), observations: Vec::new(), logic, log_joint: 0.0 }
    }

    /// Assemble a state whose theory is exactly the proofs' axiom leaves.
    /// `None` if that theory is inconsistent.
    pub fn from_proofs(observations: Vec<Formula>, mut proofs: Vec<Proof>, logic: Logic, cfg: &PriorConfig) -> Option<Self> {
        proofs.iter_mut().for_each(normalize_labels);
        let leaves: Vec<Formula> = proofs.iter().flat_map(axioms_of).collect();
        let theory = Theory::from_draws(leaves.iter());
        if !theory.is_consistent() {
            return None;
        }
        let lj = log_joint(&theory, &proofs, cfg);
        Some(MHState { theory, proofs, observations, logic, log_joint: lj })
    }

    pub fn recompute_log_joint(&self, cfg: &PriorConfig) -> f64 {
        log_joint(&self.theory, &self.proofs, cfg)
    }

    /// Constants mentioned anywhere in the proofs.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for p in &self.proofs {
            out.extend(proof_constants(p));
        }
        out
    }

    /// Check every state invariant; the error names the first violation.
    pub fn validate(&self, cfg: &PriorConfig) -> Result<(), String> {
        if self.proofs.len() != self.observations.len() {
            return Err("proof and observation counts differ".into());
        }
        for (i, (p, x)) in self.proofs.iter().zip(&self.observations).enumerate() {
            check_proof(p).map_err(|e| format!("proof {i}: {e}"))?;
            if p.conclusion() != x {
                return Err(format!("proof {i} concludes {} instead of {x}", p.conclusion()));
            }
        }
        if !self.theory.is_consistent() {
            return Err(format!("inconsistent theory: {:?}", self.theory.violation()));
        }
        let leaves: Vec<Formula> = self.proofs.iter().flat_map(axioms_of).collect();
        if Theory::from_draws(leaves.iter()) != self.theory {
            return Err("theory differs from the proofs' axioms".into());
        }
        let fresh = self.recompute_log_joint(cfg);
        if !(fresh == self.log_joint || (fresh - self.log_joint).abs() <= 1e-9 * (1.0 + fresh.abs())) {
            return Err(format!("cached log joint {} but recomputed {fresh}", self.log_joint));
        }
        Ok(())
    }

    /// Identity of a sample: theory dump plus serialized proofs.
    pub fn key(&self) -> String {
        let mut axioms: Vec<String> = self.theory.axioms().map(|(a, n)| format!("{n}\t{}", a.canonical())).collect();
        axioms.sort();
        let mut s = axioms.join("\n");
        for p in &self.proofs {
            s.push_str("\n--\n");
            s.push_str(&p.to_string());
        }
        s
    }
}

/// Renumber hypothesis labels in order of first appearance, so proofs that
/// differ only in labelling compare equal.
fn normalize_labels(p: &mut Proof) {
    let mut map = std::collections::BTreeMap::new();
    for s in &mut p.steps {
        for l in s.params.hyp.iter_mut().chain(s.params.discharges.iter_mut()) {
            let next = map.len() as u32;
            *l = *map.entry(*l).or_insert(next);
        }
    }
}

pub(crate) fn proof_constants(p: &Proof) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for s in &p.steps {
        out.extend(s.conclusion.free_constants());
        if let Some(t) = &s.params.term {
            out.extend(t.free_constants());
        }
    }
    out
}

/// Proposal sites of a state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sites {
    /// Grounded unary atomic axioms.
    pub atoms: Vec<Formula>,
    /// Universal axioms eliminable at a constant.
    pub universals: Vec<(Formula, Symbol)>,
    /// Set-size axioms.
    pub sizes: Vec<Formula>,
    /// Resampleable proof nodes as (proof, step).
    pub nodes: Vec<(usize, usize)>,
    /// Mergeable event pairs (kept, merged away).
    pub merges: Vec<(Symbol, Symbol)>,
    /// Splittable events.
    pub splits: Vec<Symbol>,
}

impl Sites {
    pub fn counts(&self) -> [usize; 6] {
        [self.atoms.len(), self.universals.len(), self.sizes.len(), self.nodes.len(), self.merges.len(), self.splits.len()]
    }

    /// `N = |A| + |U| + |C| + |P| + α|M| + β|S|`; exploratory steps use
    /// only `|C| + |P|`.
    pub fn normalizer(&self, w: &ProposalWeights, exploratory: bool) -> f64 {
        let [a, u, c, p, m, s] = self.counts().map(|x| x as f64);
        if exploratory {
            c + p
        } else {
            a + u + c + p + w.merge_alpha * m + w.split_beta * s
        }
    }
}

pub fn enumerate_sites(state: &MHState) -> Sites {
    let mut sites = moves::sites(state);
    let (merges, splits) = events::sites(state);
    sites.merges = merges;
    sites.splits = splits;
    sites
}

/// A proposed move with its exact forward and reverse probabilities.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: Kind,
    /// `None` when the move breaks validity; such proposals are rejected.
    pub new_state: Option<MHState>,
    pub log_forward: f64,
    pub log_reverse: f64,
}

/// Select a site with the table probabilities and build the move.
/// `None` when the state has no sites.
pub fn propose<R: Rng + ?Sized>(
    state: &MHState,
    w: &ProposalWeights,
    cfg: &PriorConfig,
    rng: &mut R,
    exploratory: bool,
) -> Option<Outcome> {
    let sites = enumerate_sites(state);
    let n = sites.normalizer(w, exploratory);
    if n <= 0.0 {
        return None;
    }
    let [a, u, c, p, m, _] = sites.counts().map(|x| x as f64);
    let mut x = rng.gen::<f64>() * n;
    let ctx = moves::Ctx { w, cfg, exploratory };
    if !exploratory {
        if x < a {
            return Some(moves::atom_to_universal(state, &sites.atoms[x as usize], n, &ctx, rng));
        }
        x -= a;
        if x < u {
            let (univ, c) = &sites.universals[x as usize];
            return Some(moves::universal_to_atom(state, univ, c, n, &ctx));
        }
        x -= u;
    }
    if x < c {
        return Some(moves::resample_size(state, &sites.sizes[(x as usize).min(sites.sizes.len() - 1)], n, &ctx, rng));
    }
    x -= c;
    if exploratory || x < p {
        let site = sites.nodes[(x as usize).min(sites.nodes.len() - 1)];
        return Some(moves::resample_node(state, site, n, &ctx, rng));
    }
    x -= p;
    if x < w.merge_alpha * m {
        let k = ((x / w.merge_alpha) as usize).min(sites.merges.len() - 1);
        return Some(events::merge(state, &sites.merges[k], n, &ctx));
    }
    x -= w.merge_alpha * m;
    let k = ((x / w.split_beta) as usize).min(sites.splits.len() - 1);
    Some(events::split(state, &sites.splits[k], n, &ctx, rng))
}

/// `log_joint(new) − log_joint(cur) + log_reverse − log_forward`.
pub fn acceptance_log_ratio(cur: &MHState, out: &Outcome) -> f64 {
    match &out.new_state {
        None => f64::NEG_INFINITY,
        Some(s) if s.log_joint == f64::NEG_INFINITY || out.log_reverse == f64::NEG_INFINITY => f64::NEG_INFINITY,
        Some(s) => s.log_joint - cur.log_joint + out.log_reverse - out.log_forward,
    }
}

/// One MH transition. Returns the next state, the proposal kind (if any)
/// and whether it was accepted.
pub fn step<R: Rng + ?Sized>(
    state: MHState,
    w: &ProposalWeights,
    cfg: &PriorConfig,
    rng: &mut R,
) -> (MHState, Option<Kind>, bool) {
    let Some(out) = propose(&state, w, cfg, rng, false) else {
        return (state, None, false);
    };
    let ratio = acceptance_log_ratio(&state, &out);
    let accept = ratio >= 0.0 || rng.gen::<f64>().ln() < ratio;
    match (accept, out.new_state) {
        (true, Some(next)) => (next, Some(out.kind), true),
        _ => (state, Some(out.kind), false),
    }
}

/// An exploratory step: only set-size and proof-node moves, accepted
/// whenever the result is valid.
pub fn explore<R: Rng + ?Sized>(state: MHState, w: &ProposalWeights, cfg: &PriorConfig, rng: &mut R) -> (MHState, Option<Kind>, bool) {
    let Some(out) = propose(&state, w, cfg, rng, true) else {
        return (state, None, false);
    };
    match out.new_state {
        Some(next) if next.log_joint > f64::NEG_INFINITY => (next, Some(out.kind), true),
        _ => (state, Some(out.kind), false),
    }
}

#[cfg(test)]
mod tests;
