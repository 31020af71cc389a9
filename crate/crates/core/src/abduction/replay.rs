//! Probability that [`init_proof`](super::init_proof) returns a given proof.
//!
//! At every choice point the search tries options in a random order and
//! keeps the first that succeeds. Whether an option succeeds is taken to be a
//! property of the option and the current theory (checked by running the
//! search on a scratch copy), so the chance of ending on option `k` is
//! the chance that `k` precedes every other feasible option.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{complementary, fresh_constant, known_terms, swap_weight, Abducer, FRESH_BUDGET};
use crate::hol::{Formula, Node, Symbol};
use crate::proof::{Logic, Proof, Rule};
use crate::theory::Theory;

struct Replay<'a> {
    theory: Theory,
    logic: Logic,
    proof: &'a Proof,
    fresh_left: usize,
    reserved: &'a BTreeSet<Symbol>,
}

const IMPOSSIBLE: f64 = f64::NEG_INFINITY;

impl Replay<'_> {
    fn feasible(&self, f: &Formula, disprove: bool, fresh_left: usize) -> bool {
        let mut scratch = self.theory.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ab = Abducer::new(&mut scratch, self.logic, &mut rng).reserve(self.reserved.iter().cloned()).with_budget(fresh_left);
        if disprove {
            ab.disprove(f).is_some()
        } else {
            ab.prove(f).is_some()
        }
    }

    /// `log P(k first among feasible)` for a uniform shuffle of `options`.
    fn uniform_pick(&self, options: &[Formula], k: usize, disprove: bool) -> f64 {
        let feasible = options.iter().enumerate().filter(|(i, o)| *i == k || self.feasible(o, disprove, self.fresh_left)).count();
        -(feasible as f64).ln()
    }

    fn prem(&self, idx: usize, k: usize) -> Option<usize> {
        self.proof.steps[idx].premises.get(k).copied()
    }

    fn axiom(&mut self, a: &Formula, idx: usize) -> f64 {
        let s = &self.proof.steps[idx];
        if s.rule != Rule::Ax || s.params.hyp.is_some() || s.conclusion != *a || self.theory.add_axiom(a).is_err() {
            return IMPOSSIBLE;
        }
        0.0
    }

    fn proof(&mut self, a: &Formula, idx: usize) -> f64 {
        let s = &self.proof.steps[idx];
        if s.conclusion != *a {
            return IMPOSSIBLE;
        }
        match a.node() {
            Node::And(cs) => {
                if s.rule != Rule::AndI || s.premises.len() != cs.len() {
                    return IMPOSSIBLE;
                }
                let prems = s.premises.clone();
                cs.iter().zip(prems).map(|(c, q)| self.proof(c, q)).sum()
            }
            Node::Or(ds) => {
                let (Rule::OrI, Some(k), Some(q)) = (s.rule, s.params.index, self.prem(idx, 0)) else { return IMPOSSIBLE };
                self.uniform_pick(ds, k, false) + self.proof(&ds[k], q)
            }
            Node::Not(b) => self.disproof(b, idx),
            Node::Implies(b1, b2) if self.logic == Logic::Classical => {
                let (Rule::ImpliesI, Some(q)) = (s.rule, self.prem(idx, 0)) else { return IMPOSSIBLE };
                if self.proof.steps[q].rule == Rule::FalseE {
                    // vacuous branch: FalseE ← NotE [hyp B1, ¬B1]
                    let Some(r) = self.prem(q, 0).and_then(|ne| self.prem(ne, 1)) else { return IMPOSSIBLE };
                    let other = self.feasible(b2, false, self.fresh_left);
                    let pick = if other { -std::f64::consts::LN_2 } else { 0.0 };
                    pick + self.disproof(b1, r)
                } else {
                    let other = self.feasible(b1, true, self.fresh_left);
                    let pick = if other { -std::f64::consts::LN_2 } else { 0.0 };
                    pick + self.proof(b2, q)
                }
            }
            Node::Exists(body) => {
                let (Rule::ExistsI, Some(c), Some(q)) = (s.rule, s.params.term.clone(), self.prem(idx, 0)) else {
                    return IMPOSSIBLE;
                };
                let mut cands = known_terms(&self.theory);
                let fresh_idx = (self.fresh_left > 0).then_some(cands.len());
                let k = match cands.iter().position(|x| *x == c) {
                    Some(k) => {
                        if fresh_idx.is_some() {
                            // any unused name stands for the fresh option
                            cands.push(Formula::constant(fresh_constant(&self.theory, self.reserved, body)));
                        }
                        k
                    }
                    None if fresh_idx.is_some() && c.as_const().is_some() => {
                        cands.push(c.clone());
                        cands.len() - 1
                    }
                    None => return IMPOSSIBLE,
                };
                let w: Vec<f64> = cands.iter().map(|x| swap_weight(body, x, &self.theory)).collect();
                let total: f64 = w.iter().sum();
                let budget = |i: usize| if Some(i) == fresh_idx { self.fresh_left - 1 } else { self.fresh_left };
                let feasible: Vec<bool> =
                    (0..cands.len()).map(|i| i == k || self.feasible(&body.substitute(&cands[i]), false, budget(i))).collect();
                let n_feasible = feasible.iter().filter(|x| **x).count() as f64;
                let via_failed_front: f64 = (0..cands.len()).filter(|&j| !feasible[j]).map(|j| w[j] / total).sum::<f64>() / n_feasible;
                let pick = (w[k] / total + via_failed_front).ln();
                if Some(k) == fresh_idx {
                    self.fresh_left -= 1;
                }
                pick + self.proof(&body.substitute(&c), q)
            }
            Node::Implies(..) | Node::ForAll(_) | Node::Equality(..) | Node::Atom(..) => self.axiom(a, idx),
            _ => IMPOSSIBLE,
        }
    }

    fn disproof(&mut self, a: &Formula, idx: usize) -> f64 {
        let s = &self.proof.steps[idx];
        let neg = Formula::not(a.clone());
        if s.conclusion != neg {
            return IMPOSSIBLE;
        }
        // all structured refutations are NotI over a NotE/OrE/hypothesis
        let bot = if s.rule == Rule::NotI { self.prem(idx, 0) } else { None };
        match a.node() {
            Node::Not(b) => {
                let Some(q) = bot.and_then(|x| self.prem(x, 0)) else { return IMPOSSIBLE };
                self.proof(b, q)
            }
            Node::And(cs) => {
                let Some(ne) = bot else { return IMPOSSIBLE };
                if complementary(cs).is_some() {
                    return 0.0;
                }
                let (Some(ae), Some(r)) = (self.prem(ne, 0), self.prem(ne, 1)) else { return IMPOSSIBLE };
                let Some(i) = self.proof.steps[ae].params.index.filter(|i| *i < cs.len()) else { return IMPOSSIBLE };
                self.uniform_pick(cs, i, true) + self.disproof(&cs[i], r)
            }
            Node::Or(ds) => {
                let Some(oe) = bot else { return IMPOSSIBLE };
                let branches = self.proof.steps[oe].premises.clone();
                if branches.len() != ds.len() + 1 {
                    return IMPOSSIBLE;
                }
                let mut lp = 0.0;
                for (d, &b) in ds.iter().zip(&branches[1..]) {
                    let Some(r) = self.prem(b, 1) else { return IMPOSSIBLE };
                    lp += self.disproof(d, r);
                }
                lp
            }
            Node::Implies(b1, b2) if self.logic == Logic::Classical => {
                let Some(ne) = bot else { return IMPOSSIBLE };
                let (Some(ie), Some(n2)) = (self.prem(ne, 0), self.prem(ne, 1)) else { return IMPOSSIBLE };
                let Some(p1) = self.prem(ie, 0) else { return IMPOSSIBLE };
                self.proof(b1, p1) + self.disproof(b2, n2)
            }
            Node::False => 0.0,
            Node::Implies(..) | Node::ForAll(_) | Node::Exists(_) | Node::Equality(..) | Node::Atom(..) => self.axiom(&neg, idx),
            _ => IMPOSSIBLE,
        }
    }
}

/// `log P(init_proof(a) = p)` starting from theory `base`, where `a` is
/// `p`'s conclusion (or, with `disproof`, `p` concludes `¬a` and the call is
/// `init_disproof(a)`). `reserved` must match the search's reserved names.
pub fn log_replay(p: &Proof, a: &Formula, disproof: bool, base: &Theory, reserved: &BTreeSet<Symbol>) -> f64 {
    let mut r = Replay { theory: base.clone(), logic: p.logic, proof: p, fresh_left: FRESH_BUDGET, reserved };
    let root = p.steps.len() - 1;
    if disproof {
        r.disproof(a, root)
    } else {
        r.proof(a, root)
    }
}
