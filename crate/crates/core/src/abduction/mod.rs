//! Abductive proof initialization: find *some* proof of a formula, minting
//! axioms as needed. Every minted axiom is checked against the theory's
//! constraints; a failed call leaves the theory as it found it.

mod choice;
mod replay;

use std::collections::BTreeSet;


use crate::hol::{Formula, Node, Symbol};
use crate::proof::{Logic, Params, Proof, Rule};
use crate::theory::Theory;

pub use choice::{enumerate, Chooser, Scripted};
pub use replay::log_replay;

/// New constants one top-level call may introduce.
pub const FRESH_BUDGET: usize = 8;
/// Formulas nested deeper than this are not attempted.
pub const MAX_DEPTH: usize = 64;

/// Search state for one call of [`init_proof`] / [`init_disproof`].
pub struct Abducer<'a, R: Chooser + ?Sized> {
    pub theory: &'a mut Theory,
    pub logic: Logic,
    rng: &'a mut R,
    fresh_left: usize,
    next_label: u32,
    reserved: BTreeSet<Symbol>,
}

impl<'a, R: Chooser + ?Sized> Abducer<'a, R> {
    pub fn new(theory: &'a mut Theory, logic: Logic, rng: &'a mut R) -> Self {
        Abducer { theory, logic, rng, fresh_left: FRESH_BUDGET, next_label: 0, reserved: BTreeSet::new() }
    }

    /// Constants that must not be chosen as fresh names (e.g. those used
    /// elsewhere in a proof state).
    pub fn reserve(mut self, names: impl IntoIterator<Item = Symbol>) -> Self {
        self.reserved.extend(names);
        self
    }

    /// First hypothesis label to hand out.
    pub fn labels_from(mut self, first: u32) -> Self {
        self.next_label = first;
        self
    }

    pub(crate) fn with_budget(mut self, fresh_left: usize) -> Self {
        self.fresh_left = fresh_left;
        self
    }

    /// Proof of `a`, or `None` with the theory untouched.
    pub fn prove(&mut self, a: &Formula) -> Option<Proof> {
        self.attempt(|s| s.proof(a, 0))
    }

    /// Proof of `¬a`, or `None` with the theory untouched.
    pub fn disprove(&mut self, a: &Formula) -> Option<Proof> {
        self.attempt(|s| s.disproof(a, 0))
    }

    fn attempt(&mut self, f: impl FnOnce(&mut Self) -> Option<Proof>) -> Option<Proof> {
        let saved = self.theory.clone();
        let fresh = self.fresh_left;
        let out = f(self);
        if out.is_none() {
            *self.theory = saved;
            self.fresh_left = fresh;
        }
        out
    }

    fn label(&mut self) -> u32 {
        self.next_label += 1;
        self.next_label - 1
    }

    fn axiom(&mut self, a: &Formula) -> Option<Proof> {
        self.theory.add_axiom(a).ok()?;
        Some(Proof::axiom(a.clone(), self.logic))
    }

    fn hyp(&self, a: &Formula, h: u32) -> Proof {
        Proof::hypothesis(a.clone(), h, self.logic)
    }

    fn join(&self, rule: Rule, params: Params, c: Formula, parts: Vec<Proof>) -> Proof {
        Proof::join(rule, params, c, parts, self.logic)
    }

    fn proof(&mut self, a: &Formula, depth: usize) -> Option<Proof> {
        if depth > MAX_DEPTH {
            return None;
        }
        let d = depth + 1;
        match a.node() {
            Node::And(cs) => {
                let parts = cs.iter().map(|c| self.proof(c, d)).collect::<Option<Vec<_>>>()?;
                Some(self.join(Rule::AndI, Params::default(), a.clone(), parts))
            }
            Node::Or(ds) => {
                let order = self.rng.permutation(ds.len());
                for i in order {
                    if let Some(p) = self.attempt(|s| s.proof(&ds[i], d)) {
                        return Some(self.join(Rule::OrI, Params::index(i), a.clone(), vec![p]));
                    }
                }
                None
            }
            Node::Not(b) => self.disproof(b, d),
            Node::Implies(b1, b2) if self.logic == Logic::Classical => {
                let first_disprove = self.rng.permutation(2)[0] == 0;
                for disprove in [first_disprove, !first_disprove] {
                    let out = if disprove {
                        self.attempt(|s| s.vacuous_implication(a, b1, b2, d))
                    } else {
                        self.attempt(|s| s.proof(b2, d))
                            .map(|p| self.join(Rule::ImpliesI, Params::default(), a.clone(), vec![p]))
                    };
                    if out.is_some() {
                        return out;
                    }
                }
                None
            }
            Node::Exists(body) => {
                for c in self.candidates(body) {
                    let fresh = !self.known(&c);
                    if let Some(p) = self.attempt(|s| {
                        if fresh {
                            s.fresh_left -= 1;
                        }
                        s.proof(&body.substitute(&c), d)
                    }) {
                        return Some(self.join(Rule::ExistsI, Params::term(c), a.clone(), vec![p]));
                    }
                }
                None
            }
            Node::Implies(..) | Node::ForAll(_) | Node::Equality(..) | Node::Atom(..) => self.axiom(a),
            _ => None,
        }
    }

    /// `B1 → B2` from a disproof of `B1`: assume `B1`, clash, ex falso.
    fn vacuous_implication(&mut self, a: &Formula, b1: &Formula, b2: &Formula, d: usize) -> Option<Proof> {
        let not_b1 = self.disproof(b1, d)?;
        let h = self.label();
        let bot = self.join(Rule::NotE, Params::default(), Formula::falsum(), vec![self.hyp(b1, h), not_b1]);
        let b2p = self.join(Rule::FalseE, Params::default(), b2.clone(), vec![bot]);
        Some(self.join(Rule::ImpliesI, Params::discharging(vec![h]), a.clone(), vec![b2p]))
    }

    fn disproof(&mut self, a: &Formula, depth: usize) -> Option<Proof> {
        if depth > MAX_DEPTH {
            return None;
        }
        let d = depth + 1;
        let neg = Formula::not(a.clone());
        match a.node() {
            Node::Not(b) => {
                // ¬¬B from B
                let pb = self.proof(b, d)?;
                let h = self.label();
                let bot = self.join(Rule::NotE, Params::default(), Formula::falsum(), vec![pb, self.hyp(a, h)]);
                Some(self.join(Rule::NotI, Params::discharging(vec![h]), neg, vec![bot]))
            }
            Node::And(cs) => {
                if let Some((i, j)) = complementary(cs) {
                    let h = self.label();
                    let l = self.join(Rule::AndE, Params::index(i), cs[i].clone(), vec![self.hyp(a, h)]);
                    let r = self.join(Rule::AndE, Params::index(j), cs[j].clone(), vec![self.hyp(a, h)]);
                    let bot = self.join(Rule::NotE, Params::default(), Formula::falsum(), vec![l, r]);
                    return Some(self.join(Rule::NotI, Params::discharging(vec![h]), neg, vec![bot]));
                }
                let order = self.rng.permutation(cs.len());
                for i in order {
                    if let Some(p) = self.attempt(|s| s.disproof(&cs[i], d)) {
                        let h = self.label();
                        let ci = self.join(Rule::AndE, Params::index(i), cs[i].clone(), vec![self.hyp(a, h)]);
                        let bot = self.join(Rule::NotE, Params::default(), Formula::falsum(), vec![ci, p]);
                        return Some(self.join(Rule::NotI, Params::discharging(vec![h]), neg, vec![bot]));
                    }
                }
                None
            }
            Node::Or(ds) => {
                let refutations = ds.iter().map(|x| self.disproof(x, d)).collect::<Option<Vec<_>>>()?;
                let h = self.label();
                let mut parts = vec![self.hyp(a, h)];
                let mut labels = Vec::new();
                for (x, r) in ds.iter().zip(refutations) {
                    let hx = self.label();
                    labels.push(hx);
                    parts.push(self.join(Rule::NotE, Params::default(), Formula::falsum(), vec![self.hyp(x, hx), r]));
                }
                let bot = self.join(Rule::OrE, Params::discharging(labels), Formula::falsum(), parts);
                Some(self.join(Rule::NotI, Params::discharging(vec![h]), neg, vec![bot]))
            }
            Node::Implies(b1, b2) if self.logic == Logic::Classical => {
                let p1 = self.proof(b1, d)?;
                let n2 = self.disproof(b2, d)?;
                let h = self.label();
                let b2p = self.join(Rule::ImpliesE, Params::default(), b2.clone(), vec![p1, self.hyp(a, h)]);
                let bot = self.join(Rule::NotE, Params::default(), Formula::falsum(), vec![b2p, n2]);
                Some(self.join(Rule::NotI, Params::discharging(vec![h]), neg, vec![bot]))
            }
            Node::False => {
                let h = self.label();
                let hp = self.hyp(a, h);
                Some(self.join(Rule::NotI, Params::discharging(vec![h]), neg, vec![hp]))
            }
            Node::Implies(..) | Node::ForAll(_) | Node::Exists(_) | Node::Equality(..) | Node::Atom(..) => self.axiom(&neg),
            _ => None,
        }
    }

    fn known(&self, c: &Formula) -> bool {
        match c.as_const() {
            Some(s) => self.theory.constants().contains(s),
            None => true,
        }
    }

    /// Known constants, numbers and strings, plus a fresh constant while the
    /// budget lasts; shuffled, then one element swapped to the front.
    fn candidates(&mut self, body: &Formula) -> Vec<Formula> {
        let mut cs = known_terms(self.theory);
        if self.fresh_left > 0 {
            cs.push(Formula::constant(self.fresh_name(body)));
        }
        let order = self.rng.permutation(cs.len());
        let mut cs: Vec<Formula> = order.into_iter().map(|i| cs[i].clone()).collect();
        let w: Vec<f64> = cs.iter().map(|c| swap_weight(body, c, self.theory)).collect();
        let j = self.rng.pick(&w);
        cs.swap(0, j);
        cs
    }

    fn fresh_name(&self, body: &Formula) -> Symbol {
        fresh_constant(self.theory, &self.reserved, body)
    }
}

/// Smallest `c<k>` unused by the theory, the reserved set and `body`.
pub(crate) fn fresh_constant(t: &Theory, reserved: &BTreeSet<Symbol>, body: &Formula) -> Symbol {
    let mentioned = body.free_constants();
    (1u64..)
        .map(|k| Symbol::new(&format!("c{k}")))
        .find(|s| !t.constants().contains(s) && !reserved.contains(s) && !mentioned.contains(s))
        .expect("unbounded")
}

/// Constants, numbers and strings of the theory, in a fixed order.
pub(crate) fn known_terms(t: &Theory) -> Vec<Formula> {
    let mut out: Vec<Formula> = t.constants().iter().map(|c| Formula::constant(c.clone())).collect();
    out.extend(t.literal_values());
    out
}

fn complementary(cs: &[Formula]) -> Option<(usize, usize)> {
    for (j, c) in cs.iter().enumerate() {
        if let Some(b) = c.as_not() {
            if let Some(i) = cs.iter().position(|x| x == b) {
                return Some((i, j));
            }
        }
    }
    None
}

/// `exp(n − 2m)`: `n` counts provable atoms of `body[c]` that mention `c`;
/// `m` counts, for every unary atom `t(c)` there, axioms `t'(c)` with
/// `t' ≠ t`.
pub fn swap_weight(body: &Formula, c: &Formula, t: &Theory) -> f64 {
    let inst = body.substitute(c);
    let (mut n, mut m) = (0i64, 0i64);
    let unary: Vec<Symbol> = t
        .axioms()
        .filter_map(|(a, _)| match a.node() {
            Node::Atom(p, args) if args.len() == 1 && args[0] == *c => Some(p.clone()),
            _ => None,
        })
        .collect();
    inst.visit(&mut |g| {
        let mentions = match g.node() {
            Node::Atom(_, args) => args.contains(c),
            Node::Equality(l, r) => l == c || r == c || matches!(l.node(), Node::Apply(_, xs) if xs.contains(c)),
            _ => false,
        };
        if !mentions || !g.is_closed() {
            return;
        }
        if t.provable(g) {
            n += 1;
        }
        if let Node::Atom(p, args) = g.node() {
            if args.len() == 1 {
                m += unary.iter().filter(|q| *q != p).count() as i64;
            }
        }
    });
    ((n - 2 * m) as f64).exp()
}

/// [`Abducer::prove`] with a fresh search state.
pub fn init_proof<R: Chooser + ?Sized>(a: &Formula, theory: &mut Theory, logic: Logic, rng: &mut R) -> Option<Proof> {
    Abducer::new(theory, logic, rng).prove(a)
}

/// [`Abducer::disprove`] with a fresh search state.
pub fn init_disproof<R: Chooser + ?Sized>(a: &Formula, theory: &mut Theory, logic: Logic, rng: &mut R) -> Option<Proof> {
    Abducer::new(theory, logic, rng).disprove(a)
}
