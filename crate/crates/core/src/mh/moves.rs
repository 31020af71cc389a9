//! Rows 1–4: atom ⇄ universal, set-size resampling and proof-node resampling.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;

use super::{proof_constants, Kind, MHState, Outcome, ProposalWeights, Sites};
use crate::abduction::{log_replay, Abducer};
use crate::hol::{Formula, Node, Symbol};
use crate::prior::PriorConfig;
use crate::proof::{axioms_of, check_proof, Logic, Params, Proof, ProofStep, Rule};
use crate::theory::{closure::is_builtin, Theory};

pub(crate) struct Ctx<'a> {
    pub w: &'a ProposalWeights,
    pub cfg: &'a PriorConfig,
    pub exploratory: bool,
}

impl Ctx<'_> {
    /// `N` of a proposed state, as seen by the reverse move.
    pub(crate) fn normalizer(&self, s: &MHState) -> f64 {
        super::enumerate_sites(s).normalizer(self.w, self.exploratory)
    }
}

pub(crate) fn rejected(kind: Kind, log_forward: f64) -> Outcome {
    Outcome { kind, new_state: None, log_forward, log_reverse: f64::NEG_INFINITY }
}

/// Build the proposed state; `None` if it is invalid.
pub(crate) fn assemble(state: &MHState, proofs: Vec<Proof>, cfg: &PriorConfig) -> Option<MHState> {
    for (p, x) in proofs.iter().zip(&state.observations) {
        if p.conclusion() != x || check_proof(p).is_err() {
            return None;
        }
    }
    MHState::from_proofs(state.observations.clone(), proofs, state.logic, cfg)
}

/// `t(c)` with `t` a user predicate and `c` a constant.
fn unary_atom(f: &Formula) -> Option<(&Symbol, &Symbol)> {
    match f.node() {
        Node::Atom(p, args) if args.len() == 1 && !is_builtin(p) => Some((p, args[0].as_const()?)),
        _ => None,
    }
}

fn size_axiom(f: &Formula) -> Option<(&Formula, &BigInt)> {
    match f.node() {
        Node::Equality(l, r) => match (l.node(), r.node()) {
            (Node::Apply(g, args), Node::Number(n)) if g.name() == "size" && args.len() == 1 => Some((&args[0], n)),
            _ => None,
        },
        _ => None,
    }
}

/// Other unary atom axioms of `c`, excluding predicate `t`.
fn others(t: &Theory, c: &Symbol, pred: &Symbol) -> Vec<Formula> {
    t.axioms()
        .filter_map(|(a, _)| unary_atom(a).filter(|(p, x)| *x == c && *p != pred).map(|_| a.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// `log P(S)` when each of `o` elements is kept with probability ½,
/// conditioned on a non-empty pick.
fn log_subset(o: usize) -> f64 {
    let half = 0.5f64.powi(o as i32);
    half.ln() - (1.0 - half).ln()
}

/// Antecedent atoms and consequent predicate of `∀x(A(x) → t(x))` in the
/// shape row 1 produces.
fn universal_shape(u: &Formula) -> Option<(Vec<Symbol>, Symbol)> {
    let Node::ForAll(body) = u.node() else { return None };
    let Node::Implies(a, b) = body.node() else { return None };
    let x = Formula::var(0);
    let unary_of_x = |f: &Formula| match f.node() {
        Node::Atom(p, args) if args.len() == 1 && args[0] == x && !is_builtin(p) => Some(p.clone()),
        _ => None,
    };
    let t = unary_of_x(b)?;
    let ants = match a.node() {
        Node::And(cs) => cs.iter().map(unary_of_x).collect::<Option<Vec<_>>>()?,
        _ => vec![unary_of_x(a)?],
    };
    let distinct: BTreeSet<&Symbol> = ants.iter().collect();
    if distinct.len() != ants.len() || distinct.contains(&t) || *u != u.canonical() {
        return None;
    }
    Some((ants, t))
}

fn parents(p: &Proof) -> Vec<Option<usize>> {
    let mut out = vec![None; p.len()];
    for (i, s) in p.steps.iter().enumerate() {
        for &q in &s.premises {
            out[q] = Some(i);
        }
    }
    out
}

fn is_axiom_leaf(s: &ProofStep, f: &Formula) -> bool {
    s.rule == Rule::Ax && s.params.hyp.is_none() && s.conclusion == *f
}

/// ImpliesE steps that instantiate `u` at `c` in the row-1 shape, or `None`
/// if some use of `u` at `c` has another shape.
fn instances(p: &Proof, u: &Formula, c: &Formula) -> Option<Vec<usize>> {
    let par = parents(p);
    let mut out = Vec::new();
    for (i, s) in p.steps.iter().enumerate() {
        if s.rule != Rule::ForAllE || s.params.term.as_ref() != Some(c) || !is_axiom_leaf(&p.steps[s.premises[0]], u) {
            continue;
        }
        let ie = par[i]?;
        let e = &p.steps[ie];
        if e.rule != Rule::ImpliesE || e.premises.get(1) != Some(&i) {
            return None;
        }
        let ant = &p.steps[e.premises[0]];
        let leaves_ok = match ant.rule {
            Rule::Ax => ant.params.hyp.is_none(),
            Rule::AndI => ant.premises.iter().all(|&q| p.steps[q].rule == Rule::Ax && p.steps[q].params.hyp.is_none()),
            _ => false,
        };
        if !leaves_ok {
            return None;
        }
        out.push(ie);
    }
    Some(out)
}

/// Rebuild `p` bottom-up, substituting whole subtrees where `f` says so.
pub(crate) fn rebuild(p: &Proof, f: &mut dyn FnMut(usize, &ProofStep) -> Option<Proof>) -> Proof {
    fn go(p: &Proof, at: usize, f: &mut dyn FnMut(usize, &ProofStep) -> Option<Proof>) -> Proof {
        let s = &p.steps[at];
        if let Some(r) = f(at, s) {
            return r;
        }
        let parts = s.premises.iter().map(|&q| go(p, q, f)).collect();
        Proof::join(s.rule, s.params.clone(), s.conclusion.clone(), parts, p.logic)
    }
    go(p, p.len() - 1, f)
}

/// `t(c)` derived through `u`: ImpliesE[A(c), ForAllE_c(u)].
fn instance_proof(u: &Formula, c: &Formula, logic: Logic) -> Proof {
    let Node::ForAll(body) = u.node() else { unreachable!("checked shape") };
    let inst = body.substitute(c);
    let Node::Implies(a, b) = inst.node() else { unreachable!("checked shape") };
    let ant = match a.node() {
        Node::And(cs) => Proof::join(
            Rule::AndI,
            Params::default(),
            a.clone(),
            cs.iter().map(|x| Proof::axiom(x.clone(), logic)).collect(),
            logic,
        ),
        _ => Proof::axiom(a.clone(), logic),
    };
    let elim = Proof::join(Rule::ForAllE, Params::term(c.clone()), inst.clone(), vec![Proof::axiom(u.clone(), logic)], logic);
    Proof::join(Rule::ImpliesE, Params::default(), b.clone(), vec![ant, elim], logic)
}

pub(crate) fn sites(state: &MHState) -> Sites {
    let t = &state.theory;
    let mut sites = Sites::default();
    for (a, _) in t.axioms() {
        if unary_atom(a).is_some() {
            sites.atoms.push(a.clone());
        }
        if size_axiom(a).is_some() {
            sites.sizes.push(a.clone());
        }
        if universal_shape(a).is_some() {
            for c in t.constants() {
                if universal_eligible(state, a, c) {
                    sites.universals.push((a.clone(), c.clone()));
                }
            }
        }
    }
    for (i, p) in state.proofs.iter().enumerate() {
        for (j, s) in p.steps.iter().enumerate() {
            if resampleable(s, state.logic) && !p.has_open_hypotheses(j) {
                sites.nodes.push((i, j));
            }
        }
    }
    sites
}

fn resampleable(s: &ProofStep, logic: Logic) -> bool {
    match s.rule {
        Rule::OrI | Rule::ExistsI => true,
        Rule::ImpliesI => logic == Logic::Classical,
        Rule::NotI => logic == Logic::Classical && conjunction_disproof(&s.conclusion).is_some(),
        _ => false,
    }
}

/// `A` when `f = ¬A` with `A` a conjunction without a complementary pair.
fn conjunction_disproof(f: &Formula) -> Option<&Formula> {
    let a = f.as_not()?;
    let Node::And(cs) = a.node() else { return None };
    let clash = cs.iter().any(|c| c.as_not().is_some_and(|b| cs.contains(b)));
    (!clash).then_some(a)
}

/// Row 2 applies to `(u, c)`.
fn universal_eligible(state: &MHState, u: &Formula, c: &Symbol) -> bool {
    let Some((ants, t)) = universal_shape(u) else { return false };
    let cf = Formula::constant(c.clone());
    if state.theory.contains(&Formula::atom(t, vec![cf.clone()])) {
        return false;
    }
    let mut n = 0;
    for p in &state.proofs {
        match instances(p, u, &cf) {
            Some(v) => n += v.len(),
            None => return false,
        }
    }
    n > 0 && ants.iter().all(|s| state.theory.count(&Formula::atom(s.clone(), vec![cf.clone()])) > n)
}

/// Row 1.
pub(crate) fn atom_to_universal<R: Rng + ?Sized>(state: &MHState, atom: &Formula, n: f64, ctx: &Ctx, rng: &mut R) -> Outcome {
    let kind = Kind::AtomToUniversal;
    let (t, c) = unary_atom(atom).expect("atom site");
    let o = others(&state.theory, c, t);
    let sel = -n.ln();
    if o.is_empty() {
        return rejected(kind, sel);
    }
    let chosen = loop {
        let s: Vec<&Formula> = o.iter().filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            break s;
        }
    };
    let log_forward = sel + log_subset(o.len());
    let x = Formula::var(0);
    let ants: Vec<Formula> = chosen.iter().map(|a| Formula::atom(unary_atom(a).unwrap().0.clone(), vec![x.clone()])).collect();
    let u = Formula::forall(Formula::implies(Formula::and(ants), Formula::atom(t.clone(), vec![x]))).canonical();
    let cf = Formula::constant(c.clone());
    if state.proofs.iter().any(|p| instances(p, &u, &cf).is_none_or(|v| !v.is_empty())) {
        return rejected(kind, log_forward);
    }
    let proofs = state
        .proofs
        .iter()
        .map(|p| rebuild(p, &mut |_, s| is_axiom_leaf(s, atom).then(|| instance_proof(&u, &cf, p.logic))))
        .collect();
    let Some(next) = assemble(state, proofs, ctx.cfg) else { return rejected(kind, log_forward) };
    let log_reverse = if universal_eligible(&next, &u, c) { -ctx.normalizer(&next).ln() } else { f64::NEG_INFINITY };
    Outcome { kind, new_state: Some(next), log_forward, log_reverse }
}

/// Row 2.
pub(crate) fn universal_to_atom(state: &MHState, u: &Formula, c: &Symbol, n: f64, ctx: &Ctx) -> Outcome {
    let kind = Kind::UniversalToAtom;
    let log_forward = -n.ln();
    let (_, t) = universal_shape(u).expect("universal site");
    let cf = Formula::constant(c.clone());
    let atom = Formula::atom(t.clone(), vec![cf.clone()]);
    let proofs = state
        .proofs
        .iter()
        .map(|p| {
            let hits: BTreeSet<usize> = instances(p, u, &cf).unwrap_or_default().into_iter().collect();
            rebuild(p, &mut |i, _| hits.contains(&i).then(|| Proof::axiom(atom.clone(), p.logic)))
        })
        .collect();
    let Some(next) = assemble(state, proofs, ctx.cfg) else { return rejected(kind, log_forward) };
    let o = others(&next.theory, c, &t);
    let log_reverse = -ctx.normalizer(&next).ln() + log_subset(o.len());
    Outcome { kind, new_state: Some(next), log_forward, log_reverse }
}

/// Geometric(p) restricted to `[lo, hi]` (`hi = None`: unbounded).
pub(crate) struct TruncatedGeometric {
    lo: u64,
    ln_q: f64,
    /// `ln(1 − (1−p)^L)`
    ln_mass: f64,
    ln_p: f64,
    hi: Option<u64>,
}

impl TruncatedGeometric {
    pub(crate) fn new(p: f64, lo: u64, hi: Option<u64>) -> Option<Self> {
        if hi.is_some_and(|h| h < lo) {
            return None;
        }
        let ln_q = (-p).ln_1p();
        let ln_mass = match hi {
            Some(h) => (-((h - lo + 1) as f64 * ln_q).exp()).ln_1p(),
            None => 0.0,
        };
        Some(TruncatedGeometric { lo, ln_q, ln_mass, ln_p: p.ln(), hi })
    }

    pub(crate) fn log_prob(&self, n: u64) -> f64 {
        if n < self.lo || self.hi.is_some_and(|h| n > h) {
            return f64::NEG_INFINITY;
        }
        self.ln_p + (n - self.lo) as f64 * self.ln_q - self.ln_mass
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let k = ((-u * self.ln_mass.exp()).ln_1p() / self.ln_q).floor();
        let n = self.lo.saturating_add(if k.is_finite() && k >= 0.0 { k as u64 } else { 0 });
        self.hi.map_or(n, |h| n.min(h))
    }
}

/// Row 3.
pub(crate) fn resample_size<R: Rng + ?Sized>(state: &MHState, axiom: &Formula, n: f64, ctx: &Ctx, rng: &mut R) -> Outcome {
    let kind = Kind::ResampleSetSize;
    let sel = -n.ln();
    let (set, old) = size_axiom(axiom).expect("size site");
    let mut rest = state.theory.clone();
    while rest.contains(axiom) {
        rest.remove_axiom(axiom).expect("present");
    }
    let (lo, hi) = rest.set_size_bounds(set);
    let Some(dist) = TruncatedGeometric::new(ctx.cfg.set_size_geometric_p, lo, hi) else { return rejected(kind, sel) };
    let new = dist.sample(rng);
    let log_forward = sel + dist.log_prob(new);
    let replacement = Formula::equality(Formula::apply("size", vec![set.clone()]), Formula::number(new));
    let proofs = state.proofs.iter().map(|p| resize(p, axiom, &replacement, old, new)).collect();
    let Some(next) = assemble(state, proofs, ctx.cfg) else { return rejected(kind, log_forward) };
    let back = old.to_u64().map_or(f64::NEG_INFINITY, |o| dist.log_prob(o));
    let log_reverse = -ctx.normalizer(&next).ln() + back;
    Outcome { kind, new_state: Some(next), log_forward, log_reverse }
}

/// Swap the size axiom and carry the change through AndI and numeric
/// ExistsI steps; anything else is left for the checker to reject.
fn resize(p: &Proof, old_ax: &Formula, new_ax: &Formula, old: &BigInt, new: u64) -> Proof {
    let mut q = p.clone();
    let old_term = Formula::number(old.clone());
    let new_term = Formula::number(new);
    for i in 0..q.steps.len() {
        let prem: Vec<Formula> = q.steps[i].premises.iter().map(|&j| q.steps[j].conclusion.clone()).collect();
        let changed = q.steps[i].premises.iter().any(|&j| q.steps[j].conclusion != p.steps[j].conclusion);
        let s = &mut q.steps[i];
        if is_axiom_leaf(s, old_ax) {
            s.conclusion = new_ax.clone();
        } else if changed && s.rule == Rule::AndI {
            s.conclusion = Formula::and(prem);
        } else if changed && s.rule == Rule::ExistsI && s.params.term.as_ref() == Some(&old_term) {
            if let Node::Exists(body) = s.conclusion.node() {
                if body.substitute(&new_term) == prem[0] {
                    s.params.term = Some(new_term.clone());
                }
            }
        }
    }
    q
}

/// Row 4.
pub(crate) fn resample_node<R: Rng + ?Sized>(state: &MHState, (pi, idx): (usize, usize), n: f64, ctx: &Ctx, rng: &mut R) -> Outcome {
    let kind = Kind::ResampleProofNode;
    let sel = -n.ln();
    let p = &state.proofs[pi];
    let old = p.subproof(idx);
    let (target, disprove) = match conjunction_disproof(old.conclusion()) {
        Some(a) if p.steps[idx].rule == Rule::NotI => (a.clone(), true),
        _ => (old.conclusion().clone(), false),
    };
    let (base, reserved) = outside(state, pi, idx);
    let mut scratch = base.clone();
    let fresh = {
        let mut ab = Abducer::new(&mut scratch, state.logic, rng).reserve(reserved.iter().cloned());
        if disprove {
            ab.disprove(&target)
        } else {
            ab.prove(&target)
        }
    };
    let Some(fresh) = fresh else { return rejected(kind, sel) };
    let log_forward = sel + log_replay(&fresh, &target, disprove, &base, &reserved);
    let mut proofs = state.proofs.clone();
    proofs[pi] = p.replace_subtree(idx, &fresh);
    let Some(next) = assemble(state, proofs, ctx.cfg) else { return rejected(kind, log_forward) };
    let log_reverse = -ctx.normalizer(&next).ln() + log_replay(&old, &target, disprove, &base, &reserved);
    Outcome { kind, new_state: Some(next), log_forward, log_reverse }
}

/// Theory drawn by every axiom leaf outside the subtree, and the constants
/// mentioned outside it (plus all observations).
fn outside(state: &MHState, pi: usize, idx: usize) -> (Theory, BTreeSet<Symbol>) {
    let inside: BTreeSet<usize> = state.proofs[pi].subtree_indices(idx).into_iter().collect();
    let mut leaves = Vec::new();
    let mut reserved = BTreeSet::new();
    for (i, p) in state.proofs.iter().enumerate() {
        if i != pi {
            leaves.extend(axioms_of(p));
            reserved.extend(proof_constants(p));
            continue;
        }
        for (j, s) in p.steps.iter().enumerate() {
            if inside.contains(&j) {
                continue;
            }
            if s.rule == Rule::Ax && s.params.hyp.is_none() {
                leaves.push(s.conclusion.clone());
            }
            reserved.extend(s.conclusion.free_constants());
            if let Some(t) = &s.params.term {
                reserved.extend(t.free_constants());
            }
        }
    }
    for x in &state.observations {
        reserved.extend(x.free_constants());
    }
    (Theory::from_draws(leaves.iter()), reserved)
}
