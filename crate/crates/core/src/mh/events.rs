//! Rows 5 and 6: merging and splitting reified events.
//!
//! An event is a constant `e` with a unary type axiom `t(e)` and role
//! axioms `argK(e) = c`. Both moves act on states up to renaming of
//! constants: a split hands fresh names to part of the proofs, and which
//! fresh names are picked carries no information.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::moves::{assemble, rejected, Ctx};
use super::{proof_constants, Kind, MHState, Outcome};
use crate::hol::{Formula, Node, Symbol};
use crate::proof::Proof;

#[derive(Debug, Clone, PartialEq)]
struct Event {
    types: BTreeSet<Symbol>,
    roles: BTreeMap<Symbol, Symbol>,
}

fn is_role(f: &Symbol) -> bool {
    f.name().strip_prefix("arg").is_some_and(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
}

fn events(state: &MHState) -> BTreeMap<Symbol, Event> {
    let mut types: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    let mut roles: BTreeMap<Symbol, BTreeMap<Symbol, Symbol>> = BTreeMap::new();
    let mut broken = BTreeSet::new();
    for (a, _) in state.theory.axioms() {
        match a.node() {
            Node::Atom(t, args) if args.len() == 1 => {
                if let Some(e) = args[0].as_const() {
                    types.entry(e.clone()).or_default().insert(t.clone());
                }
            }
            Node::Equality(l, r) => {
                let (Node::Apply(f, args), Some(v)) = (l.node(), r.as_const()) else { continue };
                let Some(e) = args.first().and_then(Formula::as_const).filter(|_| args.len() == 1 && is_role(f)) else { continue };
                let slot = roles.entry(e.clone()).or_default();
                if slot.insert(f.clone(), v.clone()).is_some_and(|old| old != *v) {
                    broken.insert(e.clone());
                }
            }
            _ => {}
        }
    }
    roles
        .into_iter()
        .filter(|(e, _)| !broken.contains(e))
        .filter_map(|(e, roles)| Some((e.clone(), Event { types: types.remove(&e)?, roles })))
        .collect()
}

/// Proof indices mentioning each constant.
fn mentions(state: &MHState) -> BTreeMap<Symbol, BTreeSet<usize>> {
    let mut out: BTreeMap<Symbol, BTreeSet<usize>> = BTreeMap::new();
    for (i, p) in state.proofs.iter().enumerate() {
        for c in proof_constants(p) {
            out.entry(c).or_default().insert(i);
        }
    }
    out
}

/// Distinct role values of an event.
fn groups(ev: &Event) -> Vec<Symbol> {
    ev.roles.values().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// The renaming that merges `e2` into `e1`, if the pair qualifies.
fn merge_map(
    e1: &Symbol,
    e2: &Symbol,
    evs: &BTreeMap<Symbol, Event>,
    men: &BTreeMap<Symbol, BTreeSet<usize>>,
) -> Option<BTreeMap<Symbol, Symbol>> {
    let (a, b) = (&evs[e1], &evs[e2]);
    if a.types.is_disjoint(&b.types) || !a.roles.keys().eq(b.roles.keys()) {
        return None;
    }
    let empty = BTreeSet::new();
    let of = |c: &Symbol| men.get(c).unwrap_or(&empty);
    let (p1, p2) = (of(e1), of(e2));
    if p1.is_empty() || p2.is_empty() || !p1.is_disjoint(p2) {
        return None;
    }
    let mut map = BTreeMap::from([(e2.clone(), e1.clone())]);
    for (r, j2) in &b.roles {
        let j1 = &a.roles[r];
        // equal role values must line up on both sides
        for (r2, k2) in &b.roles {
            if (j2 == k2) != (j1 == &a.roles[r2]) {
                return None;
            }
        }
        if j1 == j2 {
            continue;
        }
        if [e1, e2].contains(&j2) || [e1, e2].contains(&j1) || !of(j2).is_subset(p2) || !of(j1).is_disjoint(p2) {
            return None;
        }
        map.insert(j2.clone(), j1.clone());
    }
    Some(map)
}

/// Either orientation of a pair: (kept, moved, renaming).
fn orient(
    e1: &Symbol,
    e2: &Symbol,
    evs: &BTreeMap<Symbol, Event>,
    men: &BTreeMap<Symbol, BTreeSet<usize>>,
) -> Option<(Symbol, Symbol, BTreeMap<Symbol, Symbol>)> {
    merge_map(e1, e2, evs, men)
        .map(|m| (e1.clone(), e2.clone(), m))
        .or_else(|| merge_map(e2, e1, evs, men).map(|m| (e2.clone(), e1.clone(), m)))
}

pub(crate) fn sites(state: &MHState) -> (Vec<(Symbol, Symbol)>, Vec<Symbol>) {
    let evs = events(state);
    let men = mentions(state);
    let names: Vec<&Symbol> = evs.keys().collect();
    let mut merges = Vec::new();
    for (i, e1) in names.iter().enumerate() {
        for e2 in &names[i + 1..] {
            if orient(e1, e2, &evs, &men).is_some() {
                merges.push(((*e1).clone(), (*e2).clone()));
            }
        }
    }
    let splits = names.into_iter().filter(|e| men.get(*e).is_some_and(|p| p.len() >= 2)).cloned().collect();
    (merges, splits)
}

fn rename(p: &Proof, map: &BTreeMap<Symbol, Symbol>) -> Proof {
    let f = |c: &Symbol| map.get(c).cloned();
    let mut q = p.clone();
    for s in &mut q.steps {
        s.conclusion = s.conclusion.rename_constants(&f);
        if let Some(t) = &s.params.term {
            s.params.term = Some(t.rename_constants(&f));
        }
    }
    q
}

/// `log` of the split probability of one subset with the given flags,
/// doubled when the complementary subset gives the same state up to names.
fn log_split(beta: f64, n: f64, m: usize, flags: usize, symmetric: bool) -> f64 {
    let sym = if symmetric { std::f64::consts::LN_2 } else { 0.0 };
    (beta / n).ln() + sym - (2f64.powi(m as i32) - 2.0).ln() - flags as f64 * std::f64::consts::LN_2
}

/// Renamed role values are confined to the event's proofs, so swapping the
/// subset with its complement only swaps names.
fn symmetric(renamed: &[Symbol], proofs_of_e: &BTreeSet<usize>, men: &BTreeMap<Symbol, BTreeSet<usize>>) -> bool {
    renamed.iter().all(|v| men.get(v).is_none_or(|p| p.is_subset(proofs_of_e)))
}

/// Row 5.
pub(crate) fn merge(state: &MHState, (a, b): &(Symbol, Symbol), n: f64, ctx: &Ctx) -> Outcome {
    let kind = Kind::MergeEvents;
    let log_forward = (ctx.w.merge_alpha / n).ln();
    let evs = events(state);
    let men = mentions(state);
    let Some((e1, e2, map)) = orient(a, b, &evs, &men) else { return rejected(kind, log_forward) };
    let (e1, moved) = (&e1, &men[&e2]);
    let proofs = state.proofs.iter().enumerate().map(|(i, p)| if moved.contains(&i) { rename(p, &map) } else { p.clone() }).collect();
    let Some(next) = assemble(state, proofs, ctx.cfg) else { return rejected(kind, log_forward) };
    let men2 = mentions(&next);
    let p_e = &men2[e1];
    let renamed: Vec<Symbol> = map.values().filter(|v| *v != e1).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let log_reverse = log_split(ctx.w.split_beta, ctx.normalizer(&next), p_e.len(), groups(&evs[e1]).len(), symmetric(&renamed, p_e, &men2));
    Outcome { kind, new_state: Some(next), log_forward, log_reverse }
}

/// Row 6.
pub(crate) fn split<R: Rng + ?Sized>(state: &MHState, e: &Symbol, n: f64, ctx: &Ctx, rng: &mut R) -> Outcome {
    let kind = Kind::SplitEvents;
    let evs = events(state);
    let men = mentions(state);
    let p_e: Vec<usize> = men[e].iter().copied().collect();
    let m = p_e.len();
    let subset: BTreeSet<usize> = loop {
        let q: BTreeSet<usize> = p_e.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if !q.is_empty() && q.len() < m {
            break q;
        }
    };
    let values = groups(&evs[e]);
    let flagged: Vec<Symbol> = values.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    let sym = symmetric(&flagged, &men[e], &men);
    let log_forward = log_split(ctx.w.split_beta, n, m, values.len(), sym);
    let mut taken: BTreeSet<Symbol> = state.constants();
    taken.extend(state.theory.constants().iter().cloned());
    let mut fresh = || {
        let s = (1u64..).map(|k| Symbol::new(&format!("c{k}"))).find(|s| !taken.contains(s)).expect("unbounded");
        taken.insert(s.clone());
        s
    };
    let mut map = BTreeMap::new();
    let e_new = fresh();
    map.insert(e.clone(), e_new.clone());
    for v in &flagged {
        map.insert(v.clone(), fresh());
    }
    let proofs = state.proofs.iter().enumerate().map(|(i, p)| if subset.contains(&i) { rename(p, &map) } else { p.clone() }).collect();
    let Some(next) = assemble(state, proofs, ctx.cfg) else { return rejected(kind, log_forward) };
    let pair = if *e < e_new { (e.clone(), e_new) } else { (e_new, e.clone()) };
    let (merges, _) = sites(&next);
    let log_reverse = if merges.contains(&pair) { (ctx.w.merge_alpha / ctx.normalizer(&next)).ln() } else { f64::NEG_INFINITY };
    Outcome { kind, new_state: Some(next), log_forward, log_reverse }
}
