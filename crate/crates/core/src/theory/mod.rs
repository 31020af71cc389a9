//! The world model: a CRP-counted axiom multiset plus the consistency state.

pub(crate) mod closure;
mod sets;

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::hol::{Formula, Node, Symbol};
use closure::Closure;

pub(crate) use closure::literals;

/// Why a theory is inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("{0} is both provable and refutable")]
    Clash(Formula),
    #[error("{set} has {members} provable members but size {size}")]
    SizeExceeded { set: Formula, members: usize, size: BigInt },
    #[error("a subset of {0} is declared larger than it")]
    SizeBounds(Formula),
    #[error("{0} names an entity with a non-string")]
    NameNotString(Formula),
    #[error("{0} is an argument of itself")]
    SelfArgument(Formula),
    #[error("distinct values {0} and {1} are equated")]
    Distinct(Formula, Formula),
    #[error("{0} has two different values")]
    Function(Formula),
    #[error("ill-sorted literal {0}")]
    Sort(Formula),
    #[error("negated axiom is satisfied by {0}")]
    Constraint(Formula),
    #[error("falsum is an axiom")]
    Falsum,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("axiom rejected: {0}")]
    Rejected(Violation),
    #[error("axiom {0} is not in the theory")]
    Absent(Formula),
}

/// Axioms keyed by their canonical form, in first-draw order, with CRP
/// table sizes.
#[derive(Clone, Debug, Default)]
pub struct Theory {
    axioms: IndexMap<Formula, (Formula, usize)>,
    closure: Closure,
}

impl PartialEq for Theory {
    fn eq(&self, other: &Self) -> bool {
        self.axioms == other.axioms
    }
}

impl Eq for Theory {}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from a draw sequence without rejecting anything; check
    /// [`Theory::is_consistent`] afterwards.
    pub fn from_draws<'a>(draws: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut t = Theory::new();
        for a in draws {
            t.axioms.entry(a.canonical()).or_insert_with(|| (a.clone(), 0)).1 += 1;
        }
        t.recompute();
        t
    }

    fn recompute(&mut self) {
        self.closure = Closure::default();
        let reps: Vec<Formula> = self.axioms.values().map(|(f, _)| f.clone()).collect();
        self.closure.add_all(reps.iter());
    }

    /// Draw `a` once more. A new distinct axiom is rejected (and the theory
    /// left unchanged) if it breaks a constraint.
    pub fn add_axiom(&mut self, a: &Formula) -> Result<(), TheoryError> {
        let key = a.canonical();
        if let Some(entry) = self.axioms.get_mut(&key) {
            entry.1 += 1;
            return Ok(());
        }
        let saved = self.closure.clone();
        self.closure.add_all([a]);
        if let Some(v) = self.closure.violation() {
            let v = v.clone();
            self.closure = saved;
            return Err(TheoryError::Rejected(v));
        }
        self.axioms.insert(key, (a.clone(), 1));
        Ok(())
    }

    pub fn remove_axiom(&mut self, a: &Formula) -> Result<(), TheoryError> {
        let key = a.canonical();
        let Some(entry) = self.axioms.get_mut(&key) else {
            return Err(TheoryError::Absent(a.clone()));
        };
        entry.1 -= 1;
        if entry.1 == 0 {
            self.axioms.shift_remove(&key);
            self.recompute();
        }
        Ok(())
    }

    pub fn count(&self, a: &Formula) -> usize {
        self.axioms.get(&a.canonical()).map_or(0, |e| e.1)
    }

    pub fn contains(&self, a: &Formula) -> bool {
        self.count(a) > 0
    }

    /// Distinct axioms with their draw counts, in first-draw order.
    pub fn axioms(&self) -> impl Iterator<Item = (&Formula, usize)> {
        self.axioms.values().map(|(f, n)| (f, *n))
    }

    pub fn distinct_len(&self) -> usize {
        self.axioms.len()
    }

    pub fn draws(&self) -> usize {
        self.axioms.values().map(|e| e.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn is_consistent(&self) -> bool {
        self.closure.violation().is_none()
    }

    pub fn violation(&self) -> Option<&Violation> {
        self.closure.violation()
    }

    /// Is the ground literal provable by forward chaining?
    pub fn provable(&self, f: &Formula) -> bool {
        match literals(f).as_deref() {
            Some([(g, pol)]) => self.closure.holds(g, *pol),
            Some(lits) if !lits.is_empty() => lits.iter().all(|(g, p)| self.closure.holds(g, *p)),
            _ => false,
        }
    }

    /// Constants mentioned by the theory or derived facts.
    pub fn constants(&self) -> &BTreeSet<Symbol> {
        self.closure.constants()
    }

    /// Numbers and strings mentioned anywhere in the axioms.
    pub fn literal_values(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        for (f, _) in self.axioms.values() {
            f.visit(&mut |g| {
                if matches!(g.node(), Node::Number(_) | Node::Str(_)) {
                    out.insert(g.clone());
                }
            });
        }
        out
    }

    /// Values recorded for a function term such as `name(c)`.
    pub fn values_of(&self, term: &Formula) -> Vec<Formula> {
        self.closure.values_of(term).map(|v| v.iter().cloned().collect()).unwrap_or_default()
    }

    /// Derived ground literals (atoms paired with polarity).
    pub fn facts(&self) -> Vec<(Formula, bool)> {
        let mut v: Vec<_> = self.closure.facts().cloned().collect();
        v.sort();
        v
    }

    /// Known sets as λ-formulas: those with size axioms and those induced by
    /// single-variable universal rules.
    pub fn known_sets(&self) -> Vec<Formula> {
        let mut out = BTreeSet::new();
        for (b, _) in &self.closure.sizes {
            out.insert(b.canonical());
        }
        for (a, b) in &self.closure.edges {
            out.insert(a.canonical());
            out.insert(b.canonical());
        }
        out.into_iter().map(Formula::lambda).collect()
    }

    fn set_body(set: &Formula) -> &Formula {
        match set.node() {
            Node::Lambda(b) => b,
            _ => set,
        }
    }

    pub fn provable_members(&self, set: &Formula) -> BTreeSet<Symbol> {
        self.closure.members(Self::set_body(set), true)
    }

    pub fn provable_nonmembers(&self, set: &Formula) -> BTreeSet<Symbol> {
        self.closure.members(Self::set_body(set), false)
    }

    /// Declared size of a set, if any.
    pub fn declared_size(&self, set: &Formula) -> Option<BigInt> {
        let body = Self::set_body(set).canonical();
        self.closure.sizes.iter().find(|(b, _)| b.canonical() == body).map(|(_, n)| n.clone())
    }

    /// Consistent cardinality range `(min, max)` for a set, `max = None` when
    /// unbounded. Disjointness is not modeled.
    pub fn set_size_bounds(&self, set: &Formula) -> (u64, Option<u64>) {
        let body = Self::set_body(set);
        let mut min = self.provable_members(set).len() as u64;
        let mut max: Option<u64> = None;
        let declared = |b: &Formula| -> Vec<u64> {
            self.closure.sizes.iter().filter(|(x, _)| x.canonical() == *b).filter_map(|(_, n)| n.to_u64()).collect()
        };
        for sub in sets::reachable(&self.closure.edges, body, false) {
            for n in declared(&sub) {
                min = min.max(n);
            }
        }
        let mut uppers: Vec<Formula> = sets::reachable(&self.closure.edges, body, true).into_iter().collect();
        uppers.push(body.canonical());
        for sup in uppers {
            for n in declared(&sup) {
                max = Some(max.map_or(n, |m: u64| m.min(n)));
            }
        }
        (min, max)
    }

    /// One axiom per line prefixed by its draw count, in first-draw order.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, n) in self.axioms.values() {
            writeln!(f, "{n}\t{a}")?;
        }
        Ok(())
    }
}
