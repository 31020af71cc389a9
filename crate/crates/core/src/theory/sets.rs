use std::collections::{BTreeSet, VecDeque};

use crate::hol::Formula;

/// Canonical set bodies reachable from `body` along subset edges, excluding
/// `body` itself. `up` follows subset→superset, otherwise the reverse.
pub(crate) fn reachable(edges: &[(Formula, Formula)], body: &Formula, up: bool) -> BTreeSet<Formula> {
    let start = body.canonical();
    let edges: Vec<(Formula, Formula)> = edges
        .iter()
        .map(|(a, b)| if up { (a.canonical(), b.canonical()) } else { (b.canonical(), a.canonical()) })
        .collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(cur) = queue.pop_front() {
        for (from, to) in &edges {
            if *from == cur && *to != start && seen.insert(to.clone()) {
                queue.push_back(to.clone());
            }
        }
    }
    seen
}
