//! Natural-deduction proofs.
//!
//! A proof is a flat list of steps where every premise index points to an
//! earlier step and the last step is the root. Hypotheses are `Ax` leaves
//! carrying a label; the rule that discharges them lists that label.

mod check;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hol::Formula;

pub use check::{check_proof, ProofError};
pub use text::{parse_proof, ProofParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Classical,
    Intuitionistic,
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::Classical => "classical",
            Logic::Intuitionistic => "intuitionistic",
        })
    }
}

impl std::str::FromStr for Logic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "classical" => Ok(Logic::Classical),
            "intuitionistic" => Ok(Logic::Intuitionistic),
            other => Err(format!("unknown logic `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Ax,
    AndI,
    AndE,
    OrI,
    OrE,
    NotI,
    NotE,
    ImpliesI,
    ImpliesE,
    FalseE,
    ForAllE,
    ExistsI,
    ExistsE,
    EqualityE,
    NotNotE,
}

impl Rule {
    pub const ALL: [Rule; 15] = [
        Rule::Ax,
        Rule::AndI,
        Rule::AndE,
        Rule::OrI,
        Rule::OrE,
        Rule::NotI,
        Rule::NotE,
        Rule::ImpliesI,
        Rule::ImpliesE,
        Rule::FalseE,
        Rule::ForAllE,
        Rule::ExistsI,
        Rule::ExistsE,
        Rule::EqualityE,
        Rule::NotNotE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "Ax",
            Rule::AndI => "AndI",
            Rule::AndE => "AndE",
            Rule::OrI => "OrI",
            Rule::OrE => "OrE",
            Rule::NotI => "NotI",
            Rule::NotE => "NotE",
            Rule::ImpliesI => "ImpliesI",
            Rule::ImpliesE => "ImpliesE",
            Rule::FalseE => "FalseE",
            Rule::ForAllE => "ForAllE",
            Rule::ExistsI => "ExistsI",
            Rule::ExistsE => "ExistsE",
            Rule::EqualityE => "EqualityE",
            Rule::NotNotE => "NotNotE",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    /// Rules usable under `logic`.
    pub fn inventory(logic: Logic) -> &'static [Rule] {
        match logic {
            Logic::Classical => &Rule::ALL,
            Logic::Intuitionistic => &Rule::ALL[..14],
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule parameters. Which fields are meaningful depends on the rule:
/// `term` for ForAllE/ExistsI/ExistsE, `index` for AndE/OrI, `path` for
/// EqualityE, `hyp` on hypothesis leaves and `discharges` on NotI, ImpliesI,
/// OrE and ExistsE.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Params {
    pub term: Option<Formula>,
    pub index: Option<usize>,
    pub path: Option<Vec<usize>>,
    pub hyp: Option<u32>,
    pub discharges: Vec<u32>,
}

impl Params {
    pub fn term(t: Formula) -> Self {
        Params { term: Some(t), ..Default::default() }
    }

    pub fn index(i: usize) -> Self {
        Params { index: Some(i), ..Default::default() }
    }

    pub fn hyp(label: u32) -> Self {
        Params { hyp: Some(label), ..Default::default() }
    }

    pub fn discharging(labels: Vec<u32>) -> Self {
        Params { discharges: labels, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProofStep {
    pub rule: Rule,
    pub premises: Vec<usize>,
    pub conclusion: Formula,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Proof {
    pub steps: Vec<ProofStep>,
    pub logic: Logic,
}

impl Proof {
    /// Single-step proof citing `f` as a theory axiom.
    pub fn axiom(f: Formula, logic: Logic) -> Proof {
        Proof {
            steps: vec![ProofStep { rule: Rule::Ax, premises: vec![], conclusion: f, params: Params::default() }],
            logic,
        }
    }

    /// Single-step proof assuming `f` under hypothesis `label`.
    pub fn hypothesis(f: Formula, label: u32, logic: Logic) -> Proof {
        Proof {
            steps: vec![ProofStep { rule: Rule::Ax, premises: vec![], conclusion: f, params: Params::hyp(label) }],
            logic,
        }
    }

    /// Combine sub-proofs under a new root step. Steps are laid out in
    /// post-order so each subtree occupies a contiguous range.
    pub fn join(rule: Rule, params: Params, conclusion: Formula, parts: Vec<Proof>, logic: Logic) -> Proof {
        let mut steps = Vec::with_capacity(parts.iter().map(|p| p.steps.len()).sum::<usize>() + 1);
        let mut roots = Vec::with_capacity(parts.len());
        for part in parts {
            let offset = steps.len();
            for mut s in part.steps {
                for p in &mut s.premises {
                    *p += offset;
                }
                steps.push(s);
            }
            roots.push(steps.len() - 1);
        }
        steps.push(ProofStep { rule, premises: roots, conclusion, params });
        Proof { steps, logic }
    }

    pub fn root(&self) -> &ProofStep {
        self.steps.last().expect("proof has at least one step")
    }

    pub fn conclusion(&self) -> &Formula {
        &self.root().conclusion
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Indices of the subtree rooted at `idx`, ascending.
    pub fn subtree_indices(&self, idx: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![idx];
        while let Some(i) = stack.pop() {
            if out.insert(i) {
                stack.extend(self.steps[i].premises.iter().copied());
            }
        }
        out.into_iter().collect()
    }

    /// The subtree rooted at `idx` as a standalone proof.
    pub fn subproof(&self, idx: usize) -> Proof {
        let keep = self.subtree_indices(idx);
        let mut remap = vec![usize::MAX; self.steps.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let steps = keep
            .iter()
            .map(|&old| {
                let mut s = self.steps[old].clone();
                for p in &mut s.premises {
                    *p = remap[*p];
                }
                s
            })
            .collect();
        Proof { steps, logic: self.logic }
    }

    /// Replace the subtree rooted at `idx` with `replacement`.
    ///
    /// Labels that `replacement` discharges internally are shifted past those
    /// used in `self` so they cannot capture anything outside; its open
    /// hypotheses keep their labels.
    pub fn replace_subtree(&self, idx: usize, replacement: &Proof) -> Proof {
        let shift = self.max_label().map_or(0, |m| m + 1);
        let mut rep = replacement.clone();
        let internal = rep.discharged_within(rep.steps.len() - 1);
        rep.relabel(shift, &internal);
        self.rebuild(self.steps.len() - 1, idx, &rep)
    }

    fn rebuild(&self, at: usize, target: usize, rep: &Proof) -> Proof {
        if at == target {
            return rep.clone();
        }
        let s = &self.steps[at];
        let parts = s.premises.iter().map(|&p| self.rebuild(p, target, rep)).collect();
        Proof::join(s.rule, s.params.clone(), s.conclusion.clone(), parts, self.logic)
    }

    fn max_label(&self) -> Option<u32> {
        self.steps.iter().flat_map(|s| s.params.hyp.into_iter().chain(s.params.discharges.iter().copied())).max()
    }

    fn relabel(&mut self, shift: u32, which: &BTreeSet<u32>) {
        if shift == 0 {
            return;
        }
        for s in &mut self.steps {
            for l in s.params.hyp.iter_mut().chain(s.params.discharges.iter_mut()) {
                if which.contains(l) {
                    *l += shift;
                }
            }
        }
    }

    /// Hypothesis labels discharged by steps inside the subtree at `idx`.
    fn discharged_within(&self, idx: usize) -> BTreeSet<u32> {
        self.subtree_indices(idx)
            .into_iter()
            .flat_map(|i| self.steps[i].params.discharges.iter().copied())
            .collect()
    }

    /// True if some hypothesis leaf under `idx` is discharged by a step
    /// outside the subtree.
    pub fn has_open_hypotheses(&self, idx: usize) -> bool {
        let inside = self.discharged_within(idx);
        self.subtree_indices(idx).into_iter().any(|i| match self.steps[i].params.hyp {
            Some(h) => !inside.contains(&h),
            None => false,
        })
    }

    /// Conclusions of the undischarged `Ax` leaves, in step order.
    pub fn axioms(&self) -> Vec<&Formula> {
        self.steps
            .iter()
            .filter(|s| s.rule == Rule::Ax && s.params.hyp.is_none())
            .map(|s| &s.conclusion)
            .collect()
    }
}

/// Theory axioms cited by `p` (hypotheses excluded), in step order.
pub fn axioms_of(p: &Proof) -> Vec<Formula> {
    p.axioms().into_iter().cloned().collect()
}

/// Number of deduction steps.
pub fn proof_length(p: &Proof) -> usize {
    p.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hol::parse_formula_unscoped as f;

    fn no_contradiction() -> Proof {
        let l = Logic::Intuitionistic;
        let hyp = || Proof::hypothesis(f("a & ~a").unwrap(), 0, l);
        let left = Proof::join(Rule::AndE, Params::index(0), f("a").unwrap(), vec![hyp()], l);
        let right = Proof::join(Rule::AndE, Params::index(1), f("~a").unwrap(), vec![hyp()], l);
        let bot = Proof::join(Rule::NotE, Params::default(), Formula::falsum(), vec![left, right], l);
        Proof::join(Rule::NotI, Params::discharging(vec![0]), f("~(a & ~a)").unwrap(), vec![bot], l)
    }

    #[test]
    fn join_lays_out_post_order() {
        let p = no_contradiction();
        assert_eq!(p.len(), 6);
        assert_eq!(p.steps[4].premises, vec![1, 3]);
        assert_eq!(p.steps[5].premises, vec![4]);
        assert!(axioms_of(&p).is_empty());
    }

    #[test]
    fn subproof_and_replace_roundtrip() {
        let p = no_contradiction();
        let sub = p.subproof(3);
        assert_eq!(sub.len(), 2);
        assert_eq!(p.replace_subtree(3, &sub).steps.len(), 6);
        assert!(p.has_open_hypotheses(4));
        assert!(!p.has_open_hypotheses(5));
    }

    #[test]
    fn replacement_labels_are_shifted() {
        let p = no_contradiction();
        let rep = Proof::hypothesis(f("~a").unwrap(), 0, p.logic);
        // open hypothesis keeps its label
        assert_eq!(p.replace_subtree(3, &rep).steps[2].params.hyp, Some(0));
        let closed = p.subproof(5);
        let q = Proof::join(Rule::AndI, Params::default(), f("~(a & ~a) & ~(a & ~a)").unwrap(), vec![p.clone(), p.clone()], p.logic);
        let r = q.replace_subtree(5, &closed);
        assert_eq!(r.steps[0].params.hyp, Some(1));
        assert_eq!(r.steps[5].params.discharges, vec![1]);
    }
}
