use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Logic, Proof, Rule};
use crate::hol::{Formula, Node};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {reason}")]
pub struct ProofError {
    pub step: usize,
    pub reason: String,
}

fn bad<T>(step: usize, reason: impl Into<String>) -> Result<T, ProofError> {
    Err(ProofError { step, reason: reason.into() })
}

/// Check local rule applications, tree shape, discharge bookkeeping and the
/// rule set allowed by the proof's logic.
pub fn check_proof(p: &Proof) -> Result<(), ProofError> {
    if p.steps.is_empty() {
        return bad(0, "empty proof");
    }
    let n = p.steps.len();
    let mut used_by = vec![None; n];
    for (i, s) in p.steps.iter().enumerate() {
        for &q in &s.premises {
            if q >= i {
                return bad(i, format!("premise {q} does not precede the step"));
            }
            if let Some(other) = used_by[q] {
                return bad(i, format!("step {q} is already a premise of step {other}"));
            }
            used_by[q] = Some(i);
        }
    }
    if let Some(orphan) = (0..n - 1).find(|&i| used_by[i].is_none()) {
        return bad(orphan, "step is not used by any later step");
    }
    for (i, s) in p.steps.iter().enumerate() {
        if s.rule == Rule::NotNotE && p.logic == Logic::Intuitionistic {
            return bad(i, "double-negation elimination is not intuitionistic");
        }
        check_step(p, i)?;
    }
    check_discharges(p, &used_by)
}

fn arity(i: usize, got: usize, want: usize) -> Result<(), ProofError> {
    if got != want {
        return bad(i, format!("expected {want} premises, found {got}"));
    }
    Ok(())
}

fn check_step(p: &Proof, i: usize) -> Result<(), ProofError> {
    let s = &p.steps[i];
    let prem: Vec<&Formula> = s.premises.iter().map(|&q| &p.steps[q].conclusion).collect();
    let c = &s.conclusion;
    let ok = match s.rule {
        Rule::Ax => {
            arity(i, prem.len(), 0)?;
            if !c.is_closed() {
                return bad(i, "axiom is not closed");
            }
            true
        }
        Rule::AndI => {
            if prem.len() < 2 {
                return bad(i, "AndI needs at least two premises");
            }
            *c == Formula::and(prem.iter().map(|f| (*f).clone()).collect())
        }
        Rule::AndE => {
            arity(i, prem.len(), 1)?;
            let k = s.params.index.ok_or_else(|| err(i, "AndE needs an index"))?;
            matches!(prem[0].node(), Node::And(cs) if cs.get(k) == Some(c))
        }
        Rule::OrI => {
            arity(i, prem.len(), 1)?;
            let k = s.params.index.ok_or_else(|| err(i, "OrI needs an index"))?;
            matches!(c.node(), Node::Or(ds) if ds.get(k) == Some(prem[0]))
        }
        Rule::OrE => match prem.first().map(|f| f.node()) {
            Some(Node::Or(ds)) => {
                arity(i, prem.len(), ds.len() + 1)?;
                prem[1..].iter().all(|b| *b == c)
            }
            _ => return bad(i, "OrE needs a disjunction as first premise"),
        },
        Rule::NotI => {
            arity(i, prem.len(), 1)?;
            matches!(prem[0].node(), Node::False) && c.as_not().is_some()
        }
        Rule::NotE => {
            arity(i, prem.len(), 2)?;
            matches!(c.node(), Node::False) && prem[1].as_not() == Some(prem[0])
        }
        Rule::ImpliesI => {
            arity(i, prem.len(), 1)?;
            matches!(c.node(), Node::Implies(_, b) if b == prem[0])
        }
        Rule::ImpliesE => {
            arity(i, prem.len(), 2)?;
            matches!(prem[1].node(), Node::Implies(a, b) if a == prem[0] && b == c)
        }
        Rule::FalseE => {
            arity(i, prem.len(), 1)?;
            matches!(prem[0].node(), Node::False) && c.is_closed()
        }
        Rule::ForAllE => {
            arity(i, prem.len(), 1)?;
            let t = instance_term(p, i)?;
            matches!(prem[0].node(), Node::ForAll(b) if b.substitute(t) == *c)
        }
        Rule::ExistsI => {
            arity(i, prem.len(), 1)?;
            let t = instance_term(p, i)?;
            matches!(c.node(), Node::Exists(b) if b.substitute(t) == *prem[0])
        }
        Rule::ExistsE => {
            arity(i, prem.len(), 2)?;
            let t = instance_term(p, i)?;
            let Some(e) = t.as_const() else {
                return bad(i, "ExistsE witness must be a constant");
            };
            if !matches!(prem[0].node(), Node::Exists(_)) {
                return bad(i, "ExistsE needs an existential as first premise");
            }
            let leaks = p.steps.iter().any(|l| {
                l.rule == Rule::Ax
                    && !l.params.hyp.is_some_and(|h| s.params.discharges.contains(&h))
                    && l.conclusion.mentions_constant(e)
            });
            if leaks || prem[0].mentions_constant(e) || c.mentions_constant(e) {
                return bad(i, "ExistsE witness is not fresh");
            }
            prem[1] == c
        }
        Rule::EqualityE => {
            arity(i, prem.len(), 2)?;
            let path = s.params.path.as_deref().ok_or_else(|| err(i, "EqualityE needs a path"))?;
            let Node::Equality(l, r) = prem[0].node() else {
                return bad(i, "EqualityE needs an equality as first premise");
            };
            match prem[1].subterm(path) {
                Some(at) if at == l => prem[1].replace_at(path, r).as_ref() == Some(c),
                Some(at) if at == r => prem[1].replace_at(path, l).as_ref() == Some(c),
                _ => false,
            }
        }
        Rule::NotNotE => {
            arity(i, prem.len(), 1)?;
            prem[0].as_not().and_then(|f| f.as_not()) == Some(c)
        }
    };
    if !ok {
        return bad(i, format!("{} does not yield {c}", s.rule));
    }
    Ok(())
}

fn err(step: usize, reason: &str) -> ProofError {
    ProofError { step, reason: reason.into() }
}

fn instance_term(p: &Proof, i: usize) -> Result<&Formula, ProofError> {
    match &p.steps[i].params.term {
        Some(t) if t.is_closed() => Ok(t),
        Some(_) => bad(i, "instantiating term is not closed"),
        None => bad(i, "missing instantiating term"),
    }
}

/// Every hypothesis leaf must be discharged by exactly one ancestor whose rule
/// licenses assuming that formula, and discharge lists must name real leaves.
fn check_discharges(p: &Proof, used_by: &[Option<usize>]) -> Result<(), ProofError> {
    let mut leaves: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, s) in p.steps.iter().enumerate() {
        if let Some(h) = s.params.hyp {
            if s.rule != Rule::Ax {
                return bad(i, "only Ax steps may carry a hypothesis label");
            }
            leaves.entry(h).or_default().push(i);
        }
    }
    let mut dischargers: HashMap<u32, usize> = HashMap::new();
    for (i, s) in p.steps.iter().enumerate() {
        if s.params.discharges.is_empty() {
            continue;
        }
        if !matches!(s.rule, Rule::NotI | Rule::ImpliesI | Rule::OrE | Rule::ExistsE) {
            return bad(i, format!("{} cannot discharge hypotheses", s.rule));
        }
        let labels: BTreeSet<u32> = s.params.discharges.iter().copied().collect();
        if labels.len() != s.params.discharges.len() {
            return bad(i, "duplicate discharge label");
        }
        for &h in &labels {
            if dischargers.insert(h, i).is_some() {
                return bad(i, format!("hypothesis {h} discharged twice"));
            }
        }
    }
    for (&h, at) in &leaves {
        for &leaf in at {
            let Some(&d) = dischargers.get(&h) else {
                return bad(leaf, format!("hypothesis {h} is never discharged"));
            };
            // branch = the premise of `d` whose subtree holds the leaf
            let mut cur = leaf;
            let branch = loop {
                match used_by[cur] {
                    Some(parent) if parent == d => break cur,
                    Some(parent) => cur = parent,
                    None => return bad(leaf, format!("hypothesis {h} is discharged outside its scope")),
                }
            };
            if !licensed(p, d, branch, &p.steps[leaf].conclusion) {
                return bad(d, format!("cannot discharge hypothesis {h} here"));
            }
        }
    }
    for (&h, &d) in &dischargers {
        if !leaves.contains_key(&h) {
            return bad(d, format!("discharged hypothesis {h} does not exist"));
        }
    }
    Ok(())
}

/// May step `d` discharge a hypothesis `assumed` found under premise `branch`?
fn licensed(p: &Proof, d: usize, branch: usize, assumed: &Formula) -> bool {
    let s = &p.steps[d];
    match s.rule {
        Rule::NotI => s.conclusion.as_not() == Some(assumed),
        Rule::ImpliesI => matches!(s.conclusion.node(), Node::Implies(a, _) if a == assumed),
        Rule::OrE => {
            let pos = s.premises.iter().position(|&q| q == branch);
            match (pos, p.steps[s.premises[0]].conclusion.node()) {
                (Some(k), Node::Or(ds)) if k >= 1 => ds.get(k - 1) == Some(assumed),
                _ => false,
            }
        }
        Rule::ExistsE => {
            let (Some(t), Node::Exists(body)) = (&s.params.term, p.steps[s.premises[0]].conclusion.node()) else {
                return false;
            };
            branch == s.premises[1] && body.substitute(t) == *assumed
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hol::parse_formula_unscoped as f;
    use crate::proof::Params;

    const C: Logic = Logic::Classical;
    const I: Logic = Logic::Intuitionistic;

    fn cats(l: Logic) -> Proof {
        let inst = Proof::join(
            Rule::ForAllE,
            Params::term(Formula::constant("bob")),
            f("cat(bob) => mammal(bob)").unwrap(),
            vec![Proof::axiom(f("![x]:(cat(x) => mammal(x))").unwrap(), l)],
            l,
        );
        Proof::join(
            Rule::ImpliesE,
            Params::default(),
            f("mammal(bob)").unwrap(),
            vec![Proof::axiom(f("cat(bob)").unwrap(), l), inst],
            l,
        )
    }

    fn excluded_middle(l: Logic) -> Proof {
        // ~~(a | ~a) by the usual argument, then NotNotE
        let or_l = Proof::join(Rule::OrI, Params::index(0), f("a | ~a").unwrap(), vec![Proof::hypothesis(f("a").unwrap(), 1, l)], l);
        let bot1 = Proof::join(Rule::NotE, Params::default(), Formula::falsum(), vec![or_l, Proof::hypothesis(f("~(a | ~a)").unwrap(), 0, l)], l);
        let not_a = Proof::join(Rule::NotI, Params::discharging(vec![1]), f("~a").unwrap(), vec![bot1], l);
        let or_r = Proof::join(Rule::OrI, Params::index(1), f("a | ~a").unwrap(), vec![not_a], l);
        let bot2 = Proof::join(Rule::NotE, Params::default(), Formula::falsum(), vec![or_r, Proof::hypothesis(f("~(a | ~a)").unwrap(), 0, l)], l);
        let nn = Proof::join(Rule::NotI, Params::discharging(vec![0]), f("~~(a | ~a)").unwrap(), vec![bot2], l);
        Proof::join(Rule::NotNotE, Params::default(), f("a | ~a").unwrap(), vec![nn], l)
    }

    #[test]
    fn cat_mammal_proof_checks() {
        let p = cats(I);
        assert_eq!(check_proof(&p), Ok(()));
        assert_eq!(p.len(), 4);
        // ImpliesE comes last with two premises
        assert_eq!(p.root().premises.len(), 2);
    }

    #[test]
    fn excluded_middle_needs_classical_logic() {
        assert_eq!(check_proof(&excluded_middle(C)), Ok(()));
        let e = check_proof(&excluded_middle(I)).unwrap_err();
        assert_eq!(p_rule(&excluded_middle(I), e.step), Rule::NotNotE);
    }

    fn p_rule(p: &Proof, i: usize) -> Rule {
        p.steps[i].rule
    }

    #[test]
    fn rejects_wrong_conclusion() {
        let mut p = cats(C);
        p.steps[3].conclusion = f("mammal(alice)").unwrap();
        assert_eq!(check_proof(&p).unwrap_err().step, 3);
    }

    #[test]
    fn rejects_undischarged_hypothesis() {
        let p = Proof::hypothesis(f("a").unwrap(), 0, C);
        assert!(check_proof(&p).is_err());
    }

    #[test]
    fn rejects_shared_premise_and_orphans() {
        let mut p = cats(C);
        p.steps[3].premises = vec![0, 0];
        assert!(check_proof(&p).is_err());
        let mut q = cats(C);
        q.steps.insert(0, Proof::axiom(f("q").unwrap(), C).steps[0].clone());
        for s in &mut q.steps[1..] {
            for x in &mut s.premises {
                *x += 1;
            }
        }
        assert_eq!(check_proof(&q).unwrap_err().step, 0);
    }

    #[test]
    fn wrong_discharge_formula_rejected() {
        let body = Proof::join(Rule::NotE, Params::default(), Formula::falsum(), vec![
            Proof::hypothesis(f("a").unwrap(), 0, C),
            Proof::axiom(f("~a").unwrap(), C),
        ], C);
        let good = Proof::join(Rule::NotI, Params::discharging(vec![0]), f("~a").unwrap(), vec![body.clone()], C);
        assert_eq!(check_proof(&good), Ok(()));
        let wrong = Proof::join(Rule::NotI, Params::discharging(vec![0]), f("~b").unwrap(), vec![body], C);
        assert!(check_proof(&wrong).is_err());
    }

    #[test]
    fn equality_substitution_both_directions() {
        let eq = Proof::axiom(f("arg1(e)=bob").unwrap(), C);
        let fact = Proof::axiom(f("cat(arg1(e))").unwrap(), C);
        let mut params = Params::default();
        params.path = Some(vec![0]);
        let p = Proof::join(Rule::EqualityE, params.clone(), f("cat(bob)").unwrap(), vec![eq.clone(), fact], C);
        assert_eq!(check_proof(&p), Ok(()));
        let back = Proof::join(Rule::EqualityE, params, f("cat(arg1(e))").unwrap(), vec![eq, Proof::axiom(f("cat(bob)").unwrap(), C)], C);
        assert_eq!(check_proof(&back), Ok(()));
    }

    #[test]
    fn implication_intro_and_false_elim() {
        // ~a |- a => b via FalseE
        let bot = Proof::join(Rule::NotE, Params::default(), Formula::falsum(), vec![
            Proof::hypothesis(f("a").unwrap(), 3, I),
            Proof::axiom(f("~a").unwrap(), I),
        ], I);
        let b = Proof::join(Rule::FalseE, Params::default(), f("b").unwrap(), vec![bot], I);
        let p = Proof::join(Rule::ImpliesI, Params::discharging(vec![3]), f("a => b").unwrap(), vec![b], I);
        assert_eq!(check_proof(&p), Ok(()));
    }

    #[test]
    fn existential_intro_and_elim() {
        let intro = Proof::join(Rule::ExistsI, Params::term(Formula::constant("bob")), f("?[x]:(cat(x))").unwrap(), vec![Proof::axiom(f("cat(bob)").unwrap(), I)], I);
        assert_eq!(check_proof(&intro), Ok(()));
        // from ?x cat(x) and ![x](cat(x) => animal(x)) derive ?x animal(x)
        let w = Formula::constant("w");
        let inst = Proof::join(Rule::ForAllE, Params::term(w.clone()), f("cat(w) => animal(w)").unwrap(), vec![Proof::axiom(f("![x]:(cat(x) => animal(x))").unwrap(), I)], I);
        let aw = Proof::join(Rule::ImpliesE, Params::default(), f("animal(w)").unwrap(), vec![Proof::hypothesis(f("cat(w)").unwrap(), 0, I), inst], I);
        let ex = Proof::join(Rule::ExistsI, Params::term(w.clone()), f("?[x]:(animal(x))").unwrap(), vec![aw], I);
        let mut params = Params::term(w);
        params.discharges = vec![0];
        let p = Proof::join(Rule::ExistsE, params, f("?[x]:(animal(x))").unwrap(), vec![Proof::axiom(f("?[x]:(cat(x))").unwrap(), I), ex], I);
        assert_eq!(check_proof(&p), Ok(()));
    }
}
