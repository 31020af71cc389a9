use crate::hol::{Formula, Node};
use crate::proof::{Proof, Rule};
use crate::theory::Theory;

use super::{log_base_density, log_poisson, PriorConfig};

fn arity(f: &Formula) -> usize {
    match f.node() {
        Node::And(cs) | Node::Or(cs) => cs.len(),
        _ => 1,
    }
}

/// `log p(π | T)` without the validity normalizer: proof length, then per
/// step the rule, uniformly chosen earlier premises and the rule parameters.
pub fn log_prior_proof(p: &Proof, t: &Theory, cfg: &PriorConfig) -> f64 {
    let rules = Rule::inventory(p.logic);
    let total: f64 = rules.iter().map(|r| cfg.rule_weight(*r)).sum();
    let known = (t.constants().len() + t.literal_values().len() + 1) as f64;
    let mut lp = log_poisson(p.len(), cfg.proof_length_rate);
    for (i, s) in p.steps.iter().enumerate() {
        if !rules.contains(&s.rule) {
            return f64::NEG_INFINITY;
        }
        lp += (cfg.rule_weight(s.rule) / total).ln();
        // step j = i+1 picks each premise among the j−1 before it
        if !s.premises.is_empty() {
            lp -= s.premises.len() as f64 * (i as f64).ln();
        }
        let prem = |k: usize| &p.steps[s.premises[k]].conclusion;
        lp += match s.rule {
            Rule::ForAllE | Rule::ExistsI | Rule::ExistsE => -known.ln(),
            Rule::AndE => -(arity(prem(0)) as f64).ln(),
            Rule::OrI => -(arity(&s.conclusion) as f64).ln(),
            Rule::EqualityE => -(prem(1).size() as f64).ln(),
            Rule::FalseE => log_base_density(&s.conclusion, cfg),
            _ => 0.0,
        };
    }
    lp
}
