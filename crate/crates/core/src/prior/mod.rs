//! Log densities of the generative model.
//!
//! Everything is unnormalized with respect to the validity conditioning,
//! which cancels in every ratio the sampler needs.

mod base;
mod proof;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::hol::{Formula, Node, Symbol};
use crate::proof::Rule;
use crate::theory::Theory;

pub use base::{log_base_density, sample_axiom, NodeType, SymbolCrp};
pub use proof::log_prior_proof;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodeTypeWeights {
    pub atom: f64,
    pub equality: f64,
    pub not: f64,
    pub and: f64,
    pub or: f64,
    pub implies: f64,
    pub forall: f64,
    pub exists: f64,
}

impl Default for NodeTypeWeights {
    fn default() -> Self {
        NodeTypeWeights { atom: 1.0, equality: 1.0, not: 1.0, and: 1.0, or: 1.0, implies: 1.0, forall: 1.0, exists: 1.0 }
    }
}

impl NodeTypeWeights {
    pub fn get(&self, t: NodeType) -> f64 {
        match t {
            NodeType::Atom => self.atom,
            NodeType::Equality => self.equality,
            NodeType::Not => self.not,
            NodeType::And => self.and,
            NodeType::Or => self.or,
            NodeType::Implies => self.implies,
            NodeType::ForAll => self.forall,
            NodeType::Exists => self.exists,
        }
    }

    fn total(&self) -> f64 {
        NodeType::ALL.iter().map(|t| self.get(*t)).sum()
    }

    pub fn log_prob(&self, t: NodeType) -> f64 {
        (self.get(t) / self.total()).ln()
    }
}

/// Parameters of the theory and proof priors. Loads from JSON; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    pub crp_alpha: f64,
    pub node_type_weights: NodeTypeWeights,
    pub predicate_concentration: f64,
    pub constant_concentration: f64,
    pub name_lambda: f64,
    pub name_collision_penalty: f64,
    pub set_size_geometric_p: f64,
    pub proof_length_rate: f64,
    /// Rule name → weight; missing rules weigh 1.
    pub deduction_rule_weights: BTreeMap<String, f64>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            crp_alpha: 0.1,
            node_type_weights: NodeTypeWeights::default(),
            predicate_concentration: 1.0,
            constant_concentration: 1.0,
            name_lambda: (-100.0f64).exp(),
            name_collision_penalty: 2000.0,
            set_size_geometric_p: 1e-4,
            proof_length_rate: 20.0,
            deduction_rule_weights: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad config: {0}")]
    Invalid(String),
}

impl PriorConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: PriorConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must be positive and finite")))
            }
        };
        positive("crp_alpha", self.crp_alpha)?;
        positive("predicate_concentration", self.predicate_concentration)?;
        positive("constant_concentration", self.constant_concentration)?;
        positive("proof_length_rate", self.proof_length_rate)?;
        positive("name_collision_penalty", self.name_collision_penalty)?;
        for t in NodeType::ALL {
            positive("node_type_weights", self.node_type_weights.get(t))?;
        }
        if !(self.name_lambda > 0.0 && self.name_lambda < 1.0) {
            return Err(ConfigError::Invalid("name_lambda must be in (0,1)".into()));
        }
        if !(self.set_size_geometric_p > 0.0 && self.set_size_geometric_p < 1.0) {
            return Err(ConfigError::Invalid("set_size_geometric_p must be in (0,1)".into()));
        }
        for (k, &v) in &self.deduction_rule_weights {
            if Rule::from_name(k).is_none() {
                return Err(ConfigError::Invalid(format!("unknown rule `{k}`")));
            }
            positive("deduction_rule_weights", v)?;
        }
        Ok(())
    }

    pub fn rule_weight(&self, r: Rule) -> f64 {
        self.deduction_rule_weights.get(r.name()).copied().unwrap_or(1.0)
    }

    /// `log p(n)` for a geometric count on {0, 1, …}.
    pub fn log_geometric(&self, n: u64) -> f64 {
        let p = self.set_size_geometric_p;
        p.ln() + n as f64 * (-p).ln_1p()
    }

    /// Log normalizer of the name-count distribution `∝ λ^{k²}`.
    pub fn log_name_normalizer(&self) -> f64 {
        let ll = self.name_lambda.ln();
        let mut z = 0.0;
        for k in 0..64u32 {
            let term = (ll * f64::from(k * k)).exp();
            z += term;
            if term < 1e-300 {
                break;
            }
        }
        z.ln()
    }
}

/// log of the Poisson pmf at `k`.
pub fn log_poisson(k: usize, rate: f64) -> f64 {
    k as f64 * rate.ln() - rate - log_factorial(k)
}

/// Exact summation below 10⁴, `ln Γ(k+1)` above.
fn log_factorial(k: usize) -> f64 {
    if k < 10_000 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Name-count prior and collision penalty for the theory's entities.
pub fn log_name_terms(t: &Theory, cfg: &PriorConfig) -> f64 {
    let mut names: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut bearers: BTreeMap<Formula, BTreeSet<Symbol>> = BTreeMap::new();
    for c in t.constants() {
        names.insert(c.clone(), 0);
    }
    for (a, _) in t.axioms() {
        if let Some((c, s)) = name_axiom(a) {
            *names.entry(c.clone()).or_default() += 1;
            bearers.entry(s.clone()).or_default().insert(c.clone());
        }
    }
    let ll = cfg.name_lambda.ln();
    let log_z = cfg.log_name_normalizer();
    let counts: f64 = names.values().map(|&k| ll * (k * k) as f64 - log_z).sum();
    let extra: usize = bearers.values().map(|es| es.len().saturating_sub(1)).sum();
    counts - cfg.name_collision_penalty * extra as f64
}

/// `name(c)="s"` → `(c, "s")`.
pub fn name_axiom(a: &Formula) -> Option<(&Symbol, &Formula)> {
    let Node::Equality(l, r) = a.node() else { return None };
    let Node::Apply(f, args) = l.node() else { return None };
    if f.name() != "name" || args.len() != 1 || !matches!(r.node(), Node::Str(_)) {
        return None;
    }
    Some((args[0].as_const()?, r))
}

/// Sequential CRP seating of the theory's draws (first-draw order), plus base
/// densities, name terms and set-size terms. `−∞` if inconsistent.
pub fn log_prior_theory(t: &Theory, cfg: &PriorConfig) -> f64 {
    if !t.is_consistent() {
        return f64::NEG_INFINITY;
    }
    let alpha = cfg.crp_alpha;
    let mut symbols = SymbolCrp::default();
    let mut seated = 0usize;
    let mut total = 0.0;
    for (a, n) in t.axioms() {
        total += (alpha / (seated as f64 + alpha)).ln();
        total += symbols.log_density_and_observe(a, cfg);
        seated += 1;
        for m in 1..n {
            total += (m as f64 / (seated as f64 + alpha)).ln();
            seated += 1;
        }
    }
    total + log_name_terms(t, cfg)
}

/// Closed-form Ewens probability of the table counts (independent route).
pub fn log_ewens(counts: &[usize], alpha: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let tables = counts.len() as f64;
    tables * alpha.ln() + counts.iter().map(|&c| ln_gamma(c as f64)).sum::<f64>() + ln_gamma(alpha) - ln_gamma(n as f64 + alpha)
}

/// `log p(T1)/p(T2)` computed directly from table counts and base densities
/// rather than as a difference of two sequential evaluations.
pub fn log_prior_ratio(t1: &Theory, t2: &Theory, cfg: &PriorConfig) -> f64 {
    match (t1.is_consistent(), t2.is_consistent()) {
        (false, false) => return f64::NAN,
        (false, true) => return f64::NEG_INFINITY,
        (true, false) => return f64::INFINITY,
        _ => {}
    }
    let counts = |t: &Theory| t.axioms().map(|(_, n)| n).collect::<Vec<_>>();
    let base = |t: &Theory| {
        let mut crp = SymbolCrp::default();
        t.axioms().map(|(a, _)| crp.log_density_and_observe(a, cfg)).sum::<f64>()
    };
    let seating = log_ewens(&counts(t1), cfg.crp_alpha) - log_ewens(&counts(t2), cfg.crp_alpha);
    seating + (base(t1) - base(t2)) + (log_name_terms(t1, cfg) - log_name_terms(t2, cfg))
}

#[cfg(test)]
mod tests;
