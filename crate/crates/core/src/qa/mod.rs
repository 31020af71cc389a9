//! Question answering: read a context, then compare the marginal
//! likelihoods of a query and of its negation.

mod eval;
mod oracle;
pub mod templates;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hol::{Formula, Node};
use crate::lang::{negate_query, parse_question, parse_sentence, ParseError, ParsedForm, Sentence, SentenceKind};
use crate::mh::{read_logical_form, run_schedule, step, MHState, MhError, ProposalWeights, Sample, TraceLine};
use crate::prior::PriorConfig;
use crate::proof::Logic;

pub use eval::{evaluate, load_dataset, Answer, DatasetLine, Outcome, Report, SectionReport};
pub use oracle::{oracle_label, oracle_satisfiable, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    True,
    False,
    Unknown,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::True => "true",
            Label::False => "false",
            Label::Unknown => "unknown",
        })
    }
}

/// One dataset example. Polar examples carry `label`, wh examples `answers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub id: String,
    pub context: Vec<String>,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<Vec<String>>,
    /// Report section; defaults to the id up to its first `-`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
}

impl Example {
    pub fn section(&self) -> &str {
        self.section.as_deref().unwrap_or_else(|| self.id.split('-').next().unwrap_or(&self.id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub log_m_true: f64,
    pub log_m_false: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub prior: PriorConfig,
    pub weights: ProposalWeights,
    pub logic: Logic,
    /// Recorded iterations per query chain.
    pub iters: usize,
    pub threshold: f64,
    /// Leading samples of each chain left out of the marginal.
    pub burn_in: usize,
    /// MH steps after reading each context sentence.
    pub read_iters: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            prior: PriorConfig::default(),
            weights: ProposalWeights::default(),
            logic: Logic::Classical,
            iters: 400,
            threshold: 2000.0,
            burn_in: 0,
            read_iters: 10,
        }
    }
}

#[derive(Debug, Error)]
pub enum QaError {
    #[error("context sentence {index}: {source}")]
    Context { index: usize, source: ParseError },
    #[error("query: {0}")]
    Query(ParseError),
    #[error(transparent)]
    Inference(#[from] MhError),
    #[error("expected a {0} query")]
    WrongKind(&'static str),
}

/// Log-sum-exp of `log_joint` over distinct sample keys; `−∞` if empty.
pub fn estimate_log_marginal(samples: &[Sample]) -> f64 {
    let mut distinct: HashMap<&str, f64> = HashMap::new();
    for s in samples {
        distinct.entry(&s.key).or_insert(s.log_joint);
    }
    let m = distinct.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + distinct.values().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// The threshold rule on `log_m_true − log_m_false`.
pub fn label_for(log_m_true: f64, log_m_false: f64, threshold: f64) -> Label {
    let delta = log_m_true - log_m_false;
    if delta >= threshold {
        Label::True
    } else if delta <= -threshold {
        Label::False
    } else {
        Label::Unknown
    }
}

/// Stable seed derivation from a global seed and any hashable tag.
pub fn derive_seed(seed: u64, tag: &impl Hash) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    seed.hash(&mut h);
    tag.hash(&mut h);
    h.finish()
}

pub fn parse_context(context: &[String]) -> Result<Vec<ParsedForm>, QaError> {
    context
        .iter()
        .enumerate()
        .map(|(index, s)| parse_sentence(&Sentence::declarative(s)).map_err(|source| QaError::Context { index, source }))
        .collect()
}

/// Read the context sentences in order into one chain.
pub fn read_context(context: &[ParsedForm], settings: &Settings, seed: u64) -> Result<MHState, MhError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &"context"));
    let mut state = MHState::new(settings.logic);
    for p in context {
        state = read_logical_form(state, &p.formula, &settings.prior, &settings.weights, &mut rng, settings.read_iters)?;
    }
    Ok(state)
}

/// Marginal of `x` added to the context chain: `−∞` when unreadable.
/// The chain's RNG depends only on `seed` and `x`, so a query and its
/// negation get the same chains whichever is asked first.
fn log_marginal<'t>(state: &MHState, x: &Formula, settings: &Settings, seed: u64, mut trace: Option<&mut (dyn FnMut(&TraceLine) + 't)>) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &x.canonical().to_string()));
    let Ok(s) = read_logical_form(state.clone(), x, &settings.prior, &settings.weights, &mut rng, 0) else {
        return (f64::NEG_INFINITY, 0);
    };
    let mut forward = |l: &TraceLine| {
        if let Some(t) = trace.as_mut() {
            t(l)
        }
    };
    let (_, samples) = run_schedule(s, &settings.prior, &settings.weights, &mut rng, settings.iters, Some(&mut forward));
    let kept = &samples[settings.burn_in.min(samples.len())..];
    (estimate_log_marginal(kept), kept.len())
}

fn verdict_from_state<'t>(state: &MHState, q: &ParsedForm, settings: &Settings, seed: u64, mut trace: Option<&mut (dyn FnMut(&TraceLine) + 't)>) -> Verdict {
    let neg = negate_query(q).expect("polar form");
    let (t, nt) = log_marginal(state, &q.formula, settings, seed, trace.as_deref_mut());
    let (f, nf) = log_marginal(state, &neg.formula, settings, seed, trace);
    Verdict { label: label_for(t, f, settings.threshold), log_m_true: t, log_m_false: f, samples_used: nt + nf }
}

pub fn answer_polar(ex: &Example, settings: &Settings, seed: u64) -> Result<Verdict, QaError> {
    answer_polar_traced(ex, settings, seed, None)
}

pub fn answer_polar_traced(ex: &Example, settings: &Settings, seed: u64, trace: Option<&mut dyn FnMut(&TraceLine)>) -> Result<Verdict, QaError> {
    let context = parse_context(&ex.context)?;
    let q = parse_question(&Sentence::question(&ex.query)).map_err(QaError::Query)?;
    if q.kind == SentenceKind::WhQuestion {
        return Err(QaError::WrongKind("polar"));
    }
    let state = read_context(&context, settings, seed)?;
    Ok(verdict_from_state(&state, &q, settings, seed, trace))
}

/// Read a context and return the most probable theory found by `iters`
/// further MH steps.
pub fn read_theory(context: &[String], settings: &Settings, seed: u64) -> Result<MHState, QaError> {
    let context = parse_context(context)?;
    Ok(best_state(read_context(&context, settings, seed)?, settings, seed))
}

/// Highest-joint state visited by a chain started from `state`.
fn best_state(state: MHState, settings: &Settings, seed: u64) -> MHState {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &"best"));
    let mut best = state.clone();
    let mut cur = state;
    for _ in 0..settings.iters {
        cur = step(cur, &settings.weights, &settings.prior, &mut rng).0;
        if cur.log_joint > best.log_joint {
            best = cur.clone();
        }
    }
    best
}

/// `name(c) = "…"` values of a theory, per constant.
fn names(state: &MHState) -> BTreeMap<Formula, String> {
    let mut out = BTreeMap::new();
    for (a, _) in state.theory.axioms() {
        if let Node::Equality(l, r) = a.node() {
            if let (Node::Apply(f, args), Node::Str(s)) = (l.node(), r.node()) {
                if f.name() == "name" && args.len() == 1 {
                    out.insert(args[0].clone(), s.to_string());
                }
            }
        }
    }
    out
}

/// Names of entities in the best sampled context theory for which the query,
/// instantiated with a name-scoped reference to the entity, is answered true.
/// Constants are exchangeable within a chain, so the instantiation refers to
/// the entity by name rather than by constant.
pub fn answer_wh(ex: &Example, settings: &Settings, seed: u64) -> Result<BTreeSet<String>, QaError> {
    let context = parse_context(&ex.context)?;
    let q = parse_question(&Sentence::question(&ex.query)).map_err(QaError::Query)?;
    if q.kind != SentenceKind::WhQuestion {
        return Err(QaError::WrongKind("wh"));
    }
    let state = best_state(read_context(&context, settings, seed)?, settings, seed);
    let names: BTreeSet<String> = names(&state).into_values().collect();
    let mut out = BTreeSet::new();
    for name in names {
        let inst = q.instantiate_named(&name).expect("wh form");
        if verdict_from_state(&state, &inst, settings, seed, None).label == Label::True {
            out.insert(name);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
