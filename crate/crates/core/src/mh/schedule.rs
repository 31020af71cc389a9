//! Reading sentences into a chain and the sampling schedule.

use std::fmt;

use rand::Rng;

use super::{explore, step, Kind, MHState, MhError, ProposalWeights};
use crate::abduction::Abducer;
use crate::hol::{Formula, Symbol};
use crate::proof::Proof;
use crate::theory::Theory;
use crate::prior::PriorConfig;

/// Reshuffles of the initial proof search before giving up.
pub const INIT_RETRIES: usize = 32;
/// Full re-reads tried alongside the warm start.
pub const COLD_STARTS: usize = 2;
/// Regular iterations between exploratory bursts.
pub const REINIT_EVERY: usize = 100;
/// Forced-accept steps in each burst.
pub const EXPLORATORY_STEPS: usize = 20;

/// One recorded posterior sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub iteration: usize,
    pub key: String,
    pub log_joint: f64,
}

/// One line of the chain trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    pub iteration: usize,
    /// Position inside an exploratory burst, if this step belongs to one.
    pub exploratory: Option<usize>,
    pub kind: Option<Kind>,
    pub accepted: bool,
    pub log_joint: f64,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exploratory {
            Some(k) => write!(f, "{}+{}", self.iteration, k)?,
            None => write!(f, "{}", self.iteration)?,
        }
        let kind = self.kind.map_or("none".to_string(), |k| k.to_string());
        let verdict = if self.accepted { "accept" } else { "reject" };
        write!(f, "\t{kind}\t{verdict}\t{}", self.log_joint)
    }
}

fn extend(state: &MHState, x: &Formula, reserved: &[Symbol], cfg: &PriorConfig, rng: &mut (impl Rng + ?Sized)) -> Option<MHState> {
    let mut t = state.theory.clone();
    let p = Abducer::new(&mut t, state.logic, rng).reserve(state.constants().into_iter().chain(reserved.iter().cloned())).prove(x)?;
    let mut proofs = state.proofs.clone();
    proofs.push(p);
    let mut obs = state.observations.clone();
    obs.push(x.clone());
    MHState::from_proofs(obs, proofs, state.logic, cfg)
}

/// Most probable of [`INIT_RETRIES`] warm starts.
fn best_extend(state: &MHState, x: &Formula, reserved: &[Symbol], cfg: &PriorConfig, rng: &mut (impl Rng + ?Sized)) -> Option<MHState> {
    let mut best: Option<MHState> = None;
    for _ in 0..INIT_RETRIES {
        if let Some(s) = extend(state, x, reserved, cfg, rng) {
            if best.as_ref().is_none_or(|b| s.log_joint > b.log_joint) {
                best = Some(s);
            }
        }
    }
    best
}

/// Prove the new sentence first, then the earlier ones, from scratch.
fn restart_once(state: &MHState, x: &Formula, cfg: &PriorConfig, rng: &mut (impl Rng + ?Sized)) -> Option<MHState> {
    let mut t = Theory::new();
    let reserved: Vec<Symbol> = x.free_constants().into_iter().chain(state.observations.iter().flat_map(|o| o.free_constants())).collect();
    let mut prove = |f: &Formula| Abducer::new(&mut t, state.logic, &mut *rng).reserve(reserved.iter().cloned()).prove(f);
    let last = prove(x)?;
    let mut proofs: Vec<Proof> = state.observations.iter().map(&mut prove).collect::<Option<_>>()?;
    proofs.push(last);
    let mut obs = state.observations.clone();
    obs.push(x.clone());
    MHState::from_proofs(obs, proofs, state.logic, cfg)
}

/// Re-read every observation from an empty theory, the new sentence first,
/// each with [`best_extend`].
fn restart(state: &MHState, x: &Formula, cfg: &PriorConfig, rng: &mut (impl Rng + ?Sized)) -> Option<MHState> {
    let reserved: Vec<Symbol> = x.free_constants().into_iter().chain(state.observations.iter().flat_map(|o| o.free_constants())).collect();
    let mut s = best_extend(&MHState::new(state.logic), x, &reserved, cfg, rng)?;
    for o in &state.observations {
        s = best_extend(&s, o, &reserved, cfg, rng)?;
    }
    // back to reading order, `x` last
    let mut proofs = s.proofs;
    proofs.rotate_left(1);
    let mut obs = state.observations.clone();
    obs.push(x.clone());
    MHState::from_proofs(obs, proofs, state.logic, cfg)
}

/// Add observation `x` to a chain and run `iters` MH steps.
///
/// The new proof is initialized [`INIT_RETRIES`] times against the current
/// theory (warm start), and [`COLD_STARTS`] times all observations are
/// re-read from scratch starting with `x`. The most probable result is kept.
/// Cold starts matter when the current proofs commit to a reading that `x`
/// contradicts, such as a conditional proved through its consequent. If
/// none of these succeed, up to [`INIT_RETRIES`] one-shot re-initializations
/// are tried, first success wins.
pub fn read_logical_form<R: Rng + ?Sized>(
    state: MHState,
    x: &Formula,
    cfg: &PriorConfig,
    w: &ProposalWeights,
    rng: &mut R,
    iters: usize,
) -> Result<MHState, MhError> {
    // the warm start and the cold starts compete; the most probable wins
    let mut next = best_extend(&state, x, &[], cfg, rng);
    for _ in 0..COLD_STARTS {
        if let Some(s) = restart(&state, x, cfg, rng) {
            if next.as_ref().is_none_or(|b| s.log_joint > b.log_joint) {
                next = Some(s);
            }
        }
    }
    if next.is_none() {
        // greedy re-reads can dead-end; fall back to one-shot restarts
        next = (0..INIT_RETRIES).find_map(|_| restart_once(&state, x, cfg, rng));
    }
    let mut s = next.ok_or_else(|| MhError::Unreadable(x.clone()))?;
    for _ in 0..iters {
        s = step(s, w, cfg, rng).0;
    }
    Ok(s)
}

/// Run `iters` recorded MH iterations; after every [`REINIT_EVERY`]th one
/// (except the last) run [`EXPLORATORY_STEPS`] exploratory steps, which are
/// not recorded as samples.
pub fn run_schedule<R: Rng + ?Sized>(
    mut state: MHState,
    cfg: &PriorConfig,
    w: &ProposalWeights,
    rng: &mut R,
    iters: usize,
    mut trace: Option<&mut dyn FnMut(&TraceLine)>,
) -> (MHState, Vec<Sample>) {
    let mut samples = Vec::with_capacity(iters);
    for i in 1..=iters {
        let (s, kind, accepted) = step(state, w, cfg, rng);
        state = s;
        if let Some(t) = trace.as_mut() {
            t(&TraceLine { iteration: i, exploratory: None, kind, accepted, log_joint: state.log_joint });
        }
        samples.push(Sample { iteration: i, key: state.key(), log_joint: state.log_joint });
        if i % REINIT_EVERY == 0 && i < iters {
            for k in 1..=EXPLORATORY_STEPS {
                let (s, kind, accepted) = explore(state, w, cfg, rng);
                state = s;
                if let Some(t) = trace.as_mut() {
                    t(&TraceLine { iteration: i, exploratory: Some(k), kind, accepted, log_joint: state.log_joint });
                }
            }
        }
    }
    (state, samples)
}
