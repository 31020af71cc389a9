//! Abductive world-model inference: sentences are read as logical forms,
//! each explained by a natural-deduction proof from an abduced theory, and
//! theories and proofs are sampled jointly with Metropolis–Hastings.
//!
//! Modules, bottom up: [`hol`] formulas, [`proof`] natural deduction,
//! [`theory`] axiom store and closure, [`prior`] theory/proof priors,
//! [`abduction`] proof initialization, [`mh`] the sampler, [`lang`] the
//! sentence parser and [`qa`] question answering.

pub mod abduction;
pub mod hol;
pub mod lang;
pub mod mh;
pub mod prior;
pub mod proof;
pub mod qa;
pub mod theory;

pub use hol::{parse_formula, Formula, Symbol};
pub use lang::{parse_question, parse_sentence, ParseError, ParsedForm, Sentence, SentenceKind};
pub use mh::{MHState, MhError, ProposalWeights, TraceLine};
pub use prior::{ConfigError, PriorConfig};
pub use proof::{check_proof, parse_proof, Logic, Proof, ProofError, Rule};
pub use qa::{Example, Label, QaError, Report, Settings, Verdict};
pub use theory::Theory;
