//! Deterministic parser from a controlled English fragment to logical forms.
//!
//! Named entities and definite descriptions become name-scoped
//! existentials, `∃j(name(j)="Bob" ∧ …)`, so which constant a name refers to
//! is left to inference. Transitive verbs introduce events with `arg1` and
//! `arg2` roles.

mod grammar;
mod lexicon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hol::{Formula, Node};
use grammar::{conjunction, err, Builder};
pub use grammar::Entity;
pub use lexicon::{identifier, Lexicon, LexiconError, Pos};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported construction at \"{span}\": {reason}")]
pub struct ParseError {
    pub span: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SentenceKind {
    Declarative,
    PolarQuestion,
    WhQuestion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub kind: SentenceKind,
}

impl Sentence {
    pub fn declarative(text: &str) -> Self {
        Sentence { text: text.to_string(), kind: SentenceKind::Declarative }
    }

    /// Classify a query: "What/Which …" is a wh-question; anything else is
    /// polar, whether phrased as a question or as a statement.
    pub fn question(text: &str) -> Self {
        let first = text.split_whitespace().next().unwrap_or("").to_lowercase();
        let kind = if matches!(first.as_str(), "what" | "which") { SentenceKind::WhQuestion } else { SentenceKind::PolarQuestion };
        Sentence { text: text.to_string(), kind }
    }
}

/// A parse: name-scoped entities around a core formula.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedForm {
    pub kind: SentenceKind,
    pub entities: Vec<Entity>,
    /// Core with entity `k` as the constant `?eK` (and the queried
    /// variable as `?x` for wh-questions).
    core: Formula,
    pub formula: Formula,
}

impl ParsedForm {
    fn new(kind: SentenceKind, entities: Vec<Entity>, core: Formula) -> Self {
        let mut f = core.clone();
        for (k, e) in entities.iter().enumerate().rev() {
            let c = Builder::entity_symbol(k);
            let j = Formula::constant(c.clone());
            let mut parts = vec![Formula::equality(Formula::apply("name", vec![j.clone()]), Formula::string(&e.name))];
            parts.extend(e.types.iter().map(|t| Formula::atom(t.as_str(), vec![j.clone()])));
            parts.push(f);
            f = Formula::exists(Formula::and(parts).abstract_constant(&c));
        }
        if kind == SentenceKind::WhQuestion {
            f = Formula::lambda(f.abstract_constant(&Builder::var_symbol()));
        }
        ParsedForm { kind, entities, core, formula: f }
    }
}

fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().map(|w| w.trim_end_matches(['.', '?', '!', ','])).filter(|w| !w.is_empty()).collect()
}

fn declarative(b: &mut Builder, ws: &[&str]) -> Result<Formula, ParseError> {
    let first = ws.first().map(|w| w.to_lowercase()).unwrap_or_default();
    match first.as_str() {
        "" => Err(err(ws, "empty sentence")),
        "if" => {
            let then = ws.iter().position(|w| w.eq_ignore_ascii_case("then")).ok_or_else(|| err(ws, "conditional without \"then\""))?;
            b.antecedent = true;
            let ant = b.conj(&ws[1..then])?;
            b.antecedent = false;
            let cons = b.conj(&ws[then + 1..])?;
            Ok(generalize(b, Formula::implies(ant, cons)))
        }
        "all" => {
            let are = ws.iter().position(|w| w.eq_ignore_ascii_case("are")).ok_or_else(|| err(ws, "expected \"are\""))?;
            let ant = all_subject(b, &ws[1..are])?;
            let x = b.var();
            let cons = b.vp(&x, &ws[are..])?;
            Ok(generalize(b, Formula::implies(ant, cons)))
        }
        "every" => {
            let rest = &ws[1..];
            match rest.iter().position(|w| *w == "that") {
                None => {
                    let k = (1..rest.len()).find(|&k| matches!(rest[k], "is" | "has" | "can" | "cannot" | "does")).ok_or_else(|| err(ws, "no verb found"))?;
                    let head = b.restricted_noun(&rest[..k])?;
                    let x = b.var();
                    let cons = b.vp(&x, &rest[k..])?;
                    Ok(generalize(b, Formula::implies(head, cons)))
                }
                Some(that) => {
                    let head = b.restricted_noun(&rest[..that])?;
                    let x = b.var();
                    let tail = &rest[that + 1..];
                    // first split at which both verb phrases parse
                    for k in 1..tail.len() {
                        let snap = b.snapshot();
                        b.antecedent = true;
                        let rel = b.vp(&x, &tail[..k]);
                        b.antecedent = false;
                        if let Ok(rel) = rel {
                            if let Ok(cons) = b.vp(&x, &tail[k..]) {
                                return Ok(generalize(b, Formula::implies(Formula::and(vec![head, rel]), cons)));
                            }
                        }
                        b.restore(snap);
                    }
                    Err(err(tail, "could not split the relative clause from the main verb phrase"))
                }
            }
        }
        _ => b.conj(ws),
    }
}

/// "All [adjectives] nouns": the conjunction of their predicates on `x`.
fn all_subject(b: &mut Builder, ws: &[&str]) -> Result<Formula, ParseError> {
    let Some((noun, adjs)) = ws.split_last() else { return Err(err(ws, "missing subject")) };
    let x = b.var();
    let mut parts = Vec::new();
    for a in adjs {
        parts.push(b.vp(&x, &["is", a])?);
    }
    let head = b.restricted_noun(&[noun])?;
    if !(matches!(*noun, "things" | "people") && !parts.is_empty()) {
        parts.push(head);
    }
    Ok(conjunction(parts))
}

/// Bind `?x` and any antecedent events universally.
fn generalize(b: &mut Builder, f: Formula) -> Formula {
    let mut f = f;
    for e in b.universal_events.drain(..).rev() {
        f = Formula::forall(f.abstract_constant(&e));
    }
    if b.uses_var {
        f = Formula::forall(f.abstract_constant(&Builder::var_symbol()));
        b.uses_var = false;
    }
    f
}

pub fn parse_sentence(s: &Sentence) -> Result<ParsedForm, ParseError> {
    parse_sentence_with(s, Lexicon::builtin())
}

pub fn parse_sentence_with(s: &Sentence, lex: &Lexicon) -> Result<ParsedForm, ParseError> {
    let ws = words(&s.text);
    let mut b = Builder::new(lex);
    let core = declarative(&mut b, &ws)?;
    if b.uses_var {
        return Err(err(&ws, "pronoun outside a generic sentence"));
    }
    Ok(ParsedForm::new(SentenceKind::Declarative, b.entities, core))
}

pub fn parse_question(s: &Sentence) -> Result<ParsedForm, ParseError> {
    parse_question_with(s, Lexicon::builtin())
}

pub fn parse_question_with(s: &Sentence, lex: &Lexicon) -> Result<ParsedForm, ParseError> {
    let ws = words(&s.text);
    let mut b = Builder::new(lex);
    let first = ws.first().map(|w| w.to_lowercase()).unwrap_or_default();
    match first.as_str() {
        "what" | "which" => {
            let k = (2..ws.len()).find(|&k| matches!(ws[k], "is" | "are" | "have" | "has" | "can")).ok_or_else(|| err(&ws, "no verb found"))?;
            let head = b.restricted_noun(&ws[1..k])?;
            let x = b.var();
            let vp = b.vp(&x, &ws[k..])?;
            Ok(ParsedForm::new(SentenceKind::WhQuestion, b.entities, Formula::and(vec![head, vp])))
        }
        "is" | "are" | "does" | "do" | "can" => {
            let aux = if matches!(first.as_str(), "are") { "is" } else { first.as_str() };
            for j in 2..ws.len() {
                let snap = b.snapshot();
                let attempt = b.np(&ws[1..j]).and_then(|subj| {
                    let mut vp: Vec<&str> = vec![aux];
                    vp.extend_from_slice(&ws[j..]);
                    b.vp(&subj, &vp)
                });
                match attempt {
                    Ok(core) if !b.uses_var => return Ok(ParsedForm::new(SentenceKind::PolarQuestion, b.entities, core)),
                    _ => b.restore(snap),
                }
            }
            Err(err(&ws, "unsupported question"))
        }
        _ => {
            let p = parse_sentence_with(&Sentence::declarative(&s.text), lex)?;
            Ok(ParsedForm { kind: SentenceKind::PolarQuestion, ..p })
        }
    }
}

/// Negate a closed polar form inside its name-scoping existentials.
pub fn negate_query(f: &ParsedForm) -> Result<ParsedForm, ParseError> {
    if f.kind == SentenceKind::WhQuestion {
        return Err(ParseError { span: f.formula.to_string(), reason: "wh-questions have no negation".into() });
    }
    let core = match f.core.node() {
        Node::Not(inner) => inner.clone(),
        _ => Formula::not(f.core.clone()),
    };
    Ok(ParsedForm::new(f.kind, f.entities.clone(), core))
}

impl ParsedForm {
    /// The formula inside the name scopes; entity `k` appears as `?eK`.
    pub fn core(&self) -> &Formula {
        &self.core
    }

    /// Instantiate a wh-form's variable with `c`, giving a closed polar form.
    pub fn instantiate(&self, c: &Formula) -> Option<ParsedForm> {
        if self.kind != SentenceKind::WhQuestion {
            return None;
        }
        let core = self.core.abstract_constant(&Builder::var_symbol()).substitute(c);
        Some(ParsedForm::new(SentenceKind::PolarQuestion, self.entities.clone(), core))
    }

    /// Instantiate a wh-form's variable with the entity named `name`,
    /// itself name-scoped like any other entity.
    pub fn instantiate_named(&self, name: &str) -> Option<ParsedForm> {
        let mut entities = self.entities.clone();
        let k = entities.iter().position(|e| e.name == name).unwrap_or_else(|| {
            entities.push(Entity { name: name.to_string(), types: Default::default() });
            entities.len() - 1
        });
        let p = self.instantiate(&Formula::constant(Builder::entity_symbol(k)))?;
        Some(ParsedForm::new(p.kind, entities, p.core))
    }
}
