//! Template grammar over whitespace-separated words.
//!
//! Terms are built with placeholder constants (`?x` for the generic
//! variable, `?eK` for entities, `?vK` for events) that are abstracted into
//! binders once the sentence is complete.

use std::collections::BTreeSet;

use super::lexicon::{identifier, Lexicon, Pos};
use super::ParseError;
use crate::hol::{Formula, Symbol};

const VAR: &str = "?x";
const GENERIC: [&str; 8] = ["something", "someone", "it", "they", "he", "she", "everything", "everyone"];
const AUX: [&str; 8] = ["is", "are", "has", "have", "can", "cannot", "does", "do"];

/// A name-scoped entity: `∃j(name(j)="…" ∧ types(j) ∧ …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub name: String,
    pub types: BTreeSet<String>,
}

pub(crate) fn err(words: &[&str], reason: impl Into<String>) -> ParseError {
    ParseError { span: words.join(" "), reason: reason.into() }
}

fn lower(w: &str) -> String {
    w.to_lowercase()
}

fn is_capitalized(w: &str) -> bool {
    w.chars().next().is_some_and(char::is_uppercase)
}

fn and(mut fs: Vec<Formula>) -> Formula {
    if fs.len() == 1 {
        fs.pop().expect("one element")
    } else {
        Formula::and(fs)
    }
}

pub(crate) struct Builder<'l> {
    lex: &'l Lexicon,
    pub entities: Vec<Entity>,
    pub uses_var: bool,
    events: usize,
    /// Events inside a conditional's antecedent are universally bound.
    pub universal_events: Vec<Symbol>,
    pub antecedent: bool,
}

type R<T> = Result<T, ParseError>;

impl<'l> Builder<'l> {
    pub fn new(lex: &'l Lexicon) -> Self {
        Builder { lex, entities: Vec::new(), uses_var: false, events: 0, universal_events: Vec::new(), antecedent: false }
    }

    pub fn var(&mut self) -> Formula {
        self.uses_var = true;
        Formula::constant(VAR)
    }

    fn entity(&mut self, name: String, ty: Option<String>) -> Formula {
        let k = match self.entities.iter().position(|e| e.name == name) {
            Some(k) => k,
            None => {
                self.entities.push(Entity { name, types: BTreeSet::new() });
                self.entities.len() - 1
            }
        };
        self.entities[k].types.extend(ty);
        Formula::constant(format!("?e{k}").as_str())
    }

    /// Noun at the start of `words`: (predicate, words used).
    fn noun(&self, words: &[&str]) -> Option<(String, usize)> {
        if let Some((p, n)) = self.lex.longest_match(words, Pos::Noun) {
            return Some((p.to_string(), n));
        }
        let w = words.first()?;
        w.chars().all(char::is_alphabetic).then(|| (identifier(w), 1))
    }

    /// Like [`Builder::noun`], dropping a plural "s" from unlisted words.
    fn plural_noun(&self, words: &[&str]) -> Option<(String, usize)> {
        if let Some((p, n)) = self.lex.longest_match(words, Pos::Noun) {
            return Some((p.to_string(), n));
        }
        let w = words.first()?;
        let stem = w.strip_suffix('s').filter(|s| s.len() > 2).unwrap_or(w);
        w.chars().all(char::is_alphabetic).then(|| (identifier(stem), 1))
    }

    pub fn snapshot(&self) -> (usize, usize, bool, usize) {
        (self.entities.len(), self.events, self.uses_var, self.universal_events.len())
    }

    /// Forget entities and events registered by a failed attempt. Types
    /// added to earlier entities are kept; attempts only add types through
    /// noun phrases that parsed.
    pub fn restore(&mut self, (e, v, x, u): (usize, usize, bool, usize)) {
        self.entities.truncate(e);
        self.events = v;
        self.uses_var = x;
        self.universal_events.truncate(u);
    }

    pub fn np(&mut self, words: &[&str]) -> R<Formula> {
        match words {
            [] => Err(err(words, "missing noun phrase")),
            [w] if GENERIC.contains(&lower(w).as_str()) => Ok(self.var()),
            [the, rest @ ..] if lower(the) == "the" && !rest.is_empty() => {
                if let Some(of) = rest.iter().position(|w| *w == "of") {
                    let (head, name) = (&rest[..of], &rest[of + 1..]);
                    let ty = self.noun(head).filter(|(_, n)| *n == head.len()).ok_or_else(|| err(words, "unknown head noun"))?;
                    if name.is_empty() || !name.iter().all(|w| is_capitalized(w)) {
                        return Err(err(words, "expected a proper name after \"of\""));
                    }
                    return Ok(self.entity(name.join(" "), Some(ty.0)));
                }
                let (p, n) = self.noun(rest).ok_or_else(|| err(words, "unknown noun"))?;
                if n != rest.len() {
                    return Err(err(words, "unexpected words after the noun"));
                }
                Ok(self.entity(rest.iter().map(|w| lower(w)).collect::<Vec<_>>().join(" "), Some(p)))
            }
            _ if words.iter().all(|w| is_capitalized(w)) => Ok(self.entity(words.join(" "), None)),
            _ => Err(err(words, "unsupported noun phrase")),
        }
    }

    fn event(&mut self, verb: &str, subj: Formula, obj: Formula) -> Formula {
        let e = Symbol::new(&format!("?v{}", self.events));
        self.events += 1;
        let ev = Formula::constant(e.clone());
        let body = Formula::and(vec![
            Formula::atom(verb, vec![ev.clone()]),
            Formula::equality(Formula::apply("arg1", vec![ev.clone()]), subj),
            Formula::equality(Formula::apply("arg2", vec![ev]), obj),
        ]);
        if self.antecedent {
            self.universal_events.push(e);
            body
        } else {
            Formula::exists(body.abstract_constant(&e))
        }
    }

    fn number(words: &[&str]) -> Option<Formula> {
        words.first()?.replace(',', "").parse::<i64>().ok().map(Formula::number)
    }

    /// Predicate after a copula.
    fn predicative(&mut self, subj: &Formula, words: &[&str]) -> R<Formula> {
        let lw: Vec<String> = words.iter().map(|w| lower(w)).collect();
        match lw.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            [] => Err(err(words, "missing predicate")),
            ["a" | "an", ..] => {
                let (p, n) = self.noun(&words[1..]).ok_or_else(|| err(words, "unknown noun"))?;
                let head = Formula::atom(p.as_str(), vec![subj.clone()]);
                match &words[1 + n..] {
                    [] => Ok(head),
                    [inw, place @ ..] if *inw == "in" => Ok(Formula::and(vec![head, self.located(subj, place)?])),
                    rest => Err(err(rest, "unsupported modifier")),
                }
            }
            ["in", ..] => self.located(subj, &words[1..]),
            [cmp, "than", ..] if self.lex.get(cmp, Pos::Cmp).is_some() => {
                let spec = self.lex.get(cmp, Pos::Cmp).expect("checked");
                let (builtin, measure) = spec.split_once(':').ok_or_else(|| err(words, "malformed comparative entry"))?;
                let n = Self::number(&words[2..]).ok_or_else(|| err(&words[2..], "expected a number"))?;
                let unit = &words[3..];
                if unit.len() > 1 || unit.first().is_some_and(|u| self.lex.get(u, Pos::Unit).is_none()) {
                    return Err(err(unit, "unknown unit"));
                }
                Ok(Formula::atom(builtin, vec![Formula::apply(measure, vec![subj.clone()]), n]))
            }
            [adj] if adj.chars().all(char::is_alphabetic) => Ok(Formula::atom(identifier(adj).as_str(), vec![subj.clone()])),
            _ => Err(err(words, "unsupported predicate")),
        }
    }

    fn located(&mut self, subj: &Formula, place: &[&str]) -> R<Formula> {
        let obj = self.np(place)?;
        Ok(Formula::atom("in", vec![subj.clone(), obj]))
    }

    fn verb(&self, w: &str, pos: Pos) -> Option<String> {
        self.lex.get(w, pos).map(str::to_string)
    }

    /// Verb phrase applied to `subj`.
    pub fn vp(&mut self, subj: &Formula, words: &[&str]) -> R<Formula> {
        let Some(first) = words.first() else { return Err(err(words, "missing verb phrase")) };
        let rest = &words[1..];
        match lower(first).as_str() {
            "is" | "are" => match rest.first() {
                Some(w) if lower(w) == "not" => Ok(Formula::not(self.predicative(subj, &rest[1..])?)),
                _ => self.predicative(subj, rest),
            },
            "has" | "have" => Ok(Formula::atom("has", vec![subj.clone(), self.np(rest)?])),
            "does" | "do" => match rest.first().map(|w| lower(w)) {
                Some(n) if n == "not" => Ok(Formula::not(self.vp(subj, &rest[1..])?)),
                _ => self.vp(subj, rest),
            },
            "can" if rest.first().is_some_and(|w| lower(w) == "not") => Ok(Formula::not(self.ability(subj, &rest[1..])?)),
            "can" => self.ability(subj, rest),
            "cannot" => Ok(Formula::not(self.ability(subj, rest)?)),
            w => {
                if let Some(v) = self.verb(w, Pos::TVerb) {
                    let obj = self.np(rest)?;
                    return Ok(self.event(&v, subj.clone(), obj));
                }
                match (self.verb(w, Pos::IVerb), rest) {
                    (Some(v), []) => Ok(Formula::atom(v.as_str(), vec![subj.clone()])),
                    _ => Err(err(words, "unsupported verb phrase")),
                }
            }
        }
    }

    fn ability(&mut self, subj: &Formula, words: &[&str]) -> R<Formula> {
        match words {
            [v] if v.chars().all(char::is_alphabetic) => {
                let p = self.verb(v, Pos::IVerb).unwrap_or_else(|| identifier(v));
                Ok(Formula::atom(p.as_str(), vec![subj.clone()]))
            }
            _ => Err(err(words, "expected a single verb after \"can\"")),
        }
    }

    fn is_verb(&self, w: &str) -> bool {
        let w = lower(w);
        AUX.contains(&w.as_str()) || self.lex.get(&w, Pos::TVerb).is_some() || self.lex.get(&w, Pos::IVerb).is_some()
    }

    /// A full clause: subject then verb phrase, or a measure statement.
    pub fn clause(&mut self, words: &[&str]) -> R<(Formula, Formula)> {
        if let [the, m, of, ..] = words {
            if lower(the) == "the" && *of == "of" && self.lex.get(m, Pos::Measure).is_some() {
                let measure = self.lex.get(m, Pos::Measure).expect("checked").to_string();
                let k = words.iter().position(|w| *w == "is").ok_or_else(|| err(words, "expected \"is\""))?;
                let subj = self.np(&words[3..k])?;
                let value = &words[k + 1..];
                let n = Self::number(value).ok_or_else(|| err(value, "expected a number"))?;
                if value.len() > 2 || value.get(1).is_some_and(|u| self.lex.get(u, Pos::Unit).is_none()) {
                    return Err(err(value, "unknown unit"));
                }
                return Ok((subj.clone(), Formula::equality(Formula::apply(measure.as_str(), vec![subj]), n)));
            }
        }
        let k = (1..words.len()).find(|&k| self.is_verb(words[k])).ok_or_else(|| err(words, "no verb found"))?;
        let subj = self.np(&words[..k])?;
        let f = self.vp(&subj, &words[k..])?;
        Ok((subj, f))
    }

    /// Clauses joined by "and"; a part without a subject continues the
    /// previous clause ("is a bird and not abnormal").
    pub fn clauses(&mut self, words: &[&str]) -> R<Vec<Formula>> {
        let mut out = Vec::new();
        let mut prev: Option<(Formula, String)> = None;
        for part in words.split(|w| *w == "and") {
            if part.is_empty() {
                return Err(err(words, "empty conjunct"));
            }
            let snap = self.snapshot();
            let attempt = self.clause(part);
            if attempt.is_err() {
                self.restore(snap);
            }
            let (subj, f) = match (attempt, &prev) {
                (Ok(x), _) => x,
                (Err(e), None) => return Err(e),
                (Err(e), Some((s, verb))) => {
                    let s = s.clone();
                    let f = self.vp(&s, part).or_else(|_| {
                        let mut with: Vec<&str> = vec![verb.as_str()];
                        with.extend_from_slice(part);
                        self.vp(&s, &with)
                    });
                    (s, f.map_err(|_| e)?)
                }
            };
            let verb_at = part.iter().position(|w| matches!(lower(w).as_str(), "is" | "are"));
            if let Some(k) = verb_at {
                prev = Some((subj, part[k].to_string()));
            } else {
                prev = Some((subj, prev.map_or("is".to_string(), |p| p.1)));
            }
            out.push(f);
        }
        Ok(out)
    }

    pub fn conj(&mut self, words: &[&str]) -> R<Formula> {
        self.clauses(words).map(and)
    }

    /// Noun with optional "in NP" restriction, applied to the variable.
    pub fn restricted_noun(&mut self, words: &[&str]) -> R<Formula> {
        let (p, n) = self.plural_noun(words).ok_or_else(|| err(words, "unknown noun"))?;
        let x = self.var();
        let head = Formula::atom(p.as_str(), vec![x.clone()]);
        match &words[n..] {
            [] => Ok(head),
            [inw, place @ ..] if *inw == "in" => Ok(Formula::and(vec![head, self.located(&x, place)?])),
            rest => Err(err(rest, "unsupported modifier")),
        }
    }

    pub fn var_symbol() -> Symbol {
        Symbol::new(VAR)
    }

    pub fn entity_symbol(k: usize) -> Symbol {
        Symbol::new(&format!("?e{k}"))
    }
}

pub(crate) fn conjunction(fs: Vec<Formula>) -> Formula {
    and(fs)
}
