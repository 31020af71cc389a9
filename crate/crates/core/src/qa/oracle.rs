//! Brute-force labels for the propositional part of the fragment.
//!
//! Entities are identified by name. A context becomes ground facts, ground
//! conditionals and one-variable rules. Under classical logic each ground
//! conditional is case-split into "all consequents hold" or "one antecedent
//! literal fails"; under intuitionistic logic it only fires forwards. Rules
//! with a single positive antecedent also fire contrapositively. A query is
//! true when its negation is inconsistent with every reading, false when the
//! query itself is, and unknown otherwise.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use super::{Example, Label};
use crate::hol::{Formula, Node};
use crate::lang::{parse_question, parse_sentence, ParseError, ParsedForm, Sentence, SentenceKind};
use crate::proof::Logic;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("parse failure: {0}")]
    Parse(#[from] ParseError),
    #[error("outside the oracle fragment: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Arg {
    Var,
    Name(String),
}

/// (holds, predicate, arguments)
type Lit<A> = (bool, String, Vec<A>);
type Ground = Lit<String>;

#[derive(Debug, Clone)]
struct Rule<A> {
    ant: Vec<Lit<A>>,
    cons: Vec<Lit<A>>,
}

#[derive(Debug, Default)]
struct Program {
    facts: Vec<Ground>,
    conditionals: Vec<Rule<String>>,
    generic: Vec<Rule<Arg>>,
    universe: BTreeSet<String>,
}

const VAR: &str = "?x";

fn unsupported(f: &Formula) -> OracleError {
    OracleError::Unsupported(f.to_string())
}

fn arg(t: &Formula, p: &ParsedForm) -> Result<Arg, OracleError> {
    let c = t.as_const().ok_or_else(|| unsupported(t))?;
    if c.name() == VAR {
        return Ok(Arg::Var);
    }
    let k: usize = c.name().strip_prefix("?e").and_then(|k| k.parse().ok()).ok_or_else(|| unsupported(t))?;
    Ok(Arg::Name(p.entities[k].name.clone()))
}

fn literals(f: &Formula, p: &ParsedForm) -> Result<Vec<Lit<Arg>>, OracleError> {
    match f.node() {
        Node::And(cs) => cs.iter().map(|c| literals(c, p)).collect::<Result<Vec<_>, _>>().map(|v| v.concat()),
        Node::Not(b) => match literals(b, p)?.as_slice() {
            [(true, pred, args)] => Ok(vec![(false, pred.clone(), args.clone())]),
            _ => Err(unsupported(f)),
        },
        Node::Atom(pred, args) if !matches!(pred.name(), "less" | "greater") => {
            Ok(vec![(true, pred.name().to_string(), args.iter().map(|a| arg(a, p)).collect::<Result<_, _>>()?)])
        }
        _ => Err(unsupported(f)),
    }
}

fn ground(l: &Lit<Arg>, x: &str) -> Ground {
    let args = l.2.iter().map(|a| match a {
        Arg::Var => x.to_string(),
        Arg::Name(n) => n.clone(),
    });
    (l.0, l.1.clone(), args.collect())
}

fn closed(ls: &[Lit<Arg>]) -> Option<Vec<Ground>> {
    ls.iter().all(|l| !l.2.contains(&Arg::Var)).then(|| ls.iter().map(|l| ground(l, "")).collect())
}

/// Type atoms of the name-scoped entities.
fn scope_facts(p: &ParsedForm) -> Vec<Ground> {
    p.entities.iter().flat_map(|e| e.types.iter().map(|t| (true, t.clone(), vec![e.name.clone()]))).collect()
}

impl Program {
    fn add(&mut self, p: &ParsedForm) -> Result<(), OracleError> {
        self.universe.extend(p.entities.iter().map(|e| e.name.clone()));
        self.facts.extend(scope_facts(p));
        let core = p.core();
        let (generic, body) = match core.node() {
            Node::ForAll(b) => (true, b.substitute(&Formula::constant(VAR))),
            _ => (false, core.clone()),
        };
        match body.node() {
            Node::Implies(a, c) => {
                let rule = Rule { ant: literals(a, p)?, cons: literals(c, p)? };
                match (closed(&rule.ant), closed(&rule.cons)) {
                    (Some(ant), Some(cons)) if !generic => self.conditionals.push(Rule { ant, cons }),
                    _ if generic => self.generic.push(rule),
                    _ => return Err(unsupported(core)),
                }
            }
            _ if !generic => self.facts.extend(closed(&literals(&body, p)?).ok_or_else(|| unsupported(core))?),
            _ => return Err(unsupported(core)),
        }
        Ok(())
    }

    /// Ground rules with their contrapositives.
    fn grounded(&self, logic: Logic, chosen: &[usize]) -> (Vec<Ground>, Vec<Rule<String>>) {
        let mut facts = self.facts.clone();
        let mut rules = Vec::new();
        for (i, c) in self.conditionals.iter().enumerate() {
            match logic {
                Logic::Intuitionistic => rules.push(c.clone()),
                Logic::Classical => match chosen[i] {
                    0 => facts.extend(c.cons.iter().cloned()),
                    k => {
                        let (pos, pred, args) = c.ant[k - 1].clone();
                        facts.push((!pos, pred, args));
                    }
                },
            }
        }
        for r in &self.generic {
            for x in &self.universe {
                let g = |ls: &[Lit<Arg>]| ls.iter().map(|l| ground(l, x)).collect::<Vec<_>>();
                rules.push(Rule { ant: g(&r.ant), cons: g(&r.cons) });
                if let [(true, pred, args)] = r.ant.as_slice() {
                    for l in &r.cons {
                        if !args.contains(&Arg::Var) || l.2.contains(&Arg::Var) {
                            let ant = ground(&(!l.0, l.1.clone(), l.2.clone()), x);
                            rules.push(Rule { ant: vec![ant], cons: vec![ground(&(false, pred.clone(), args.clone()), x)] });
                        }
                    }
                }
            }
        }
        (facts, rules)
    }

    /// Every reading's facts and rules.
    fn readings(&self, logic: Logic) -> Vec<(Vec<Ground>, Vec<Rule<String>>)> {
        let mut choices: Vec<Vec<usize>> = vec![vec![]];
        if logic == Logic::Classical {
            for c in &self.conditionals {
                choices = choices.into_iter().flat_map(|v| (0..=c.ant.len()).map(move |k| [v.clone(), vec![k]].concat())).collect();
            }
        }
        choices.iter().map(|ch| self.grounded(logic, ch)).collect()
    }
}

fn consistent(facts: &[Ground], rules: &[Rule<String>], extra: &[Ground]) -> bool {
    let mut known: HashSet<Ground> = facts.iter().chain(extra).cloned().collect();
    loop {
        let mut grew = false;
        for r in rules {
            if r.ant.iter().all(|l| known.contains(l)) {
                for c in &r.cons {
                    grew |= known.insert(c.clone());
                }
            }
        }
        if !grew {
            break;
        }
    }
    !known.iter().any(|(pos, p, a)| *pos && known.contains(&(false, p.clone(), a.clone())))
}

fn program(context: &[String]) -> Result<Program, OracleError> {
    let mut prog = Program::default();
    for s in context {
        prog.add(&parse_sentence(&Sentence::declarative(s))?)?;
    }
    Ok(prog)
}

/// Whether some reading of the context is consistent.
pub fn oracle_satisfiable(context: &[String], logic: Logic) -> Result<bool, OracleError> {
    Ok(program(context)?.readings(logic).iter().any(|(f, r)| consistent(f, r, &[])))
}

pub fn oracle_label(ex: &Example, logic: Logic) -> Result<Label, OracleError> {
    let mut prog = program(&ex.context)?;
    let q = parse_question(&Sentence::question(&ex.query))?;
    if q.kind == SentenceKind::WhQuestion {
        return Err(OracleError::Unsupported(ex.query.clone()));
    }
    prog.universe.extend(q.entities.iter().map(|e| e.name.clone()));
    let core = closed(&literals(q.core(), &q)?).ok_or_else(|| unsupported(q.core()))?;
    let types = scope_facts(&q);
    let readings = prog.readings(logic);
    let holds = readings.iter().any(|(f, r)| consistent(f, r, &[types.clone(), core.clone()].concat()));
    let fails = core.iter().any(|(pos, p, a)| {
        let extra = [types.clone(), vec![(!pos, p.clone(), a.clone())]].concat();
        readings.iter().any(|(f, r)| consistent(f, r, &extra))
    });
    Ok(match (holds, fails) {
        (true, false) => Label::True,
        (false, true) => Label::False,
        _ => Label::Unknown,
    })
}
