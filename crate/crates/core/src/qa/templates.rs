//! Example generators: the Birds and Electricity rule templates, and random
//! small theories inside the oracle's fragment. Gold labels come from
//! [`oracle_label`](super::oracle_label).

use rand::seq::SliceRandom;
use rand::Rng;

use super::{oracle_label, oracle_satisfiable, Example, Label};
use crate::proof::Logic;

const BIRD_RULES: [&str; 6] = [
    "If someone is an ostrich then they are a bird.",
    "If someone is an ostrich then they are abnormal.",
    "If someone is an ostrich then they cannot fly.",
    "If someone is a bird and wounded then they are abnormal.",
    "If someone is wounded then they cannot fly.",
    "If someone is a bird and not abnormal then they can fly.",
];

const BIRD_NAMES: [&str; 6] = ["Arthur", "Bill", "Colin", "Dave", "Emma", "Fred"];

const CIRCUIT_RULES: [&str; 5] = [
    "If the circuit has the switch and the switch is on then the circuit is complete.",
    "If the circuit does not have the switch then the circuit is complete.",
    "If the circuit is complete and the circuit has the light bulb then the light bulb is glowing.",
    "If the circuit is complete and the circuit has the bell then the bell is ringing.",
    "If the circuit is complete and the circuit has the radio then the radio is playing.",
];

fn labelled(id: String, context: Vec<String>, query: String, gold: Label) -> Example {
    Example { id, context, query, label: Some(gold), answers: None, section: None }
}

fn gold(context: &[String], query: &str) -> (Label, Label) {
    let ex = labelled(String::new(), context.to_vec(), query.to_string(), Label::Unknown);
    let at = |logic| oracle_label(&ex, logic).expect("templates stay inside the oracle fragment");
    (at(Logic::Intuitionistic), at(Logic::Classical))
}

/// `n` Birds-style examples: the bird rules plus facts about four birds,
/// resampled until consistent. Gold is the intuitionistic oracle label.
pub fn birds(n: usize, rng: &mut impl Rng) -> Vec<Example> {
    let facts = |name: &str, rng: &mut dyn rand::RngCore| -> Vec<String> {
        let kind = ["a bird", "an ostrich", "not an ostrich"].choose(rng).unwrap();
        let mut out = vec![format!("{name} is {kind}.")];
        match rng.gen_range(0..3) {
            0 => out.push(format!("{name} is wounded.")),
            1 => out.push(format!("{name} is not wounded.")),
            _ => {}
        }
        if rng.gen_bool(0.25) {
            out.push(format!("{name} is not abnormal."));
        }
        out
    };
    let queries = ["can fly", "cannot fly", "is abnormal", "is not abnormal", "is a bird", "is wounded"];
    (0..n)
        .map(|i| {
            let (names, context) = loop {
                let names: Vec<&str> = BIRD_NAMES.choose_multiple(rng, 4).copied().collect();
                let mut context: Vec<String> = names.iter().flat_map(|n| facts(n, rng)).collect();
                context.extend(BIRD_RULES.iter().map(|s| s.to_string()));
                if oracle_satisfiable(&context, Logic::Intuitionistic).expect("inside the oracle fragment") {
                    break (names, context);
                }
            };
            let query = format!("{} {}.", names.choose(rng).unwrap(), queries.choose(rng).unwrap());
            let (g, _) = gold(&context, &query);
            labelled(format!("birds-{i}"), context, query, g)
        })
        .collect()
}

fn circuit_context(mask: u32) -> Vec<String> {
    let facts = [
        "The circuit has the switch.",
        "The circuit does not have the switch.",
        "The switch is on.",
        "The switch is not on.",
        "The circuit has the light bulb.",
        "The circuit has the bell.",
        "The circuit has the radio.",
    ];
    let mut context: Vec<String> = facts.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, s)| s.to_string()).collect();
    context.extend(CIRCUIT_RULES.iter().map(|s| s.to_string()));
    context
}

/// `n` Electricity-style examples over the circuit rules. Gold is the
/// intuitionistic oracle label; exactly `divergent` examples are ones where
/// classical case analysis gives a different label.
pub fn electricity(n: usize, divergent: usize, rng: &mut impl Rng) -> Vec<Example> {
    let queries = [
        "The circuit is complete.",
        "The circuit is not complete.",
        "The light bulb is glowing.",
        "The bell is ringing.",
        "The bell is not ringing.",
        "The radio is playing.",
    ];
    let mut same = Vec::new();
    let mut differ = Vec::new();
    for mask in 0..1u32 << 7 {
        // has/does not have the switch, on/not on: at most one of each pair
        if mask & 3 == 3 || mask >> 2 & 3 == 3 {
            continue;
        }
        let context = circuit_context(mask);
        for q in queries {
            let (g, c) = gold(&context, q);
            let bucket = if g == c { &mut same } else { &mut differ };
            bucket.push((context.clone(), q.to_string(), g));
        }
    }
    let mut chosen: Vec<_> = differ.choose_multiple(rng, divergent).cloned().collect();
    chosen.extend(same.choose_multiple(rng, n - divergent).cloned());
    chosen.shuffle(rng);
    chosen.into_iter().enumerate().map(|(i, (c, q, g))| labelled(format!("electricity-{i}"), c, q, g)).collect()
}

const NAMES: [&str; 5] = ["Anne", "Bob", "Charlie", "Dave", "Erin"];
const ADJECTIVES: [&str; 6] = ["big", "cold", "green", "kind", "quiet", "rough"];

/// A random example with at most `max_sentences` context sentences and
/// `max_entities` names: facts, one-variable rules and ground conditionals
/// over unary adjectives, resampled until the context is satisfiable under
/// both logics. Gold is left unset; ask the oracle per logic.
pub fn random_example(id: String, max_sentences: usize, max_entities: usize, rng: &mut impl Rng) -> Example {
    loop {
        let ex = random_draw(id.clone(), max_sentences, max_entities, rng);
        let ok = |logic| oracle_satisfiable(&ex.context, logic).expect("inside the oracle fragment");
        if ok(Logic::Intuitionistic) && ok(Logic::Classical) {
            return ex;
        }
    }
}

fn random_draw(id: String, max_sentences: usize, max_entities: usize, rng: &mut impl Rng) -> Example {
    let names = &NAMES[..max_entities.clamp(1, NAMES.len())];
    let adjs: Vec<&str> = ADJECTIVES.choose_multiple(rng, 4).copied().collect();
    let lit = |rng: &mut dyn rand::RngCore| {
        let a = adjs.choose(rng).unwrap();
        if rng.gen_bool(0.3) { format!("not {a}") } else { a.to_string() }
    };
    let n = rng.gen_range(2..=max_sentences.max(2));
    let mut context = Vec::with_capacity(n);
    for _ in 0..n {
        let s = match rng.gen_range(0..10) {
            0..=4 => format!("{} is {}.", names.choose(rng).unwrap(), lit(rng)),
            5..=7 => {
                let ant = adjs.choose(rng).unwrap();
                if rng.gen_bool(0.4) {
                    format!("If someone is {ant} and {} then they are {}.", lit(rng), lit(rng))
                } else {
                    format!("If someone is {ant} then they are {}.", lit(rng))
                }
            }
            _ => {
                let (x, y) = (names.choose(rng).unwrap(), names.choose(rng).unwrap());
                format!("If {x} is {} then {y} is {}.", lit(rng), lit(rng))
            }
        };
        context.push(s);
    }
    let query = format!("{} is {}.", names.choose(rng).unwrap(), lit(rng));
    Example { id, context, query, label: None, answers: None, section: Some("random".into()) }
}
