//! Flat word list: `surface<TAB>predicate<TAB>pos`, `#` starts a comment.

use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pos {
    Noun,
    /// Transitive verb, read as an event with two roles.
    TVerb,
    /// Intransitive verb, read as a unary predicate.
    IVerb,
    /// Function symbol measured in numbers ("length").
    Measure,
    /// Comparative: `builtin:measure`, e.g. `less:length`.
    Cmp,
    Unit,
}

impl Pos {
    fn parse(s: &str) -> Option<Pos> {
        Some(match s {
            "noun" => Pos::Noun,
            "tverb" => Pos::TVerb,
            "iverb" => Pos::IVerb,
            "measure" => Pos::Measure,
            "cmp" => Pos::Cmp,
            "unit" => Pos::Unit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<(String, Pos), String>,
    /// Longest multiword surface, in words.
    longest: usize,
}

#[derive(Debug, thiserror::Error)]
#[error("lexicon line {line}: {msg}")]
pub struct LexiconError {
    pub line: usize,
    pub msg: String,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| LexiconError { line: i + 1, msg: msg.to_string() };
            let cols: Vec<&str> = line.split('\t').collect();
            let [surface, pred, pos] = cols[..] else { return Err(err("expected three tab-separated columns")) };
            let pos = Pos::parse(pos).ok_or_else(|| err("unknown part of speech"))?;
            let surface = surface.to_lowercase();
            lex.longest = lex.longest.max(surface.split(' ').count());
            lex.entries.insert((surface, pos), pred.to_string());
        }
        Ok(lex)
    }

    /// The bundled word list.
    pub fn builtin() -> &'static Lexicon {
        static LEX: OnceLock<Lexicon> = OnceLock::new();
        LEX.get_or_init(|| Lexicon::parse(include_str!("lexicon.tsv")).expect("bundled lexicon parses"))
    }

    pub fn get(&self, surface: &str, pos: Pos) -> Option<&str> {
        self.entries.get(&(surface.to_lowercase(), pos)).map(String::as_str)
    }

    /// Longest listed entry of `pos` at the start of `words`, as (predicate, words used).
    pub fn longest_match(&self, words: &[&str], pos: Pos) -> Option<(&str, usize)> {
        (1..=self.longest.min(words.len())).rev().find_map(|n| self.get(&words[..n].join(" "), pos).map(|p| (p, n)))
    }
}

/// Fallback predicate name for an unlisted content word.
pub fn identifier(word: &str) -> String {
    word.to_lowercase().chars().map(|c| if c.is_alphanumeric() { c } else { '_' }).collect()
}
