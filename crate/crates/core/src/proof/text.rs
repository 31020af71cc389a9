//! Line format: `<idx>. <rule> [<premises>] [<params>] |- <formula>`.
//!
//! Params are `key=value` pairs joined by `; `: `t` term, `i` index,
//! `p` path, `h` hypothesis label, `d` discharged labels.

use std::fmt::{self, Write};

use thiserror::Error;

use super::{Logic, Params, Proof, ProofStep, Rule};
use crate::hol::{parse_formula_unscoped, parse_term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ProofParseError {
    pub line: usize,
    pub message: String,
}

fn join_nums<T: fmt::Display>(xs: &[T]) -> String {
    let mut s = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{x}").unwrap();
    }
    s
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(t) = &self.term {
            parts.push(format!("t={t}"));
        }
        if let Some(i) = self.index {
            parts.push(format!("i={i}"));
        }
        if let Some(p) = &self.path {
            parts.push(format!("p={}", join_nums(p)));
        }
        if let Some(h) = self.hyp {
            parts.push(format!("h={h}"));
        }
        if !self.discharges.is_empty() {
            parts.push(format!("d={}", join_nums(&self.discharges)));
        }
        f.write_str(&parts.join("; "))
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{i}. {} [{}] [{}] |- {}", s.rule, join_nums(&s.premises), s.params, s.conclusion)?;
        }
        Ok(())
    }
}

/// Split at the first `sep` outside string literals.
fn split_outside_quotes<'a>(s: &'a str, sep: &str) -> Option<(&'a str, &'a str)> {
    let mut in_str = false;
    let mut escaped = false;
    for (i, ch) in s.char_indices() {
        if in_str {
            match ch {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
        } else if ch == '"' {
            in_str = true;
        } else if s[i..].starts_with(sep) {
            return Some((&s[..i], &s[i + sep.len()..]));
        }
    }
    None
}

fn nums<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(vec![]);
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_params(mut s: &str) -> Result<Params, String> {
    let mut params = Params::default();
    while !s.trim().is_empty() {
        let (item, rest) = split_outside_quotes(s, ";").unwrap_or((s, ""));
        s = rest;
        let (key, value) = item.trim().split_once('=').ok_or_else(|| format!("bad parameter `{}`", item.trim()))?;
        let bad = || format!("bad value for `{key}`");
        match key {
            "t" => params.term = Some(parse_term(value).map_err(|e| e.to_string())?),
            "i" => params.index = Some(value.parse().map_err(|_| bad())?),
            "p" => params.path = Some(nums(value).ok_or_else(bad)?),
            "h" => params.hyp = Some(value.parse().map_err(|_| bad())?),
            "d" => params.discharges = nums(value).ok_or_else(bad)?,
            _ => return Err(format!("unknown parameter `{key}`")),
        }
    }
    Ok(params)
}

fn parse_line(line: &str, expect_idx: usize) -> Result<ProofStep, String> {
    let (idx, rest) = line.split_once(". ").ok_or("expected `<idx>. `")?;
    if idx.trim().parse::<usize>().ok() != Some(expect_idx) {
        return Err(format!("expected step index {expect_idx}"));
    }
    let (rule, rest) = rest.trim_start().split_once(' ').ok_or("expected rule name")?;
    let rule = Rule::from_name(rule).ok_or_else(|| format!("unknown rule `{rule}`"))?;
    let rest = rest.trim_start().strip_prefix('[').ok_or("expected `[` before premises")?;
    let (prem, rest) = rest.split_once(']').ok_or("unclosed premise list")?;
    let premises = nums(prem).ok_or("bad premise list")?;
    let rest = rest.trim_start().strip_prefix('[').ok_or("expected `[` before params")?;
    let (params, rest) = split_outside_quotes(rest, "]").ok_or("unclosed parameter list")?;
    let params = parse_params(params)?;
    let formula = rest.trim_start().strip_prefix("|-").ok_or("expected `|-`")?;
    let conclusion = parse_formula_unscoped(formula.trim()).map_err(|e| e.to_string())?;
    Ok(ProofStep { rule, premises, conclusion, params })
}

/// Parse the line format. Blank lines and lines starting with `#` are skipped.
pub fn parse_proof(text: &str, logic: Logic) -> Result<Proof, ProofParseError> {
    let mut steps = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let step = parse_line(line, steps.len()).map_err(|message| ProofParseError { line: n + 1, message })?;
        steps.push(step);
    }
    if steps.is_empty() {
        return Err(ProofParseError { line: 0, message: "no proof steps".into() });
    }
    Ok(Proof { steps, logic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hol::{parse_formula_unscoped as f, Formula};

    #[test]
    fn no_contradiction_roundtrip() {
        let text = "\
0. Ax [] [h=0] |- a & ~a
1. AndE [0] [i=0] |- a
2. Ax [] [h=0] |- a & ~a
3. AndE [2] [i=1] |- ~a
4. NotE [1,3] [] |- $F
5. NotI [4] [d=0] |- ~(a & ~a)
";
        let p = parse_proof(text, Logic::Intuitionistic).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.to_string(), text);
        assert_eq!(crate::proof::check_proof(&p), Ok(()));
    }

    #[test]
    fn string_terms_with_separators() {
        let mut params = Params::term(Formula::string("a; b] |- c"));
        params.index = Some(2);
        let p = Proof {
            steps: vec![ProofStep { rule: Rule::Ax, premises: vec![], conclusion: f("p").unwrap(), params }],
            logic: Logic::Classical,
        };
        let back = parse_proof(&p.to_string(), Logic::Classical).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_proof("# header\n0. Ax [] [] |- p\n1. Bogus [0] [] |- q\n", Logic::Classical).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(parse_proof("0. Ax [] [] |- p &", Logic::Classical).is_err());
    }
}
