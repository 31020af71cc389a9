use std::collections::BTreeSet;
use std::fmt::{self, Write};

use super::{Formula, Node};

const BASE_NAMES: [&str; 6] = ["x", "y", "z", "w", "v", "u"];

struct Printer {
    scope: Vec<String>,
    taken: BTreeSet<String>,
}

impl Printer {
    fn fresh_name(&self) -> String {
        let depth = self.scope.len();
        let mut k = 0usize;
        loop {
            let base = BASE_NAMES[(depth + k) % BASE_NAMES.len()];
            let round = (depth + k) / BASE_NAMES.len();
            let name = if round == 0 { base.to_string() } else { format!("{base}{round}") };
            if !self.taken.contains(&name) && !self.scope.contains(&name) {
                return name;
            }
            k += 1;
        }
    }

    fn binder(&mut self, out: &mut String, sigil: char, body: &Formula) -> fmt::Result {
        let name = self.fresh_name();
        write!(out, "{sigil}[{name}]:(")?;
        self.scope.push(name);
        self.formula(out, body, 0)?;
        self.scope.pop();
        out.push(')');
        Ok(())
    }

    /// `ctx`: 0 top, 1 implication rhs, 2 implication lhs / disjunct,
    /// 3 conjunct, 4 negation operand.
    fn formula(&mut self, out: &mut String, f: &Formula, ctx: u8) -> fmt::Result {
        let prec = match f.node() {
            Node::Implies(..) => 1,
            Node::Or(_) => 2,
            Node::And(_) => 3,
            _ => 4,
        };
        let wrap = prec < ctx;
        if wrap {
            out.push('(');
        }
        match f.node() {
            Node::Implies(a, b) => {
                self.formula(out, a, 2)?;
                out.push_str(" => ");
                self.formula(out, b, 1)?;
            }
            Node::Or(cs) | Node::And(cs) => {
                let (sep, child_ctx) = if prec == 2 { (" | ", 3) } else { (" & ", 4) };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    self.formula(out, c, child_ctx)?;
                }
            }
            Node::Not(b) => {
                out.push('~');
                self.formula(out, b, 4)?;
            }
            Node::ForAll(b) => self.binder(out, '!', b)?,
            Node::Exists(b) => self.binder(out, '?', b)?,
            Node::False => out.push_str("$F"),
            Node::Atom(p, args) => {
                out.push_str(p.name());
                if !args.is_empty() {
                    self.args(out, args)?;
                }
            }
            Node::Equality(a, b) => {
                self.term(out, a)?;
                out.push('=');
                self.term(out, b)?;
            }
            _ => self.term(out, f)?,
        }
        if wrap {
            out.push(')');
        }
        Ok(())
    }

    fn args(&mut self, out: &mut String, args: &[Formula]) -> fmt::Result {
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.term(out, a)?;
        }
        out.push(')');
        Ok(())
    }

    fn term(&mut self, out: &mut String, t: &Formula) -> fmt::Result {
        match t.node() {
            Node::Var(i) => {
                let idx = self.scope.len().checked_sub(1 + *i as usize);
                match idx {
                    Some(k) => out.push_str(&self.scope[k]),
                    None => write!(out, "#{i}")?,
                }
            }
            Node::Const(c) => out.push_str(c.name()),
            Node::Number(n) => write!(out, "{n}")?,
            Node::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    if ch == '"' || ch == '\\' {
                        out.push('\\');
                    }
                    out.push(ch);
                }
                out.push('"');
            }
            Node::Apply(f, args) => {
                out.push_str(f.name());
                self.args(out, args)?;
            }
            Node::Lambda(b) => self.binder(out, '^', b)?,
            // formulas nested in term position print in parentheses
            _ => {
                out.push('(');
                self.formula(out, t, 0)?;
                out.push(')');
            }
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut taken = BTreeSet::new();
        self.visit(&mut |g| match g.node() {
            Node::Const(c) => {
                taken.insert(c.name().to_string());
            }
            Node::Atom(p, _) | Node::Apply(p, _) => {
                taken.insert(p.name().to_string());
            }
            _ => {}
        });
        let mut p = Printer { scope: vec![], taken };
        let mut out = String::new();
        p.formula(&mut out, self, 0)?;
        f.write_str(&out)
    }
}
