use num_bigint::BigInt;
use thiserror::Error;

use super::{Formula, Node, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigInt),
    Str(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Bang,
    Question,
    Caret,
    Amp,
    Pipe,
    Tilde,
    Arrow,
    EqSign,
    Falsum,
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { offset, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'[' => out.push((start, Tok::LBrack)),
            b']' => out.push((start, Tok::RBrack)),
            b',' => out.push((start, Tok::Comma)),
            b':' => out.push((start, Tok::Colon)),
            b'!' => out.push((start, Tok::Bang)),
            b'?' => out.push((start, Tok::Question)),
            b'^' => out.push((start, Tok::Caret)),
            b'&' => out.push((start, Tok::Amp)),
            b'|' => out.push((start, Tok::Pipe)),
            b'~' => out.push((start, Tok::Tilde)),
            b'=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((start, Tok::Arrow));
                    i += 2;
                    continue;
                }
                out.push((start, Tok::EqSign));
            }
            b'$' => {
                if bytes.get(i + 1) == Some(&b'F') {
                    out.push((start, Tok::Falsum));
                    i += 2;
                    continue;
                }
                return Err(syntax(start, "expected `$F`"));
            }
            b'"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    let Some(&ch) = bytes.get(i) else {
                        return Err(syntax(start, "unterminated string literal"));
                    };
                    match ch {
                        b'"' => break,
                        b'\\' => {
                            let Some(&esc) = bytes.get(i + 1) else {
                                return Err(syntax(i, "dangling escape"));
                            };
                            s.push(esc as char);
                            i += 2;
                        }
                        _ => {
                            // copy one UTF-8 scalar
                            let rest = &text[i..];
                            let ch = rest.chars().next().unwrap();
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                out.push((start, Tok::Str(s)));
            }
            b'-' | b'0'..=b'9' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let lit = &text[i..j];
                if lit == "-" {
                    return Err(syntax(start, "expected digits after `-`"));
                }
                out.push((start, Tok::Number(lit.parse().unwrap())));
                i = j;
                continue;
            }
            b'a'..=b'z' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((start, Tok::Ident(text[i..j].to_string())));
                i = j;
                continue;
            }
            _ => return Err(syntax(start, format!("unexpected character `{}`", text[i..].chars().next().unwrap()))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    scope: Vec<String>,
    symbols: Option<&'a mut SymbolTable>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(syntax(off, format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            items.push(self.conjunction()?);
        }
        Ok(Formula::or(items))
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Formula::and(items))
    }

    fn binder_body(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::LBrack, "`[`")?;
        let off = self.offset();
        let name = match self.bump() {
            Some(Tok::Ident(n)) => n,
            _ => return Err(syntax(off, "expected bound variable name")),
        };
        self.expect(Tok::RBrack, "`]`")?;
        self.expect(Tok::Colon, "`:`")?;
        self.expect(Tok::LParen, "`(` around binder body")?;
        self.scope.push(name);
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(body)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Bang) => {
                self.bump();
                Ok(Formula::forall(self.binder_body()?))
            }
            Some(Tok::Question) => {
                self.bump();
                Ok(Formula::exists(self.binder_body()?))
            }
            Some(Tok::Falsum) => {
                self.bump();
                Ok(Formula::falsum())
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.atomic(),
        }
    }

    fn atomic(&mut self) -> Result<Formula, ParseError> {
        let off = self.offset();
        let lhs = self.term()?;
        if self.peek() == Some(&Tok::EqSign) {
            self.bump();
            let rhs = self.term()?;
            return Ok(Formula::equality(lhs, rhs));
        }
        match lhs.node() {
            Node::Apply(f, args) => Ok(Formula::atom(f.clone(), args.clone())),
            Node::Const(c) => Ok(Formula::atom(c.clone(), vec![])),
            _ => Err(syntax(off, "expected a formula")),
        }
    }

    fn term(&mut self) -> Result<Formula, ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Number(n)) => Ok(Formula::number(n)),
            Some(Tok::Str(s)) => Ok(Formula::string(&s)),
            Some(Tok::Caret) => Ok(Formula::lambda(self.binder_body()?)),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)` after arguments")?;
                    return Ok(Formula::apply(name.as_str(), args));
                }
                if let Some(depth) = self.scope.iter().rev().position(|v| *v == name) {
                    return Ok(Formula::var(depth as u32));
                }
                if let Some(table) = self.symbols.as_deref_mut() {
                    table.intern(&name);
                }
                Ok(Formula::constant(name.as_str()))
            }
            _ => Err(syntax(off, "expected a term")),
        }
    }
}

/// Parse the formula syntax, registering constants in `symbols`.
///
/// Identifiers are `[a-z][a-zA-Z0-9_]*`. Binders are `![x]:(..)`, `?[x]:(..)`
/// and `^[x]:(..)`; connectives are `~ & | =>` and `=`; `$F` is falsum.
pub fn parse_formula(text: &str, symbols: &mut SymbolTable) -> Result<Formula, ParseError> {
    parse_with(text, Some(symbols))
}

/// [`parse_formula`] without a symbol table.
pub fn parse_formula_unscoped(text: &str) -> Result<Formula, ParseError> {
    parse_with(text, None)
}

/// Parse a closed term (constant, number, string, application or lambda).
pub fn parse_term(text: &str) -> Result<Formula, ParseError> {
    parse_inner(text, None, true)
}

fn parse_with(text: &str, symbols: Option<&mut SymbolTable>) -> Result<Formula, ParseError> {
    parse_inner(text, symbols, false)
}

fn parse_inner(text: &str, symbols: Option<&mut SymbolTable>, term: bool) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), scope: vec![], symbols };
    let f = if term { p.term()? } else { p.formula()? };
    if p.pos < p.toks.len() {
        return Err(syntax(p.offset(), "trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atom() {
        let f = parse_formula_unscoped("cat(bob)").unwrap();
        assert_eq!(f, Formula::atom("cat", vec![Formula::constant("bob")]));
    }

    #[test]
    fn parses_universal_rule() {
        let f = parse_formula_unscoped("![x]:(cat(x) => mammal(x))").unwrap();
        let expect = Formula::forall(Formula::implies(
            Formula::atom("cat", vec![Formula::var(0)]),
            Formula::atom("mammal", vec![Formula::var(0)]),
        ));
        assert_eq!(f, expect);
    }

    #[test]
    fn parses_set_size() {
        let f = parse_formula_unscoped("size(^[x]:(planet(x)))=8").unwrap();
        let expect = Formula::equality(
            Formula::apply("size", vec![Formula::lambda(Formula::atom("planet", vec![Formula::var(0)]))]),
            Formula::number(8),
        );
        assert_eq!(f, expect);
    }

    #[test]
    fn registers_constants() {
        let mut t = SymbolTable::new();
        parse_formula("arg1(c2)=alex", &mut t).unwrap();
        assert!(t.contains(&"c2".into()) && t.contains(&"alex".into()));
        assert!(!t.contains(&"arg1".into()));
    }

    #[test]
    fn reports_offsets() {
        match parse_formula_unscoped("cat(bob") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("{other:?}"),
        }
        match parse_formula_unscoped("cat(bob) @") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_terms() {
        assert_eq!(parse_term("bob").unwrap(), Formula::constant("bob"));
        assert_eq!(parse_term("\"River Elsuir\"").unwrap(), Formula::string("River Elsuir"));
        assert!(parse_term("cat(bob) & x").is_err());
    }

    #[test]
    fn binder_body_needs_parens() {
        assert!(parse_formula_unscoped("![x]:cat(x)").is_err());
    }

    #[test]
    fn precedence() {
        let f = parse_formula_unscoped("a & b | c => d").unwrap();
        let expect = Formula::implies(
            Formula::or(vec![parse_formula_unscoped("a & b").unwrap(), Formula::atom("c", vec![])]),
            Formula::atom("d", vec![]),
        );
        assert_eq!(f, expect);
        let neg = parse_formula_unscoped("~name(j)=\"Bob\"").unwrap();
        assert!(matches!(neg.node(), Node::Not(b) if matches!(b.node(), Node::Equality(..))));
    }
}
