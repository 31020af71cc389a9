//! Higher-order logic expressions.
//!
//! Binders use de Bruijn indices: `Var(0)` refers to the nearest enclosing
//! `ForAll`, `Exists` or `Lambda`. Because of this, two formulas are
//! alpha-equivalent exactly when they are structurally equal, and the derived
//! `Eq`/`Hash` can be used directly as a multiset key.

mod parse;
mod print;
mod symbols;

pub use parse::{parse_formula, parse_formula_unscoped, parse_term, ParseError};
pub use symbols::{Symbol, SymbolTable};

use num_bigint::BigInt;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// The node view of a [`Formula`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Var(u32),
    Const(Symbol),
    Number(BigInt),
    Str(Arc<str>),
    Atom(Symbol, Vec<Formula>),
    Equality(Formula, Formula),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Formula),
    Implies(Formula, Formula),
    ForAll(Formula),
    Exists(Formula),
    Lambda(Formula),
    Apply(Symbol, Vec<Formula>),
    False,
}

/// An immutable, cheaply clonable higher-order logic expression.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(Arc<Node>);

impl Formula {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn mk(node: Node) -> Self {
        Formula(Arc::new(node))
    }

    pub fn var(index: u32) -> Self {
        Self::mk(Node::Var(index))
    }

    pub fn constant(name: impl Into<Symbol>) -> Self {
        Self::mk(Node::Const(name.into()))
    }

    pub fn number(n: impl Into<BigInt>) -> Self {
        Self::mk(Node::Number(n.into()))
    }

    pub fn string(s: &str) -> Self {
        Self::mk(Node::Str(Arc::from(s)))
    }

    pub fn atom(pred: impl Into<Symbol>, args: Vec<Formula>) -> Self {
        Self::mk(Node::Atom(pred.into(), args))
    }

    pub fn apply(func: impl Into<Symbol>, args: Vec<Formula>) -> Self {
        Self::mk(Node::Apply(func.into(), args))
    }

    pub fn equality(lhs: Formula, rhs: Formula) -> Self {
        Self::mk(Node::Equality(lhs, rhs))
    }

    /// Conjunction in flattened form. A single conjunct is returned as is.
    ///
    /// # Panics
    /// Panics on an empty list.
    pub fn and(conjuncts: Vec<Formula>) -> Self {
        Self::nary(conjuncts, true)
    }

    /// Disjunction in flattened form. A single disjunct is returned as is.
    ///
    /// # Panics
    /// Panics on an empty list.
    pub fn or(disjuncts: Vec<Formula>) -> Self {
        Self::nary(disjuncts, false)
    }

    fn nary(items: Vec<Formula>, conj: bool) -> Self {
        assert!(!items.is_empty(), "empty n-ary connective");
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match (item.node(), conj) {
                (Node::And(cs), true) | (Node::Or(cs), false) => flat.extend(cs.iter().cloned()),
                _ => flat.push(item),
            }
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        Self::mk(if conj { Node::And(flat) } else { Node::Or(flat) })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(body: Formula) -> Self {
        Self::mk(Node::Not(body))
    }

    pub fn implies(antecedent: Formula, consequent: Formula) -> Self {
        Self::mk(Node::Implies(antecedent, consequent))
    }

    pub fn forall(body: Formula) -> Self {
        Self::mk(Node::ForAll(body))
    }

    pub fn exists(body: Formula) -> Self {
        Self::mk(Node::Exists(body))
    }

    pub fn lambda(body: Formula) -> Self {
        Self::mk(Node::Lambda(body))
    }

    pub fn falsum() -> Self {
        Self::mk(Node::False)
    }

    /// Immediate children, in the order used by [`Formula::subterm`] paths.
    pub fn children(&self) -> Vec<&Formula> {
        match self.node() {
            Node::Var(_) | Node::Const(_) | Node::Number(_) | Node::Str(_) | Node::False => vec![],
            Node::Atom(_, args) | Node::Apply(_, args) => args.iter().collect(),
            Node::And(cs) | Node::Or(cs) => cs.iter().collect(),
            Node::Equality(a, b) | Node::Implies(a, b) => vec![a, b],
            Node::Not(b) | Node::ForAll(b) | Node::Exists(b) | Node::Lambda(b) => vec![b],
        }
    }

    /// Rebuild this node with new children (same arity as [`Formula::children`]).
    fn with_children(&self, mut kids: Vec<Formula>) -> Formula {
        let node = match self.node() {
            Node::Var(_) | Node::Const(_) | Node::Number(_) | Node::Str(_) | Node::False => {
                return self.clone()
            }
            Node::Atom(p, _) => Node::Atom(p.clone(), kids),
            Node::Apply(f, _) => Node::Apply(f.clone(), kids),
            Node::And(_) => return Formula::and(kids),
            Node::Or(_) => return Formula::or(kids),
            Node::Equality(..) => {
                let b = kids.pop().unwrap();
                Node::Equality(kids.pop().unwrap(), b)
            }
            Node::Implies(..) => {
                let b = kids.pop().unwrap();
                Node::Implies(kids.pop().unwrap(), b)
            }
            Node::Not(_) => Node::Not(kids.pop().unwrap()),
            Node::ForAll(_) => Node::ForAll(kids.pop().unwrap()),
            Node::Exists(_) => Node::Exists(kids.pop().unwrap()),
            Node::Lambda(_) => Node::Lambda(kids.pop().unwrap()),
        };
        Formula::mk(node)
    }

    fn is_binder(&self) -> bool {
        matches!(self.node(), Node::ForAll(_) | Node::Exists(_) | Node::Lambda(_))
    }

    /// Bottom-up rewrite. `f` receives each rebuilt node and its binder depth.
    fn rewrite(&self, depth: u32, f: &mut impl FnMut(&Formula, u32) -> Option<Formula>) -> Formula {
        if let Some(out) = f(self, depth) {
            return out;
        }
        let inner = if self.is_binder() { depth + 1 } else { depth };
        let kids = self.children();
        if kids.is_empty() {
            return self.clone();
        }
        let new: Vec<Formula> = kids.iter().map(|k| k.rewrite(inner, f)).collect();
        if new.iter().zip(&kids).all(|(a, b)| Arc::ptr_eq(&a.0, &b.0)) {
            return self.clone();
        }
        self.with_children(new)
    }

    /// Instantiate the variable bound by the binder whose body is `self`.
    ///
    /// `replacement` must be closed.
    pub fn substitute(&self, replacement: &Formula) -> Formula {
        self.rewrite(0, &mut |f, depth| match f.node() {
            Node::Var(i) if *i == depth => Some(replacement.clone()),
            Node::Var(i) if *i > depth => Some(Formula::var(i - 1)),
            _ => None,
        })
    }

    /// Inverse of [`Formula::substitute`] for a constant: every occurrence of
    /// `c` becomes the variable of a new binder wrapped around the result.
    pub fn abstract_constant(&self, c: &Symbol) -> Formula {
        self.rewrite(0, &mut |f, depth| match f.node() {
            Node::Var(i) if *i >= depth => Some(Formula::var(i + 1)),
            Node::Const(s) if s == c => Some(Formula::var(depth)),
            _ => None,
        })
    }

    /// Replace constants according to `map`.
    pub fn rename_constants(&self, map: &dyn Fn(&Symbol) -> Option<Symbol>) -> Formula {
        self.rewrite(0, &mut |f, _| match f.node() {
            Node::Const(s) => map(s).map(Formula::constant),
            _ => None,
        })
    }

    /// Constants occurring in term position.
    pub fn free_constants(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Node::Const(s) = f.node() {
                out.insert(s.clone());
            }
        });
        out
    }

    pub fn mentions_constant(&self, c: &Symbol) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f.node(), Node::Const(s) if s == c) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for k in self.children() {
            k.visit(f);
        }
    }

    /// True when no variable index escapes its binders.
    pub fn is_closed(&self) -> bool {
        self.max_free_var(0).is_none()
    }

    fn max_free_var(&self, depth: u32) -> Option<u32> {
        match self.node() {
            Node::Var(i) if *i >= depth => Some(i - depth),
            _ => {
                let inner = if self.is_binder() { depth + 1 } else { depth };
                self.children().iter().filter_map(|k| k.max_free_var(inner)).max()
            }
        }
    }

    /// Copy with every `And`/`Or` child list sorted, used as the identity key
    /// of axioms so that conjunct order does not matter.
    pub fn canonical(&self) -> Formula {
        self.rewrite(0, &mut |f, _| match f.node() {
            Node::And(cs) | Node::Or(cs) => {
                let mut kids: Vec<Formula> = cs.iter().map(|c| c.canonical()).collect();
                kids.sort();
                Some(if matches!(f.node(), Node::And(_)) {
                    Formula::and(kids)
                } else {
                    Formula::or(kids)
                })
            }
            _ => None,
        })
    }

    /// The subterm at `path` (child indices from the root).
    pub fn subterm(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// Copy with the subterm at `path` replaced.
    pub fn replace_at(&self, path: &[usize], with: &Formula) -> Option<Formula> {
        match path.split_first() {
            None => Some(with.clone()),
            Some((&i, rest)) => {
                let kids = self.children();
                let child = kids.get(i)?.replace_at(rest, with)?;
                let mut new: Vec<Formula> = kids.into_iter().cloned().collect();
                new[i] = child;
                Some(self.with_children(new))
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn as_const(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Const(s) => Some(s),
            _ => None,
        }
    }

    /// `Some(body)` when this is a negation.
    pub fn as_not(&self) -> Option<&Formula> {
        match self.node() {
            Node::Not(b) => Some(b),
            _ => None,
        }
    }

    /// True for constants, numbers and strings.
    pub fn is_ground_value(&self) -> bool {
        matches!(self.node(), Node::Const(_) | Node::Number(_) | Node::Str(_))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Equality up to bound-variable naming.
pub fn alpha_equal(a: &Formula, b: &Formula) -> bool {
    a == b
}

/// See [`Formula::substitute`].
pub fn substitute(body: &Formula, replacement: &Formula) -> Formula {
    body.substitute(replacement)
}

/// See [`Formula::free_constants`].
pub fn free_constants(f: &Formula) -> BTreeSet<Symbol> {
    f.free_constants()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula_unscoped(s).unwrap()
    }

    #[test]
    fn substitute_instantiates_universal_body() {
        let f = p("![x]:(cat(x) => mammal(x))");
        let Node::ForAll(body) = f.node() else { panic!() };
        let inst = body.substitute(&Formula::constant("bob"));
        assert_eq!(inst, p("cat(bob) => mammal(bob)"));
    }

    #[test]
    fn substitute_direct_and_vacuous() {
        let body = Formula::atom("p", vec![Formula::var(0)]);
        assert_eq!(body.substitute(&Formula::constant("c")), p("p(c)"));
        let vac = p("q(d)");
        assert_eq!(vac.substitute(&Formula::constant("c")), vac);
    }

    #[test]
    fn substitute_shifts_outer_indices() {
        // body of the inner binder in ![x]:(?[y]:(r(x,y))) is r(v1, v0)
        let body = Formula::atom("r", vec![Formula::var(1), Formula::var(0)]);
        let out = body.substitute(&Formula::constant("a"));
        assert_eq!(out, Formula::atom("r", vec![Formula::var(0), Formula::constant("a")]));
    }

    #[test]
    fn alpha_equal_examples() {
        assert!(alpha_equal(&p("![x]:(cat(x))"), &p("![y]:(cat(y))")));
        assert!(!alpha_equal(&p("cat(bob)"), &p("cat(alice)")));
        let r = p("![x]:(cat(x) => mammal(x))");
        assert!(alpha_equal(&r, &r.clone()));
    }

    #[test]
    fn free_constants_examples() {
        let set = |xs: &[&str]| xs.iter().map(|s| Symbol::from(*s)).collect::<BTreeSet<_>>();
        assert_eq!(p("cat(bob)").free_constants(), set(&["bob"]));
        assert_eq!(p("![x]:(cat(x) => mammal(x))").free_constants(), set(&[]));
        assert_eq!(p("arg1(c2)=alex").free_constants(), set(&["c2", "alex"]));
    }

    #[test]
    fn and_flattens() {
        let f = Formula::and(vec![p("a & b"), p("c")]);
        assert_eq!(f, p("a & b & c"));
        assert!(matches!(f.node(), Node::And(cs) if cs.len() == 3));
    }

    #[test]
    fn canonical_ignores_conjunct_order() {
        assert_eq!(p("a & b").canonical(), p("b & a").canonical());
        assert_ne!(p("a & b"), p("b & a"));
    }

    #[test]
    fn abstract_then_substitute_roundtrips() {
        let f = p("cat(bob) & ![x]:(likes(x,bob))");
        let bob = Symbol::from("bob");
        let abs = f.abstract_constant(&bob);
        assert!(!abs.mentions_constant(&bob));
        assert_eq!(abs.substitute(&Formula::constant("bob")), f);
    }

    #[test]
    fn closedness() {
        assert!(p("![x]:(p(x))").is_closed());
        assert!(!Formula::atom("p", vec![Formula::var(0)]).is_closed());
    }

    #[test]
    fn replace_at_path() {
        let f = p("less(207,400)");
        let g = f.replace_at(&[0], &p("length(c)=1").children()[0].clone()).unwrap();
        assert_eq!(g.to_string(), "less(length(c),400)");
    }
}
