//! The base distribution H_a over axioms, with CRP symbol distributions H_p
//! (predicates and function symbols) and H_c (constants).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

use super::PriorConfig;
use crate::hol::{Formula, Node, Symbol};
use crate::theory::Theory;

/// Size of the character alphabet for string literals (printable ASCII).
const ALPHABET: u32 = 95;
/// Nesting depth past which the sampler only emits atoms.
const MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeType {
    Atom,
    Equality,
    Not,
    And,
    Or,
    Implies,
    ForAll,
    Exists,
}

impl NodeType {
    pub const ALL: [NodeType; 8] = [
        NodeType::Atom,
        NodeType::Equality,
        NodeType::Not,
        NodeType::And,
        NodeType::Or,
        NodeType::Implies,
        NodeType::ForAll,
        NodeType::Exists,
    ];

    pub fn of(f: &Formula) -> Option<NodeType> {
        Some(match f.node() {
            Node::Atom(..) => NodeType::Atom,
            Node::Equality(..) => NodeType::Equality,
            Node::Not(_) => NodeType::Not,
            Node::And(_) => NodeType::And,
            Node::Or(_) => NodeType::Or,
            Node::Implies(..) => NodeType::Implies,
            Node::ForAll(_) => NodeType::ForAll,
            Node::Exists(_) => NodeType::Exists,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default)]
struct Crp {
    counts: HashMap<Symbol, usize>,
    total: usize,
}

impl Crp {
    fn log_prob(&self, s: &Symbol, concentration: f64) -> f64 {
        let denom = self.total as f64 + concentration;
        match self.counts.get(s) {
            Some(&c) => (c as f64 / denom).ln(),
            // new symbol; the base measure over fresh names contributes 0
            None => (concentration / denom).ln(),
        }
    }

    fn observe(&mut self, s: &Symbol) {
        *self.counts.entry(s.clone()).or_default() += 1;
        self.total += 1;
    }

    fn sample<R: Rng + ?Sized>(&self, concentration: f64, rng: &mut R, fresh: impl FnOnce() -> Symbol) -> Symbol {
        let mut u = rng.gen::<f64>() * (self.total as f64 + concentration);
        let mut keys: Vec<(&Symbol, &usize)> = self.counts.iter().collect();
        keys.sort();
        for (s, &c) in keys {
            if u < c as f64 {
                return s.clone();
            }
            u -= c as f64;
        }
        fresh()
    }
}

/// Running state of H_p and H_c across the axioms of one theory.
#[derive(Debug, Clone, Default)]
pub struct SymbolCrp {
    preds: Crp,
    consts: Crp,
}

impl SymbolCrp {
    /// Prime with every axiom of `t` in first-draw order.
    pub fn from_theory(t: &Theory, cfg: &PriorConfig) -> Self {
        let mut s = SymbolCrp::default();
        for (a, _) in t.axioms() {
            s.log_density_and_observe(a, cfg);
        }
        s
    }

    /// `log H_a(a)` given the symbols drawn so far; records `a`'s symbols.
    pub fn log_density_and_observe(&mut self, a: &Formula, cfg: &PriorConfig) -> f64 {
        self.formula(a, 0, cfg)
    }

    fn pred(&mut self, p: &Symbol, cfg: &PriorConfig) -> f64 {
        let lp = self.preds.log_prob(p, cfg.predicate_concentration);
        self.preds.observe(p);
        lp
    }

    fn constant(&mut self, c: &Symbol, cfg: &PriorConfig) -> f64 {
        let lp = self.consts.log_prob(c, cfg.constant_concentration);
        self.consts.observe(c);
        lp
    }

    fn formula(&mut self, f: &Formula, nv: u32, cfg: &PriorConfig) -> f64 {
        let Some(t) = NodeType::of(f) else { return f64::NEG_INFINITY };
        let mut lp = cfg.node_type_weights.log_prob(t);
        match f.node() {
            Node::Atom(p, args) => {
                lp += self.pred(p, cfg);
                for a in args {
                    lp += self.arg(a, nv, cfg);
                }
            }
            Node::Equality(l, r) => {
                if let Node::Apply(g, args) = l.node() {
                    lp += self.pred(g, cfg);
                    if let (Some(n), [arg]) = (size_value(g, r), args.as_slice()) {
                        if let Node::Lambda(body) = arg.node() {
                            return lp + self.formula(body, nv + 1, cfg) + n.map_or(f64::NEG_INFINITY, |n| cfg.log_geometric(n));
                        }
                    }
                    for a in args {
                        lp += self.arg(a, nv, cfg);
                    }
                } else {
                    lp += self.arg(l, nv, cfg);
                }
                lp += self.rhs(r, nv, cfg);
            }
            Node::Not(b) => lp += self.formula(b, nv, cfg),
            Node::And(cs) | Node::Or(cs) => {
                lp -= (cs.len() - 1) as f64 * std::f64::consts::LN_2;
                for c in cs {
                    lp += self.formula(c, nv, cfg);
                }
            }
            Node::Implies(a, b) => lp += self.formula(a, nv, cfg) + self.formula(b, nv, cfg),
            Node::ForAll(b) | Node::Exists(b) => lp += self.formula(b, nv + 1, cfg),
            _ => unreachable!(),
        }
        lp
    }

    /// An atom or function argument: each variable or the non-variable branch
    /// with probability 1/(n_V+1).
    fn arg(&mut self, a: &Formula, nv: u32, cfg: &PriorConfig) -> f64 {
        let choose = -f64::from(nv + 1).ln();
        choose
            + match a.node() {
                Node::Var(_) => 0.0,
                Node::Const(c) => self.constant(c, cfg),
                Node::Apply(g, args) => {
                    let mut lp = self.pred(g, cfg);
                    for x in args {
                        lp += self.arg(x, nv, cfg);
                    }
                    lp
                }
                Node::Number(n) => log_number(n, cfg),
                Node::Str(s) => log_string(s),
                _ => f64::NEG_INFINITY,
            }
    }

    /// Right side of an equality: type chosen uniformly among the feasible
    /// ones (variable only when one is in scope), then its value.
    fn rhs(&mut self, r: &Formula, nv: u32, cfg: &PriorConfig) -> f64 {
        let types = if nv > 0 { 4.0f64 } else { 3.0 };
        -types.ln()
            + match r.node() {
                Node::Var(_) if nv > 0 => -f64::from(nv).ln(),
                Node::Const(c) => self.constant(c, cfg),
                Node::Str(s) => log_string(s),
                Node::Number(n) => log_number(n, cfg),
                _ => f64::NEG_INFINITY,
            }
    }
}

/// `Some(Some(n))` for `size(..) = n` with a non-negative number.
fn size_value(g: &Symbol, r: &Formula) -> Option<Option<u64>> {
    if g.name() != "size" {
        return None;
    }
    Some(match r.node() {
        Node::Number(n) => n.to_u64(),
        _ => None,
    })
}

/// Zig-zag fold of the integers onto a geometric count.
fn log_number(n: &BigInt, cfg: &PriorConfig) -> f64 {
    let folded = if n.is_negative() { (-n) * 2u32 - 1u32 } else { n * 2u32 };
    match folded.to_u64() {
        Some(k) => cfg.log_geometric(k),
        None => f64::NEG_INFINITY,
    }
}

/// Length ~ Geometric(1/2) on {0,1,…}, characters uniform.
fn log_string(s: &str) -> f64 {
    let len = s.chars().count() as f64;
    -(len + 1.0) * std::f64::consts::LN_2 - len * f64::from(ALPHABET).ln()
}

/// `log H_a(a)` with no previously drawn symbols.
pub fn log_base_density(a: &Formula, cfg: &PriorConfig) -> f64 {
    SymbolCrp::default().log_density_and_observe(a, cfg)
}

struct Sampler<'a, R: Rng + ?Sized> {
    cfg: &'a PriorConfig,
    crp: SymbolCrp,
    rng: &'a mut R,
    taken: std::collections::BTreeSet<Symbol>,
}

impl<R: Rng + ?Sized> Sampler<'_, R> {
    fn fresh(&mut self, prefix: &str) -> Symbol {
        let mut k = self.taken.len();
        loop {
            let s = Symbol::new(&format!("{prefix}{k}"));
            if self.taken.insert(s.clone()) {
                return s;
            }
            k += 1;
        }
    }

    fn pred(&mut self) -> Symbol {
        let crp = self.crp.preds.clone();
        let mut fresh = None;
        let s = crp.sample(self.cfg.predicate_concentration, self.rng, || {
            fresh = Some(());
            Symbol::new("")
        });
        let s = if fresh.is_some() { self.fresh("p") } else { s };
        self.crp.preds.observe(&s);
        s
    }

    fn constant(&mut self) -> Symbol {
        let crp = self.crp.consts.clone();
        let mut fresh = None;
        let s = crp.sample(self.cfg.constant_concentration, self.rng, || {
            fresh = Some(());
            Symbol::new("")
        });
        let s = if fresh.is_some() { self.fresh("k") } else { s };
        self.crp.consts.observe(&s);
        s
    }

    fn node_type(&mut self) -> NodeType {
        let w = &self.cfg.node_type_weights;
        let mut u = self.rng.gen::<f64>() * NodeType::ALL.iter().map(|t| w.get(*t)).sum::<f64>();
        for t in NodeType::ALL {
            if u < w.get(t) {
                return t;
            }
            u -= w.get(t);
        }
        NodeType::Exists
    }

    fn arg(&mut self, nv: u32) -> Formula {
        let k = self.rng.gen_range(0..=nv);
        if k < nv {
            Formula::var(k)
        } else {
            Formula::constant(self.constant())
        }
    }

    fn geometric(&mut self, p: f64) -> u64 {
        let u: f64 = self.rng.gen::<f64>().max(f64::MIN_POSITIVE);
        (u.ln() / (-p).ln_1p()).floor() as u64
    }

    fn gen(&mut self, nv: u32, depth: usize) -> Formula {
        let t = if depth >= MAX_DEPTH { NodeType::Atom } else { self.node_type() };
        match t {
            NodeType::Atom => {
                let p = self.pred();
                let a = self.arg(nv);
                Formula::atom(p, vec![a])
            }
            NodeType::Equality => {
                let g = self.pred();
                let a = self.arg(nv);
                let lhs = Formula::apply(g, vec![a]);
                let types = if nv > 0 { 4 } else { 3 };
                let rhs = match self.rng.gen_range(0..types) {
                    0 => Formula::constant(self.constant()),
                    1 => {
                        let len = self.geometric(0.5);
                        let s: String = (0..len).map(|_| char::from(self.rng.gen_range(32u8..127))).collect();
                        Formula::string(&s)
                    }
                    2 => {
                        let k = self.geometric(self.cfg.set_size_geometric_p);
                        Formula::number(if k % 2 == 0 { (k / 2) as i64 } else { -(k.div_ceil(2) as i64) })
                    }
                    _ => Formula::var(self.rng.gen_range(0..nv)),
                };
                Formula::equality(lhs, rhs)
            }
            NodeType::Not => Formula::not(self.gen(nv, depth + 1)),
            NodeType::And | NodeType::Or => {
                let n = 2 + self.geometric(0.5) as usize;
                let kids = (0..n).map(|_| self.gen(nv, depth + 1)).collect();
                if t == NodeType::And {
                    Formula::and(kids)
                } else {
                    Formula::or(kids)
                }
            }
            NodeType::Implies => {
                let a = self.gen(nv, depth + 1);
                Formula::implies(a, self.gen(nv, depth + 1))
            }
            NodeType::ForAll => Formula::forall(self.gen(nv + 1, depth + 1)),
            NodeType::Exists => Formula::exists(self.gen(nv + 1, depth + 1)),
        }
    }
}

/// Draw one axiom top-down from H_a, reusing the theory's symbols through
/// the H_p/H_c CRPs. Past depth 8 only atoms are generated.
pub fn sample_axiom<R: Rng + ?Sized>(cfg: &PriorConfig, t: &Theory, rng: &mut R) -> Formula {
    let mut taken: std::collections::BTreeSet<Symbol> = t.constants().clone();
    for (a, _) in t.axioms() {
        a.visit(&mut |g| {
            if let Node::Atom(p, _) | Node::Apply(p, _) = g.node() {
                taken.insert(p.clone());
            }
        });
    }
    let mut s = Sampler { cfg, crp: SymbolCrp::from_theory(t, cfg), rng, taken };
    s.gen(0, 0)
}
