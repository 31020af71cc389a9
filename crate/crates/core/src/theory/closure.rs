//! Ground-literal forward chaining over the theory's axioms.
//!
//! Axioms are compiled into rules `∀x̄ (antecedent literals → consequent
//! literals)` (facts are rules with no variables and no antecedent) and
//! constraints `¬∃x̄ (literals)`. Saturation is monotone, so adding an axiom
//! just continues the fixpoint.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;

use super::Violation;
use crate::hol::{Formula, Node, Symbol};

pub(crate) type Lit = (Formula, bool);

const BUILTINS: [&str; 2] = ["less", "greater"];

pub(crate) fn is_builtin(p: &Symbol) -> bool {
    BUILTINS.contains(&p.name())
}

#[derive(Clone, Debug)]
struct Compiled {
    vars: usize,
    ant: Vec<Lit>,
    cons: Vec<Lit>,
    /// generated contrapositive, not an axiom's own shape
    contra: bool,
}

/// Split a formula into literals when it is a conjunction of (negated)
/// atoms/equalities. `¬¬A` is not a literal.
pub(crate) fn literals(f: &Formula) -> Option<Vec<Lit>> {
    match f.node() {
        Node::Atom(..) | Node::Equality(..) => Some(vec![(orient(f), true)]),
        Node::Not(b) if matches!(b.node(), Node::Atom(..) | Node::Equality(..)) => Some(vec![(orient(b), false)]),
        Node::And(cs) => {
            let mut out = Vec::new();
            for c in cs {
                out.extend(literals(c)?);
            }
            Some(out)
        }
        _ => None,
    }
}

/// Put function applications on the left of an equality.
fn orient(f: &Formula) -> Formula {
    match f.node() {
        Node::Equality(l, r) if !matches!(l.node(), Node::Apply(..)) && matches!(r.node(), Node::Apply(..)) => {
            Formula::equality(r.clone(), l.clone())
        }
        _ => f.clone(),
    }
}

fn strip_foralls(f: &Formula) -> (usize, &Formula) {
    let mut n = 0;
    let mut cur = f;
    while let Node::ForAll(b) = cur.node() {
        n += 1;
        cur = b;
    }
    (n, cur)
}

fn compile(a: &Formula) -> (Vec<Compiled>, Vec<Compiled>) {
    let (vars, body) = strip_foralls(a);
    let mut rules = Vec::new();
    let mut constraints = Vec::new();
    match body.node() {
        Node::Implies(x, y) => {
            if let (Some(ant), Some(cons)) = (literals(x), literals(y)) {
                if vars > 0 && ant.len() == 1 && ant[0].1 && !is_builtin_lit(&ant[0].0) {
                    // contrapositive along the subset edge
                    for l in &cons {
                        if var_set(&ant[0].0).is_subset(&var_set(&l.0)) && !is_builtin_lit(&l.0) {
                            rules.push(Compiled { vars, ant: vec![(l.0.clone(), !l.1)], cons: vec![(ant[0].0.clone(), false)], contra: true });
                        }
                    }
                }
                rules.push(Compiled { vars, ant, cons, contra: false });
            }
        }
        _ if literals(body).is_some() => {
            rules.push(Compiled { vars, ant: vec![], cons: literals(body).unwrap(), contra: false });
        }
        Node::Not(inner) if vars == 0 => {
            // ¬∃x̄(lits), ¬(lits) and ¬¬A all forbid their core from holding
            let (k, core) = strip_exists(inner);
            if let Some(lits) = literals(core) {
                constraints.push(Compiled { vars: k, ant: lits, cons: vec![], contra: false });
            }
        }
        _ => {}
    }
    (rules, constraints)
}

fn strip_exists(f: &Formula) -> (usize, &Formula) {
    let mut n = 0;
    let mut cur = f;
    while let Node::Exists(b) = cur.node() {
        n += 1;
        cur = b;
    }
    (n, cur)
}

fn is_builtin_lit(f: &Formula) -> bool {
    matches!(f.node(), Node::Atom(p, _) if is_builtin(p))
}

fn var_set(f: &Formula) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    f.visit(&mut |g| {
        if let Node::Var(i) = g.node() {
            out.insert(*i);
        }
    });
    out
}

/// Replace free variables of a literal template: `Var(j)` ↦ `binding[k-1-j]`.
fn instantiate(t: &Formula, binding: &[Formula]) -> Formula {
    fn go(t: &Formula, binding: &[Formula], depth: u32) -> Formula {
        match t.node() {
            Node::Var(j) if *j >= depth => binding[binding.len() - 1 - (*j - depth) as usize].clone(),
            Node::Var(_) | Node::Const(_) | Node::Number(_) | Node::Str(_) | Node::False => t.clone(),
            Node::Atom(p, args) => Formula::atom(p.clone(), args.iter().map(|a| go(a, binding, depth)).collect()),
            Node::Apply(p, args) => Formula::apply(p.clone(), args.iter().map(|a| go(a, binding, depth)).collect()),
            Node::Equality(a, b) => Formula::equality(go(a, binding, depth), go(b, binding, depth)),
            Node::Lambda(b) => Formula::lambda(go(b, binding, depth + 1)),
            _ => {
                // literals hold no other connectives
                t.clone()
            }
        }
    }
    if binding.is_empty() {
        return t.clone();
    }
    go(t, binding, 0)
}

/// Match a template against a ground atom, extending `binding`.
fn unify(t: &Formula, g: &Formula, binding: &mut [Option<Formula>]) -> bool {
    let k = binding.len();
    match (t.node(), g.node()) {
        (Node::Var(j), _) => {
            let slot = &mut binding[k - 1 - *j as usize];
            match slot {
                Some(b) => b == g,
                None => {
                    *slot = Some(g.clone());
                    true
                }
            }
        }
        (Node::Atom(p, xs), Node::Atom(q, ys)) | (Node::Apply(p, xs), Node::Apply(q, ys)) => {
            p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, binding))
        }
        (Node::Equality(a, b), Node::Equality(c, d)) => unify(a, c, binding) && unify(b, d, binding),
        _ => t == g,
    }
}

fn head(f: &Formula) -> Option<Symbol> {
    match f.node() {
        Node::Atom(p, _) => Some(p.clone()),
        Node::Equality(l, _) => match l.node() {
            Node::Apply(g, _) => Some(g.clone()),
            _ => Some(Symbol::new("=")),
        },
        _ => None,
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Closure {
    facts: HashSet<Lit>,
    by_head: HashMap<(Symbol, bool), Vec<Formula>>,
    values: HashMap<Formula, BTreeSet<Formula>>,
    rules: Vec<Compiled>,
    constraints: Vec<Compiled>,
    constants: BTreeSet<Symbol>,
    pub(crate) sizes: Vec<(Formula, BigInt)>,
    /// (subset body, superset body) from unary universal rules
    pub(crate) edges: Vec<(Formula, Formula)>,
    violation: Option<Violation>,
}

impl Closure {
    pub fn violation(&self) -> Option<&Violation> {
        self.violation.as_ref()
    }

    pub fn constants(&self) -> &BTreeSet<Symbol> {
        &self.constants
    }

    pub fn add_all<'a>(&mut self, axioms: impl IntoIterator<Item = &'a Formula>) {
        for a in axioms {
            self.register(a);
        }
        self.saturate();
    }

    fn register(&mut self, a: &Formula) {
        if self.violation.is_some() {
            return;
        }
        if matches!(a.node(), Node::False) {
            self.violation = Some(Violation::Falsum);
            return;
        }
        self.constants.extend(a.free_constants());
        let (rules, constraints) = compile(a);
        for r in &rules {
            if !r.contra && r.vars == 1 && !r.ant.is_empty() && r.ant.iter().all(|(f, _)| var_set(f) == BTreeSet::from([0])) {
                let sub = Formula::and(r.ant.iter().map(|l| lit_formula(l)).collect());
                for c in &r.cons {
                    if var_set(&c.0) == BTreeSet::from([0]) {
                        self.edges.push((sub.clone(), lit_formula(c)));
                    }
                }
            }
        }
        self.rules.extend(rules);
        self.constraints.extend(constraints);
        if let Node::Equality(l, r) = a.node() {
            if let (Node::Apply(f, args), Node::Number(n)) = (l.node(), r.node()) {
                if f.name() == "size" && args.len() == 1 {
                    if let Node::Lambda(body) = args[0].node() {
                        self.sizes.push((body.clone(), n.clone()));
                    }
                }
            }
        }
    }

    fn saturate(&mut self) {
        let mut changed = true;
        while changed && self.violation.is_none() {
            changed = false;
            for ri in 0..self.rules.len() {
                let r = self.rules[ri].clone();
                for binding in self.matches(&r) {
                    for (t, pol) in &r.cons {
                        let g = instantiate(t, &binding);
                        if self.insert((g, *pol)) {
                            changed = true;
                        }
                        if self.violation.is_some() {
                            return;
                        }
                    }
                }
            }
        }
        self.final_checks();
    }

    /// All complete bindings under which the antecedent holds.
    fn matches(&self, r: &Compiled) -> Vec<Vec<Formula>> {
        let mut out = Vec::new();
        let mut partial = vec![None; r.vars];
        // indexable literals first, builtins last
        let mut order: Vec<&Lit> = r.ant.iter().filter(|(f, _)| !is_builtin_lit(f)).collect();
        order.extend(r.ant.iter().filter(|(f, _)| is_builtin_lit(f)));
        self.extend_match(&order, &mut partial, &mut out);
        out
    }

    fn extend_match(&self, lits: &[&Lit], binding: &mut Vec<Option<Formula>>, out: &mut Vec<Vec<Formula>>) {
        let Some(((t, pol), rest)) = lits.split_first() else {
            if binding.iter().all(Option::is_some) {
                out.push(binding.iter().map(|b| b.clone().unwrap()).collect());
                return;
            }
            // unconstrained variables range over all constants
            let i = binding.iter().position(Option::is_none).unwrap();
            for c in &self.constants {
                binding[i] = Some(Formula::constant(c));
                self.extend_match(lits, binding, out);
            }
            binding[i] = None;
            return;
        };
        let bound_all = var_set(t).iter().all(|&j| binding[binding.len() - 1 - j as usize].is_some());
        if bound_all {
            let full: Vec<Formula> = binding.iter().map(|b| b.clone().unwrap_or_else(Formula::falsum)).collect();
            let g = instantiate(t, &full);
            if self.holds(&g, *pol) {
                self.extend_match(rest, binding, out);
            }
            return;
        }
        if is_builtin_lit(t) {
            // bind remaining variables by enumeration first
            let i = binding
                .iter()
                .enumerate()
                .position(|(i, b)| b.is_none() && var_set(t).contains(&((binding.len() - 1 - i) as u32)))
                .unwrap();
            for c in &self.constants {
                binding[i] = Some(Formula::constant(c));
                self.extend_match(lits, binding, out);
            }
            binding[i] = None;
            return;
        }
        let Some(h) = head(t) else { return };
        let Some(cands) = self.by_head.get(&(h, *pol)) else { return };
        for g in cands {
            let mut b = binding.clone();
            if unify(t, g, &mut b) {
                self.extend_match(rest, &mut b, out);
            }
        }
    }

    pub fn holds(&self, g: &Formula, pol: bool) -> bool {
        let g = orient(g);
        if let Node::Atom(p, args) = g.node() {
            if is_builtin(p) && args.len() == 2 {
                if let Some(v) = self.eval_builtin(p, &args[0], &args[1]) {
                    return v == pol;
                }
            }
        }
        if let Node::Equality(l, r) = g.node() {
            if l.is_ground_value() && r.is_ground_value() {
                return (l == r) == pol;
            }
            // a functional term with a different known value
            if !pol && r.is_ground_value() && !matches!(l.node(), Node::Apply(f, _) if f.name() == "name") {
                if let Some(vs) = self.values.get(l) {
                    if vs.iter().any(|v| v != r) {
                        return true;
                    }
                }
            }
        }
        self.facts.contains(&(g, pol))
    }

    fn number_of(&self, t: &Formula) -> Option<BigInt> {
        match t.node() {
            Node::Number(n) => Some(n.clone()),
            Node::Apply(..) => {
                let vs = self.values.get(t)?;
                match vs.iter().next()?.node() {
                    Node::Number(n) if vs.len() == 1 => Some(n.clone()),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn eval_builtin(&self, p: &Symbol, a: &Formula, b: &Formula) -> Option<bool> {
        let (x, y) = (self.number_of(a)?, self.number_of(b)?);
        Some(match p.name() {
            "less" => x < y,
            _ => x > y,
        })
    }

    /// Add a ground literal; returns whether it was new.
    fn insert(&mut self, (g, pol): Lit) -> bool {
        let g = orient(&g);
        if self.facts.contains(&(g.clone(), pol)) {
            return false;
        }
        if let Some(v) = self.sort_check(&g) {
            self.violation = Some(v);
            return true;
        }
        if self.facts.contains(&(g.clone(), !pol)) {
            self.violation = Some(Violation::Clash(g));
            return true;
        }
        if let Node::Equality(l, r) = g.node() {
            if pol {
                if let Some(v) = self.record_value(l, r) {
                    self.violation = Some(v);
                    return true;
                }
            } else if l.is_ground_value() && r.is_ground_value() && l == r {
                self.violation = Some(Violation::Clash(g));
                return true;
            }
        }
        for c in g.free_constants() {
            self.constants.insert(c);
        }
        if let Some(h) = head(&g) {
            self.by_head.entry((h, pol)).or_default().push(g.clone());
        }
        self.facts.insert((g, pol));
        true
    }

    fn record_value(&mut self, l: &Formula, r: &Formula) -> Option<Violation> {
        match l.node() {
            Node::Apply(f, args) => {
                if !r.is_ground_value() {
                    return None;
                }
                if f.name() == "name" {
                    if !matches!(r.node(), Node::Str(_)) {
                        return Some(Violation::NameNotString(l.clone()));
                    }
                } else if f.name().starts_with("arg") && args.len() == 1 && args[0] == *r {
                    return Some(Violation::SelfArgument(r.clone()));
                }
                let vs = self.values.entry(l.clone()).or_default();
                vs.insert(r.clone());
                if f.name() != "name" && vs.len() > 1 {
                    return Some(Violation::Function(l.clone()));
                }
                None
            }
            _ if l.is_ground_value() && r.is_ground_value() && l != r => Some(Violation::Distinct(l.clone(), r.clone())),
            _ => None,
        }
    }

    fn sort_check(&self, g: &Formula) -> Option<Violation> {
        let bad_arg = |a: &Formula| matches!(a.node(), Node::Number(_) | Node::Str(_) | Node::Lambda(_));
        let mut err = None;
        g.visit(&mut |t| match t.node() {
            Node::Atom(p, args) if !is_builtin(p) && args.iter().any(bad_arg) => err = Some(Violation::Sort(g.clone())),
            Node::Apply(f, args) if f.name() != "size" && args.iter().any(bad_arg) => err = Some(Violation::Sort(g.clone())),
            _ => {}
        });
        err
    }

    fn final_checks(&mut self) {
        if self.violation.is_some() {
            return;
        }
        // asserted comparisons must agree with known measures
        for (g, pol) in &self.facts {
            if let Node::Atom(p, args) = g.node() {
                if is_builtin(p) && args.len() == 2 && self.eval_builtin(p, &args[0], &args[1]) == Some(!pol) {
                    self.violation = Some(Violation::Clash(g.clone()));
                    return;
                }
            }
        }
        for c in &self.constraints {
            let mut out = Vec::new();
            let order: Vec<&Lit> = c.ant.iter().collect();
            self.extend_match(&order, &mut vec![None; c.vars], &mut out);
            if !out.is_empty() {
                let witness = Formula::and(c.ant.iter().map(|l| instantiate(&lit_formula(l), &out[0])).collect());
                self.violation = Some(Violation::Constraint(witness));
                return;
            }
        }
        if let Some(v) = self.size_violation() {
            self.violation = Some(v);
        }
    }

    /// Constants `c` with `body[c]` provable (`pol`) or refutable (`!pol`).
    pub fn members(&self, body: &Formula, pol: bool) -> BTreeSet<Symbol> {
        let Some(lits) = literals(body) else { return BTreeSet::new() };
        self.constants
            .iter()
            .filter(|c| {
                let b = [Formula::constant(*c)];
                if pol {
                    lits.iter().all(|(t, p)| self.holds(&instantiate(t, &b), *p))
                } else {
                    lits.iter().any(|(t, p)| self.holds(&instantiate(t, &b), !*p))
                }
            })
            .cloned()
            .collect()
    }

    fn size_violation(&self) -> Option<Violation> {
        for (body, n) in &self.sizes {
            let m = self.members(body, true).len();
            if BigInt::from(m) > *n {
                return Some(Violation::SizeExceeded { set: Formula::lambda(body.clone()), members: m, size: n.clone() });
            }
        }
        for (body, n) in &self.sizes {
            for sub in super::sets::reachable(&self.edges, body, false) {
                for (b2, n2) in &self.sizes {
                    if b2.canonical() == sub && n2 > n {
                        return Some(Violation::SizeBounds(Formula::lambda(body.clone())));
                    }
                }
            }
        }
        None
    }

    pub fn values_of(&self, term: &Formula) -> Option<&BTreeSet<Formula>> {
        self.values.get(term)
    }

    pub fn facts(&self) -> impl Iterator<Item = &Lit> {
        self.facts.iter()
    }
}

pub(crate) fn lit_formula((f, pol): &Lit) -> Formula {
    if *pol {
        f.clone()
    } else {
        Formula::not(f.clone())
    }
}
