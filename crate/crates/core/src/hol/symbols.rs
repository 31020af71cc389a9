use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// An interned name for a constant, predicate or function.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<&Symbol> for Symbol {
    fn from(s: &Symbol) -> Self {
        s.clone()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Bidirectional id/name registry for constants, plus fresh-constant allocation.
///
/// Ids are dense and are never handed out twice, even if the constant they
/// named disappears from the theory.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    names: Vec<Symbol>,
    ids: HashMap<Symbol, u32>,
    next_fresh: u64,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        let sym = Symbol::new(name);
        if let Some(&id) = self.ids.get(&sym) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(sym.clone());
        self.ids.insert(sym, id);
        id
    }

    pub fn id_of(&self, sym: &Symbol) -> Option<u32> {
        self.ids.get(sym).copied()
    }

    pub fn name_of(&self, id: u32) -> Option<&Symbol> {
        self.names.get(id as usize)
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.ids.contains_key(sym)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Allocate a new constant `c<k>` whose name has never been registered.
    pub fn fresh(&mut self) -> Symbol {
        loop {
            self.next_fresh += 1;
            let name = format!("c{}", self.next_fresh);
            let sym = Symbol::new(&name);
            if !self.ids.contains_key(&sym) {
                self.intern(&name);
                return sym;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_stable() {
        let mut t = SymbolTable::new();
        assert_eq!(t.intern("bob"), 0);
        assert_eq!(t.intern("alice"), 1);
        assert_eq!(t.intern("bob"), 0);
        assert_eq!(t.name_of(1).unwrap().name(), "alice");
    }

    #[test]
    fn fresh_skips_taken_names() {
        let mut t = SymbolTable::new();
        t.intern("c1");
        let a = t.fresh();
        let b = t.fresh();
        assert_eq!(a.name(), "c2");
        assert_eq!(b.name(), "c3");
        assert!(t.contains(&a));
    }
}
