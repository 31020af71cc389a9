#![allow(dead_code)]

pub mod toy;

use abduce_core::hol::{parse_formula_unscoped, Formula};

pub fn f(s: &str) -> Formula {
    parse_formula_unscoped(s).unwrap()
}
