//! The random decisions of the search, abstracted so they can be driven by a
//! random number generator or enumerated exhaustively.

use rand::seq::SliceRandom;
use rand::Rng;

pub trait Chooser {
    /// A permutation of `0..n`.
    fn permutation(&mut self, n: usize) -> Vec<usize>;
    /// An index drawn with probability proportional to `weights`.
    fn pick(&mut self, weights: &[f64]) -> usize;
}

impl<R: Rng + ?Sized> Chooser for R {
    fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(self);
        v
    }

    fn pick(&mut self, weights: &[f64]) -> usize {
        match rand::distributions::WeightedIndex::new(weights) {
            Ok(d) => self.sample(d),
            Err(_) => 0,
        }
    }
}

/// Follows a fixed prefix of decisions, then takes option 0, recording the
/// probability of the path taken.
#[derive(Debug, Default)]
pub struct Scripted {
    prefix: Vec<usize>,
    taken: Vec<(usize, usize)>,
    log_p: f64,
}

impl Scripted {
    fn decide(&mut self, probs: &[f64]) -> usize {
        let pos = self.taken.len();
        let k = self.prefix.get(pos).copied().unwrap_or(0);
        self.taken.push((k, probs.len()));
        self.log_p += probs[k].ln();
        k
    }
}

impl Chooser for Scripted {
    fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut rest: Vec<usize> = (0..n).collect();
        let mut out = Vec::with_capacity(n);
        while !rest.is_empty() {
            let probs = vec![1.0 / rest.len() as f64; rest.len()];
            let k = self.decide(&probs);
            out.push(rest.remove(k));
        }
        out
    }

    fn pick(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        self.decide(&probs)
    }
}

/// Run `f` once for every distinct sequence of decisions, returning each
/// result with its probability. Zero-probability paths are skipped.
pub fn enumerate<T>(mut f: impl FnMut(&mut Scripted) -> T) -> Vec<(T, f64)> {
    let mut out = Vec::new();
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut s = Scripted { prefix: prefix.clone(), ..Default::default() };
        let v = f(&mut s);
        if s.log_p > f64::NEG_INFINITY {
            out.push((v, s.log_p.exp()));
        }
        // advance the deepest decision that still has untried options
        let mut taken = s.taken;
        loop {
            match taken.pop() {
                None => return out,
                Some((k, n)) if k + 1 < n => {
                    prefix = taken.iter().map(|(k, _)| *k).collect();
                    prefix.push(k + 1);
                    break;
                }
                Some(_) => {}
            }
        }
    }
}
