use super::{Provenance, Trace, WitnessPair};
use crate::ordinal::Ordinal;
use crate::spec_lang::Delta2Spec;

/// The dual least-search approximation: `f(c,w) = 0` iff `z0(w) <= x0(w)`, where
/// `z0(w)` is the least `z <= w` with `B(z,u,c)` for all `u <= w` and `x0(w)` the
/// least `x <= w` with `!A(x,y,c)` for all `y <= w` (each `w+1` if none).
pub struct BaselinePair<'a> {
    spec: &'a Delta2Spec,
}

pub fn limit_lemma_witness(spec: &Delta2Spec) -> BaselinePair<'_> {
    BaselinePair { spec }
}

/// `first[v]` is the least `u <= window` at which `holds(v, u)` fails, or `None`.
fn first_failures(window: u64, holds: impl Fn(u64, u64) -> bool) -> Vec<Option<u64>> {
    (0..=window).map(|v| (0..=window).find(|&u| !holds(v, u))).collect()
}

/// Least `v <= w` whose first failure lies beyond `w`, else `w + 1`.
fn least_surviving(first: &[Option<u64>], w: u64, from: u64) -> u64 {
    (from..=w).find(|&v| first[v as usize].is_none_or(|u| u > w)).unwrap_or(w + 1)
}

impl BaselinePair<'_> {
    /// Direct evaluation from the definition, without sharing work across `w`.
    pub fn f_direct(&self, c: u64, w: u64) -> u64 {
        let z0 = (0..=w).find(|&z| (0..=w).all(|u| self.spec.b_holds(z, u, c))).unwrap_or(w + 1);
        let x0 = (0..=w).find(|&x| (0..=w).all(|y| !self.spec.a_holds(x, y, c))).unwrap_or(w + 1);
        u64::from(z0 > x0)
    }
}

impl WitnessPair for BaselinePair<'_> {
    fn bound(&self, _c: u64) -> Option<Ordinal> {
        None
    }

    fn provenance(&self) -> Provenance {
        Provenance::Baseline
    }

    fn trace(&self, c: u64, window: u64) -> Trace {
        let b_fail = first_failures(window, |z, u| self.spec.b_holds(z, u, c));
        let a_fail = first_failures(window, |x, y| !self.spec.a_holds(x, y, c));
        // Both searches only move upward as w grows.
        let (mut z0, mut x0) = (0, 0);
        let mut f = Vec::with_capacity(window as usize + 1);
        for w in 0..=window {
            z0 = least_surviving(&b_fail, w, z0.min(w));
            x0 = least_surviving(&a_fail, w, x0.min(w));
            f.push(u64::from(z0 > x0));
        }
        let h = vec![Ordinal::zero(); f.len()];
        Trace { c, f, h }
    }
}
