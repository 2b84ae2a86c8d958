//! The functions `g1, g, h, h'` whose limit is the lexicographically least
//! solution tuple of a bounded formula.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use super::coding::{decode, encode};
use crate::spec_lang::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimrError {
    #[error("formula {name} takes {found} variables, expected k+1 = {expected}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no solution with code <= {window}")]
    Empty { window: u64 },
}

/// Values of the four functions at step `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LexChainState {
    pub n: u64,
    pub g1: u64,
    pub g: u64,
    pub h: u64,
    pub h_prime: u64,
}

/// Incremental simulation of the chain for `phi(x_1, ..., x_{k+1})`.
#[derive(Debug, Clone)]
pub struct LexChain<'a> {
    phi: &'a Matrix,
    k: usize,
    states: Vec<LexChainState>,
    /// Least `(k+1)`-code satisfying `phi` seen so far.
    least: Option<u64>,
    seen: HashSet<u64>,
    injective: bool,
    /// Per k-prefix: how far `u` has been scanned and the least witness found.
    scans: HashMap<Vec<u64>, (u64, Option<u64>)>,
}

impl<'a> LexChain<'a> {
    pub fn new(phi: &'a Matrix, k: usize) -> Result<Self, LimrError> {
        if k == 0 {
            return Err(LimrError::ZeroK);
        }
        if phi.arity() != k + 1 {
            return Err(LimrError::Arity { name: phi.name.clone(), expected: k + 1, found: phi.arity() });
        }
        Ok(LexChain {
            phi,
            k,
            states: Vec::new(),
            least: None,
            seen: HashSet::new(),
            injective: true,
            scans: HashMap::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Lexicographic comparison of two k-codes.
    pub fn lex(&self, a: u64, b: u64) -> Ordering {
        decode(self.k, a).cmp(&decode(self.k, b))
    }

    fn holds_code(&self, n: u64) -> bool {
        self.phi.holds(&decode(self.k + 1, n))
    }

    /// `exists u <= bound . phi(prefix, u)`, scanning each prefix once.
    fn witness_upto(&mut self, prefix: &[u64], bound: u64) -> bool {
        let phi = self.phi;
        let entry = self.scans.entry(prefix.to_vec()).or_insert((0, None));
        if entry.1.is_none() {
            let mut args = prefix.to_vec();
            args.push(0);
            let start = entry.0;
            for u in start..=bound {
                args[prefix.len()] = u;
                if phi.holds(&args) {
                    entry.1 = Some(u);
                    break;
                }
            }
            entry.0 = entry.0.max(bound.saturating_add(1));
        }
        entry.1.is_some_and(|u| u <= bound)
    }

    fn step(&mut self) -> LexChainState {
        let n = self.states.len() as u64;
        if self.least.is_none() && self.holds_code(n) {
            self.least = Some(n);
        }
        let g1 = match self.least {
            None => n,
            Some(y) => encode(&decode(self.k + 1, y)[..self.k]),
        };
        let parts = decode(self.k + 1, n);
        let g = if self.witness_upto(&parts[..self.k], parts[self.k]) { encode(&parts[..self.k]) } else { g1 };
        let h = match self.states.last() {
            None => g,
            Some(prev) => {
                if self.injective || (self.seen.contains(&g) && self.lex(g, prev.h) == Ordering::Less) {
                    g
                } else {
                    prev.h
                }
            }
        };
        if !self.seen.insert(g) {
            self.injective = false;
        }
        let h_prime = if self.least.is_some() { h } else { 0 };
        let state = LexChainState { n, g1, g, h, h_prime };
        self.states.push(state);
        state
    }

    /// States for `0..=n`.
    pub fn run_to(&mut self, n: u64) -> &[LexChainState] {
        while self.states.len() as u64 <= n {
            self.step();
        }
        &self.states[..=n as usize]
    }
}

/// The chain state at step `n`.
pub fn lex_chain(phi: &Matrix, k: usize, n: u64) -> Result<LexChainState, LimrError> {
    let mut chain = LexChain::new(phi, k)?;
    Ok(chain.run_to(n)[n as usize])
}

/// Lexicographic minimum of `(x_1..x_k)` over the `(k+1)`-codes `<= window`
/// satisfying `phi`, found by enumerating the codes directly.
pub fn brute_lex_min(phi: &Matrix, k: usize, window: u64) -> Option<Vec<u64>> {
    (0..=window)
        .map(|n| decode(k + 1, n))
        .filter(|xs| phi.holds(xs))
        .map(|mut xs| {
            xs.truncate(k);
            xs
        })
        .min()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NestedLimit {
    pub k: usize,
    pub window: u64,
    pub tuple: Vec<u64>,
    /// Step at which `h'` last changed.
    pub stabilization_w: u64,
    /// `components[i]`: first step from which components `1..=i+1` stay fixed.
    pub components: Vec<u64>,
    /// First step from which `h'` is lexicographically weakly decreasing.
    pub descending_from: u64,
    pub brute_min: Vec<u64>,
    pub agree: bool,
    /// `h'` still moved in the second half of the window.
    pub unstable: bool,
}

/// Simulates `h'` over `0..=window` and reads its limit off component by component.
pub fn nested_limit(phi: &Matrix, k: usize, window: u64) -> Result<NestedLimit, LimrError> {
    let mut chain = LexChain::new(phi, k)?;
    let brute_min = brute_lex_min(phi, k, window).ok_or(LimrError::Empty { window })?;
    let states = chain.run_to(window).to_vec();
    let tuples: Vec<Vec<u64>> = states.iter().map(|s| decode(k, s.h_prime)).collect();
    let last = tuples.last().cloned().unwrap_or_default();
    let settled = |i: usize| -> u64 {
        (1..tuples.len()).rev().find(|&w| tuples[w][..=i] != tuples[w - 1][..=i]).unwrap_or(0) as u64
    };
    let components: Vec<u64> = (0..k).map(settled).collect();
    let stabilization_w = components.last().copied().unwrap_or(0);
    let descending_from = (1..tuples.len()).rev().find(|&w| tuples[w] > tuples[w - 1]).unwrap_or(0) as u64;
    Ok(NestedLimit {
        k,
        window,
        agree: last == brute_min,
        tuple: last,
        stabilization_w,
        components,
        descending_from,
        brute_min,
        unstable: stabilization_w > window / 2,
    })
}
