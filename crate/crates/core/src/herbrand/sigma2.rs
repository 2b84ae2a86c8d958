use thiserror::Error;

use crate::ershov::{Provenance, Trace, WitnessPair};
use crate::ordinal::Ordinal;
use crate::spec_lang::{Delta2Spec, TermExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Sigma2Error {
    #[error("the candidate list is empty")]
    NoCandidates,
}

/// Candidate witnesses `s_0, s_1, ...` for `exists z forall u B(z,u,c)`,
/// where `s_i` may read the refutations `b_j` of earlier candidates.
///
/// The pair tests one candidate per step: `f(c,w)` is the candidate under
/// test, and a candidate refuted by some `u <= w` is replaced by the next one
/// at `w+1`. `h` counts the candidates left, so `K = n + 1`.
#[derive(Debug, Clone)]
pub struct Sigma2Pair {
    spec: Delta2Spec,
    candidates: Vec<TermExpr>,
}

pub fn sigma2_witness_finite(candidates: &[TermExpr], spec: &Delta2Spec) -> Result<Sigma2Pair, Sigma2Error> {
    if candidates.is_empty() {
        return Err(Sigma2Error::NoCandidates);
    }
    Ok(Sigma2Pair { spec: spec.clone(), candidates: candidates.to_vec() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sigma2Run {
    pub trace: Trace,
    /// Index of the candidate under test at each step.
    pub index: Vec<usize>,
    /// The last candidate was refuted inside the window.
    pub no_stable_witness: bool,
}

impl Sigma2Pair {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn run(&self, c: u64, window: u64) -> Sigma2Run {
        let n = self.candidates.len();
        let refute = |z: u64| (0..=window).find(|&u| !self.spec.b_holds(z, u, c));
        let mut env = vec![c];
        let mut idx = 0;
        let mut value = self.candidates[0].eval(&env);
        let mut refuted_at = refute(value);
        let mut run =
            Sigma2Run { trace: Trace { c, f: Vec::new(), h: Vec::new() }, index: Vec::new(), no_stable_witness: false };
        for w in 0..=window {
            run.trace.f.push(value);
            run.trace.h.push(Ordinal::from((n - 1 - idx) as u64));
            run.index.push(idx);
            if let Some(b) = refuted_at.filter(|&b| b <= w) {
                if idx + 1 < n {
                    env.push(b);
                    idx += 1;
                    value = self.candidates[idx].eval(&env);
                    refuted_at = refute(value);
                } else {
                    run.no_stable_witness = true;
                }
            }
        }
        run
    }
}

impl WitnessPair for Sigma2Pair {
    fn bound(&self, _c: u64) -> Option<Ordinal> {
        Some(Ordinal::from(self.candidates.len() as u64 + 1))
    }

    fn provenance(&self) -> Provenance {
        Provenance::Herbrand
    }

    fn trace(&self, c: u64, window: u64) -> Trace {
        self.run(c, window).trace
    }
}
