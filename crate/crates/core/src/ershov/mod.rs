//! Witness pairs `(f, h, K)`: window checks, limits and the Limit Lemma baseline.

mod baseline;
mod table;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::ordinal::Ordinal;

pub use baseline::{limit_lemma_witness, BaselinePair};
pub use table::{read_traces_csv, write_trace_csv, write_traces_csv, TablePair, TraceCsvError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Herbrand,
    Derivation,
    Baseline,
    External,
}

/// Values of `f(c,w)` and `h(c,w)` for `w = 0..=window`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub c: u64,
    pub f: Vec<u64>,
    pub h: Vec<Ordinal>,
}

impl Trace {
    pub fn window(&self) -> u64 {
        (self.f.len() as u64).saturating_sub(1)
    }

    pub fn changes(&self) -> usize {
        self.f.windows(2).filter(|p| p[0] != p[1]).count()
    }

    pub fn truncated(&self, window: u64) -> Trace {
        let n = (window as usize + 1).min(self.f.len());
        Trace { c: self.c, f: self.f[..n].to_vec(), h: self.h[..n].to_vec() }
    }
}

pub trait WitnessPair: Sync {
    /// The claimed bound `K` at parameter `c`; `None` if the pair claims none.
    fn bound(&self, c: u64) -> Option<Ordinal>;
    fn provenance(&self) -> Provenance;
    fn trace(&self, c: u64, window: u64) -> Trace;

    fn f(&self, c: u64, w: u64) -> u64 {
        self.trace(c, w).f[w as usize]
    }

    fn h(&self, c: u64, w: u64) -> Ordinal {
        self.trace(c, w).h[w as usize].clone()
    }
}

/// A pair given by closures, mostly for tests and hand-built tables.
pub struct FnPair<F, H> {
    pub f: F,
    pub h: H,
    pub bound: Option<Ordinal>,
    pub provenance: Provenance,
}

impl<F, H> WitnessPair for FnPair<F, H>
where
    F: Fn(u64, u64) -> u64 + Sync,
    H: Fn(u64, u64) -> Ordinal + Sync,
{
    fn bound(&self, _c: u64) -> Option<Ordinal> {
        self.bound.clone()
    }

    fn provenance(&self) -> Provenance {
        self.provenance
    }

    fn trace(&self, c: u64, window: u64) -> Trace {
        Trace {
            c,
            f: (0..=window).map(|w| (self.f)(c, w)).collect(),
            h: (0..=window).map(|w| (self.h)(c, w)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub first_violation: Option<u64>,
    pub detail: Option<String>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict { passed: true, first_violation: None, detail: None }
    }

    fn fail(w: u64, detail: String) -> Self {
        Verdict { passed: false, first_violation: Some(w), detail: Some(detail) }
    }
}

/// `K > h(w)` and `h(w) >= h(w+1)` for all `w` below the window.
/// A rise is reported at the index where the larger value appears.
pub fn check_weakly_descending_trace(trace: &Trace, bound: Option<&Ordinal>) -> Verdict {
    let n = trace.h.len();
    for w in 0..n.saturating_sub(1) {
        if let Some(k) = bound {
            if trace.h[w] >= *k {
                return Verdict::fail(w as u64, format!("h = {} is not below K = {}", trace.h[w], k));
            }
        }
        if trace.h[w] < trace.h[w + 1] {
            return Verdict::fail(w as u64 + 1, format!("h rises from {} to {}", trace.h[w], trace.h[w + 1]));
        }
    }
    Verdict::pass()
}

/// `f(w) != f(w+1)` implies `h(w) > h(w+1)`, reported at `w+1`.
pub fn check_lowering_trace(trace: &Trace) -> Verdict {
    for w in 0..trace.f.len().saturating_sub(1) {
        if trace.f[w] != trace.f[w + 1] && trace.h[w] <= trace.h[w + 1] {
            return Verdict::fail(
                w as u64 + 1,
                format!(
                    "f changes {} -> {} while h goes {} -> {}",
                    trace.f[w],
                    trace.f[w + 1],
                    trace.h[w],
                    trace.h[w + 1]
                ),
            );
        }
    }
    Verdict::pass()
}

pub fn check_weakly_descending(pair: &dyn WitnessPair, c: u64, window: u64) -> Verdict {
    check_weakly_descending_trace(&pair.trace(c, window), pair.bound(c).as_ref())
}

pub fn check_lowering(pair: &dyn WitnessPair, c: u64, window: u64) -> Verdict {
    check_lowering_trace(&pair.trace(c, window))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitReport {
    pub c: u64,
    pub observed_limit: u64,
    pub last_change_w: u64,
    pub changes: usize,
    pub window: u64,
    pub h_first: Ordinal,
    pub h_last: Ordinal,
    pub certified: bool,
    pub reliable: bool,
    pub still_descending: bool,
}

pub fn limit_report(trace: &Trace, bound: Option<&Ordinal>, reliable: bool) -> LimitReport {
    let window = trace.window();
    let last_change_w = (1..trace.f.len()).rev().find(|&w| trace.f[w] != trace.f[w - 1]).unwrap_or(0) as u64;
    let changes = trace.changes();
    let h_last = trace.h.last().cloned().unwrap_or_default();
    let budget_spent = bound.and_then(Ordinal::as_u64).is_some_and(|k| k >= 1 && changes as u64 == k - 1);
    let certified = bound.is_some() && (budget_spent || h_last.is_zero());
    let n = trace.h.len();
    let still_descending = n >= 2 && trace.h[n - 2] > trace.h[n - 1];
    LimitReport {
        c: trace.c,
        observed_limit: trace.f.last().copied().unwrap_or(0),
        last_change_w,
        changes,
        window,
        h_first: trace.h.first().cloned().unwrap_or_default(),
        h_last,
        certified,
        reliable,
        still_descending,
    }
}

pub fn find_limit(pair: &dyn WitnessPair, c: u64, window: u64) -> LimitReport {
    let trace = pair.trace(c, window);
    let bound = pair.bound(c);
    let wd = check_weakly_descending_trace(&trace, bound.as_ref());
    let low = pair.provenance() == Provenance::Baseline || check_lowering_trace(&trace).passed;
    limit_report(&trace, bound.as_ref(), wd.passed && low)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairVerdicts {
    pub c: u64,
    pub weakly_descending: Verdict,
    pub lowering: Verdict,
    pub limit: LimitReport,
}

/// Both window checks plus the limit report, computed from a trace alone.
pub fn verdicts_for_trace(trace: &Trace, bound: Option<&Ordinal>, check_lowering: bool) -> PairVerdicts {
    let weakly_descending = check_weakly_descending_trace(trace, bound);
    let lowering = if check_lowering { check_lowering_trace(trace) } else { Verdict::pass() };
    let reliable = weakly_descending.passed && lowering.passed;
    PairVerdicts { c: trace.c, limit: limit_report(trace, bound, reliable), weakly_descending, lowering }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainError {
    Rises { at: u64 },
    Empty,
}

/// Minimum of a weakly descending chain over `0..=window` and the first `w` attaining it.
pub fn chain_limit(chain: impl Fn(u64) -> Ordinal, window: u64) -> Result<(Ordinal, u64), ChainError> {
    let mut best = chain(0);
    let mut at = 0;
    for w in 1..=window {
        let next = chain(w);
        match next.cmp(&best) {
            Ordering::Greater => return Err(ChainError::Rises { at: w }),
            Ordering::Less => {
                best = next;
                at = w;
            }
            Ordering::Equal => {}
        }
    }
    Ok((best, at))
}

/// `h` for a pair that spends one unit of a finite budget per change of `f`.
pub fn countdown(f: &[u64], start: u64) -> Vec<Ordinal> {
    let mut h = Vec::with_capacity(f.len());
    let mut cur = start;
    for w in 0..f.len() {
        if w > 0 && f[w] != f[w - 1] {
            cur = cur.saturating_sub(1);
        }
        h.push(Ordinal::from(cur));
    }
    h
}
