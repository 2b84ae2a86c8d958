use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use super::canonical::{build_for, least_witness_bound, DeriveError};
use super::{ClosedFormula, Derivation, DerivationNode, Mode, Rule, TreeAddress};
use crate::ershov::{Provenance, Trace, WitnessPair};
use crate::limr::coding::left;
use crate::ordinal::Ordinal;
use crate::spec_lang::Delta2Spec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("the walk needs premise {premise} of {address} at w = {w}, which does not exist")]
    Stuck { w: u64, address: TreeAddress, premise: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub w: u64,
    pub address: TreeAddress,
    pub rule: Rule,
    /// `n` when the node is the n-th premise of a `forall`.
    pub premise: Option<u64>,
    pub block: u64,
    pub ord: Ordinal,
    pub f: u64,
    pub h: Ordinal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub c: u64,
    pub mode: Mode,
    pub rows: Vec<TraceRow>,
    /// `3K` for the Δ⁰₂ extraction, `K` for the Σ⁰₂ one.
    pub bound: Ordinal,
    /// First step on premise 0 of the surviving candidate's `forall`.
    pub entered_final_block: Option<u64>,
}

impl DerivationTrace {
    pub fn to_trace(&self) -> Trace {
        Trace {
            c: self.c,
            f: self.rows.iter().map(|r| r.f).collect(),
            h: self.rows.iter().map(|r| r.h.clone()).collect(),
        }
    }
}

struct Walker<'a> {
    d: &'a Derivation,
    node: Arc<DerivationNode>,
    parent: Option<Arc<DerivationNode>>,
    premise: Option<u64>,
}

impl Walker<'_> {
    fn step(&mut self, w: u64) -> Result<(), TraceError> {
        let stuck = |node: &DerivationNode, premise| TraceError::Stuck { w, address: node.address.clone(), premise };
        let side_true = self.node.sfml.and_then(|s| self.d.formula_holds(&s)).unwrap_or(false);
        match (self.premise, &self.parent) {
            (Some(n), Some(parent)) if side_true => {
                self.node = self.d.child(parent, n + 1).ok_or_else(|| stuck(parent, n + 1))?;
                self.premise = Some(n + 1);
            }
            _ => {
                let next = self.d.child(&self.node, 0).ok_or_else(|| stuck(&self.node, 0))?;
                self.premise = (self.node.rule == Rule::Forall).then_some(0);
                self.parent = Some(std::mem::replace(&mut self.node, next));
            }
        }
        Ok(())
    }
}

fn triple(o: &Ordinal) -> Ordinal {
    o.scale_finite(3).expect("3 is a valid factor")
}

/// `sigma(c, w)`.
pub fn trace_sigma(d: &Derivation, w: u64) -> Result<TreeAddress, TraceError> {
    let mut walker = Walker { d, node: d.root().clone(), parent: None, premise: None };
    for i in 0..w {
        walker.step(i + 1)?;
    }
    Ok(walker.node.address.clone())
}

/// Runs the walk for `0..=window` and extracts `f` and `h` along it.
pub fn extract_trace(d: &Derivation, window: u64) -> Result<DerivationTrace, TraceError> {
    run(d, |_, w| w >= window)
}

/// Runs until `margin` steps past the entry into the surviving candidate's
/// block, or `cap` steps, whichever comes first.
pub fn settled_trace(d: &Derivation, margin: u64, cap: u64) -> Result<DerivationTrace, TraceError> {
    run(d, |entered, w| w >= cap || entered.is_some_and(|e| w >= e + margin))
}

fn run(d: &Derivation, stop: impl Fn(Option<u64>, u64) -> bool) -> Result<DerivationTrace, TraceError> {
    let root = d.root().clone();
    let bound = match d.mode() {
        Mode::Delta2 => triple(d.bound()),
        Mode::Sigma2 => d.bound().clone(),
    };
    let (f0, h0) = match d.mode() {
        Mode::Delta2 => (1, triple(&root.ord)),
        Mode::Sigma2 => (0, root.ord.clone()),
    };
    let mut rows = vec![TraceRow {
        w: 0,
        address: root.address.clone(),
        rule: root.rule,
        premise: None,
        block: root.block,
        ord: root.ord.clone(),
        f: f0,
        h: h0,
    }];
    let mut walker = Walker { d, node: root, parent: None, premise: None };
    let mut entered = None;
    let mut a_seen = false;
    let spec = d.spec();
    let c = d.c();
    let mut w = 0;
    while !stop(entered, w) {
        walker.step(w + 1)?;
        w += 1;
        let node = &walker.node;
        let prev = rows.last().expect("non-empty");
        let candidate = match walker.parent.as_ref().and_then(|p| p.mfml) {
            Some(ClosedFormula::Pi1 { x }) => x,
            _ => node.block,
        };
        let side_true = node.sfml.and_then(|s| d.formula_holds(&s)).unwrap_or(false);
        let (f, h) = match (d.mode(), walker.premise) {
            (Mode::Delta2, None) => (1 - prev.f, triple(&node.ord)),
            (Mode::Delta2, Some(n)) => {
                if n == 0 {
                    a_seen = false;
                }
                a_seen = a_seen || spec.a_holds(left(candidate), left(n), c);
                let f = u64::from(!(side_true && a_seen));
                let base = triple(&node.ord);
                let h = match (n, prev.f, f) {
                    (0, _, _) => base.add_natural(2),
                    (_, a, b) if a == b => prev.h.clone(),
                    (_, 1, 0) => base.add_natural(1),
                    _ => base,
                };
                (f, h)
            }
            (Mode::Sigma2, None) => (0, node.ord.clone()),
            (Mode::Sigma2, Some(_)) => (candidate, node.ord.clone()),
        };
        if walker.premise == Some(0) && node.block == d.settles_at() && entered.is_none() {
            entered = Some(w);
        }
        rows.push(TraceRow {
            w,
            address: node.address.clone(),
            rule: node.rule,
            premise: walker.premise,
            block: node.block,
            ord: node.ord.clone(),
            f,
            h,
        });
    }
    Ok(DerivationTrace { c, mode: d.mode(), rows, bound, entered_final_block: entered })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaBoundVerdict {
    pub passed: bool,
    pub first_violation: Option<u64>,
}

/// Length and every component of `sigma(c,w)` are at most `w`.
pub fn check_sigma_bound(trace: &DerivationTrace) -> SigmaBoundVerdict {
    let bad =
        trace.rows.iter().find(|r| r.address.len() as u64 > r.w || r.address.0.iter().any(|&a| a > r.w)).map(|r| r.w);
    SigmaBoundVerdict { passed: bad.is_none(), first_violation: bad }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForallBlockVerdict {
    pub passed: bool,
    pub runs: usize,
    pub max_changes: usize,
    pub violation: Option<(u64, String)>,
}

/// Along each maximal run of consecutive premises of one `forall`, `f`
/// changes at most twice, and a change from 0 to 1 only happens on the last
/// premise of the run, after which the walk descends into that premise.
pub fn check_forall_block_changes(trace: &DerivationTrace) -> ForallBlockVerdict {
    let rows = &trace.rows;
    let mut verdict = ForallBlockVerdict { passed: true, runs: 0, max_changes: 0, violation: None };
    let mut i = 0;
    while i < rows.len() {
        if rows[i].premise.is_none() {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < rows.len()
            && rows[i + 1].premise.is_some_and(|n| Some(n) == rows[i].premise.map(|m| m + 1))
            && rows[i + 1].address.parent() == rows[i].address.parent()
        {
            i += 1;
        }
        let end = i;
        verdict.runs += 1;
        let changes = (start + 1..=end).filter(|&j| rows[j].f != rows[j - 1].f).count();
        verdict.max_changes = verdict.max_changes.max(changes);
        if changes > 2 {
            verdict.passed = false;
            verdict.violation = Some((rows[end].w, format!("{changes} changes along one forall")));
            return verdict;
        }
        if let Some(j) = (start + 1..=end).find(|&j| rows[j - 1].f == 0 && rows[j].f == 1) {
            let descends = rows.get(j + 1).is_none_or(|next| next.address == rows[j].address.child(0));
            if j != end || !descends {
                verdict.passed = false;
                verdict.violation = Some((rows[j].w, "f returns to 1 before the walk leaves the forall".into()));
                return verdict;
            }
        }
        i += 1;
    }
    verdict
}

pub fn write_trace_csv<W: Write>(out: W, trace: &DerivationTrace) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["w", "address", "f", "h"])?;
    for r in &trace.rows {
        writer.write_record([r.w.to_string(), r.address.to_string(), r.f.to_string(), r.h.render()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Witness pairs read off canonical derivations, one per parameter, with the
/// candidate bound found by brute force over `y <= audit_window`.
pub struct DerivationPair {
    spec: Delta2Spec,
    mode: Mode,
    audit_window: u64,
    x_cap: u64,
    cache: Mutex<HashMap<u64, Arc<Derivation>>>,
}

impl DerivationPair {
    pub fn new(spec: &Delta2Spec, mode: Mode, audit_window: u64, x_cap: u64) -> Self {
        DerivationPair { spec: spec.clone(), mode, audit_window, x_cap, cache: Mutex::new(HashMap::new()) }
    }

    pub fn derivation(&self, c: u64) -> Result<Arc<Derivation>, DeriveError> {
        if let Some(d) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&c) {
            return Ok(d.clone());
        }
        let x = least_witness_bound(&self.spec, self.mode, c, self.audit_window, self.x_cap)
            .ok_or(DeriveError::NoSurvivor { c, x_bound: self.x_cap, window: self.audit_window })?;
        let d = Arc::new(build_for(&self.spec, self.mode, c, x, self.audit_window)?);
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).insert(c, d.clone());
        Ok(d)
    }
}

impl WitnessPair for DerivationPair {
    fn bound(&self, c: u64) -> Option<Ordinal> {
        let d = self.derivation(c).ok()?;
        Some(match self.mode {
            Mode::Delta2 => triple(d.bound()),
            Mode::Sigma2 => d.bound().clone(),
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::Derivation
    }

    /// # Panics
    /// If no derivation exists for `c` or the walk gets stuck.
    fn trace(&self, c: u64, window: u64) -> Trace {
        let d = self.derivation(c).unwrap_or_else(|e| panic!("{e}"));
        extract_trace(&d, window).unwrap_or_else(|e| panic!("{e}")).to_trace()
    }
}
