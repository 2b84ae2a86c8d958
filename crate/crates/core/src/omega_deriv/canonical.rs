use std::sync::Arc;

use thiserror::Error;

use super::{ClosedFormula, Derivation, DerivationNode, Expand, Mode, Rule, TreeAddress};
use crate::ordinal::Ordinal;
use crate::spec_lang::Delta2Spec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("no candidate <= {x_bound} survives y <= {window} for c = {c}")]
    NoSurvivor { c: u64, x_bound: u64, window: u64 },
}

fn survives(holds: &dyn Fn(u64, u64) -> bool, x: u64, window: u64) -> bool {
    (0..=window).all(|y| holds(x, y))
}

/// Least `x <= cap` with `q(x,y,c)` for every `y <= window`.
pub fn least_witness_bound(spec: &Delta2Spec, mode: Mode, c: u64, window: u64, cap: u64) -> Option<u64> {
    let holds = equation(spec, mode, c);
    (0..=cap).find(|&x| survives(&holds, x, window))
}

fn equation(spec: &Delta2Spec, mode: Mode, c: u64) -> impl Fn(u64, u64) -> bool + '_ {
    move |x, y| match mode {
        Mode::Delta2 => spec.p_holds(x, y, c),
        Mode::Sigma2 => spec.b_holds(x, y, c),
    }
}

/// The candidate sweep for `exists x forall y [p(x,y,c) = 0]`.
///
/// Block `k` is an `exists` introducing candidate `k` above a `forall` whose
/// n-th premise is an initial sequent when `p(k,n,c) = 0` is true and otherwise
/// repeats into block `k+1`. Ordinals: the block-k `forall` gets `w*(X+1-k)`,
/// its premises `w*(X-k)+2`, the next `exists` `w*(X-k)+1`, the root
/// `w*(X+1)+1`, and `K = w*(X+2)`.
///
/// A false premise in block `X` has nowhere to go and is left as an initial
/// sequent with a false equation, which the audit reports.
pub fn canonical_derivation(
    spec: &Delta2Spec,
    c: u64,
    x_bound: u64,
    audit_window: u64,
) -> Result<Derivation, DeriveError> {
    build_for(spec, Mode::Delta2, c, x_bound, audit_window)
}

/// The same sweep over candidates `z` for `exists z forall u B(z,u,c)`.
pub fn sigma2_derivation(
    spec: &Delta2Spec,
    c: u64,
    x_bound: u64,
    audit_window: u64,
) -> Result<Derivation, DeriveError> {
    build_for(spec, Mode::Sigma2, c, x_bound, audit_window)
}

pub(super) fn build_for(
    spec: &Delta2Spec,
    mode: Mode,
    c: u64,
    x_bound: u64,
    audit_window: u64,
) -> Result<Derivation, DeriveError> {
    let settles_at = least_witness_bound(spec, mode, c, audit_window, x_bound).ok_or(DeriveError::NoSurvivor {
        c,
        x_bound,
        window: audit_window,
    })?;
    let x = x_bound;
    let root = DerivationNode::new(
        TreeAddress::root(),
        vec![ClosedFormula::Sigma2],
        Rule::Exists,
        Some(ClosedFormula::Sigma2),
        None,
        Ordinal::omega_times_plus(x + 1, 1),
        0,
    );
    let expand: Arc<Expand> = Arc::new(move |d: &Derivation, node: &DerivationNode, n: u64| {
        let k = node.block;
        match node.rule {
            Rule::Int => None,
            Rule::Exists if n == 0 => {
                let side = ClosedFormula::Pi1 { x: k };
                let mut seq = node.seq.clone();
                seq.push(side);
                let ord = Ordinal::omega_times_plus(x + 1 - k, 0);
                Some(DerivationNode::new(node.address.child(0), seq, Rule::Forall, Some(side), Some(side), ord, k))
            }
            Rule::Rep if n == 0 => Some(DerivationNode::new(
                node.address.child(0),
                node.seq.clone(),
                Rule::Exists,
                Some(ClosedFormula::Sigma2),
                None,
                Ordinal::omega_times_plus(x - k, 1),
                k + 1,
            )),
            Rule::Forall => {
                let main = ClosedFormula::Pi1 { x: k };
                let side = ClosedFormula::Eq { x: k, y: n };
                let mut seq: Vec<ClosedFormula> = node.seq.iter().copied().filter(|f| *f != main).collect();
                seq.push(side);
                let ord = Ordinal::omega_times_plus(x - k, 2);
                let (rule, mfml) = if d.eq_holds(k, n) || k >= x { (Rule::Int, Some(side)) } else { (Rule::Rep, None) };
                Some(DerivationNode::new(node.address.child(n), seq, rule, mfml, Some(side), ord, k))
            }
            Rule::Exists | Rule::Rep => None,
        }
    });
    Ok(Derivation {
        spec: spec.clone(),
        c,
        mode,
        x_bound,
        settles_at,
        audit_window,
        k: Ordinal::omega_times_plus(x + 2, 0),
        root: Arc::new(root),
        expand,
        tamper: None,
    })
}
