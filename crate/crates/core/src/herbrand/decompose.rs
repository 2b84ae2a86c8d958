use serde::Serialize;

use crate::ershov::Trace;

/// `Y_k` and `N_k` read off a window of `f`, and the assembled verdict
/// `OR { Y_k && !N_{k+1} : k <= 1+2r }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub c: u64,
    pub r: usize,
    pub window: u64,
    /// `y[k]` for `k = 0..=1+2r`.
    pub y: Vec<bool>,
    /// `n[k]` for `k = 0..=2r+2`; the last entry is false by definition.
    pub n: Vec<bool>,
    pub combination: bool,
}

/// `Y_k` holds when `k` changes `w_0 < ... < w_{k-1}` exist in the window with
/// `f(c, w_{k-1} + 1) = 0`, i.e. the value reached by the last of them; `N_k`
/// likewise with value 1. `Y_0`, `N_0` read `f(c,0)`.
pub fn boolean_decomposition(trace: &Trace, r: usize) -> DecompositionReport {
    let f = &trace.f;
    // Values reached after each change, in order.
    let reached: Vec<u64> = (1..f.len()).filter(|&w| f[w] != f[w - 1]).map(|w| f[w]).collect();
    let holds = |k: usize, value: u64| -> bool {
        if k == 0 {
            f.first() == Some(&value)
        } else {
            reached.iter().skip(k - 1).any(|&v| v == value)
        }
    };
    let top = 2 * r + 1;
    let y: Vec<bool> = (0..=top).map(|k| holds(k, 0)).collect();
    let mut n: Vec<bool> = (0..=top).map(|k| holds(k, 1)).collect();
    n.push(false);
    let combination = (0..=top).any(|k| y[k] && !n[k + 1]);
    DecompositionReport { c: trace.c, r, window: trace.window(), y, n, combination }
}
