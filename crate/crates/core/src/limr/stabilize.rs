//! Locating the limit of an eventually non-increasing sequence from the
//! locator terms `m_0, ..., m_k` of a Herbrand disjunction.

use serde::Serialize;
use thiserror::Error;

use super::coding::{decode, encode};
use crate::spec_lang::{Matrix, TermExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilizeError {
    #[error("no locator stabilizes the chain within the window")]
    Undetermined,
    #[error("at least one locator term is required")]
    NoLocators,
    #[error("the chain is empty")]
    EmptyChain,
    #[error("locator m{index} reads x{slot}, which is not yet bound")]
    Discipline { index: usize, slot: usize },
}

/// `theta_1(x, y)`, `theta_2(x, y)`. When `exists x, y <= W . theta_i` fails,
/// `a_i` and `b_i` are taken to be 0.
#[derive(Debug, Clone, Copy)]
pub struct ThetaData<'a> {
    pub theta1: &'a Matrix,
    pub theta2: &'a Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub j: usize,
    pub y: u64,
    pub a: [u64; 2],
    /// The `(b_1, b_2)` pair under which the tail condition held.
    pub b: [u64; 2],
    /// `x_0 .. x_{j-1}`: the rises that pushed the search to level `j`.
    pub rises: Vec<u64>,
    pub observed_limit: u64,
    pub agrees: bool,
}

/// Slot names for locator terms: `a1, a2, b1, b2, x0, x1, ...`.
pub fn locator_slot_names(levels: usize) -> Vec<String> {
    let mut names: Vec<String> = ["a1", "a2", "b1", "b2"].iter().map(|s| s.to_string()).collect();
    names.extend((0..levels).map(|i| format!("x{i}")));
    names
}

fn check_discipline(locators: &[TermExpr]) -> Result<(), StabilizeError> {
    for (index, m) in locators.iter().enumerate() {
        let mut used = std::collections::BTreeSet::new();
        m.free_slots(&mut used);
        if let Some(&slot) = used.iter().find(|&&s| s >= 4 + index) {
            return Err(StabilizeError::Discipline { index, slot: slot - 4 });
        }
    }
    Ok(())
}

fn least_pair(theta: &Matrix, window: u64) -> Option<(u64, Vec<u64>)> {
    (0..=window).find_map(|x| {
        let bs: Vec<u64> = (0..=window).filter(|&y| theta.holds(&[x, y])).collect();
        (!bs.is_empty()).then_some((x, bs))
    })
}

/// Runs the searches for `y_0, y_1, ...` in turn and returns the first level
/// whose tail condition `forall x >= m_j . h(x) >= h(x+1)` holds on the window.
///
/// `(b_1, b_2)` range jointly over the valid pairs in order of their pair code.
pub fn stabilization_search(
    h: &[u64],
    locators: &[TermExpr],
    theta: Option<ThetaData<'_>>,
) -> Result<Stabilization, StabilizeError> {
    if locators.is_empty() {
        return Err(StabilizeError::NoLocators);
    }
    if h.is_empty() {
        return Err(StabilizeError::EmptyChain);
    }
    check_discipline(locators)?;
    let window = h.len() as u64 - 1;
    let (a, b_sets) = match theta {
        Some(t) => {
            let (a1, b1s) = least_pair(t.theta1, window).unwrap_or((0, vec![0]));
            let (a2, b2s) = least_pair(t.theta2, window).unwrap_or((0, vec![0]));
            ([a1, a2], [b1s, b2s])
        }
        None => ([0, 0], [vec![0], vec![0]]),
    };
    let mut bs: Vec<[u64; 2]> = b_sets[0].iter().flat_map(|&b1| b_sets[1].iter().map(move |&b2| [b1, b2])).collect();
    bs.sort_by_key(|b| encode(b));
    // `m_i(...)` must stay below `window` so that `h(x+1)` is defined.
    let rises: Vec<u64> = (0..window).filter(|&x| h[x as usize] < h[x as usize + 1]).collect();
    let tail_ok = |from: u64| from < window && (from..window).all(|x| h[x as usize] >= h[x as usize + 1]);
    let min_from = |from: u64| (from <= window).then(|| h[from as usize..].iter().copied().min().unwrap());
    let observed_limit = *h.last().unwrap();

    for j in 0..locators.len() {
        let mut y: Option<u64> = None;
        let mut hit: Option<([u64; 2], Vec<u64>)> = None;
        for b in &bs {
            let mut env = vec![a[0], a[1], b[0], b[1]];
            let mut xs = Vec::new();
            visit_chains(locators, j, &rises, &mut env, &mut xs, &mut |from, xs| {
                if let Some(v) = min_from(from) {
                    y = Some(y.map_or(v, |y| y.min(v)));
                }
                if hit.is_none() && tail_ok(from) {
                    hit = Some((*b, xs.to_vec()));
                }
            });
        }
        if let (Some((b, rises)), Some(y)) = (hit, y) {
            return Ok(Stabilization { j, y, a, b, rises, observed_limit, agrees: y == observed_limit });
        }
    }
    Err(StabilizeError::Undetermined)
}

/// Calls `leaf(m_j, [x_0..x_{j-1}])` for every sequence of rises with
/// `x_i >= m_i(x_0..x_{i-1})`.
fn visit_chains(
    locators: &[TermExpr],
    j: usize,
    rises: &[u64],
    env: &mut Vec<u64>,
    xs: &mut Vec<u64>,
    leaf: &mut dyn FnMut(u64, &[u64]),
) {
    let level = xs.len();
    let m = locators[level].eval(env);
    if level == j {
        leaf(m, xs);
        return;
    }
    for &x in rises.iter().filter(|&&x| x >= m) {
        env.push(x);
        xs.push(x);
        visit_chains(locators, j, rises, env, xs, leaf);
        xs.pop();
        env.pop();
    }
}

/// The `h` values of a lexicographic chain projected to one component.
pub fn component(h: &[u64], k: usize, i: usize) -> Vec<u64> {
    h.iter().map(|&v| decode(k, v)[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_lang::{parse_predicate, parse_term};

    fn locators(src: &[&str]) -> Vec<TermExpr> {
        let owned = locator_slot_names(src.len());
        let names: Vec<&str> = owned.iter().map(String::as_str).collect();
        src.iter().map(|s| parse_term(s, &names).unwrap()).collect()
    }

    #[test]
    fn decreasing_from_first_locator() {
        let h: Vec<u64> = (0..40).map(|x| 30u64.saturating_sub(x)).collect();
        let s = stabilization_search(&h, &locators(&["3"]), None).unwrap();
        assert_eq!((s.j, s.y), (0, 0));
        assert!(s.agrees);
    }

    #[test]
    fn one_bump_moves_to_second_locator() {
        let mut h: Vec<u64> = vec![9, 8, 7, 6, 5, 8, 4, 4, 3];
        h.extend(std::iter::repeat_n(3, 30));
        let s = stabilization_search(&h, &locators(&["1", "x0 + 1"]), None).unwrap();
        assert_eq!(s.j, 1);
        assert_eq!(s.rises, vec![4]);
        assert_eq!(s.y, 3);
        assert!(s.agrees);
    }

    #[test]
    fn oscillation_is_undetermined() {
        let h: Vec<u64> = (0..60).map(|x| x % 2).collect();
        let r = stabilization_search(&h, &locators(&["0", "x0 + 1", "x1 + 1"]), None);
        assert_eq!(r.unwrap_err(), StabilizeError::Undetermined);
    }

    #[test]
    fn witnesses_feed_locators() {
        let t1 = parse_predicate("T(x, y) := x = 3 && 2 <= y;").unwrap();
        let t2 = parse_predicate("T(x, y) := x = y && 1 <= x;").unwrap();
        let mut h: Vec<u64> = vec![5, 6, 7, 4, 4, 4];
        h.extend(std::iter::repeat_n(2, 20));
        // m0 = a1 + b1 = 3 + 2 skips the rises at 0 and 1.
        let data = ThetaData { theta1: &t1, theta2: &t2 };
        let s = stabilization_search(&h, &locators(&["a1 + b1"]), Some(data)).unwrap();
        assert_eq!(s.a, [3, 1]);
        assert_eq!(s.b, [2, 1]);
        assert_eq!((s.j, s.y), (0, 2));
    }

    #[test]
    fn locator_discipline() {
        let bad = locators(&["x0", "0"]);
        assert_eq!(
            stabilization_search(&[0, 0], &bad, None).unwrap_err(),
            StabilizeError::Discipline { index: 0, slot: 0 }
        );
    }
}
