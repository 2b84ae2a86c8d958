//! Cantor pairing and right-nested k-tuple coding.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("expected a tuple of arity {expected}, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("arity must be at least 1")]
    ZeroArity,
}

/// `<a,b> = (a+b)(a+b+1)/2 + b`, saturating at `u64::MAX`.
pub fn pair(a: u64, b: u64) -> u64 {
    let s = a as u128 + b as u128;
    let v = s * (s + 1) / 2 + b as u128;
    u64::try_from(v).unwrap_or(u64::MAX)
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let mut s = ((((8 * z + 1) as f64).sqrt() - 1.0) / 2.0) as u128;
    while s * (s + 1) / 2 > z {
        s -= 1;
    }
    while (s + 1) * (s + 2) / 2 <= z {
        s += 1;
    }
    let b = z - s * (s + 1) / 2;
    ((s - b) as u64, b as u64)
}

pub fn left(z: u64) -> u64 {
    unpair(z).0
}

pub fn right(z: u64) -> u64 {
    unpair(z).1
}

/// `<x1,...,xk> = <x1, <x2,...,xk>>`, with `<x> = x`. Codes that would
/// exceed `u64::MAX` saturate, so the coding is a bijection only below that.
pub fn encode_tuple(k: usize, xs: &[u64]) -> Result<u64, CodingError> {
    if k == 0 {
        return Err(CodingError::ZeroArity);
    }
    if xs.len() != k {
        return Err(CodingError::Arity { expected: k, found: xs.len() });
    }
    Ok(encode(xs))
}

pub(crate) fn encode(xs: &[u64]) -> u64 {
    let (last, init) = xs.split_last().expect("non-empty tuple");
    init.iter().rev().fold(*last, |acc, &x| pair(x, acc))
}

pub fn decode_tuple(k: usize, n: u64) -> Result<Vec<u64>, CodingError> {
    if k == 0 {
        return Err(CodingError::ZeroArity);
    }
    Ok(decode(k, n))
}

pub(crate) fn decode(k: usize, mut n: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for _ in 1..k {
        let (a, b) = unpair(n);
        out.push(a);
        n = b;
    }
    out.push(n);
    out
}

/// Component `i` (1-based) of the k-tuple coded by `n`; out-of-range indices give 0.
pub fn project(k: usize, i: usize, n: u64) -> u64 {
    if k == 0 || i == 0 || i > k {
        return 0;
    }
    decode(k, n)[i - 1]
}

pub fn lex_compare(k: usize, xs: &[u64], ys: &[u64]) -> Result<Ordering, CodingError> {
    for t in [xs, ys] {
        if t.len() != k {
            return Err(CodingError::Arity { expected: k, found: t.len() });
        }
    }
    Ok(xs.cmp(ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pair_small_values() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(pair(2, 3), 18);
        assert_eq!(unpair(18), (2, 3));
    }

    #[test]
    fn pairing_is_bijective_on_box() {
        let n = 2048u64;
        let mut seen = std::collections::HashSet::new();
        for a in 0..=n {
            for b in 0..=n {
                let z = pair(a, b);
                assert_eq!(unpair(z), (a, b));
                assert!(seen.insert(z));
            }
        }
    }

    #[test]
    fn unpair_enumerates_diagonals() {
        let mut expect = Vec::new();
        for s in 0..60u64 {
            for b in 0..=s {
                expect.push((s - b, b));
            }
        }
        for (z, e) in expect.iter().enumerate() {
            assert_eq!(unpair(z as u64), *e);
        }
    }

    #[test]
    fn unpair_near_limit() {
        for z in [u64::MAX, u64::MAX - 1, 1 << 62, (1 << 53) + 1] {
            let (a, b) = unpair(z);
            assert_eq!(pair(a, b), z);
        }
    }

    #[test]
    fn tuples() {
        assert_eq!(encode_tuple(1, &[42]).unwrap(), 42);
        let n = encode_tuple(2, &[7, 4]).unwrap();
        assert_eq!(decode_tuple(2, n).unwrap(), vec![7, 4]);
        assert_eq!(encode_tuple(3, &[1, 2, 3]).unwrap(), pair(1, pair(2, 3)));
        assert_eq!(project(3, 2, pair(1, pair(2, 3))), 2);
        assert_eq!(encode_tuple(2, &[1]), Err(CodingError::Arity { expected: 2, found: 1 }));
        assert_eq!(decode_tuple(0, 3), Err(CodingError::ZeroArity));
    }

    #[test]
    fn two_tuples_biject_on_box() {
        let mut codes = std::collections::HashSet::new();
        for a in 0..=64 {
            for b in 0..=64 {
                let n = encode_tuple(2, &[a, b]).unwrap();
                assert_eq!(decode_tuple(2, n).unwrap(), vec![a, b]);
                codes.insert(n);
            }
        }
        assert_eq!(codes.len(), 65 * 65);
        for n in 0..2000 {
            let xs = decode_tuple(3, n).unwrap();
            assert_eq!(encode_tuple(3, &xs).unwrap(), n);
        }
    }

    #[test]
    fn lex_examples() {
        assert_eq!(lex_compare(2, &[1, 5], &[2, 0]).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(3, &[3, 3, 3], &[3, 3, 3]).unwrap(), Ordering::Equal);
        assert!(lex_compare(2, &[1], &[1, 2]).is_err());
    }

    proptest! {
        #[test]
        fn lex_matches_componentwise_scan(xs in prop::collection::vec(0u64..6, 3), ys in prop::collection::vec(0u64..6, 3)) {
            let mut expect = Ordering::Equal;
            for i in 0..3 {
                if xs[i] != ys[i] {
                    expect = if xs[i] < ys[i] { Ordering::Less } else { Ordering::Greater };
                    break;
                }
            }
            prop_assert_eq!(lex_compare(3, &xs, &ys).unwrap(), expect);
        }

        #[test]
        fn tuple_roundtrip(xs in prop::collection::vec(0u64..150, 1..5)) {
            let k = xs.len();
            let n = encode_tuple(k, &xs).unwrap();
            prop_assert_eq!(decode_tuple(k, n).unwrap(), xs);
        }
    }
}
