//! Ordinal notations below ε₀ in Cantor normal form.
//!
//! An [`Ordinal`] is either zero or a finite sum `ω^α₁·n₁ + … + ω^αₖ·nₖ` with
//! `α₁ > … > αₖ` and every `nᵢ ≥ 1`. Values are canonical at all times, so
//! structural equality coincides with ordinal equality and the derived `Hash`
//! is consistent with `Ord`.
//!
//! The textual form is ASCII: `0`, naturals, `w` for ω, `w^e` for powers,
//! `*n` for coefficients and `+` between terms, highest term first. Compound
//! exponents are parenthesised: `w^(w+1)*2+3`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_MAX_TOWER: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("term {position}: exponent is not strictly below the previous exponent")]
    NotDecreasing { position: usize },
    #[error("term {position}: coefficient must be at least 1")]
    ZeroCoefficient { position: usize },
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("non-canonical notation at byte {position}: {message}")]
    NonCanonical { position: usize, message: String },
    #[error("exponent nesting depth exceeds the limit of {limit}")]
    DepthExceeded { limit: usize },
    #[error("tower index {index} exceeds the limit of {limit}")]
    TowerIndex { index: u32, limit: u32 },
    #[error("finite multiplier must be positive")]
    ZeroMultiplier,
}

/// Resource caps for notations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrdinalLimits {
    /// Maximum nesting of `w^` levels (finite ordinals have depth 0).
    pub max_depth: usize,
    /// Largest admissible index for [`omega_tower`].
    pub max_tower: u32,
}

impl Default for OrdinalLimits {
    fn default() -> Self {
        Self { max_depth: DEFAULT_MAX_DEPTH, max_tower: DEFAULT_MAX_TOWER }
    }
}

/// One summand `ω^exponent · coefficient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    exponent: Ordinal,
    coefficient: BigUint,
}

impl Term {
    pub fn exponent(&self) -> &Ordinal {
        &self.exponent
    }

    pub fn coefficient(&self) -> &BigUint {
        &self.coefficient
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from(1u64)
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::one())
    }

    /// `ω^exponent`.
    pub fn omega_pow(exponent: Ordinal) -> Self {
        Self { terms: vec![Term { exponent, coefficient: BigUint::one() }] }
    }

    /// `ω·m + n` for machine-sized `m` and `n`.
    pub fn omega_times_plus(m: u64, n: u64) -> Self {
        let mut terms = Vec::with_capacity(2);
        if m > 0 {
            terms.push(Term { exponent: Self::one(), coefficient: BigUint::from(m) });
        }
        if n > 0 {
            terms.push(Term { exponent: Self::zero(), coefficient: BigUint::from(n) });
        }
        Self { terms }
    }

    /// Builds a notation from `(exponent, coefficient)` pairs, highest first.
    /// Rejects rather than normalizes.
    pub fn from_terms<I>(terms: I) -> Result<Self, OrdinalError>
    where
        I: IntoIterator<Item = (Ordinal, BigUint)>,
    {
        let mut out: Vec<Term> = Vec::new();
        for (position, (exponent, coefficient)) in terms.into_iter().enumerate() {
            if coefficient.is_zero() {
                return Err(OrdinalError::ZeroCoefficient { position });
            }
            if let Some(prev) = out.last() {
                if exponent >= prev.exponent {
                    return Err(OrdinalError::NotDecreasing { position });
                }
            }
            out.push(Term { exponent, coefficient });
        }
        Ok(Self { terms: out })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_zero())
    }

    /// The natural number this notation denotes, if it is finite.
    pub fn as_natural(&self) -> Option<BigUint> {
        match self.terms.as_slice() {
            [] => Some(BigUint::zero()),
            [t] if t.exponent.is_zero() => Some(t.coefficient.clone()),
            _ => None,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        self.as_natural().and_then(|n| n.to_u64())
    }

    /// Number of nested `ω^` levels.
    pub fn depth(&self) -> usize {
        self.terms.iter().filter(|t| !t.exponent.is_zero()).map(|t| 1 + t.exponent.depth()).max().unwrap_or(0)
    }

    /// Ordinal addition (not commutative): `3 + ω = ω`, `ω + 3 = ω+3`.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = self.terms.iter().take_while(|t| t.exponent > lead.exponent).cloned().collect();
        let mut rest = rhs.terms.iter();
        if let Some(same) = self.terms.iter().find(|t| t.exponent == lead.exponent) {
            terms.push(Term { exponent: lead.exponent.clone(), coefficient: &same.coefficient + &lead.coefficient });
            rest.next();
        }
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    pub fn add_natural(&self, n: u64) -> Ordinal {
        self.add(&Ordinal::from(n))
    }

    /// Left multiplication `n·self` by a positive natural. Only the finite
    /// tail is scaled since `n·ω^γ = ω^γ` for `γ > 0`.
    pub fn scale_finite(&self, n: u64) -> Result<Ordinal, OrdinalError> {
        if n == 0 {
            return Err(OrdinalError::ZeroMultiplier);
        }
        let mut out = self.clone();
        if let Some(last) = out.terms.last_mut() {
            if last.exponent.is_zero() {
                last.coefficient *= BigUint::from(n);
            }
        }
        Ok(out)
    }

    /// `self ∸ 1` for finite notations, `None` otherwise.
    pub fn pred_finite(&self) -> Option<Ordinal> {
        let n = self.as_natural()?;
        if n.is_zero() {
            Some(Ordinal::zero())
        } else {
            Some(Ordinal::from(n - BigUint::one()))
        }
    }

    pub fn parse(text: &str) -> Result<Self, OrdinalError> {
        Self::parse_with(text, &OrdinalLimits::default())
    }

    pub fn parse_with(text: &str, limits: &OrdinalLimits) -> Result<Self, OrdinalError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, limits: *limits };
        p.skip_ws();
        let ord = p.ordinal(0)?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.syntax("unexpected trailing input"));
        }
        if ord.depth() > limits.max_depth {
            return Err(OrdinalError::DepthExceeded { limit: limits.max_depth });
        }
        Ok(ord)
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

/// Three-way comparison in the standard CNF order.
pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

/// `ω₀ = 1`, `ω₁₊ₙ = ω^ωₙ`.
pub fn omega_tower(index: u32, limits: &OrdinalLimits) -> Result<Ordinal, OrdinalError> {
    if index > limits.max_tower {
        return Err(OrdinalError::TowerIndex { index, limit: limits.max_tower });
    }
    let mut out = Ordinal::one();
    for _ in 0..index {
        out = Ordinal::omega_pow(out);
    }
    if out.depth() > limits.max_depth {
        return Err(OrdinalError::DepthExceeded { limit: limits.max_depth });
    }
    Ok(out)
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a.exponent.cmp(&b.exponent).then_with(|| a.coefficient.cmp(&b.coefficient));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Self::from(BigUint::from(n))
    }
}

impl From<BigUint> for Ordinal {
    fn from(n: BigUint) -> Self {
        if n.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![Term { exponent: Self::zero(), coefficient: n }] }
        }
    }
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;

    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coefficient)?;
                continue;
            }
            f.write_str("w")?;
            if t.exponent != Ordinal::one() {
                f.write_str("^")?;
                write_exponent(f, &t.exponent)?;
            }
            if !t.coefficient.is_one() {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

fn write_exponent(f: &mut fmt::Formatter<'_>, e: &Ordinal) -> fmt::Result {
    let bare = e.is_finite() || matches!(e.terms.as_slice(), [t] if t.coefficient.is_one());
    if bare {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordinal::parse(s)
    }
}

impl serde::Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Ordinal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ordinal::parse(&text).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    limits: OrdinalLimits,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> OrdinalError {
        OrdinalError::Syntax { position: self.pos, message: message.to_string() }
    }

    fn non_canonical(&self, position: usize, message: &str) -> OrdinalError {
        OrdinalError::NonCanonical { position, message: message.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn natural(&mut self) -> Result<BigUint, OrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected a natural number"));
        }
        let digits = &self.src[start..self.pos];
        if digits.len() > 1 && digits[0] == b'0' {
            return Err(self.non_canonical(start, "leading zero"));
        }
        // digits are ASCII by construction
        Ok(BigUint::parse_bytes(digits, 10).expect("decimal digits"))
    }

    fn ordinal(&mut self, depth: usize) -> Result<Ordinal, OrdinalError> {
        self.skip_ws();
        if self.peek() == Some(b'0') && !matches!(self.src.get(self.pos + 1), Some(b'0'..=b'9')) {
            self.pos += 1;
            return Ok(Ordinal::zero());
        }
        let mut terms: Vec<(Ordinal, BigUint, usize)> = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let (exponent, coefficient) = self.term(depth)?;
            terms.push((exponent, coefficient, at));
            if !self.eat(b'+') {
                break;
            }
        }
        let positions: Vec<usize> = terms.iter().map(|t| t.2).collect();
        Ordinal::from_terms(terms.into_iter().map(|(e, c, _)| (e, c))).map_err(|e| match e {
            OrdinalError::NotDecreasing { position } => {
                self.non_canonical(positions[position], "exponents must be strictly decreasing, highest term first")
            }
            OrdinalError::ZeroCoefficient { position } => self.non_canonical(positions[position], "zero summand"),
            other => other,
        })
    }

    fn term(&mut self, depth: usize) -> Result<(Ordinal, BigUint), OrdinalError> {
        self.skip_ws();
        match self.peek() {
            Some(b'0'..=b'9') => {
                let at = self.pos;
                let n = self.natural()?;
                if n.is_zero() {
                    return Err(self.non_canonical(at, "zero summand"));
                }
                Ok((Ordinal::zero(), n))
            }
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.eat(b'^') { self.exponent(depth + 1)? } else { Ordinal::one() };
                let coefficient = if self.eat(b'*') {
                    let at = self.pos;
                    let n = self.natural()?;
                    if n.is_zero() || n.is_one() {
                        return Err(self.non_canonical(at, "coefficient must be at least 2 when written"));
                    }
                    n
                } else {
                    BigUint::one()
                };
                Ok((exponent, coefficient))
            }
            _ => Err(self.syntax("expected a natural or 'w'")),
        }
    }

    fn exponent(&mut self, depth: usize) -> Result<Ordinal, OrdinalError> {
        if depth > self.limits.max_depth {
            return Err(OrdinalError::DepthExceeded { limit: self.limits.max_depth });
        }
        self.skip_ws();
        let at = self.pos;
        let e = match self.peek() {
            Some(b'0'..=b'9') => Ordinal::from(self.natural()?),
            Some(b'w') => {
                self.pos += 1;
                let inner = if self.eat(b'^') { self.exponent(depth + 1)? } else { Ordinal::one() };
                Ordinal::omega_pow(inner)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.ordinal(depth)?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                e
            }
            _ => return Err(self.syntax("expected an exponent")),
        };
        if e.is_zero() || e == Ordinal::one() {
            return Err(self.non_canonical(at, "exponents 0 and 1 are written as a natural and 'w'"));
        }
        Ok(e)
    }
}

/// Shape parameters for [`sample`].
#[derive(Debug, Clone, Copy)]
pub struct SampleShape {
    pub max_depth: usize,
    pub max_terms: usize,
    pub max_coefficient: u64,
}

impl Default for SampleShape {
    fn default() -> Self {
        Self { max_depth: 4, max_terms: 3, max_coefficient: 9 }
    }
}

/// Draws a random canonical notation of nesting depth at most `shape.max_depth`.
pub fn sample<R: Rng + ?Sized>(rng: &mut R, shape: &SampleShape) -> Ordinal {
    let count = rng.gen_range(0..=shape.max_terms);
    let mut exponents: Vec<Ordinal> = (0..count)
        .map(|_| {
            if shape.max_depth == 0 || rng.gen_bool(0.35) {
                Ordinal::zero()
            } else if rng.gen_bool(0.4) {
                Ordinal::from(rng.gen_range(1..=3u64))
            } else {
                let inner = SampleShape { max_depth: shape.max_depth - 1, ..*shape };
                sample(rng, &inner)
            }
        })
        .collect();
    exponents.sort_by(|a, b| b.cmp(a));
    exponents.dedup();
    let terms = exponents.into_iter().map(|e| (e, BigUint::from(rng.gen_range(1..=shape.max_coefficient.max(1)))));
    Ordinal::from_terms(terms).expect("sorted distinct exponents")
}

/// Outcome of the randomized algebraic property suite.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct PropertyReport {
    pub cases: usize,
    pub trichotomy_failures: usize,
    pub transitivity_failures: usize,
    pub associativity_failures: usize,
    pub identity_failures: usize,
    pub scale_monotonicity_failures: usize,
    pub round_trip_failures: usize,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.trichotomy_failures == 0
            && self.transitivity_failures == 0
            && self.associativity_failures == 0
            && self.identity_failures == 0
            && self.scale_monotonicity_failures == 0
            && self.round_trip_failures == 0
    }
}

/// Runs `cases` random triples through the order, addition, scaling and
/// rendering laws. Deterministic for a given seed.
pub fn property_suite(seed: u64, cases: usize, shape: &SampleShape) -> PropertyReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport { cases, ..Default::default() };
    for _ in 0..cases {
        let a = sample(&mut rng, shape);
        let b = sample(&mut rng, shape);
        let c = sample(&mut rng, shape);

        let ab = a.cmp(&b);
        let ba = b.cmp(&a);
        if ab != ba.reverse() || ((ab == Ordering::Equal) != (a == b)) {
            report.trichotomy_failures += 1;
        }
        let mut sorted = [&a, &b, &c];
        sorted.sort();
        if sorted[0] > sorted[2] || sorted[0].cmp(sorted[1]) == Ordering::Greater {
            report.transitivity_failures += 1;
        }
        if a <= b && b <= c && a > c {
            report.transitivity_failures += 1;
        }
        if a.add(&b.add(&c)) != a.add(&b).add(&c) {
            report.associativity_failures += 1;
        }
        if a.add(&Ordinal::zero()) != a || Ordinal::zero().add(&a) != a {
            report.identity_failures += 1;
        }
        let (lo, hi) = if a < b { (&a, &b) } else { (&b, &a) };
        if lo < hi {
            let n = 3;
            let hi3 = hi.scale_finite(n).expect("n > 0");
            for i in 0..n {
                if lo.scale_finite(n).expect("n > 0").add_natural(i) >= hi3 {
                    report.scale_monotonicity_failures += 1;
                    break;
                }
            }
        }
        if Ordinal::parse(&a.render()).as_ref() != Ok(&a) {
            report.round_trip_failures += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&o("0"), &o("0")), Ordering::Equal);
        assert_eq!(compare(&o("w"), &o("3")), Ordering::Greater);
        assert_eq!(compare(&o("w^w"), &o("w*5+7")), Ordering::Greater);
    }

    #[test]
    fn add_examples() {
        assert_eq!(o("3").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("3")), o("w+3"));
        assert_eq!(o("w*2+1").add(&o("w+4")), o("w*3+4"));
        assert_eq!(o("w^2+w").add(&Ordinal::zero()), o("w^2+w"));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(Ordinal::zero().scale_finite(3).unwrap(), Ordinal::zero());
        assert_eq!(o("w*2+5").scale_finite(3).unwrap(), o("w*2+15"));
        assert_eq!(o("7").scale_finite(3).unwrap(), o("21"));
        assert_eq!(o("7").scale_finite(0), Err(OrdinalError::ZeroMultiplier));
    }

    #[test]
    fn towers() {
        let lim = OrdinalLimits::default();
        assert_eq!(omega_tower(0, &lim).unwrap(), o("1"));
        assert_eq!(omega_tower(1, &lim).unwrap(), o("w"));
        assert_eq!(omega_tower(2, &lim).unwrap(), o("w^w"));
        assert_eq!(omega_tower(3, &lim).unwrap().to_string(), "w^w^w");
        assert!(matches!(omega_tower(4, &lim), Err(OrdinalError::TowerIndex { index: 4, limit: 3 })));
    }

    #[test]
    fn parse_render() {
        let a = o("w^w*2+w+3");
        assert_eq!(a.to_string(), "w^w*2+w+3");
        assert_eq!(o("0"), Ordinal::zero());
        assert_eq!(o("w^w^2*2+w^(w+1)+5").to_string(), "w^w^2*2+w^(w+1)+5");
        assert_eq!(o(" w ^ 2 + 1 ").to_string(), "w^2+1");
    }

    #[test]
    fn parse_rejects_non_canonical() {
        assert!(matches!(Ordinal::parse("w+w"), Err(OrdinalError::NonCanonical { position: 2, .. })));
        assert!(matches!(Ordinal::parse("3+w"), Err(OrdinalError::NonCanonical { .. })));
        assert!(matches!(Ordinal::parse("w*1"), Err(OrdinalError::NonCanonical { .. })));
        assert!(matches!(Ordinal::parse("w^1"), Err(OrdinalError::NonCanonical { .. })));
        assert!(matches!(Ordinal::parse("w^0"), Err(OrdinalError::NonCanonical { .. })));
        assert!(matches!(Ordinal::parse("w+0"), Err(OrdinalError::NonCanonical { .. })));
        assert!(matches!(Ordinal::parse("07"), Err(OrdinalError::NonCanonical { .. })));
    }

    #[test]
    fn parse_syntax_errors_carry_position() {
        assert!(matches!(Ordinal::parse("w+"), Err(OrdinalError::Syntax { position: 2, .. })));
        assert!(matches!(Ordinal::parse("w^(w"), Err(OrdinalError::Syntax { .. })));
        assert!(matches!(Ordinal::parse("x"), Err(OrdinalError::Syntax { position: 0, .. })));
        assert!(matches!(Ordinal::parse("w w"), Err(OrdinalError::Syntax { .. })));
    }

    #[test]
    fn depth_cap() {
        let limits = OrdinalLimits { max_depth: 2, max_tower: 3 };
        assert!(Ordinal::parse_with("w^w", &limits).is_ok());
        assert_eq!(Ordinal::parse_with("w^w^w", &limits), Err(OrdinalError::DepthExceeded { limit: 2 }));
    }

    #[test]
    fn from_terms_reports_position() {
        let bad = Ordinal::from_terms([(Ordinal::one(), BigUint::one()), (o("w"), BigUint::one())]);
        assert_eq!(bad, Err(OrdinalError::NotDecreasing { position: 1 }));
        let zero = Ordinal::from_terms([(Ordinal::one(), BigUint::zero())]);
        assert_eq!(zero, Err(OrdinalError::ZeroCoefficient { position: 0 }));
    }

    #[test]
    fn coefficients_are_unbounded() {
        let big = o("w*123456789012345678901234567890+1");
        let sum = big.add(&o("w*2"));
        assert_eq!(sum.to_string(), "w*123456789012345678901234567892");
    }

    #[test]
    fn small_suite_passes() {
        let report = property_suite(7, 500, &SampleShape::default());
        assert!(report.passed(), "{report:?}");
    }
}
