//! Exact scalar arithmetic over the ring Q[sqrt(d) : d squarefree].
//!
//! Angular-momentum eigenstates of subshell powers have coefficients of the
//! form q*sqrt(d) with q rational and d a squarefree positive integer, and
//! Gaussian elimination on the exact L^2/S^2 matrices mixes several radicands
//! in one entry. `Rad` stores such a sum as a sorted map radicand -> rational
//! coefficient. Distinct square roots of squarefree integers are linearly
//! independent over Q, so zero testing is exact and structural.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Split n into (s, d) with n = s^2 * d and d squarefree.
///
/// Factors by trial division; callers in this crate only produce radicands
/// whose prime factors are small (ladder amplitudes, factorial ratios,
/// continued-fraction denominators), so the 10^6 trial bound is complete.
pub fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut rest = n.clone();
    let one = BigUint::one();
    if rest.is_zero() {
        return (BigUint::zero(), BigUint::zero());
    }
    let mut p = BigUint::from(2u32);
    let bound = BigUint::from(1_000_000u64);
    while rest > one && p <= bound {
        if (&p * &p) > rest {
            break;
        }
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        if count > 0 {
            square *= p.pow(count / 2);
            if count % 2 == 1 {
                free *= &p;
            }
        }
        p += if p == BigUint::from(2u32) { 1u32 } else { 2u32 };
    }
    if rest > one {
        // Remainder has no prime factor below the bound; it is either prime,
        // a perfect square of a prime, or (out of domain) a larger composite.
        let root = rest.sqrt();
        if &root * &root == rest {
            square *= root;
        } else {
            free *= &rest;
        }
    }
    (square, free)
}

/// Element of Q[sqrt(d)]: sum of coeff * sqrt(radicand) with radicands
/// squarefree and distinct (radicand 1 holds the rational part).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Rad {
    terms: BTreeMap<BigUint, BigRational>,
}

impl Rad {
    pub fn zero() -> Self {
        Rad::default()
    }

    pub fn one() -> Self {
        Rad::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        Rad::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(BigUint::one(), q);
        }
        Rad { terms }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Rad::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// sqrt(q) for a nonnegative rational q, as the exact single-term value
    /// sqrt(num*den)/den.
    pub fn sqrt_rational(q: &BigRational) -> Self {
        assert!(!q.is_negative(), "sqrt of negative rational");
        if q.is_zero() {
            return Rad::zero();
        }
        let num = q.numer().magnitude().clone();
        let den = q.denom().magnitude().clone();
        let (s, d) = squarefree_split(&(&num * &den));
        // sqrt(n/m) = sqrt(n*m)/m = s*sqrt(d)/m
        let coeff = BigRational::new(BigInt::from(s), BigInt::from(den));
        let mut terms = BTreeMap::new();
        terms.insert(d, coeff);
        Rad { terms }.normalized()
    }

    /// Signed square root: sign(s) * sqrt(|s|) for rational s.
    pub fn signed_sqrt(q: &BigRational) -> Self {
        let root = Rad::sqrt_rational(&q.abs());
        if q.is_negative() {
            -root
        } else {
            root
        }
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational, if the radical parts vanish.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (d, c) = self.terms.iter().next().unwrap();
                if d.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.terms.iter()
    }

    /// Rebuild a value from (radicand, coefficient) pairs, re-normalizing
    /// radicands to squarefree form so the input need not be canonical.
    pub fn from_terms(terms: impl IntoIterator<Item = (BigUint, BigRational)>) -> Self {
        let mut out = Rad::zero();
        for (d, c) in terms {
            let (s, free) = squarefree_split(&d);
            let coeff = c * BigRational::from_integer(BigInt::from(s));
            if coeff.is_zero() {
                continue;
            }
            let entry = out
                .terms
                .entry(free)
                .or_insert_with(BigRational::zero);
            *entry += coeff;
        }
        out.normalized()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Exact square root when self is a nonnegative rational; single radical
    /// terms c*sqrt(d) with c >= 0 also stay in the ring via sqrt(c)*d^(1/4)
    /// only when d = 1, so those are not handled.
    pub fn sqrt_exact(&self) -> Option<Rad> {
        let q = self.as_rational()?;
        if q.is_negative() {
            return None;
        }
        Some(Rad::sqrt_rational(&q))
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(d, c)| rational_to_f64(c) * big_to_f64(d).sqrt())
            .sum()
    }

    /// Exact sign (-1, 0, +1). Zero is structural; for nonzero values the
    /// f64 estimate is checked against an interval bound and refined with
    /// high-precision rational square roots if it is too close to call.
    pub fn sign(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        if self.terms.len() == 1 {
            let (_, c) = self.terms.iter().next().unwrap();
            return if c.is_negative() { -1 } else { 1 };
        }
        let est = self.to_f64();
        let scale: f64 = self
            .terms
            .iter()
            .map(|(d, c)| (rational_to_f64(c) * big_to_f64(d).sqrt()).abs())
            .sum();
        if est.abs() > 1e-9 * scale.max(1.0) {
            return if est > 0.0 { 1 } else { -1 };
        }
        // Refine: evaluate each sqrt to ~1e-60 with rational Newton iterations.
        let mut sum = BigRational::zero();
        for (d, c) in &self.terms {
            sum += c * rational_sqrt(d, 80);
        }
        match sum.is_negative() {
            true => -1,
            false => {
                if sum.is_zero() {
                    // Cannot happen for nonzero Rad (linear independence), but
                    // stay conservative.
                    0
                } else {
                    1
                }
            }
        }
    }

    /// Product by reference (also backs the `*` operator).
    pub fn mul(&self, rhs: &Rad) -> Rad {
        let mut out: BTreeMap<BigUint, BigRational> = BTreeMap::new();
        for (d1, c1) in &self.terms {
            for (d2, c2) in &rhs.terms {
                // sqrt(d1) sqrt(d2) = g sqrt(d1 d2 / g^2), g = gcd(d1, d2);
                // d1, d2 squarefree => d1 d2 / g^2 squarefree.
                let g = num_integer::Integer::gcd(d1, d2);
                let d = (d1 / &g) * (d2 / &g);
                let coeff = c1 * c2 * BigRational::from_integer(BigInt::from(g));
                let entry = out.entry(d).or_insert_with(BigRational::zero);
                *entry += coeff;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Rad { terms: out }
    }

    pub fn inverse(&self) -> Rad {
        assert!(!self.is_zero(), "division by zero Rad");
        // Single term: 1/(c sqrt(d)) = sqrt(d)/(c d).
        if self.terms.len() == 1 {
            let (d, c) = self.terms.iter().next().unwrap();
            let coeff = BigRational::new(BigInt::one(), BigInt::from(d.clone())) / c;
            let mut terms = BTreeMap::new();
            terms.insert(d.clone(), coeff);
            return Rad { terms }.normalized();
        }
        // Pick a prime p dividing some radicand; conjugate it away and recurse.
        let p = self
            .terms
            .keys()
            .find(|d| !d.is_one())
            .map(|d| smallest_prime_factor(d))
            .expect("multi-term Rad must contain a radical");
        let mut with = Rad::zero();
        let mut without = Rad::zero();
        for (d, c) in &self.terms {
            let mut t = BTreeMap::new();
            t.insert(d.clone(), c.clone());
            let term = Rad { terms: t };
            if (d % &p).is_zero() {
                with += term;
            } else {
                without += term;
            }
        }
        let conj = without.clone() - with.clone();
        let denom = self.clone() * conj.clone();
        debug_assert!(denom.terms.keys().all(|d| !(d % &p).is_zero()));
        conj * denom.inverse()
    }
}

fn big_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fall back for ratios whose parts individually overflow.
        let digits = 30usize;
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (q * BigRational::from_integer(scale.clone())).to_integer();
        scaled.to_f64().unwrap_or(f64::NAN) / 1e30
    })
}

/// sqrt(n) as a rational accurate to roughly 10^-digits, by Newton iteration.
fn rational_sqrt(n: &BigUint, digits: usize) -> BigRational {
    let n_rat = BigRational::from_integer(BigInt::from(n.clone()));
    let mut x = BigRational::from_float(big_to_f64(n).sqrt().max(f64::MIN_POSITIVE))
        .unwrap_or_else(BigRational::one);
    let two = BigRational::from_integer(BigInt::from(2));
    // Each iteration roughly doubles correct digits; f64 seed gives ~15.
    let iters = (digits as f64 / 15.0).log2().ceil().max(1.0) as usize + 2;
    for _ in 0..iters {
        x = (&x + &n_rat / &x) / &two;
        x = limit_precision(x, digits + 20);
    }
    x
}

/// Truncate a rational to the given number of decimal digits to keep Newton
/// iterates from growing without bound.
fn limit_precision(q: BigRational, digits: usize) -> BigRational {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (&q * BigRational::from_integer(scale.clone())).to_integer();
    BigRational::new(scaled, scale)
}

fn smallest_prime_factor(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if (n % &two).is_zero() {
        return two;
    }
    let mut p = BigUint::from(3u32);
    while (&p * &p) <= *n {
        if (n % &p).is_zero() {
            return p;
        }
        p += 2u32;
    }
    n.clone()
}

impl Add for Rad {
    type Output = Rad;
    fn add(mut self, rhs: Rad) -> Rad {
        self += rhs;
        self
    }
}

impl AddAssign for Rad {
    fn add_assign(&mut self, rhs: Rad) {
        for (d, c) in rhs.terms {
            let entry = self.terms.entry(d).or_insert_with(BigRational::zero);
            *entry += c;
        }
        self.terms.retain(|_, c| !c.is_zero());
    }
}

impl Sub for Rad {
    type Output = Rad;
    fn sub(mut self, rhs: Rad) -> Rad {
        self -= rhs;
        self
    }
}

impl SubAssign for Rad {
    fn sub_assign(&mut self, rhs: Rad) {
        *self += -rhs;
    }
}

impl Neg for Rad {
    type Output = Rad;
    fn neg(mut self) -> Rad {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for Rad {
    type Output = Rad;
    fn mul(self, rhs: Rad) -> Rad {
        Rad::mul(&self, &rhs)
    }
}

impl MulAssign for Rad {
    fn mul_assign(&mut self, rhs: Rad) {
        *self = Rad::mul(&*self, &rhs);
    }
}

impl Div for Rad {
    type Output = Rad;
    fn div(self, rhs: Rad) -> Rad {
        Rad::mul(&self, &rhs.inverse())
    }
}

impl Mul<Rad> for i64 {
    type Output = Rad;
    fn mul(self, rhs: Rad) -> Rad {
        Rad::from_integer(self) * rhs
    }
}

impl fmt::Display for Rad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if d.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*sqrt({d})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Rad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Continued-fraction reconstruction of a rational p/q close to x, with
/// denominator at most `max_den`. Returns None if no convergent lands within
/// `tol` of x.
pub fn rationalize_f64(x: f64, tol: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1i64 } else { 1i64 };
    let mut v = x.abs();
    // Convergents p_k/q_k of the continued fraction of |x|.
    let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, v.floor() as u128, 1u128);
    let check = |p: u128, q: u128| -> Option<BigRational> {
        let approx = p as f64 / q as f64;
        if (approx - x.abs()).abs() <= tol {
            Some(BigRational::new(
                BigInt::from(sign) * BigInt::from(p),
                BigInt::from(q),
            ))
        } else {
            None
        }
    };
    if let Some(r) = check(p1, q1) {
        return Some(r);
    }
    for _ in 0..64 {
        let frac = v - v.floor();
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
        let a = v.floor() as u128;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den as u128 {
            break;
        }
        if let Some(r) = check(p2, q2) {
            return Some(r);
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_int(n: u64) -> Rad {
        Rad::sqrt_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    #[test]
    fn squarefree_splits() {
        for (n, s, d) in [(1u64, 1u64, 1u64), (4, 2, 1), (12, 2, 3), (360, 6, 10)] {
            let (sp, dp) = squarefree_split(&BigUint::from(n));
            assert_eq!((sp, dp), (BigUint::from(s), BigUint::from(d)));
        }
    }

    #[test]
    fn radical_products_reduce() {
        // sqrt(6) * sqrt(10) = 2 sqrt(15)
        let prod = sqrt_int(6) * sqrt_int(10);
        let expected = Rad::from_integer(2) * sqrt_int(15);
        assert_eq!(prod, expected);
        // sqrt(2)^2 = 2
        assert_eq!(sqrt_int(2) * sqrt_int(2), Rad::from_integer(2));
    }

    #[test]
    fn sqrt_of_rational() {
        // sqrt(25/70) = 5/sqrt(70) = (1/14) sqrt(2*5*7*... ) check numerically
        let v = Rad::sqrt_rational(&BigRational::new(BigInt::from(25), BigInt::from(70)));
        assert!((v.to_f64() - (25f64 / 70.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn multi_radical_inverse() {
        let x = Rad::from_integer(3) + Rad::from_integer(2) * sqrt_int(6) - sqrt_int(10);
        let inv = x.inverse();
        let prod = x * inv;
        assert_eq!(prod, Rad::one());
    }

    #[test]
    fn sign_of_close_values() {
        // 3 - sqrt(8.99...) style cancellation: sqrt(9000001)/1000 vs 3
        let a = Rad::from_ratio(1, 1000) * sqrt_int(9_000_001);
        let x = a.clone() - Rad::from_integer(3);
        assert_eq!(x.sign(), 1);
        let y = Rad::from_integer(3) - a;
        assert_eq!(y.sign(), -1);
        assert_eq!(Rad::zero().sign(), 0);
    }

    #[test]
    fn rationalize_recovers_fractions() {
        let r = rationalize_f64(1.0 / 3.0, 1e-9, 1_000_000).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(3)));
        let r = rationalize_f64(-25.0 / 70.0, 1e-9, 1_000_000).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(-5), BigInt::from(14)));
        assert!(rationalize_f64(std::f64::consts::PI, 1e-12, 100).is_none());
    }
}
