//! Exact bivariate polynomials and rational functions in two positive
//! parameters (written lambda and mu throughout).
//!
//! Rational functions are kept over the factored denominator
//! lambda^a mu^b (lambda+mu)^c (mu-lambda)^d. Partial-fraction assembly of
//! radial integrals produces (mu-lambda) powers term by term, but every
//! assembled integral is analytic at lambda = mu, so the numerator is always
//! exactly divisible by (mu-lambda)^d; `cancel_confluent` performs that
//! division. The remaining three-factor form is closed under d/dlambda and
//! d/dmu.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Polynomial in (lambda, mu) with exact rational coefficients;
/// key = (lambda power, mu power).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BiPoly(pub BTreeMap<(u32, u32), BigRational>);

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly(BTreeMap::new())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert((0, 0), c);
        }
        BiPoly(m)
    }

    pub fn monomial(i: u32, j: u32, c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert((i, j), c);
        }
        BiPoly(m)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, key: (u32, u32), c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&key);
        }
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.add_term(*k, c);
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> BiPoly {
        if c.is_zero() {
            return BiPoly::zero();
        }
        BiPoly(self.0.iter().map(|(k, v)| (*k, v * c)).collect())
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for ((i1, j1), c1) in &self.0 {
            for ((i2, j2), c2) in &other.0 {
                out.add_term((i1 + i2, j1 + j2), &(c1 * c2));
            }
        }
        out
    }

    /// Multiply by lambda^i mu^j.
    pub fn shift(&self, i: u32, j: u32) -> BiPoly {
        BiPoly(
            self.0
                .iter()
                .map(|(&(a, b), c)| ((a + i, b + j), c.clone()))
                .collect(),
        )
    }

    pub fn d_lambda(&self) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.0 {
            if i > 0 {
                out.add_term((i - 1, j), &(c * BigRational::from_integer(BigInt::from(i))));
            }
        }
        out
    }

    pub fn d_mu(&self) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.0 {
            if j > 0 {
                out.add_term((i, j - 1), &(c * BigRational::from_integer(BigInt::from(j))));
            }
        }
        out
    }

    /// Exact division by lambda^i mu^j; panics if not divisible.
    fn unshift(&self, i: u32, j: u32) -> BiPoly {
        BiPoly(
            self.0
                .iter()
                .map(|(&(a, b), c)| {
                    assert!(a >= i && b >= j, "not divisible by the monomial");
                    ((a - i, b - j), c.clone())
                })
                .collect(),
        )
    }

    fn divisible_by_lambda(&self) -> bool {
        self.0.keys().all(|&(a, _)| a >= 1)
    }

    fn divisible_by_mu(&self) -> bool {
        self.0.keys().all(|&(_, b)| b >= 1)
    }

    /// Substitute mu = s * lambda (s = +-1), returning coefficients of the
    /// univariate result; used for divisibility checks.
    fn collapse(&self, sign: i64) -> BTreeMap<u32, BigRational> {
        let mut out: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (&(i, j), c) in &self.0 {
            let s = if sign < 0 && j % 2 == 1 {
                -c.clone()
            } else {
                c.clone()
            };
            let entry = out.entry(i + j).or_insert_with(BigRational::zero);
            *entry += s;
            if entry.is_zero() {
                out.remove(&(i + j));
            }
        }
        out
    }

    /// Long division by (mu + s*lambda) for s = 1 (lambda+mu) or s = -1
    /// (mu-lambda). Returns the quotient when the remainder vanishes.
    fn div_linear(&self, s: i64) -> Option<BiPoly> {
        if !self.collapse(-s).is_empty() {
            return None;
        }
        // Divide treating mu as the main variable (the divisor is monic in mu).
        let mut rem = self.clone();
        let mut quot = BiPoly::zero();
        loop {
            let top = rem
                .0
                .iter()
                .max_by_key(|(&(_, j), _)| j)
                .map(|(&k, c)| (k, c.clone()));
            let Some(((i, j), c)) = top else { break };
            if j == 0 {
                debug_assert!(rem.is_zero(), "nonzero remainder after exact check");
                break;
            }
            let piece = BiPoly::monomial(i, j - 1, c);
            // rem -= (mu + s*lambda) * piece
            let sub = piece
                .shift(0, 1)
                .add(&piece.shift(1, 0).scale(&BigRational::from_integer(BigInt::from(s))));
            rem = rem.add(&sub.scale(&-BigRational::one()));
            quot = quot.add(&piece);
        }
        Some(quot)
    }

    pub fn eval_f64(&self, l: f64, m: f64) -> f64 {
        self.0
            .iter()
            .map(|(&(i, j), c)| c.to_f64().unwrap() * l.powi(i as i32) * m.powi(j as i32))
            .sum()
    }

    /// Swap lambda and mu.
    pub fn transpose(&self) -> BiPoly {
        BiPoly(self.0.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect())
    }
}

/// num / (lambda^a mu^b (lambda+mu)^c (mu-lambda)^d), exact.
#[derive(Clone, Debug)]
pub struct BiRat {
    pub num: BiPoly,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl BiRat {
    pub fn zero() -> Self {
        BiRat {
            num: BiPoly::zero(),
            a: 0,
            b: 0,
            c: 0,
            d: 0,
        }
    }

    pub fn from_poly(num: BiPoly) -> Self {
        BiRat {
            num,
            a: 0,
            b: 0,
            c: 0,
            d: 0,
        }
    }

    /// term c * lambda^i mu^j / (mu^2 - lambda^2)^p, folding negative powers
    /// of lambda/mu into the denominator. `i`, `j` may be negative.
    pub fn power_term(c: BigRational, i: i64, j: i64, p: u32) -> Self {
        let (ni, a) = if i >= 0 { (i as u32, 0) } else { (0, (-i) as u32) };
        let (nj, b) = if j >= 0 { (j as u32, 0) } else { (0, (-j) as u32) };
        BiRat {
            num: BiPoly::monomial(ni, nj, c),
            a,
            b,
            c: p,
            d: p,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Strip denominator factors that divide the numerator exactly.
    pub fn reduce(&mut self) {
        while self.a > 0 && self.num.divisible_by_lambda() {
            self.num = self.num.unshift(1, 0);
            self.a -= 1;
        }
        while self.b > 0 && self.num.divisible_by_mu() {
            self.num = self.num.unshift(0, 1);
            self.b -= 1;
        }
        while self.c > 0 {
            match self.num.div_linear(1) {
                Some(q) => {
                    self.num = q;
                    self.c -= 1;
                }
                None => break,
            }
        }
        while self.d > 0 {
            match self.num.div_linear(-1) {
                Some(q) => {
                    self.num = q;
                    self.d -= 1;
                }
                None => break,
            }
        }
    }

    pub fn add(&self, other: &BiRat) -> BiRat {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let a = self.a.max(other.a);
        let b = self.b.max(other.b);
        let c = self.c.max(other.c);
        let d = self.d.max(other.d);
        let lift = |r: &BiRat| -> BiPoly {
            let mut n = r.num.shift(a - r.a, b - r.b);
            for _ in 0..(c - r.c) {
                // multiply by (lambda + mu)
                n = n.shift(1, 0).add(&n.shift(0, 1));
            }
            for _ in 0..(d - r.d) {
                // multiply by (mu - lambda)
                n = n.shift(0, 1).add(&n.shift(1, 0).scale(&-BigRational::one()));
            }
            n
        };
        let mut out = BiRat {
            num: lift(self).add(&lift(other)),
            a,
            b,
            c,
            d,
        };
        out.reduce();
        out
    }

    pub fn scale(&self, c: &BigRational) -> BiRat {
        BiRat {
            num: self.num.scale(c),
            ..self.clone()
        }
    }

    /// Multiply by lambda^i mu^j with signed exponents.
    pub fn shift_powers(&self, i: i64, j: i64) -> BiRat {
        let mut out = self.clone();
        if i >= 0 {
            out.num = out.num.shift(i as u32, 0);
        } else {
            out.a += (-i) as u32;
        }
        if j >= 0 {
            out.num = out.num.shift(0, j as u32);
        } else {
            out.b += (-j) as u32;
        }
        out.reduce();
        out
    }

    pub fn mul_poly(&self, p: &BiPoly) -> BiRat {
        let mut out = BiRat {
            num: self.num.mul(p),
            ..self.clone()
        };
        out.reduce();
        out
    }

    /// Divide out all (mu - lambda) denominator factors; the numerator must
    /// be exactly divisible (the represented function is analytic at
    /// lambda = mu).
    pub fn cancel_confluent(mut self) -> BiRat {
        while self.d > 0 {
            self.num = self
                .num
                .div_linear(-1)
                .expect("function has a pole at lambda = mu");
            self.d -= 1;
        }
        self
    }

    /// d/dlambda for pole-free (d = 0) functions:
    /// N/(L^a M^b (L+M)^c) -> (N' L (L+M) - N (a (L+M) + c L)) / (L^{a+1} M^b (L+M)^{c+1}).
    pub fn d_lambda(&self) -> BiRat {
        assert_eq!(self.d, 0, "derivative requires confluent factors cancelled");
        let lpm = |p: &BiPoly| p.shift(1, 0).add(&p.shift(0, 1)); // *(L+M)
        let term1 = lpm(&self.num.d_lambda()).shift(1, 0);
        let afac = BigRational::from_integer(BigInt::from(self.a));
        let cfac = BigRational::from_integer(BigInt::from(self.c));
        let term2 = lpm(&self.num.scale(&afac)).add(&self.num.scale(&cfac).shift(1, 0));
        let mut out = BiRat {
            num: term1.add(&term2.scale(&-BigRational::one())),
            a: self.a + 1,
            b: self.b,
            c: self.c + 1,
            d: 0,
        };
        out.reduce();
        out
    }

    pub fn d_mu(&self) -> BiRat {
        let swapped = BiRat {
            num: self.num.transpose(),
            a: self.b,
            b: self.a,
            c: self.c,
            d: self.d,
        };
        let der = swapped.d_lambda();
        BiRat {
            num: der.num.transpose(),
            a: der.b,
            b: der.a,
            c: der.c,
            d: der.d,
        }
    }

    pub fn eval_f64(&self, l: f64, m: f64) -> f64 {
        self.num.eval_f64(l, m)
            / (l.powi(self.a as i32)
                * m.powi(self.b as i32)
                * (l + m).powi(self.c as i32)
                * (m - l).powi(self.d as i32))
    }

    /// Exact evaluation at rational arguments (for equality tests).
    pub fn eval_exact(&self, l: &BigRational, m: &BigRational) -> BigRational {
        let mut num = BigRational::zero();
        for (&(i, j), c) in &self.num.0 {
            num += c * pow_rat(l, i) * pow_rat(m, j);
        }
        let den = pow_rat(l, self.a)
            * pow_rat(m, self.b)
            * pow_rat(&(l + m), self.c)
            * pow_rat(&(m - l), self.d);
        num / den
    }
}

fn pow_rat(x: &BigRational, p: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..p {
        acc *= x;
    }
    acc
}

/// Compiled float evaluator: sum of c * lambda^i mu^j over (lambda+mu)^p.
#[derive(Clone, Debug)]
pub struct CompiledRat {
    terms: Vec<(i32, i32, f64)>,
    pole: i32,
}

impl CompiledRat {
    pub fn compile(r: &BiRat) -> CompiledRat {
        assert_eq!(r.d, 0, "compile requires confluent factors cancelled");
        CompiledRat {
            terms: r
                .num
                .0
                .iter()
                .map(|(&(i, j), c)| {
                    (
                        i as i32 - r.a as i32,
                        j as i32 - r.b as i32,
                        c.to_f64().unwrap(),
                    )
                })
                .collect(),
            pole: r.c as i32,
        }
    }

    pub fn eval(&self, l: f64, m: f64) -> f64 {
        let mut acc = 0.0;
        for &(i, j, c) in &self.terms {
            acc += c * l.powi(i) * m.powi(j);
        }
        acc / (l + m).powi(self.pole)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
