//! Closed-form two-electron Coulomb integrals for Slater-type orbitals.
//!
//! Each orbital-pair product is a sum of terms r^nu x^q e^{-lambda r}. In
//! Fourier space the Coulomb energy of two such charge distributions
//! factorizes through
//!
//!   I_{q,q'}(lambda, mu) = (-i)^{|q|} i^{|q'|} (2 pi^2)^{-1}
//!       * integral over k-space direction and radius of
//!         [d^q K_lambda](k) [d^q' K_mu](k),
//!
//! where K_lambda = F[e^{-lambda r}] = 8 pi lambda/(lambda^2+k^2)^2 and the
//! 1/k^2 Coulomb kernel cancels the radial volume element. Monomial angular
//! integrals and partial-fraction radial integrals reduce every I to an exact
//! rational function of (lambda, mu) times pi^2; radial powers r^nu become
//! (-1)^nu d^nu/dlambda^nu applied symbolically to that rational function.
//! All confluent (mu-lambda) factors cancel exactly, so evaluation is stable
//! for every positive exponent pair including lambda = mu.

use crate::bipoly::{BiPoly, BiRat, CompiledRat};
use crate::error::{Error, Result};
use crate::fock::big_binomial;
use crate::sto::{PairProduct, STOBasis};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

/// d^q/dk^q of 8 lambda pi / (lambda^2+k^2)^2, stored as
/// P(k1,k2,k3,lambda) / (lambda^2+k^2)^m with the pi factor implicit.
/// Monomial key = (k1, k2, k3, lambda) powers.
#[derive(Clone, Debug)]
pub struct FourierKernel {
    pub num: BTreeMap<[u8; 4], BigInt>,
    pub m: u32,
}

impl FourierKernel {
    /// Kernel value including its 8 pi lambda prefactor.
    pub fn eval(&self, k: [f64; 3], lambda: f64) -> f64 {
        let num: f64 = self
            .num
            .iter()
            .map(|(e, c)| {
                c.to_f64().unwrap()
                    * k[0].powi(e[0] as i32)
                    * k[1].powi(e[1] as i32)
                    * k[2].powi(e[2] as i32)
                    * lambda.powi(e[3] as i32)
            })
            .sum();
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        PI * num / (lambda * lambda + k2).powi(self.m as i32)
    }
}

/// Exact symbolic d^q/dk^q of the Fourier-transformed exponential.
pub fn fourier_derivative(q: [u8; 3]) -> FourierKernel {
    let mut num: BTreeMap<[u8; 4], BigInt> = BTreeMap::new();
    num.insert([0, 0, 0, 1], BigInt::from(8));
    let mut kernel = FourierKernel { num, m: 2 };
    for axis in 0..3 {
        for _ in 0..q[axis] {
            kernel = kernel_derivative(&kernel, axis);
        }
    }
    kernel
}

/// d/dk_axis of P/(lambda^2+k^2)^m = (dP (lambda^2+k^2) - 2 m k_axis P) / (...)^{m+1}.
fn kernel_derivative(k: &FourierKernel, axis: usize) -> FourierKernel {
    let mut num: BTreeMap<[u8; 4], BigInt> = BTreeMap::new();
    let mut add = |e: [u8; 4], c: BigInt| {
        if c.is_zero() {
            return;
        }
        let entry = num.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            num.remove(&e);
        }
    };
    for (e, c) in &k.num {
        // dP * (lambda^2 + k1^2 + k2^2 + k3^2)
        if e[axis] > 0 {
            let dc = c * BigInt::from(e[axis]);
            let mut de = *e;
            de[axis] -= 1;
            for slot in 0..4 {
                let mut e2 = de;
                e2[slot] += 2;
                add(e2, dc.clone());
            }
        }
        // -2m k_axis P
        let mut e3 = *e;
        e3[axis] += 1;
        add(e3, c * BigInt::from(-2i64 * k.m as i64));
    }
    FourierKernel { num, m: k.m + 1 }
}

fn double_factorial(mut n: i64) -> BigInt {
    let mut acc = BigInt::one();
    while n > 1 {
        acc *= n;
        n -= 2;
    }
    acc
}

/// Sphere integral of a monomial in the direction vector, in units of pi:
/// 0 for any odd power, else 4 prod (a_i - 1)!! / (|a| + 1)!!.
pub fn angular_monomial_integral(a: [u32; 3]) -> BigRational {
    if a.iter().any(|&x| x % 2 == 1) {
        return BigRational::zero();
    }
    let total: u32 = a.iter().sum();
    let num = a
        .iter()
        .fold(BigInt::from(4), |acc, &x| acc * double_factorial(x as i64 - 1));
    BigRational::new(num, double_factorial(total as i64 + 1))
}

fn binom(n: i64, k: i64) -> BigRational {
    if k == 0 {
        return BigRational::one();
    }
    if n < k || n < 0 {
        return BigRational::zero();
    }
    BigRational::from_integer(big_binomial(n as u64, k as u64))
}

/// (2b-3)!!/(2b-2)!! — with the pi/2 prefactor split off, this is the value
/// of integral_0^inf dk/(c^2+k^2)^b at c = 1.
fn arctan_moment(b: u32) -> BigRational {
    BigRational::new(
        double_factorial(2 * b as i64 - 3),
        double_factorial(2 * b as i64 - 2),
    )
}

/// Exact closed form of integral_0^inf k^{2a} / ((lambda^2+k^2)^m (mu^2+k^2)^mp) dk
/// in units of pi (the 1/2 of every pi/2 base integral is folded in).
/// Requires a <= m + mp - 1 (convergence) and m >= 1.
fn radial_symbolic(a: u32, m: u32, mp: u32) -> BiRat {
    assert!(a + 1 <= m + mp, "divergent radial integral");
    if m == 0 {
        let swapped = radial_symbolic(a, mp, m);
        return BiRat {
            num: swapped.num.transpose(),
            a: swapped.b,
            b: swapped.a,
            c: swapped.c,
            d: swapped.d,
        };
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut total = BiRat::zero();
    // k^{2a} = ((lambda^2+k^2) - lambda^2)^a, term t has (lambda^2+k^2)^t.
    for t in 0..=a {
        let sign = if (a - t) % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let coef_t = binom(a as i64, t as i64) * sign;
        let lam_pow = 2 * (a - t) as i64;
        if t < m {
            let mm = (m - t) as i64;
            let mpp = mp as i64;
            // partial fractions of 1/((L^2+k^2)^mm (M^2+k^2)^mpp)
            for r in 1..=mm {
                let s = if (mm - r) % 2 == 0 {
                    BigRational::one()
                } else {
                    -BigRational::one()
                };
                let coef = &coef_t * s * binom(mpp + mm - r - 1, mm - r) * arctan_moment(r as u32) * &half;
                // / (mu^2-lambda^2)^{mm+mpp-r}, * lambda^{1-2r}
                let term =
                    BiRat::power_term(coef, lam_pow + 1 - 2 * r, 0, (mm + mpp - r) as u32);
                total = total.add(&term);
            }
            for s in 1..=mpp {
                let sg = if mm % 2 == 0 {
                    BigRational::one()
                } else {
                    -BigRational::one()
                };
                let coef =
                    &coef_t * sg * binom(mm + mpp - s - 1, mpp - s) * arctan_moment(s as u32) * &half;
                let term = BiRat::power_term(coef, lam_pow, 1 - 2 * s, (mm + mpp - s) as u32);
                total = total.add(&term);
            }
        } else {
            // (lambda^2+k^2)^{t-m} left in the numerator; expand against
            // (mu^2+k^2) and integrate each convergent piece.
            let e = t - m;
            for v in 0..=e {
                assert!(mp > v, "divergent piece in radial reduction");
                // (lambda^2 - mu^2)^{e-v} expanded exactly
                let mut factor = BiPoly::zero();
                for w in 0..=(e - v) {
                    let sgn = if (e - v - w) % 2 == 0 {
                        BigRational::one()
                    } else {
                        -BigRational::one()
                    };
                    factor.add_term(
                        (2 * w, 2 * (e - v - w)),
                        &(binom((e - v) as i64, w as i64) * sgn),
                    );
                }
                let coef = &coef_t * binom(e as i64, v as i64) * arctan_moment(mp - v) * &half;
                let base = BiRat::power_term(coef, lam_pow, 1 - 2 * (mp - v) as i64, 0);
                total = total.add(&base.mul_poly(&factor));
            }
        }
    }
    total
}

/// Closed-form radial integral k^n / ((lambda^2+k^2)^m (mu^2+k^2)^mp) over
/// the positive axis. Even n only (odd powers are elementary but never occur
/// in the angular reduction). Stable at lambda = mu: the confluent factors
/// are cancelled exactly before evaluation.
pub fn radial_rational_integral(n: u32, m: u32, mp: u32, lambda: f64, mu: f64) -> Result<f64> {
    if n % 2 != 0 {
        return Err(Error::Invalid(format!(
            "odd radial power {n} unsupported (no pi-multiple closed form)"
        )));
    }
    if n + 2 > 2 * (m + mp) {
        return Err(Error::Invalid(format!(
            "divergent radial integral: k^{n} against denominator degree {}",
            2 * (m + mp)
        )));
    }
    if !(lambda > 0.0) || !(mu > 0.0) {
        return Err(Error::Invalid("exponents must be positive".into()));
    }
    let sym = radial_symbolic(n / 2, m, mp).cancel_confluent();
    Ok(PI * sym.eval_f64(lambda, mu))
}

type Exponents = [u8; 3];
type SigKey = (Exponents, Exponents, u8, u8);

/// Shared symbolic/compiled caches for the I functions and their
/// lambda/mu derivatives; value-level memo sharded for parallel fills.
pub struct CoulombEngine {
    rational: Mutex<HashMap<SigKey, Arc<BiRat>>>,
    compiled: Mutex<HashMap<SigKey, Arc<CompiledRat>>>,
    values: Vec<Mutex<HashMap<(SigKey, u64, u64), f64>>>,
}

const VALUE_SHARDS: usize = 64;

impl Default for CoulombEngine {
    fn default() -> Self {
        CoulombEngine {
            rational: Mutex::new(HashMap::new()),
            compiled: Mutex::new(HashMap::new()),
            values: (0..VALUE_SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
        }
    }
}

impl CoulombEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evict memoized numeric values (call when exponents change); the
    /// symbolic and compiled caches stay.
    pub fn clear_values(&self) {
        for shard in &self.values {
            shard.lock().unwrap().clear();
        }
    }

    /// Exact rational part of (-1)^{i+j} d^i/dlambda^i d^j/dmu^j I_{q,q'}
    /// (the full value carries an extra pi^2).
    fn rational_part(&self, key: SigKey) -> Arc<BiRat> {
        if let Some(hit) = self.rational.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let (q, qp, i, j) = key;
        let computed = if i > 0 {
            let base = self.rational_part((q, qp, i - 1, j));
            base.d_lambda().scale(&-BigRational::one())
        } else if j > 0 {
            let base = self.rational_part((q, qp, i, j - 1));
            base.d_mu().scale(&-BigRational::one())
        } else {
            assemble_i(q, qp)
        };
        let arc = Arc::new(computed);
        self.rational
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(arc)
            .clone()
    }

    fn compiled_part(&self, key: SigKey) -> Arc<CompiledRat> {
        if let Some(hit) = self.compiled.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let compiled = Arc::new(CompiledRat::compile(&self.rational_part(key)));
        self.compiled
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(compiled)
            .clone()
    }

    /// (-1)^{i+j} d^i_lambda d^j_mu I_{q,q'}(lambda, mu), the quantity
    /// contracted against radial-power convolution coefficients.
    pub fn i_integral(&self, q: [u32; 3], qp: [u32; 3], lambda: f64, mu: f64, i: u32, j: u32) -> f64 {
        if (0..3).any(|ax| (q[ax] + qp[ax]) % 2 == 1) {
            return 0.0;
        }
        let key: SigKey = (
            [q[0] as u8, q[1] as u8, q[2] as u8],
            [qp[0] as u8, qp[1] as u8, qp[2] as u8],
            i as u8,
            j as u8,
        );
        let vkey = (key, lambda.to_bits(), mu.to_bits());
        let mut hasher = DefaultHasher::new();
        vkey.hash(&mut hasher);
        let shard = &self.values[(hasher.finish() as usize) % VALUE_SHARDS];
        if let Some(&v) = shard.lock().unwrap().get(&vkey) {
            return v;
        }
        let v = PI * PI * self.compiled_part(key).eval(lambda, mu);
        shard.lock().unwrap().insert(vkey, v);
        v
    }

    /// Coulomb integral (fg) = double integral of f(x) g(y) / |x-y| for two
    /// pair-product expansions.
    pub fn pair_coulomb(&self, f: &PairProduct, g: &PairProduct) -> f64 {
        let mut acc = 0.0;
        for (&(nu, q), cf) in &f.terms {
            for (&(nup, qp), cg) in &g.terms {
                if (0..3).any(|ax| (q[ax] + qp[ax]) % 2 == 1) {
                    continue;
                }
                acc += cf * cg * self.i_integral(q, qp, f.lambda, g.lambda, nu, nup);
            }
        }
        acc
    }
}

/// Assemble the exact rational part of I_{q,q'}: kernel product, angular
/// monomial reduction, partial-fraction radial integrals, confluent
/// cancellation. The represented value is this rational function times pi^2.
fn assemble_i(q: Exponents, qp: Exponents) -> BiRat {
    let kq = fourier_derivative(q);
    let kqp = fourier_derivative(qp);
    let m = kq.m;
    let mp = kqp.m;
    let mut total = BiRat::zero();
    for (e1, c1) in &kq.num {
        for (e2, c2) in &kqp.num {
            let v = [
                e1[0] as u32 + e2[0] as u32,
                e1[1] as u32 + e2[1] as u32,
                e1[2] as u32 + e2[2] as u32,
            ];
            if v.iter().any(|&x| x % 2 == 1) {
                continue;
            }
            let angular = angular_monomial_integral(v);
            if angular.is_zero() {
                continue;
            }
            let d: u32 = v.iter().sum();
            let radial = radial_symbolic(d / 2, m, mp);
            let coef = BigRational::from_integer(c1 * c2) * angular;
            let term = radial
                .shift_powers(e1[3] as i64, e2[3] as i64)
                .scale(&coef);
            total = total.add(&term);
        }
    }
    // (-i)^{|q|} i^{|q'|} = (-1)^{(|q'|-|q|)/2}; global 1/(2 pi^2) leaves 1/2
    // rational (pi bookkeeping: kernels pi^2, angular pi, radial pi, over
    // 2 pi^2 -> final pi^2 applied at evaluation).
    let wq: i64 = q.iter().map(|&x| x as i64).sum();
    let wqp: i64 = qp.iter().map(|&x| x as i64).sum();
    debug_assert_eq!((wq + wqp) % 2, 0);
    let sign = if ((wqp - wq) / 2).rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    };
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    total.scale(&(sign * half)).cancel_confluent()
}

/// Spatial-orbital list of a basis: (shell position, real-harmonic index)
/// per shell in order, matching spatial index = spin-orbital index / 2.
pub fn spatial_orbitals(basis: &STOBasis) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (idx, shell) in basis.shells.iter().enumerate() {
        for h in 0..(2 * shell.l + 1) as usize {
            out.push((idx, h));
        }
    }
    out
}

/// Canonical-wedge storage of (ij|kl) over spatial orbitals: i<=j, k<=l,
/// pair(i,j) <= pair(k,l).
#[derive(Clone, Debug)]
pub struct CoulombTensor {
    pub n_orbitals: usize,
    values: Vec<f64>,
}

fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

impl CoulombTensor {
    pub fn n_pairs(&self) -> usize {
        self.n_orbitals * (self.n_orbitals + 1) / 2
    }

    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let p = pair_index(i.min(j), i.max(j));
        let q = pair_index(k.min(l), k.max(l));
        let (p, q) = (p.min(q), p.max(q));
        self.values[q * (q + 1) / 2 + p]
    }
}

/// Fill the canonical wedge. Deterministic and parallel: every entry is a
/// pure function of the basis; the value memo only short-circuits repeats.
pub fn build_tensor(basis: &STOBasis, engine: &CoulombEngine) -> CoulombTensor {
    use rayon::prelude::*;
    let orbitals = spatial_orbitals(basis);
    let n = orbitals.len();
    let parities = orbital_parities(basis, &orbitals);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..=j).map(move |i| (i, j)))
        .collect();
    let products: Vec<PairProduct> = pairs
        .iter()
        .map(|&(i, j)| basis.pair_product(orbitals[i], orbitals[j]))
        .collect();
    let np = pairs.len();
    let entries: Vec<f64> = (0..np * (np + 1) / 2)
        .into_par_iter()
        .map(|flat| {
            // flat = q(q+1)/2 + p with p <= q
            let mut q = ((((8 * flat + 1) as f64).sqrt() as usize).max(1) - 1) / 2;
            while (q + 1) * (q + 2) / 2 <= flat {
                q += 1;
            }
            while q * (q + 1) / 2 > flat {
                q -= 1;
            }
            let p = flat - q * (q + 1) / 2;
            let (i, j) = pairs[p];
            let (k, l) = pairs[q];
            let par_ij = [0, 1, 2].map(|ax| (parities[i][ax] + parities[j][ax]) % 2);
            let par_kl = [0, 1, 2].map(|ax| (parities[k][ax] + parities[l][ax]) % 2);
            if par_ij != par_kl {
                return 0.0;
            }
            engine.pair_coulomb(&products[p], &products[q])
        })
        .collect();
    CoulombTensor {
        n_orbitals: n,
        values: entries,
    }
}

/// Fill only the wedge entries that cover `quadruples` (spatial-orbital
/// quadruples (i,j,k,l) meaning (ij|kl)); every other entry stays zero.
/// Useful when the contraction support is known in advance, e.g. from the
/// nonzero pattern of reduced density matrices.
pub fn build_tensor_restricted(
    basis: &STOBasis,
    engine: &CoulombEngine,
    quadruples: &[(u16, u16, u16, u16)],
) -> CoulombTensor {
    use rayon::prelude::*;
    let orbitals = spatial_orbitals(basis);
    let n = orbitals.len();
    let parities = orbital_parities(basis, &orbitals);
    let np = n * (n + 1) / 2;

    let mut wanted: Vec<(usize, usize, usize)> = quadruples
        .iter()
        .map(|&(i, j, k, l)| {
            let (i, j, k, l) = (i as usize, j as usize, k as usize, l as usize);
            let p = pair_index(i.min(j), i.max(j));
            let q = pair_index(k.min(l), k.max(l));
            let (p, q) = (p.min(q), p.max(q));
            (q * (q + 1) / 2 + p, p, q)
        })
        .collect();
    wanted.sort_unstable();
    wanted.dedup();

    let mut products: Vec<Option<PairProduct>> = (0..np).map(|_| None).collect();
    let mut used: Vec<usize> = wanted.iter().flat_map(|&(_, p, q)| [p, q]).collect();
    used.sort_unstable();
    used.dedup();
    for p in used {
        // Invert pair_index: largest j with j(j+1)/2 <= p.
        let mut j = (((8 * p + 1) as f64).sqrt() as usize).max(1) / 2;
        while (j + 1) * (j + 2) / 2 <= p {
            j += 1;
        }
        while j * (j + 1) / 2 > p {
            j -= 1;
        }
        let i = p - j * (j + 1) / 2;
        products[p] = Some(basis.pair_product(orbitals[i], orbitals[j]));
    }

    let computed: Vec<(usize, f64)> = wanted
        .par_iter()
        .map(|&(flat, p, q)| {
            let pair_parity = |pp: usize| {
                let mut j = (((8 * pp + 1) as f64).sqrt() as usize).max(1) / 2;
                while (j + 1) * (j + 2) / 2 <= pp {
                    j += 1;
                }
                while j * (j + 1) / 2 > pp {
                    j -= 1;
                }
                let i = pp - j * (j + 1) / 2;
                [0, 1, 2].map(|ax| (parities[i][ax] + parities[j][ax]) % 2)
            };
            if pair_parity(p) != pair_parity(q) {
                return (flat, 0.0);
            }
            let value = engine.pair_coulomb(
                products[p].as_ref().expect("pair product prepared"),
                products[q].as_ref().expect("pair product prepared"),
            );
            (flat, value)
        })
        .collect();

    let mut values = vec![0.0; np * (np + 1) / 2];
    for (flat, v) in computed {
        values[flat] = v;
    }
    CoulombTensor {
        n_orbitals: n,
        values,
    }
}

/// Per-component parity of each orbital's Cartesian monomials (well defined:
/// every real harmonic's monomials share component parities).
fn orbital_parities(basis: &STOBasis, orbitals: &[(usize, usize)]) -> Vec<[u32; 3]> {
    use crate::sto::real_harmonics;
    orbitals
        .iter()
        .map(|&(shell, h)| {
            let harm = &real_harmonics(basis.shells[shell].l)[h];
            let mut it = harm.terms.keys();
            let first = *it.next().expect("harmonic has terms");
            let parity = [first[0] % 2, first[1] % 2, first[2] % 2];
            debug_assert!(harm
                .terms
                .keys()
                .all(|q| [q[0] % 2, q[1] % 2, q[2] % 2] == parity));
            parity
        })
        .collect()
}

/// Single Coulomb integral (ab|cd) over spatial orbital indices of
/// `spatial_orbitals`.
pub fn coulomb_integral(
    basis: &STOBasis,
    engine: &CoulombEngine,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> f64 {
    let orbitals = spatial_orbitals(basis);
    let f = basis.pair_product(orbitals[a], orbitals[b]);
    let g = basis.pair_product(orbitals[c], orbitals[d]);
    engine.pair_coulomb(&f, &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Subshell;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn kernel_base_and_first_derivative() {
        let k0 = fourier_derivative([0, 0, 0]);
        assert_eq!(k0.m, 2);
        assert_eq!(k0.num.len(), 1);
        assert_eq!(k0.num[&[0, 0, 0, 1]], BigInt::from(8));
        let k1 = fourier_derivative([1, 0, 0]);
        assert_eq!(k1.m, 3);
        // -32 lambda k1 / (lambda^2+k^2)^3
        assert_eq!(k1.num.len(), 1);
        assert_eq!(k1.num[&[1, 0, 0, 1]], BigInt::from(-32));
    }

    #[test]
    fn kernel_derivative_matches_finite_difference() {
        let cases = [[1u8, 0, 0], [0, 2, 0], [1, 1, 2], [2, 0, 2]];
        let point = [0.4, -0.8, 1.3];
        let lambda = 1.9;
        let h = 1e-5;
        for q in cases {
            let full = fourier_derivative(q);
            // lower once in the first nonzero axis
            let axis = (0..3).find(|&ax| q[ax] > 0).unwrap();
            let mut qm = q;
            qm[axis] -= 1;
            let lower = fourier_derivative(qm);
            let mut up = point;
            up[axis] += h;
            let mut dn = point;
            dn[axis] -= h;
            let fd = (lower.eval(up, lambda) - lower.eval(dn, lambda)) / (2.0 * h);
            let direct = full.eval(point, lambda);
            assert!(
                (fd - direct).abs() < 1e-6 * (1.0 + direct.abs()),
                "{q:?}: {fd} vs {direct}"
            );
        }
    }

    #[test]
    fn angular_integrals() {
        assert_eq!(angular_monomial_integral([0, 0, 0]), rat(4, 1));
        assert!(angular_monomial_integral([1, 0, 0]).is_zero());
        assert_eq!(angular_monomial_integral([2, 0, 0]), rat(4, 3));
        assert_eq!(angular_monomial_integral([2, 2, 0]), rat(4, 15));
        assert_eq!(angular_monomial_integral([4, 0, 0]), rat(4, 5));
        assert_eq!(angular_monomial_integral([2, 2, 2]), rat(4, 105));
    }

    #[test]
    fn radial_closed_forms() {
        // n=0, m=1: pi/(2 lambda)
        let v = radial_rational_integral(0, 1, 0, 2.5, 1.0).unwrap();
        assert!((v - PI / 5.0).abs() < 1e-14);
        // n=2, m=2: pi/(4 lambda)
        let v = radial_rational_integral(2, 2, 0, 2.0, 1.0).unwrap();
        assert!((v - PI / 8.0).abs() < 1e-14);
        // symmetry in (m, lambda) <-> (mp, mu)
        let a = radial_rational_integral(4, 3, 2, 1.3, 2.9).unwrap();
        let b = radial_rational_integral(4, 2, 3, 2.9, 1.3).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
        // errors
        assert!(radial_rational_integral(3, 2, 2, 1.0, 1.0).is_err());
        assert!(radial_rational_integral(8, 2, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn radial_confluent_continuity() {
        // approach lambda -> mu; the exact-cancelled form must be the limit
        let at = radial_rational_integral(6, 4, 3, 2.0, 2.0).unwrap();
        for eps in [1e-3, 1e-5, 1e-7] {
            let near = radial_rational_integral(6, 4, 3, 2.0 + eps, 2.0).unwrap();
            assert!((near - at).abs() < 10.0 * eps * at.abs(), "{eps}: {near} vs {at}");
        }
        // quadrature cross-check at the confluent point: integrand
        // k^6/(4+k^2)^7; trapezoid on a fine grid
        let mut quad = 0.0;
        let nsteps = 4_000_000;
        let kmax = 200.0;
        let dk = kmax / nsteps as f64;
        for step in 0..nsteps {
            let k = (step as f64 + 0.5) * dk;
            quad += k.powi(6) / (4.0 + k * k).powi(7) * dk;
        }
        assert!((at - quad).abs() < 1e-10 * at.abs(), "{at} vs {quad}");
    }

    #[test]
    fn base_i_function_closed_form() {
        // I_{000,000} rational part must equal 32 (lambda^2+3 lambda mu+mu^2)
        // / (lambda^2 mu^2 (lambda+mu)^3)
        let i00 = assemble_i([0, 0, 0], [0, 0, 0]);
        let mut expect_num = BiPoly::zero();
        expect_num.add_term((2, 0), &rat(32, 1));
        expect_num.add_term((1, 1), &rat(96, 1));
        expect_num.add_term((0, 2), &rat(32, 1));
        let expect = BiRat {
            num: expect_num,
            a: 2,
            b: 2,
            c: 3,
            d: 0,
        };
        for (l, m) in [(rat(1, 1), rat(2, 1)), (rat(3, 7), rat(9, 2))] {
            assert_eq!(i00.eval_exact(&l, &m), expect.eval_exact(&l, &m));
        }
    }

    #[test]
    fn i_function_symmetries() {
        let engine = CoulombEngine::new();
        let (l, m) = (1.7, 3.1);
        for (q, qp) in [
            ([2u32, 0, 0], [0u32, 0, 0]),
            ([1, 1, 0], [1, 1, 0]),
            ([2, 0, 2], [0, 0, 2]),
        ] {
            let a = engine.i_integral(q, qp, l, m, 0, 0);
            let b = engine.i_integral(qp, q, m, l, 0, 0);
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{q:?} {qp:?}");
        }
        // odd joint component vanishes
        assert_eq!(engine.i_integral([1, 0, 0], [0, 0, 0], l, m, 0, 0), 0.0);
        assert_eq!(engine.i_integral([1, 1, 0], [1, 0, 0], l, m, 1, 2), 0.0);
    }

    #[test]
    fn hydrogenic_self_repulsion() {
        // (1s 1s | 1s 1s) = 5 zeta / 8
        let engine = CoulombEngine::new();
        for zeta in [1.0, 2.3, 24.0] {
            let basis = STOBasis::new(&[Subshell::new(1, 0)], &[zeta]).unwrap();
            let v = coulomb_integral(&basis, &engine, 0, 0, 0, 0);
            assert!(
                (v - 5.0 * zeta / 8.0).abs() < 1e-12 * zeta,
                "zeta={zeta}: {v}"
            );
        }
    }

    #[test]
    fn parity_selection_zeroes() {
        let engine = CoulombEngine::new();
        let shells = [Subshell::new(1, 0), Subshell::new(2, 1)];
        let basis = STOBasis::new(&shells, &[3.0, 1.9]).unwrap();
        // orbitals: 0 = 1s, 1..4 = 2pz, 2px, 2py
        let v = coulomb_integral(&basis, &engine, 0, 0, 0, 1);
        assert_eq!(v, 0.0);
        let v = coulomb_integral(&basis, &engine, 0, 1, 0, 2);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn tensor_wedge_and_symmetry() {
        let engine = CoulombEngine::new();
        let shells = [Subshell::new(1, 0), Subshell::new(2, 0), Subshell::new(2, 1)];
        let basis = STOBasis::new(&shells, &[5.3, 3.1, 2.4]).unwrap();
        let tensor = build_tensor(&basis, &engine);
        assert_eq!(tensor.n_orbitals, 5);
        assert_eq!(tensor.stored_len(), 15 * 16 / 2);
        // spot symmetry expansion against direct integrals
        for (i, j, k, l) in [(1, 0, 2, 2), (0, 2, 1, 0), (3, 3, 0, 1), (4, 2, 4, 2)] {
            let direct = coulomb_integral(&basis, &engine, i, j, k, l);
            assert!((tensor.get(i, j, k, l) - direct).abs() < 1e-13 * (1.0 + direct.abs()));
            assert_eq!(tensor.get(i, j, k, l), tensor.get(j, i, k, l));
            assert_eq!(tensor.get(i, j, k, l), tensor.get(k, l, i, j));
        }
        // diagonal positivity
        for i in 0..5 {
            assert!(tensor.get(i, i, i, i) > 0.0);
            for j in 0..5 {
                assert!(tensor.get(i, j, i, j) >= -1e-15);
            }
        }
    }

    #[test]
    fn restricted_tensor_matches_full_on_requested_entries() {
        let engine = CoulombEngine::new();
        let shells = [Subshell::new(1, 0), Subshell::new(2, 0), Subshell::new(2, 1)];
        let basis = STOBasis::new(&shells, &[5.3, 3.1, 2.4]).unwrap();
        let full = build_tensor(&basis, &engine);
        let wanted = [(0u16, 1, 2, 2), (3, 3, 0, 0), (4, 2, 4, 2), (0, 0, 0, 0)];
        let restricted = build_tensor_restricted(&basis, &engine, &wanted);
        for &(i, j, k, l) in &wanted {
            let (i, j, k, l) = (i as usize, j as usize, k as usize, l as usize);
            assert_eq!(restricted.get(i, j, k, l), full.get(i, j, k, l));
            // all index permutations of a stored entry resolve to the same slot
            assert_eq!(restricted.get(k, l, j, i), full.get(i, j, k, l));
        }
        // an entry outside the requested set is left at zero even though the
        // full tensor has it nonzero
        assert!(full.get(1, 1, 2, 2).abs() > 1e-6);
        assert_eq!(restricted.get(1, 1, 2, 2), 0.0);
    }

    #[test]
    fn exponent_scaling_law() {
        let engine = CoulombEngine::new();
        let shells = [Subshell::new(2, 1), Subshell::new(3, 2)];
        let base: Vec<f64> = vec![2.1, 1.2];
        let basis1 = STOBasis::new(&shells, &base).unwrap();
        for t in [0.5, 2.0] {
            let scaled: Vec<f64> = base.iter().map(|z| z * t).collect();
            let basis2 = STOBasis::new(&shells, &scaled).unwrap();
            for (i, j, k, l) in [(0, 0, 0, 0), (0, 1, 0, 1), (3, 4, 3, 4), (0, 0, 3, 3)] {
                let v1 = coulomb_integral(&basis1, &engine, i, j, k, l);
                let v2 = coulomb_integral(&basis2, &engine, i, j, k, l);
                assert!(
                    (v2 - t * v1).abs() < 1e-11 * (1.0 + v1.abs()),
                    "t={t} {i}{j}{k}{l}: {v2} vs {}",
                    t * v1
                );
            }
        }
    }
}
