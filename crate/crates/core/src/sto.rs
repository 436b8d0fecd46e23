//! Slater-type orbital basis.
//!
//! Radial parts are associated-Laguerre polynomials r^l (sum_i b_i c_i r^i)
//! e^{-Z r/n}; orbitals of equal l but different n are orthonormalized
//! iteratively through Hankel moment matrices. One-body integrals reduce to
//! exact exponential moments. Angular parts are the real solid harmonics
//! (pz, px, py) and (d0, dz, dm, dx, dy) together with the unitaries linking
//! them to spherical harmonics in decreasing-m order.

use crate::error::{Error, Result};
use crate::fock::big_binomial;
use crate::model::Subshell;
use nalgebra::{Complex, DMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn factorial(n: u64) -> f64 {
    let mut acc = 1u128;
    for i in 2..=n as u128 {
        acc *= i;
    }
    acc as f64
}

/// Coefficients of the associated Laguerre polynomial L^{2l+1}_{n-l-1}(2r/n):
/// b_i = C(n+l, 2l+1+i) (-2/n)^i / i!, exact.
pub fn laguerre_coefficients(n: u32, l: u32) -> Vec<BigRational> {
    let mut out = Vec::with_capacity((n - l) as usize);
    let mut power = BigRational::one(); // (-2/n)^i / i!
    for i in 0..(n - l) {
        let binom = BigRational::from_integer(big_binomial(
            (n + l) as u64,
            (2 * l + 1 + i) as u64,
        ));
        out.push(&binom * &power);
        power *= BigRational::new(BigInt::from(-2), BigInt::from(n));
        power /= BigRational::from_integer(BigInt::from(i + 1));
    }
    out
}

/// Hankel moment matrix H^l_{nk}: entry (i,j) = (i+j+2(l+1))!/lambda^{i+j+2l+3}
/// at lambda = Z_n/n + Z_k/k; shape (n-l) x (k-l).
pub fn hankel_matrix(n: u32, k: u32, l: u32, z_n: f64, z_k: f64) -> DMatrix<f64> {
    let lambda = z_n / n as f64 + z_k / k as f64;
    DMatrix::from_fn((n - l) as usize, (k - l) as usize, |i, j| {
        let p = (i + j) as u64 + 2 * (l as u64 + 1);
        factorial(p) / lambda.powi(p as i32 + 1)
    })
}

/// An orthonormal Slater-type orbital family over a list of subshells.
///
/// Parallel arrays indexed by shell position: exponents Z_{nl}, exact
/// Laguerre coefficients, orthogonalization coefficients c (leading entry 1),
/// and normalization constants s.
#[derive(Clone, Debug)]
pub struct STOBasis {
    pub shells: Vec<Subshell>,
    pub exponents: Vec<f64>,
    pub laguerre: Vec<Vec<BigRational>>,
    pub ortho: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl STOBasis {
    /// Build and orthonormalize. Shells must be sorted and unique; exponents
    /// positive and parallel to `shells`.
    pub fn new(shells: &[Subshell], exponents: &[f64]) -> Result<Self> {
        if shells.len() != exponents.len() {
            return Err(Error::DimensionMismatch(
                "one exponent per subshell required".into(),
            ));
        }
        if shells.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("shells must be sorted and distinct".into()));
        }
        if let Some(z) = exponents.iter().find(|&&z| !(z > 0.0)) {
            return Err(Error::Invalid(format!("exponent {z} must be positive")));
        }
        let laguerre: Vec<Vec<BigRational>> = shells
            .iter()
            .map(|s| laguerre_coefficients(s.n, s.l))
            .collect();
        let mut basis = STOBasis {
            shells: shells.to_vec(),
            exponents: exponents.to_vec(),
            laguerre,
            ortho: vec![Vec::new(); shells.len()],
            norms: vec![0.0; shells.len()],
        };
        basis.orthonormalize()?;
        Ok(basis)
    }

    pub fn shell_index(&self, shell: Subshell) -> Option<usize> {
        self.shells.iter().position(|&s| s == shell)
    }

    fn b_f64(&self, idx: usize) -> Vec<f64> {
        self.laguerre[idx]
            .iter()
            .map(|b| b.to_f64().unwrap())
            .collect()
    }

    /// B_n H_nk B_k c_k for shells at positions `i`, `j` of the same l.
    fn constraint_vector(&self, i: usize, j: usize) -> Vec<f64> {
        let (sn, sk) = (self.shells[i], self.shells[j]);
        let h = hankel_matrix(sn.n, sk.n, sn.l, self.exponents[i], self.exponents[j]);
        let (bn, bk) = (self.b_f64(i), self.b_f64(j));
        let ck = &self.ortho[j];
        (0..bn.len())
            .map(|a| {
                bn[a]
                    * (0..bk.len())
                        .map(|b| h[(a, b)] * bk[b] * ck[b])
                        .sum::<f64>()
            })
            .collect()
    }

    fn orthonormalize(&mut self) -> Result<()> {
        for i in 0..self.shells.len() {
            let shell = self.shells[i];
            let dim = (shell.n - shell.l) as usize;
            let prev: Vec<usize> = (0..i).filter(|&j| self.shells[j].l == shell.l).collect();
            let c = if prev.is_empty() {
                let mut c = vec![0.0; dim];
                c[0] = 1.0;
                c
            } else {
                // Nullspace of the row-normalized constraint matrix via the
                // smallest eigenvector of C^T C.
                let mut gram = DMatrix::<f64>::zeros(dim, dim);
                for &j in &prev {
                    let mut row = self.constraint_vector(i, j);
                    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return Err(Error::DegenerateBasis(format!(
                            "vanishing orthogonality constraint between {} and {}",
                            shell, self.shells[j]
                        )));
                    }
                    row.iter_mut().for_each(|x| *x /= norm);
                    for a in 0..dim {
                        for b in 0..dim {
                            gram[(a, b)] += row[a] * row[b];
                        }
                    }
                }
                let eig = gram.symmetric_eigen();
                let mut order: Vec<usize> = (0..dim).collect();
                order.sort_by(|&a, &b| {
                    eig.eigenvalues[a]
                        .partial_cmp(&eig.eigenvalues[b])
                        .unwrap()
                });
                if prev.len() + 1 == dim && eig.eigenvalues[order[1]] < 1e-20 {
                    return Err(Error::DegenerateBasis(format!(
                        "orthogonality constraints for {shell} are rank deficient \
                         (exponent collision)"
                    )));
                }
                let v = eig.eigenvectors.column(order[0]);
                let mut c: Vec<f64> = v.iter().copied().collect();
                let max = c.iter().cloned().fold(0.0f64, |m, x| m.max(x.abs()));
                if c[0].abs() > 1e-10 * max {
                    let scale = 1.0 / c[0];
                    c.iter_mut().for_each(|x| *x *= scale);
                } else if let Some(lead) = c.iter().position(|x| x.abs() > 1e-10 * max) {
                    let scale = 1.0 / c[lead];
                    c.iter_mut().for_each(|x| *x *= scale);
                }
                c
            };
            self.ortho[i] = c;
            let v = self.constraint_vector(i, i);
            let norm2: f64 = v
                .iter()
                .zip(&self.ortho[i])
                .map(|(x, c)| x * c)
                .sum();
            if !(norm2 > 0.0) {
                return Err(Error::DegenerateBasis(format!(
                    "non-positive squared norm for {shell}"
                )));
            }
            self.norms[i] = 1.0 / norm2.sqrt();
        }
        Ok(())
    }

    /// Radial polynomial coefficients (power of r -> coefficient) of
    /// R(r) = s r^l (sum_i b_i c_i r^i), plus the exponential rate Z/n.
    pub fn radial_poly(&self, idx: usize) -> (Vec<f64>, f64) {
        let shell = self.shells[idx];
        let b = self.b_f64(idx);
        let mut poly = vec![0.0; (shell.n + 1) as usize];
        for (i, (bi, ci)) in b.iter().zip(&self.ortho[idx]).enumerate() {
            poly[shell.l as usize + i] = self.norms[idx] * bi * ci;
        }
        let lambda = self.exponents[idx] / shell.n as f64;
        (poly, lambda)
    }

    /// Effective radial coefficients d_i = s b_i c_i (coefficient of r^{l+i}).
    pub fn effective_coefficients(&self, idx: usize) -> Vec<f64> {
        self.b_f64(idx)
            .iter()
            .zip(&self.ortho[idx])
            .map(|(b, c)| self.norms[idx] * b * c)
            .collect()
    }

    /// <psi_a| -1/2 laplacian - Z/r |psi_b>; zero unless the shells share l
    /// (and the implicit common m). Closed-form exponential moments.
    pub fn one_body_integral(&self, a: usize, b: usize, z_nuclear: f64) -> f64 {
        let (sa, sb) = (self.shells[a], self.shells[b]);
        if sa.l != sb.l {
            return 0.0;
        }
        let (pa, la) = self.radial_poly(a);
        let (pb, lb) = self.radial_poly(b);
        let rate = la + lb;
        let l = sa.l as f64;
        // Kinetic radial part: 1/2 integral (Ra' Rb' + l(l+1) Ra Rb / r^2) r^2 dr.
        let da = poly_sub(&poly_diff(&pa), &poly_scale(&pa, la));
        let db = poly_sub(&poly_diff(&pb), &poly_scale(&pb, lb));
        let grad_term = poly_shift(&poly_mul(&da, &db), 2);
        let cent_term = poly_scale(&poly_mul(&pa, &pb), l * (l + 1.0));
        let kinetic = 0.5 * (moment_integral(&grad_term, rate) + moment_integral(&cent_term, rate));
        let attract = poly_shift(&poly_mul(&pa, &pb), 1);
        kinetic - z_nuclear * moment_integral(&attract, rate)
    }

    /// Value of orbital (shell index, real-harmonic index) at a point.
    pub fn evaluate(&self, idx: usize, harmonic: usize, x: [f64; 3]) -> f64 {
        let (poly, lambda) = self.radial_poly(idx);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let l = self.shells[idx].l as usize;
        // radial_poly includes r^l; the solid harmonic supplies the angular
        // polynomial of degree l, so divide the radial power back out.
        let radial: f64 = poly
            .iter()
            .enumerate()
            .skip(l)
            .map(|(p, c)| c * r.powi((p - l) as i32))
            .sum();
        let harm = real_harmonics(self.shells[idx].l as u32);
        let angular: f64 = harm[harmonic]
            .terms
            .iter()
            .map(|(q, c)| c * x[0].powi(q[0] as i32) * x[1].powi(q[1] as i32) * x[2].powi(q[2] as i32))
            .sum();
        radial * angular * (-lambda * r).exp()
    }

    /// Product of two real orbitals as sum_{nu,q} c_{nu,q} r^nu x^q e^{-lambda r}.
    pub fn pair_product(&self, a: (usize, usize), b: (usize, usize)) -> PairProduct {
        let (ia, ha) = a;
        let (ib, hb) = b;
        let da = self.effective_coefficients(ia);
        let db = self.effective_coefficients(ib);
        let lambda = self.exponents[ia] / self.shells[ia].n as f64
            + self.exponents[ib] / self.shells[ib].n as f64;
        let harm_a = &real_harmonics(self.shells[ia].l)[ha];
        let harm_b = &real_harmonics(self.shells[ib].l)[hb];
        let mut terms: BTreeMap<(u32, [u32; 3]), f64> = BTreeMap::new();
        for (i, ci) in da.iter().enumerate() {
            for (j, cj) in db.iter().enumerate() {
                let nu = (i + j) as u32;
                for (qa, ca) in &harm_a.terms {
                    for (qb, cb) in &harm_b.terms {
                        let q = [qa[0] + qb[0], qa[1] + qb[1], qa[2] + qb[2]];
                        *terms.entry((nu, q)).or_insert(0.0) += ci * cj * ca * cb;
                    }
                }
            }
        }
        terms.retain(|_, c| c.abs() > 1e-300);
        PairProduct { lambda, terms }
    }
}

/// Expansion of an orbital product: sum over (nu, q) of c r^nu x^q e^{-lambda r}.
#[derive(Clone, Debug)]
pub struct PairProduct {
    pub lambda: f64,
    pub terms: BTreeMap<(u32, [u32; 3]), f64>,
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_diff(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    (1..a.len()).map(|i| a[i] * i as f64).collect()
}

fn poly_scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    out
}

/// Multiply by r^k.
fn poly_shift(a: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + k];
    out[k..].copy_from_slice(a);
    out
}

/// integral_0^inf P(r) e^{-rate r} dr via n!/rate^{n+1}.
fn moment_integral(poly: &[f64], rate: f64) -> f64 {
    poly.iter()
        .enumerate()
        .map(|(n, c)| c * factorial(n as u64) / rate.powi(n as i32 + 1))
        .sum()
}

/// A real solid harmonic of degree l: homogeneous monomial expansion.
#[derive(Clone, Debug)]
pub struct RealHarmonic {
    pub l: u32,
    pub terms: BTreeMap<[u32; 3], f64>,
}

/// The real solid harmonics for l = 0, 1, 2 in the fixed orders
/// (s), (pz, px, py), (d0, dz, dm, dx, dy).
pub fn real_harmonics(l: u32) -> Vec<RealHarmonic> {
    let mk = |terms: &[([u32; 3], f64)]| RealHarmonic {
        l,
        terms: terms.iter().copied().collect(),
    };
    match l {
        0 => vec![mk(&[([0, 0, 0], 0.5 / PI.sqrt())])],
        1 => {
            let h = 0.5 * (3.0 / PI).sqrt();
            vec![
                mk(&[([0, 0, 1], h)]),
                mk(&[([1, 0, 0], h)]),
                mk(&[([0, 1, 0], h)]),
            ]
        }
        2 => {
            let k = 0.25 * (15.0 / PI).sqrt();
            let k3 = k / 3.0f64.sqrt();
            vec![
                mk(&[([0, 0, 2], 2.0 * k3), ([2, 0, 0], -k3), ([0, 2, 0], -k3)]),
                mk(&[([1, 1, 0], 2.0 * k)]),
                mk(&[([2, 0, 0], k), ([0, 2, 0], -k)]),
                mk(&[([0, 1, 1], 2.0 * k)]),
                mk(&[([1, 0, 1], 2.0 * k)]),
            ]
        }
        _ => panic!("real harmonics implemented for l <= 2"),
    }
}

/// Unitary mapping spherical harmonics (m decreasing) to the real harmonics
/// of `real_harmonics`, rows in the same order.
pub fn real_unitary(l: u32) -> DMatrix<Complex<f64>> {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let s = 1.0 / 2.0f64.sqrt();
    match l {
        0 => DMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]),
        1 => DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(-s, 0.0),
                c(0.0, 0.0),
                c(s, 0.0),
                c(0.0, s),
                c(0.0, 0.0),
                c(0.0, s),
            ],
        ),
        2 => DMatrix::from_row_slice(
            5,
            5,
            &[
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, -s),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, s),
                c(s, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(s, 0.0),
                c(0.0, 0.0),
                c(0.0, s),
                c(0.0, 0.0),
                c(0.0, s),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-s, 0.0),
                c(0.0, 0.0),
                c(s, 0.0),
                c(0.0, 0.0),
            ],
        ),
        _ => panic!("real unitary implemented for l <= 2"),
    }
}
