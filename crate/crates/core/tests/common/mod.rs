//! Shared test support: an independent integral oracle built on multipole
//! expansion of the Coulomb kernel (Legendre polynomials, exact monomial
//! surface integrals) and Gauss-Laguerre / Gauss-Legendre quadrature for the
//! radial parts. No closed-form machinery from the library is reused beyond
//! the orbital definitions themselves.

#![allow(dead_code)]

use atomci::sto::{real_harmonics, RealHarmonic, STOBasis};
use nalgebra::DMatrix;

/// Nodes and weights of an n-point Gaussian rule from the symmetric
/// tridiagonal Jacobi matrix (Golub-Welsch).
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = offdiag[i];
            j[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = j.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let nodes: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let weights: Vec<f64> = idx
        .iter()
        .map(|&i| mu0 * eig.eigenvectors[(0, i)] * eig.eigenvectors[(0, i)])
        .collect();
    (nodes, weights)
}

/// n-point Gauss-Laguerre rule for integrals of g(x) e^{-x} over [0, inf).
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64).collect();
    let offdiag: Vec<f64> = (1..n).map(|i| i as f64).collect();
    golub_welsch(&diag, &offdiag, 1.0)
}

/// n-point Gauss-Legendre rule on [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    let (x, w) = golub_welsch(&diag, &offdiag, 2.0);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Exact surface integral of x^p y^q z^r over the unit sphere.
fn surface_monomial(e: [u32; 3]) -> f64 {
    if e.iter().any(|&x| x % 2 == 1) {
        return 0.0;
    }
    let double_fact = |m: i64| -> f64 {
        let mut v = 1.0;
        let mut k = m;
        while k > 1 {
            v *= k as f64;
            k -= 2;
        }
        v
    };
    let (p, q, r) = (e[0] as i64, e[1] as i64, e[2] as i64);
    4.0 * std::f64::consts::PI * double_fact(p - 1) * double_fact(q - 1) * double_fact(r - 1)
        / double_fact(p + q + r + 1)
}

/// Coefficients of the Legendre polynomial P_k as powers of u, k <= 4.
fn legendre_coeffs(k: usize) -> Vec<f64> {
    match k {
        0 => vec![1.0],
        1 => vec![0.0, 1.0],
        2 => vec![-0.5, 0.0, 1.5],
        3 => vec![0.0, -1.5, 0.0, 2.5],
        4 => vec![3.0 / 8.0, 0.0, -30.0 / 8.0, 0.0, 35.0 / 8.0],
        _ => panic!("kernel order {k} not tabulated"),
    }
}

/// Directional moment of a product of two unit-sphere harmonics:
/// integral of H_a H_b x^ex y^ey z^ez over the sphere. The harmonics are
/// homogeneous polynomials evaluated on unit vectors.
fn harmonic_pair_moment(a: &RealHarmonic, b: &RealHarmonic, e: [u32; 3]) -> f64 {
    let mut acc = 0.0;
    for (qa, ca) in &a.terms {
        for (qb, cb) in &b.terms {
            let m = [qa[0] + qb[0] + e[0], qa[1] + qb[1] + e[1], qa[2] + qb[2] + e[2]];
            acc += ca * cb * surface_monomial(m);
        }
    }
    acc
}

/// Angular factor of kernel order k: the double sphere integral of
/// H_i H_j (n1) P_k(n1.n2) H_k H_l (n2), expanded through the multinomial
/// factorization of (n1.n2)^p.
fn angular_factor(
    k: usize,
    hi: &RealHarmonic,
    hj: &RealHarmonic,
    hk: &RealHarmonic,
    hl: &RealHarmonic,
) -> f64 {
    let coeffs = legendre_coeffs(k);
    let mut total = 0.0;
    for (p, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        // (x1 x2 + y1 y2 + z1 z2)^p expanded multinomially.
        let p = p as u32;
        let mut fact = vec![1.0];
        for i in 1..=(p as usize) {
            fact.push(fact[i - 1] * i as f64);
        }
        let mut sum_p = 0.0;
        for ex in 0..=p {
            for ey in 0..=(p - ex) {
                let ez = p - ex - ey;
                let multinom = fact[p as usize]
                    / (fact[ex as usize] * fact[ey as usize] * fact[ez as usize]);
                let m1 = harmonic_pair_moment(hi, hj, [ex, ey, ez]);
                if m1 == 0.0 {
                    continue;
                }
                let m2 = harmonic_pair_moment(hk, hl, [ex, ey, ez]);
                sum_p += multinom * m1 * m2;
            }
        }
        total += c * sum_p;
    }
    total
}

/// A radial factor r^powers polynomial times e^{-lambda r}.
#[derive(Clone, Debug)]
pub struct RadialFn {
    pub poly: Vec<f64>,
    pub lambda: f64,
}

impl RadialFn {
    pub fn eval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.poly.iter().rev() {
            acc = acc * r + c;
        }
        acc * (-self.lambda * r).exp()
    }

    pub fn derivative(&self) -> RadialFn {
        // (P e^{-l r})' = (P' - l P) e^{-l r}
        let mut poly = vec![0.0; self.poly.len()];
        for (p, &c) in self.poly.iter().enumerate() {
            if p > 0 {
                poly[p - 1] += p as f64 * c;
            }
            poly[p] -= self.lambda * c;
        }
        RadialFn {
            poly,
            lambda: self.lambda,
        }
    }

    fn product(&self, other: &RadialFn) -> RadialFn {
        let mut poly = vec![0.0; self.poly.len() + other.poly.len() - 1];
        for (i, a) in self.poly.iter().enumerate() {
            for (j, b) in other.poly.iter().enumerate() {
                poly[i + j] += a * b;
            }
        }
        RadialFn {
            poly,
            lambda: self.lambda + other.lambda,
        }
    }
}

/// The oracle's view of a basis: radial functions and harmonic labels per
/// spatial orbital, as defined by the library's own basis construction.
pub struct OracleBasis {
    pub radial: Vec<RadialFn>,
    pub harmonic: Vec<RealHarmonic>,
    pub l: Vec<u32>,
    pub harmonic_index: Vec<usize>,
    laguerre: (Vec<f64>, Vec<f64>),
    legendre: (Vec<f64>, Vec<f64>),
}

impl OracleBasis {
    pub fn new(basis: &STOBasis) -> Self {
        let mut radial = Vec::new();
        let mut harmonic = Vec::new();
        let mut l = Vec::new();
        let mut harmonic_index = Vec::new();
        for (idx, shell) in basis.shells.iter().enumerate() {
            let (poly, lambda) = basis.radial_poly(idx);
            let harms = real_harmonics(shell.l);
            for (h, harm) in harms.iter().enumerate() {
                // radial_poly includes r^l; the harmonic here is evaluated on
                // unit vectors, matching psi = R(r) e^{-lambda r} H(n).
                radial.push(RadialFn {
                    poly: poly.clone(),
                    lambda,
                });
                harmonic.push(harm.clone());
                l.push(shell.l);
                harmonic_index.push(h);
            }
        }
        OracleBasis {
            radial,
            harmonic,
            l,
            harmonic_index,
            laguerre: gauss_laguerre(90),
            legendre: gauss_legendre_unit(64),
        }
    }

    pub fn len(&self) -> usize {
        self.radial.len()
    }

    /// integral over [0, inf) of g(r) e^{-alpha r} dr by rescaled
    /// Gauss-Laguerre quadrature.
    fn laguerre_integral<G: Fn(f64) -> f64>(&self, alpha: f64, g: G) -> f64 {
        let (x, w) = &self.laguerre;
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            acc += wi * g(xi / alpha);
        }
        acc / alpha
    }

    /// One of the two ordered halves of the radial kernel integral:
    /// integral over r of F(r) r^2 * [integral over 0<s<r of G(s) s^2 s^k / r^{k+1} ds] dr,
    /// computed with s = t r.
    fn radial_half(&self, k: usize, f: &RadialFn, g: &RadialFn) -> f64 {
        let (tx, tw) = &self.legendre;
        self.laguerre_integral(f.lambda, |r| {
            let fr = f.poly.iter().rev().fold(0.0, |acc, &c| acc * r + c);
            let mut inner = 0.0;
            for (ti, wi) in tx.iter().zip(tw) {
                inner += wi * g.eval(ti * r) * ti.powi(k as i32 + 2);
            }
            fr * r.powi(4) * inner
        })
    }

    /// Two-electron repulsion integral (ij|kl) in chemist notation.
    pub fn coulomb(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let f = self.radial[i].product(&self.radial[j]);
        let g = self.radial[k].product(&self.radial[l]);
        let k_max = (self.l[i] + self.l[j]).min(self.l[k] + self.l[l]) as usize;
        let mut total = 0.0;
        for kk in 0..=k_max {
            let ang = angular_factor(
                kk,
                &self.harmonic[i],
                &self.harmonic[j],
                &self.harmonic[k],
                &self.harmonic[l],
            );
            if ang.abs() < 1e-14 {
                continue;
            }
            let rad = self.radial_half(kk, &f, &g) + self.radial_half(kk, &g, &f);
            total += ang * rad;
        }
        total
    }

    /// Overlap <i|j>.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        if self.l[i] != self.l[j] || self.harmonic_index[i] != self.harmonic_index[j] {
            return 0.0;
        }
        let p = self.radial[i].product(&self.radial[j]);
        self.laguerre_integral(p.lambda, |r| {
            r * r * p.poly.iter().rev().fold(0.0, |acc, &c| acc * r + c)
        })
    }

    /// <i| -1/2 laplacian - z/r |j> via the radial reduction for a common
    /// unit-sphere harmonic.
    pub fn one_body(&self, i: usize, j: usize, z: f64) -> f64 {
        if self.l[i] != self.l[j] || self.harmonic_index[i] != self.harmonic_index[j] {
            return 0.0;
        }
        let di = self.radial[i].derivative();
        let dj = self.radial[j].derivative();
        let grad = di.product(&dj);
        let ll = (self.l[i] * (self.l[i] + 1)) as f64;
        let pair = self.radial[i].product(&self.radial[j]);
        let kinetic = 0.5
            * (self.laguerre_integral(grad.lambda, |r| r * r * poly_eval(&grad.poly, r))
                + ll * self.laguerre_integral(pair.lambda, |r| poly_eval(&pair.poly, r)));
        let attract = self.laguerre_integral(pair.lambda, |r| r * poly_eval(&pair.poly, r));
        kinetic - z * attract
    }
}

fn poly_eval(poly: &[f64], r: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

/// Deterministic splitmix64 stream for reproducible random sampling in tests.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Reference decompositions of single-subshell powers: expected LS terms and
/// the coefficient lists of the maximal-(L_z, S_z) states.  Orbital index
/// convention inside one subshell: 2*(l - m) + spin with spin 0 = up.
pub mod term_tables {
    use atomci::fock::Det;
    use atomci::lsdecomp::decompose_subshell;
    use std::collections::BTreeMap;

    pub struct ExpectedBlock {
        pub l: u32,
        pub two_s: u32,
        pub state: Vec<(&'static [usize], f64)>,
    }

    fn b(l: u32, two_s: u32, state: Vec<(&'static [usize], f64)>) -> ExpectedBlock {
        ExpectedBlock { l, two_s, state }
    }

    /// All reference rows: (subshell l, electron count, expected blocks).
    pub fn cases() -> Vec<(u32, u32, Vec<ExpectedBlock>)> {
        let r2 = 2.0_f64.sqrt();
        let r3 = 3.0_f64.sqrt();
        let r6 = 6.0_f64.sqrt();
        vec![
            (0, 1, vec![b(0, 1, vec![(&[0], 1.0)])]),
            (0, 2, vec![b(0, 0, vec![(&[0, 1], 1.0)])]),
            (1, 1, vec![b(1, 1, vec![(&[0], 1.0)])]),
            (
                1,
                2,
                vec![
                    b(0, 0, vec![(&[0, 5], -1.0), (&[1, 4], 1.0), (&[2, 3], 1.0)]),
                    b(1, 2, vec![(&[0, 2], 1.0)]),
                    b(2, 0, vec![(&[0, 1], 1.0)]),
                ],
            ),
            (
                1,
                3,
                vec![
                    b(0, 3, vec![(&[0, 2, 4], 1.0)]),
                    b(1, 1, vec![(&[0, 1, 4], 1.0), (&[0, 2, 3], 1.0)]),
                    b(2, 1, vec![(&[0, 1, 2], 1.0)]),
                ],
            ),
            (
                1,
                4,
                vec![
                    b(
                        0,
                        0,
                        vec![
                            (&[0, 1, 4, 5], -1.0),
                            (&[0, 2, 3, 5], -1.0),
                            (&[1, 2, 3, 4], 1.0),
                        ],
                    ),
                    b(1, 2, vec![(&[0, 1, 2, 4], 1.0)]),
                    b(2, 0, vec![(&[0, 1, 2, 3], 1.0)]),
                ],
            ),
            (1, 5, vec![b(1, 1, vec![(&[0, 1, 2, 3, 4], 1.0)])]),
            (1, 6, vec![b(0, 0, vec![(&[0, 1, 2, 3, 4, 5], 1.0)])]),
            (2, 1, vec![b(2, 1, vec![(&[0], 1.0)])]),
            (
                2,
                2,
                vec![
                    b(
                        0,
                        0,
                        vec![
                            (&[0, 9], 1.0),
                            (&[1, 8], -1.0),
                            (&[2, 7], -1.0),
                            (&[3, 6], 1.0),
                            (&[4, 5], 1.0),
                        ],
                    ),
                    b(1, 2, vec![(&[0, 6], -r2), (&[2, 4], r3)]),
                    b(2, 0, vec![(&[0, 5], -r2), (&[1, 4], r2), (&[2, 3], r3)]),
                    b(3, 2, vec![(&[0, 2], 1.0)]),
                    b(4, 0, vec![(&[0, 1], 1.0)]),
                ],
            ),
            (
                2,
                3,
                vec![
                    b(
                        1,
                        1,
                        vec![
                            (&[0, 2, 9], 4.0 * r3),
                            (&[0, 3, 8], -2.0 * r3),
                            (&[0, 4, 7], -4.0 * r2),
                            (&[0, 5, 6], -r2),
                            (&[1, 2, 8], -2.0 * r3),
                            (&[1, 4, 6], 5.0 * r2),
                            (&[2, 3, 6], 3.0 * r3),
                            (&[2, 4, 5], 3.0 * r3),
                        ],
                    ),
                    b(1, 3, vec![(&[0, 2, 8], -r3), (&[0, 4, 6], r2)]),
                    b(
                        2,
                        1,
                        vec![
                            (&[0, 1, 8], 2.0 * r2),
                            (&[0, 3, 6], -r2),
                            (&[1, 2, 6], r2),
                            (&[2, 3, 4], r3),
                        ],
                    ),
                    b(
                        2,
                        1,
                        vec![
                            (&[0, 1, 8], -1.0),
                            (&[0, 2, 7], -5.0),
                            (&[0, 3, 6], 3.0),
                            (&[0, 4, 5], 5.0),
                            (&[1, 2, 6], 2.0),
                            (&[2, 3, 4], r6),
                        ],
                    ),
                    b(
                        3,
                        1,
                        vec![
                            (&[0, 1, 6], r6),
                            (&[0, 2, 5], -1.0),
                            (&[0, 3, 4], -1.0),
                            (&[1, 2, 4], 2.0),
                        ],
                    ),
                    b(3, 3, vec![(&[0, 2, 4], 1.0)]),
                    b(4, 1, vec![(&[0, 1, 4], r2), (&[0, 2, 3], r3)]),
                    b(5, 1, vec![(&[0, 1, 2], 1.0)]),
                ],
            ),
        ]
    }

    pub fn term_name(l: u32, two_s: u32) -> String {
        let letter = ["S", "P", "D", "F", "G", "H", "I"][l as usize];
        format!("{}{}", two_s + 1, letter)
    }

    fn to_map(entries: &[(&[usize], f64)]) -> BTreeMap<Det, f64> {
        let norm: f64 = entries.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        entries
            .iter()
            .map(|(orbs, c)| (Det::from_orbitals(orbs), c / norm))
            .collect()
    }

    fn same_ray(
        expected: &BTreeMap<Det, f64>,
        actual: &BTreeMap<Det, f64>,
    ) -> Result<(), String> {
        let actual: BTreeMap<Det, f64> = actual
            .iter()
            .filter(|(_, v)| v.abs() > 1e-13)
            .map(|(k, v)| (*k, *v))
            .collect();
        if expected.keys().ne(actual.keys()) {
            return Err("determinant support differs".into());
        }
        let dot: f64 = expected.iter().map(|(d, c)| c * actual[d]).sum();
        let sign = if dot >= 0.0 { 1.0 } else { -1.0 };
        for (d, c) in expected {
            let a = sign * actual[d];
            if (c - a).abs() >= 1e-12 {
                return Err(format!("coefficient of {d:?} is {a}, expected {c}"));
            }
        }
        Ok(())
    }

    fn same_span(
        expected: &[BTreeMap<Det, f64>],
        actual: &[BTreeMap<Det, f64>],
    ) -> Result<(), String> {
        let mut dets: Vec<Det> = Vec::new();
        for v in expected.iter().chain(actual) {
            for d in v.keys() {
                if !dets.contains(d) {
                    dets.push(*d);
                }
            }
        }
        let projector = |vs: &[BTreeMap<Det, f64>]| -> Vec<f64> {
            let n = dets.len();
            let mut p = vec![0.0; n * n];
            for v in vs {
                for (a, da) in dets.iter().enumerate() {
                    for (bb, db) in dets.iter().enumerate() {
                        p[a * n + bb] +=
                            v.get(da).copied().unwrap_or(0.0) * v.get(db).copied().unwrap_or(0.0);
                    }
                }
            }
            p
        };
        let pe = projector(expected);
        let pa = projector(actual);
        for (i, (e, a)) in pe.iter().zip(&pa).enumerate() {
            if (e - a).abs() >= 1e-12 {
                return Err(format!("projector entry {i} is {a}, expected {e}"));
            }
        }
        Ok(())
    }

    /// Full comparison of one subshell power against the reference rows.
    pub fn check_subshell(l: u32, n: u32, expected: &[ExpectedBlock]) -> Result<(), String> {
        let blocks = decompose_subshell(l, n);
        let label = format!("{}^{}", ["s", "p", "d"][l as usize], n);

        let mut got: Vec<(u32, u32)> = blocks.iter().map(|b| (b.l, b.two_s)).collect();
        let mut want: Vec<(u32, u32)> = expected.iter().map(|e| (e.l, e.two_s)).collect();
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Err(format!("{label}: term multiset {got:?}, expected {want:?}"));
        }
        let mut total = 0;
        for blk in blocks.iter() {
            if blk.dim() != ((2 * blk.l + 1) * (blk.two_s + 1)) as usize {
                return Err(format!(
                    "{label} {}: block dimension {}",
                    term_name(blk.l, blk.two_s),
                    blk.dim()
                ));
            }
            total += blk.dim();
        }
        let order = 2 * (2 * l + 1);
        let full: usize = (0..n).map(|i| (order - i) as usize).product::<usize>()
            / (1..=n as usize).product::<usize>().max(1);
        if total != full {
            return Err(format!("{label}: blocks span {total} of {full}"));
        }

        let mut groups: BTreeMap<(u32, u32), Vec<&ExpectedBlock>> = BTreeMap::new();
        for e in expected {
            groups.entry((e.l, e.two_s)).or_default().push(e);
        }
        for ((tl, ts), states) in groups {
            let name = format!("{label} {}", term_name(tl, ts));
            let ours: Vec<BTreeMap<Det, f64>> = blocks
                .iter()
                .filter(|blk| blk.l == tl && blk.two_s == ts)
                .map(|blk| blk.state_f64(tl as i32, ts as i32))
                .collect();
            let reference: Vec<BTreeMap<Det, f64>> =
                states.iter().map(|s| to_map(&s.state)).collect();
            if ours.len() != reference.len() {
                return Err(format!("{name}: multiplicity {}", ours.len()));
            }
            let res = if reference.len() == 1 {
                same_ray(&reference[0], &ours[0])
            } else {
                same_span(&reference, &ours)
            };
            res.map_err(|e| format!("{name}: {e}"))?;
        }
        Ok(())
    }
}
