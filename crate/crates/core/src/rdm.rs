//! Reduced density matrices of state pairs |ψ⟩⟨χ|.
//!
//! One- and two-body RDMs are computed on spin-orbitals with exact fermionic
//! signs, then traced over spin to spatial-orbital objects suitable for
//! contraction against a one-body integral matrix and a two-body Coulomb
//! tensor in chemist pair indexing.  The two-body spin trace
//!
//!   Γ̂_{(kℓ),(ij)} = Σ_{α,β : iα<kβ} ⟨χ| a†_{iα} a†_{kβ} a_{ℓβ} a_{jα} |ψ⟩
//!
//! runs over spin assignments whose ket spin-orbital pair (iα, kβ) is
//! strictly ordered in the global lexicographic order, so each physical pair
//! is counted once and the energy contraction needs no extra 1/2 factor:
//!
//!   ⟨χ|H|ψ⟩ = Σ_{ij} ĥ_{ij} γ̂_{ij} + Σ_{ijkℓ} (ij|kℓ) Γ̂_{(kℓ),(ij)}.
//!
//! Since the definitions are evaluated only through this contraction, the
//! spin-traced RDMs of a pair of states on a fixed orbital set are
//! exponent-independent and can be cached across all integral re-evaluations.

use std::collections::BTreeMap;
use std::collections::HashMap;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::fock::{annihilate, create, Det};
use crate::model::Subshell;
use crate::sto::real_unitary;

/// Sparse two-body storage: ((k,ℓ),(i,j)) → value, with (i,k) the ket
/// spatial pair (i ≤ k) and (j,ℓ) the bra spatial pair.
pub type PairMap = BTreeMap<((u16, u16), (u16, u16)), f64>;

/// Entries smaller than this are dropped from sparse two-body storage.
pub const SPARSE_DROP: f64 = 1e-14;

/// Spin-orbital RDMs of |ψ⟩⟨χ|.
///
/// `gamma1[(p,q)] = ⟨χ| a†_q a_p |ψ⟩` over global spin-orbital indices, and
/// `gamma2[((p1,p2),(q1,q2))] = ⟨χ| a†_{p1} a†_{p2} a_{q2} a_{q1} |ψ⟩`
/// over strictly ordered spin-orbital pairs p1<p2, q1<q2.
#[derive(Debug, Clone)]
pub struct SpinOrbitalRdms {
    pub n_spin_orbitals: usize,
    pub n_electrons: u32,
    pub gamma1: DMatrix<f64>,
    pub gamma2: PairMap,
}

/// Which spatial-orbital basis the spin-traced RDM indices refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Spherical,
    RealCartesian,
}

/// Spin-traced RDMs of |ψ⟩⟨χ| over spatial orbitals.
///
/// `gamma1[(i,j)] = Σ_α ⟨χ| a†_{jα} a_{iα} |ψ⟩` and `gamma2` holds
/// Γ̂_{(kℓ),(ij)} keyed `((k,ℓ),(i,j))` with the ket pair satisfying i ≤ k.
/// Entries with i = k arise from doubly occupied spatial orbitals (the
/// ordered-ket constraint then admits only the ↑↓ spin assignment).
#[derive(Debug, Clone)]
pub struct SpinTracedRdmPair {
    pub n_spatial: usize,
    pub n_electrons: u32,
    pub gamma1: DMatrix<f64>,
    pub gamma2: PairMap,
    pub basis: BasisTag,
}

/// Compute spin-orbital RDMs of the pair |ψ⟩⟨χ| on `n_spin_orbitals`.
///
/// Both states must be determinant expansions over the same orbital set with
/// equal particle number.  All determinant-pair sums carry exact signs; the
/// two-body part matches bra and ket half-annihilated determinants through a
/// hash join so only structurally nonzero entries are ever touched.
pub fn rdm_pair(
    psi: &BTreeMap<Det, f64>,
    chi: &BTreeMap<Det, f64>,
    n_spin_orbitals: usize,
) -> Result<SpinOrbitalRdms> {
    let n = check_space(psi, chi, n_spin_orbitals)?;

    let mut gamma1 = DMatrix::zeros(n_spin_orbitals, n_spin_orbitals);
    for (&d, &c) in psi {
        for p in d.orbitals() {
            let (d1, s1) = annihilate(d, p).expect("occupied orbital");
            for q in 0..n_spin_orbitals {
                if let Some((d2, s2)) = create(d1, q) {
                    if let Some(&cx) = chi.get(&d2) {
                        gamma1[(p, q)] += cx * c * f64::from(s1 * s2);
                    }
                }
            }
        }
    }

    // Half-annihilated expansions: reduced determinant → (ordered pair, signed amplitude).
    let ket_half = half_annihilate(psi);
    let bra_half = half_annihilate(chi);

    let mut gamma2: PairMap = BTreeMap::new();
    for (d_red, kets) in &ket_half {
        if let Some(bras) = bra_half.get(d_red) {
            for &(p1, p2, b) in bras {
                for &(q1, q2, k) in kets {
                    *gamma2.entry(((p1, p2), (q1, q2))).or_insert(0.0) += b * k;
                }
            }
        }
    }
    gamma2.retain(|_, v| v.abs() >= SPARSE_DROP);

    Ok(SpinOrbitalRdms {
        n_spin_orbitals,
        n_electrons: n,
        gamma1,
        gamma2,
    })
}

fn check_space(psi: &BTreeMap<Det, f64>, chi: &BTreeMap<Det, f64>, k: usize) -> Result<u32> {
    let mut n = None;
    for state in [psi, chi] {
        for d in state.keys() {
            if d.orbitals().any(|p| p >= k) {
                return Err(Error::Invalid(format!(
                    "determinant occupies orbital outside the {k}-orbital set"
                )));
            }
            let count = d.count();
            if *n.get_or_insert(count) != count {
                return Err(Error::Invalid(
                    "states mix or differ in particle number".into(),
                ));
            }
        }
    }
    n.ok_or_else(|| Error::Invalid("empty state in RDM pair".into()))
}

/// For each determinant, remove every ordered pair (r1 < r2) of occupied
/// spin-orbitals, applying a_{r1} first and a_{r2} second.  The resulting
/// signed amplitude is the coefficient of a_{r2} a_{r1} |state⟩ on the
/// reduced determinant.
fn half_annihilate(state: &BTreeMap<Det, f64>) -> HashMap<Det, Vec<(u16, u16, f64)>> {
    let mut out: HashMap<Det, Vec<(u16, u16, f64)>> = HashMap::new();
    for (&d, &c) in state {
        let occ: Vec<usize> = d.orbitals().collect();
        for (a, &r1) in occ.iter().enumerate() {
            let (d1, s1) = annihilate(d, r1).expect("occupied");
            for &r2 in &occ[a + 1..] {
                let (d2, s2) = annihilate(d1, r2).expect("occupied");
                out.entry(d2).or_default().push((
                    r1 as u16,
                    r2 as u16,
                    c * f64::from(s1 * s2),
                ));
            }
        }
    }
    out
}

/// Trace spin-orbital RDMs over spin, producing spatial-orbital objects in
/// the spherical-harmonic basis.
///
/// Spin-orbitals are globally ordered so that indices 2t and 2t+1 are the
/// up/down partners of spatial orbital t.
pub fn spin_trace(rdms: &SpinOrbitalRdms) -> SpinTracedRdmPair {
    assert!(
        rdms.n_spin_orbitals % 2 == 0,
        "spin-orbital count must pair into spatial orbitals"
    );
    let k = rdms.n_spin_orbitals / 2;

    let mut gamma1 = DMatrix::zeros(k, k);
    for p in 0..rdms.n_spin_orbitals {
        for q in 0..rdms.n_spin_orbitals {
            // Same-spin entries only: partners share the parity of the index.
            if p % 2 == q % 2 {
                gamma1[(p / 2, q / 2)] += rdms.gamma1[(p, q)];
            }
        }
    }

    let mut gamma2: PairMap = BTreeMap::new();
    for (&((p1, p2), (q1, q2)), &v) in &rdms.gamma2 {
        let (i, al) = (p1 / 2, p1 % 2);
        let (kk, be) = (p2 / 2, p2 % 2);
        // Direct spin assignment: (jα, ℓβ) = (q1, q2).
        if q1 % 2 == al && q2 % 2 == be {
            *gamma2.entry(((kk, q2 / 2), (i, q1 / 2))).or_insert(0.0) += v;
        }
        // Crossed assignment: (jα, ℓβ) = (q2, q1) picks up one antisymmetry sign.
        if q2 % 2 == al && q1 % 2 == be {
            *gamma2.entry(((kk, q1 / 2), (i, q2 / 2))).or_insert(0.0) -= v;
        }
    }
    gamma2.retain(|_, v| v.abs() >= SPARSE_DROP);

    SpinTracedRdmPair {
        n_spatial: k,
        n_electrons: rdms.n_electrons,
        gamma1,
        gamma2,
        basis: BasisTag::Spherical,
    }
}

/// Contract spin-traced RDMs against one- and two-body integrals:
/// Σ ĥ_{ij} γ̂_{ij} + Σ (ij|kℓ) Γ̂_{(kℓ),(ij)}.
///
/// `two_body(i, j, k, l)` must return the chemist-notation integral (ij|kℓ)
/// and be symmetric under i↔j, k↔ℓ, and (ij)↔(kℓ).
pub fn contract_energy<F>(rdm: &SpinTracedRdmPair, h: &DMatrix<f64>, two_body: F) -> f64
where
    F: Fn(usize, usize, usize, usize) -> f64,
{
    assert_eq!(h.nrows(), rdm.n_spatial);
    assert_eq!(h.ncols(), rdm.n_spatial);
    let mut e = 0.0;
    for i in 0..rdm.n_spatial {
        for j in 0..rdm.n_spatial {
            let g = rdm.gamma1[(i, j)];
            if g != 0.0 {
                e += h[(i, j)] * g;
            }
        }
    }
    for (&((k, l), (i, j)), &v) in &rdm.gamma2 {
        e += two_body(i as usize, j as usize, k as usize, l as usize) * v;
    }
    e
}

/// The set of spatial-orbital quadruple keys (canonicalized chemist pairs)
/// on which `contract_energy` will query the two-body integral table.
/// Used to restrict integral evaluation to the support actually needed.
pub fn two_body_support(rdms: &[&SpinTracedRdmPair]) -> Vec<(u16, u16, u16, u16)> {
    let mut keys = std::collections::BTreeSet::new();
    for rdm in rdms {
        for &((k, l), (i, j)) in rdm.gamma2.keys() {
            keys.insert(canonical_quadruple(i, j, k, l));
        }
    }
    keys.into_iter().collect()
}

/// Canonical representative of (ij|kℓ) under the 8-fold real-integral
/// symmetry: sort within each pair, then sort the pairs.
pub fn canonical_quadruple(i: u16, j: u16, k: u16, l: u16) -> (u16, u16, u16, u16) {
    let a = (i.min(j), i.max(j));
    let b = (k.min(l), k.max(l));
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    (x.0, x.1, y.0, y.1)
}

/// Conjugate spin-traced RDMs from the spherical-harmonic spatial basis to
/// the real solid-harmonic basis, block-diagonally per shell.
///
/// `shells[t]` must give the subshell of spatial orbital t in order, i.e.
/// each shell contributes a contiguous block of 2ℓ+1 orbitals (m descending)
/// that transforms under the fixed ℓ-dependent unitary.  Energy contractions
/// against correspondingly transformed integrals are invariant.
pub fn transform_to_real_basis(
    rdm: &SpinTracedRdmPair,
    shells: &[Subshell],
) -> Result<SpinTracedRdmPair> {
    if rdm.basis == BasisTag::RealCartesian {
        return Err(Error::Invalid(
            "RDM pair is already in the real-harmonic basis".into(),
        ));
    }
    let blocks = shell_blocks(shells, rdm.n_spatial)?;
    let unit: Vec<DMatrix<Complex<f64>>> = blocks
        .iter()
        .map(|&(_, l)| real_unitary(l))
        .collect();
    // owner[t] = (block index, offset of t within the block)
    let mut owner = Vec::with_capacity(rdm.n_spatial);
    for (b, &(start, l)) in blocks.iter().enumerate() {
        for off in 0..(2 * l as usize + 1) {
            debug_assert_eq!(owner.len(), start + off);
            owner.push((b, off));
        }
    }

    let mut g1 = DMatrix::<Complex<f64>>::zeros(rdm.n_spatial, rdm.n_spatial);
    for m in 0..rdm.n_spatial {
        for n in 0..rdm.n_spatial {
            let v = rdm.gamma1[(m, n)];
            if v == 0.0 {
                continue;
            }
            let (bm, om) = owner[m];
            let (bn, on) = owner[n];
            let (um, un) = (&unit[bm], &unit[bn]);
            for a in 0..um.nrows() {
                let ca = um[(a, om)].conj();
                if ca == Complex::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..un.nrows() {
                    let cb = un[(b, on)];
                    if cb != Complex::new(0.0, 0.0) {
                        g1[(blocks[bm].0 + a, blocks[bn].0 + b)] += ca * cb * v;
                    }
                }
            }
        }
    }
    let gamma1 = realize_matrix(&g1)?;

    // Reconstruct the unordered spin-summed tensor g[i,j,k,l], transform all
    // four indices, and re-slice onto ordered ket pairs.  Coincident-ket
    // entries receive the spin-symmetrized half; contractions are unaffected.
    let mut g_full: BTreeMap<(u16, u16, u16, u16), f64> = BTreeMap::new();
    for (&((k, l), (i, j)), &v) in &rdm.gamma2 {
        if i < k {
            *g_full.entry((i, j, k, l)).or_insert(0.0) += v;
            *g_full.entry((k, l, i, j)).or_insert(0.0) += v;
        } else {
            // i == k: the ↑↓ term stored here plus the ↓↑ term stored at the
            // bra-swapped key together form the spin sum.
            *g_full.entry((i, j, k, l)).or_insert(0.0) += v;
            *g_full.entry((i, l, k, j)).or_insert(0.0) += v;
        }
    }

    let mut g_out: BTreeMap<(u16, u16, u16, u16), Complex<f64>> = BTreeMap::new();
    for (&(i, j, k, l), &v) in &g_full {
        let (bi, oi) = owner[i as usize];
        let (bj, oj) = owner[j as usize];
        let (bk, ok) = owner[k as usize];
        let (bl, ol) = owner[l as usize];
        for a in 0..unit[bi].nrows() {
            let ua = unit[bi][(a, oi)];
            if ua == Complex::new(0.0, 0.0) {
                continue;
            }
            for b in 0..unit[bj].nrows() {
                let ub = unit[bj][(b, oj)].conj();
                if ub == Complex::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..unit[bk].nrows() {
                    let uc = unit[bk][(c, ok)];
                    if uc == Complex::new(0.0, 0.0) {
                        continue;
                    }
                    for d in 0..unit[bl].nrows() {
                        let ud = unit[bl][(d, ol)].conj();
                        if ud == Complex::new(0.0, 0.0) {
                            continue;
                        }
                        let key = (
                            (blocks[bi].0 + a) as u16,
                            (blocks[bj].0 + b) as u16,
                            (blocks[bk].0 + c) as u16,
                            (blocks[bl].0 + d) as u16,
                        );
                        *g_out.entry(key).or_insert(Complex::new(0.0, 0.0)) +=
                            ua * ub * uc * ud * v;
                    }
                }
            }
        }
    }

    let mut gamma2: PairMap = BTreeMap::new();
    for (&(i, j, k, l), &v) in &g_out {
        if v.im.abs() >= 1e-10 {
            return Err(Error::Invalid(format!(
                "real-basis two-body RDM entry has imaginary residue {}; \
                 the state pair is not reflection-compatible",
                v.im
            )));
        }
        if i < k {
            gamma2.insert(((k, l), (i, j)), v.re);
        } else if i == k {
            *gamma2.entry(((k, l), (i, j))).or_insert(0.0) += 0.5 * v.re;
        }
    }
    gamma2.retain(|_, v| v.abs() >= SPARSE_DROP);

    Ok(SpinTracedRdmPair {
        n_spatial: rdm.n_spatial,
        n_electrons: rdm.n_electrons,
        gamma1,
        gamma2,
        basis: BasisTag::RealCartesian,
    })
}

/// Starting offsets and ℓ of each shell's contiguous block of spatial
/// orbitals, validated against the total count.
fn shell_blocks(shells: &[Subshell], n_spatial: usize) -> Result<Vec<(usize, u32)>> {
    let mut blocks = Vec::with_capacity(shells.len());
    let mut start = 0usize;
    for s in shells {
        blocks.push((start, s.l));
        start += 2 * s.l as usize + 1;
    }
    if start != n_spatial {
        return Err(Error::Invalid(format!(
            "shell list covers {start} spatial orbitals, RDM holds {n_spatial}"
        )));
    }
    Ok(blocks)
}

fn realize_matrix(m: &DMatrix<Complex<f64>>) -> Result<DMatrix<f64>> {
    let worst = m.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if worst >= 1e-10 {
        return Err(Error::Invalid(format!(
            "real-basis one-body RDM entry has imaginary residue {worst}; \
             the state pair is not reflection-compatible"
        )));
    }
    Ok(m.map(|v| v.re))
}
