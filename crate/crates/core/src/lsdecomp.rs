//! Exact decomposition of configuration spaces into total-(L, S, parity)
//! symmetry blocks.
//!
//! Within one subshell power, highest-weight states of each (L, S) term are
//! the kernel of the stacked operator (L^2 - L(L+1) | S^2 - S(S+1)) restricted
//! to the determinant block with m_l = L, m_s = S (that block restriction is
//! exactly the kernel of the diagonal L_z/S_z rows of the stacked operator).
//! Ladder descent fills in the full magnetic grid; blocks of different
//! subshells are then coupled with exact Clebsch-Gordan coefficients and
//! embedded into the N-particle determinant space.
//!
//! States carry an unnormalized exact amplitude map plus the common squared
//! norm of their block, so every coefficient of a normalized state is an
//! exact radical; the squared norm stays constant across a block's magnetic
//! grid by construction.

use crate::angular::{configuration_parity, many_body_operators, single_particle_operators};
use crate::error::{Error, Result};
use crate::exact::{rationalize_f64, Rad};
use crate::exact_linalg::{gram_schmidt, inner, RadMatrix};
use crate::fock::{
    apply_one_body, create, embed_product, orbital_list, Configuration, Det, DetSpace,
    SpinOrbital, Spin,
};
use crate::model::{Subshell, Term};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

pub type Amplitudes = BTreeMap<Det, Rad>;

/// One irreducible (L, S) block: the full (m_l, m_s) grid of exact states.
/// All states in the grid share `norm2`; `amps[i][j]` holds m_l = l - i,
/// 2 m_s = two_s - 2 j.
#[derive(Clone, Debug)]
pub struct IrrepBlock {
    pub l: u32,
    pub two_s: u32,
    pub norm2: Rad,
    pub amps: Vec<Vec<Amplitudes>>,
    /// Human-readable coupling path, e.g. "3d3(4F) 4d2(3F)".
    pub path: String,
}

impl IrrepBlock {
    pub fn amp(&self, m_l: i32, two_ms: i32) -> &Amplitudes {
        let i = (self.l as i32 - m_l) as usize;
        let j = ((self.two_s as i32 - two_ms) / 2) as usize;
        &self.amps[i][j]
    }

    pub fn dim(&self) -> usize {
        (2 * self.l as usize + 1) * (self.two_s as usize + 1)
    }

    /// Normalized float coefficients of one grid state.
    pub fn state_f64(&self, m_l: i32, two_ms: i32) -> BTreeMap<Det, f64> {
        let scale = 1.0 / self.norm2.to_f64().sqrt();
        self.amp(m_l, two_ms)
            .iter()
            .map(|(d, c)| (*d, c.to_f64() * scale))
            .collect()
    }

    fn vacuum() -> IrrepBlock {
        IrrepBlock {
            l: 0,
            two_s: 0,
            norm2: Rad::one(),
            amps: vec![vec![[(Det::empty(), Rad::one())].into_iter().collect()]],
            path: String::new(),
        }
    }
}

fn shell_for_l(l: u32) -> Subshell {
    Subshell::new(l + 1, l)
}

/// Decompose the n-electron space of a single subshell with orbital momentum
/// l into (L, S) blocks over local orbital indices 0..2(2l+1). Results are
/// memoized per (l, n); blocks are sorted by (L, S, kernel ordinal).
pub fn decompose_subshell(l: u32, n: u32) -> Arc<Vec<IrrepBlock>> {
    let memo = subshell_memo();
    if let Some(hit) = memo.lock().unwrap().get(&(l, n)) {
        return hit.clone();
    }
    let blocks = Arc::new(decompose_subshell_uncached(l, n));
    memo.lock().unwrap().insert((l, n), blocks.clone());
    blocks
}

fn subshell_memo() -> &'static Mutex<BTreeMap<(u32, u32), Arc<Vec<IrrepBlock>>>> {
    static MEMO: OnceLock<Mutex<BTreeMap<(u32, u32), Arc<Vec<IrrepBlock>>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// Install a precomputed subshell table (e.g. loaded from a cache file) into
/// the in-process memo. Keeps an already-present table, so seeding can never
/// change results mid-run.
pub fn seed_subshell_table(l: u32, n: u32, blocks: Vec<IrrepBlock>) {
    subshell_memo()
        .lock()
        .unwrap()
        .entry((l, n))
        .or_insert_with(|| Arc::new(blocks));
}

fn decompose_subshell_uncached(l: u32, n: u32) -> Vec<IrrepBlock> {
    let orbitals = orbital_list(&[shell_for_l(l)]);
    let g = orbitals.len();
    assert!(n as usize <= g, "subshell occupation exceeds capacity");
    if n == 0 {
        return vec![IrrepBlock::vacuum()];
    }
    let space = DetSpace::full(g, n as usize).expect("subshell fits in 64 bits");
    let ops = many_body_operators(&space, &orbitals);
    let sp = single_particle_operators(&orbitals);

    let weight = |det: Det| -> (i32, i32) {
        let mut ml = 0;
        let mut two_ms = 0;
        for i in det.orbitals() {
            ml += orbitals[i].m();
            two_ms += if orbitals[i].spin == Spin::Up { 1 } else { -1 };
        }
        (ml, two_ms)
    };

    // Enumerate candidate (L, 2S) from achievable nonnegative weights.
    let mut candidates: Vec<(i32, i32)> = space
        .dets
        .iter()
        .map(|&d| weight(d))
        .filter(|&(ml, ms)| ml >= 0 && ms >= 0)
        .collect();
    candidates.sort();
    candidates.dedup();

    let mut blocks = Vec::new();
    for &(cl, c2s) in &candidates {
        // Restrict to the (m_l = L, m_s = S) determinant block.
        let members: Vec<usize> = (0..space.len())
            .filter(|&i| weight(space.dets[i]) == (cl, c2s))
            .collect();
        if members.is_empty() {
            continue;
        }
        let pos: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let m = members.len();
        let mut stacked = RadMatrix::zeros(2 * m, m);
        let l2_eig = Rad::from_integer((cl * (cl + 1)) as i64);
        let s2_eig = Rad::from_ratio((c2s * (c2s + 2)) as i64, 4);
        for (a, &i) in members.iter().enumerate() {
            for (jj, v) in ops.l2.row(i) {
                if let Some(&b) = pos.get(jj) {
                    stacked.add_to(a, b, v.clone());
                }
            }
            stacked.add_to(a, a, -l2_eig.clone());
            for (jj, v) in ops.s2.row(i) {
                if let Some(&b) = pos.get(jj) {
                    stacked.add_to(m + a, b, v.clone());
                }
            }
            stacked.add_to(m + a, a, -s2_eig.clone());
        }
        let kernel = stacked.kernel_basis();
        if kernel.is_empty() {
            continue;
        }
        let ortho = gram_schmidt(&kernel);
        for v in ortho {
            // Map block indices back to determinants and fix the sign.
            let mut amp: Amplitudes = BTreeMap::new();
            for (bi, c) in &v {
                amp.insert(space.dets[members[*bi]], c.clone());
            }
            if amp.values().next().map(|c| c.sign()) == Some(-1) {
                for c in amp.values_mut() {
                    *c = -c.clone();
                }
            }
            let norm2 = inner(&v, &v);
            let amps = ladder_grid(amp, cl as u32, c2s as u32, &sp.lminus, &sp.sminus);
            blocks.push(IrrepBlock {
                l: cl as u32,
                two_s: c2s as u32,
                norm2,
                amps,
                path: String::new(),
            });
        }
    }
    blocks.sort_by_key(|b| (b.l, b.two_s));
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    assert_eq!(
        total,
        space.len(),
        "subshell decomposition dimension mismatch for l={l} n={n}"
    );
    blocks
}

/// Fill the full magnetic grid by ladder descent, rescaling each step by
/// 1/sqrt(j(j+1) - m(m-1)) so the squared norm stays constant.
fn ladder_grid(
    top: Amplitudes,
    l: u32,
    two_s: u32,
    lminus: &RadMatrix,
    sminus: &RadMatrix,
) -> Vec<Vec<Amplitudes>> {
    let mut ml_column = vec![top];
    for i in 0..(2 * l) {
        let m = l as i64 - i as i64;
        let k = l as i64 * (l as i64 + 1) - m * (m - 1);
        let scale = Rad::sqrt_rational(&BigRational::new(BigInt::one(), BigInt::from(k)));
        let lowered = apply_one_body(lminus, ml_column.last().unwrap());
        ml_column.push(scale_amps(&lowered, &scale));
    }
    let mut grid = Vec::with_capacity(ml_column.len());
    for top_ml in ml_column {
        let mut row = vec![top_ml];
        for j in 0..two_s {
            // two_m runs two_s, two_s-2, ...: s(s+1)-m(m-1) with doubled args:
            // (two_s(two_s+2) - two_m(two_m-2))/4.
            let two_m = two_s as i64 - 2 * j as i64;
            let k4 = two_s as i64 * (two_s as i64 + 2) - two_m * (two_m - 2);
            let scale = Rad::sqrt_rational(&BigRational::new(BigInt::from(4), BigInt::from(k4)));
            let lowered = apply_one_body(sminus, row.last().unwrap());
            row.push(scale_amps(&lowered, &scale));
        }
        grid.push(row);
    }
    grid
}

fn scale_amps(amps: &Amplitudes, s: &Rad) -> Amplitudes {
    amps.iter()
        .filter_map(|(d, c)| {
            let v = c.mul(s);
            if v.is_zero() {
                None
            } else {
                Some((*d, v))
            }
        })
        .collect()
}

/// Exact Clebsch-Gordan coefficient <j1 m1 j2 m2 | j m> with doubled
/// arguments and Condon-Shortley phases. Zero when selection rules fail.
pub fn clebsch_gordan(
    two_j1: i64,
    two_m1: i64,
    two_j2: i64,
    two_m2: i64,
    two_j: i64,
    two_m: i64,
) -> Rad {
    if two_m1 + two_m2 != two_m
        || two_m1.abs() > two_j1
        || two_m2.abs() > two_j2
        || two_m.abs() > two_j
        || two_j > two_j1 + two_j2
        || two_j < (two_j1 - two_j2).abs()
        || (two_j1 + two_m1) % 2 != 0
        || (two_j2 + two_m2) % 2 != 0
        || (two_j + two_m) % 2 != 0
        || (two_j1 + two_j2 + two_j) % 2 != 0
    {
        return Rad::zero();
    }
    let f = |x: i64| -> BigRational {
        debug_assert!(x % 2 == 0 && x >= 0, "factorial of non-integer");
        let mut acc = BigInt::one();
        for i in 2..=(x / 2) {
            acc *= i;
        }
        BigRational::from_integer(acc)
    };
    // Triangle and m-dependent factorial products (all arguments doubled).
    let prefactor = BigRational::from_integer(BigInt::from(two_j + 1))
        * f(two_j1 + two_j2 - two_j)
        * f(two_j1 - two_j2 + two_j)
        * f(-two_j1 + two_j2 + two_j)
        / f(two_j1 + two_j2 + two_j + 2)
        * f(two_j + two_m)
        * f(two_j - two_m)
        * f(two_j1 - two_m1)
        * f(two_j1 + two_m1)
        * f(two_j2 - two_m2)
        * f(two_j2 + two_m2);
    let mut ksum = BigRational::zero();
    let k_min = 0i64
        .max(two_j2 - two_j - two_m1)
        .max(two_j1 + two_m2 - two_j);
    let k_max = (two_j1 + two_j2 - two_j)
        .min(two_j1 - two_m1)
        .min(two_j2 + two_m2);
    let mut two_k = k_min;
    while two_k <= k_max {
        let denom = f(two_k)
            * f(two_j1 + two_j2 - two_j - two_k)
            * f(two_j1 - two_m1 - two_k)
            * f(two_j2 + two_m2 - two_k)
            * f(two_j - two_j2 + two_m1 + two_k)
            * f(two_j - two_j1 - two_m2 + two_k);
        let sign = if (two_k / 2) % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        ksum += sign / denom;
        two_k += 2;
    }
    if ksum.is_zero() {
        return Rad::zero();
    }
    // CG = ksum * sqrt(prefactor) = sign(ksum) * sqrt(ksum^2 * prefactor).
    let value = &ksum * &ksum * prefactor;
    let root = Rad::sqrt_rational(&value);
    if ksum.is_negative() {
        -root
    } else {
        root
    }
}

/// Couple two blocks on disjoint ascending orbital ranges into all total
/// (L, S) blocks, ordered by (L, S) ascending.
pub fn couple_blocks(a: &IrrepBlock, b: &IrrepBlock) -> Vec<IrrepBlock> {
    let mut out = Vec::new();
    let (la, lb) = (a.l as i64, b.l as i64);
    let (sa, sb) = (a.two_s as i64, b.two_s as i64);
    for l in (la - lb).abs()..=(la + lb) {
        for two_s in ((sa - sb).abs()..=(sa + sb)).step_by(2) {
            let mut amps = Vec::new();
            for m_l in (-l..=l).rev() {
                let mut row = Vec::new();
                for two_ms in (-two_s..=two_s).rev().step_by(2) {
                    let mut total: Amplitudes = BTreeMap::new();
                    for m_a in -la..=la {
                        let m_b = m_l - m_a;
                        if m_b.abs() > lb {
                            continue;
                        }
                        let cg_l = clebsch_gordan(2 * la, 2 * m_a, 2 * lb, 2 * m_b, 2 * l, 2 * m_l);
                        if cg_l.is_zero() {
                            continue;
                        }
                        for two_msa in (-sa..=sa).step_by(2) {
                            let two_msb = two_ms - two_msa;
                            if two_msb.abs() > sb {
                                continue;
                            }
                            let cg_s =
                                clebsch_gordan(sa, two_msa, sb, two_msb, two_s, two_ms);
                            if cg_s.is_zero() {
                                continue;
                            }
                            let coeff = cg_l.mul(&cg_s);
                            let prod = embed_product(
                                a.amp(m_a as i32, two_msa as i32),
                                b.amp(m_b as i32, two_msb as i32),
                            );
                            for (det, c) in prod {
                                let v = c.mul(&coeff);
                                if v.is_zero() {
                                    continue;
                                }
                                let entry = total.entry(det).or_insert_with(Rad::zero);
                                *entry += v;
                                if entry.is_zero() {
                                    total.remove(&det);
                                }
                            }
                        }
                    }
                    row.push(total);
                }
                amps.push(row);
            }
            out.push(IrrepBlock {
                l: l as u32,
                two_s: two_s as u32,
                norm2: a.norm2.mul(&b.norm2),
                amps,
                path: if a.path.is_empty() {
                    b.path.clone()
                } else {
                    format!("{} {}", a.path, b.path)
                },
            });
        }
    }
    out
}

/// Shift a block's determinants up by `offset` orbital positions.
fn shift_block(block: &IrrepBlock, offset: usize) -> IrrepBlock {
    let mut out = block.clone();
    for row in &mut out.amps {
        for amp in row {
            *amp = amp
                .iter()
                .map(|(d, c)| (Det(d.0 << offset), c.clone()))
                .collect();
        }
    }
    out
}

/// One symmetry block of one configuration, with provenance.
#[derive(Clone, Debug)]
pub struct ConfigBlock {
    pub config: Configuration,
    pub term: Term,
    pub block: IrrepBlock,
    /// Ordinal among blocks with the same term within this configuration.
    pub ordinal: u32,
}

/// Maximum achievable total m_l for `occ` electrons in an l-subshell.
fn max_l(l: u32, occ: u32) -> i64 {
    (0..occ as i64).map(|i| l as i64 - i / 2).sum()
}

fn max_two_s(l: u32, occ: u32) -> i64 {
    (occ.min(2 * (2 * l + 1) - occ)) as i64
}

/// Decompose a configuration into total-(L, S) blocks over the global
/// orbital order. `target` prunes the coupling fold to blocks that can still
/// reach the given (l, two_s); `None` keeps everything.
pub fn decompose_configuration(
    config: &Configuration,
    orbitals: &[SpinOrbital],
    target: Option<(u32, u32)>,
) -> Vec<ConfigBlock> {
    // Occupied shells in global order with their orbital offsets.
    let mut shells: Vec<(Subshell, u32, usize)> = Vec::new();
    let mut offset = 0usize;
    let mut i = 0usize;
    while i < orbitals.len() {
        let shell = orbitals[i].shell;
        let occ = config.occ(shell);
        if occ > 0 {
            shells.push((shell, occ, offset));
        }
        offset += shell.capacity() as usize;
        i += shell.capacity() as usize;
    }
    // Triangle-bound prefix pruning data: max additional (L, 2S) achievable
    // by shells after position k.
    let mut rest_l = vec![0i64; shells.len() + 1];
    let mut rest_s = vec![0i64; shells.len() + 1];
    for k in (0..shells.len()).rev() {
        rest_l[k] = rest_l[k + 1] + max_l(shells[k].0.l, shells[k].1);
        rest_s[k] = rest_s[k + 1] + max_two_s(shells[k].0.l, shells[k].1);
    }
    let keep = |l: i64, two_s: i64, k: usize| -> bool {
        match target {
            None => true,
            Some((tl, ts)) => {
                let (tl, ts) = (tl as i64, ts as i64);
                (l - rest_l[k]).max(0) <= tl
                    && tl <= l + rest_l[k]
                    && (two_s - rest_s[k]).max(0) <= ts
                    && ts <= two_s + rest_s[k]
            }
        }
    };

    let mut acc = vec![IrrepBlock::vacuum()];
    for (k, &(shell, occ, off)) in shells.iter().enumerate() {
        let shell_blocks = decompose_subshell(shell.l, occ);
        // Count same-term repeats for path labels.
        let mut seen: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut labeled: Vec<IrrepBlock> = Vec::new();
        for sb in shell_blocks.iter() {
            let count = seen.entry((sb.l, sb.two_s)).or_insert(0);
            *count += 1;
            let mut shifted = shift_block(sb, off);
            let term_label = Term {
                l: sb.l,
                two_s: sb.two_s,
                parity: 1,
            };
            let repeats = shell_blocks
                .iter()
                .filter(|x| (x.l, x.two_s) == (sb.l, sb.two_s))
                .count();
            shifted.path = if occ == shell.capacity() {
                String::new() // closed shells add nothing to the label
            } else if repeats > 1 {
                format!("{shell}{occ}({term_label}#{count})")
            } else {
                format!("{shell}{occ}({term_label})")
            };
            labeled.push(shifted);
        }
        let mut next = Vec::new();
        for a in &acc {
            for b in &labeled {
                for c in couple_blocks(a, b) {
                    if keep(c.l as i64, c.two_s as i64, k + 1) {
                        next.push(c);
                    }
                }
            }
        }
        acc = next;
    }

    let parity = configuration_parity(config);
    let mut counts: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    acc.into_iter()
        .filter(|b| match target {
            None => true,
            Some((tl, ts)) => b.l == tl && b.two_s == ts,
        })
        .map(|b| {
            let ord = counts.entry((b.l, b.two_s)).or_insert(0);
            *ord += 1;
            ConfigBlock {
                config: config.clone(),
                term: Term {
                    l: b.l,
                    two_s: b.two_s,
                    parity,
                },
                ordinal: *ord,
                block: b,
            }
        })
        .collect()
}

/// The single grid state at (m_l, m_s); the canonical solver restriction is
/// (m_l = 0, m_s = s).
pub fn restrict_m(block: &IrrepBlock, m_l: i32, two_ms: i32) -> Result<Amplitudes> {
    if m_l.unsigned_abs() > block.l || two_ms.unsigned_abs() > block.two_s {
        return Err(Error::DimensionMismatch(format!(
            "(m_l={m_l}, 2m_s={two_ms}) outside block (L={}, 2S={})",
            block.l, block.two_s
        )));
    }
    if (block.two_s as i32 - two_ms) % 2 != 0 {
        return Err(Error::DimensionMismatch(
            "2m_s parity differs from 2S".into(),
        ));
    }
    Ok(block.amp(m_l, two_ms).clone())
}

/// Apply the antiunitary spatial-conjugation (m-reflection) operator to a
/// real-amplitude state over the given shell list: every occupied orbital
/// (shell, m, σ) maps to (shell, −m, σ) with phase (−1)^m, and the exact
/// fermionic reordering sign is carried.  Amplitudes are real, so only the
/// orbital substitution acts.
///
/// On an (L, S) eigenstate this maps the m_l slice to the −m_l slice of the
/// same degenerate subspace; in particular it is an exact involution on
/// every m_l = 0 slice, splitting it into reflection-even and -odd parts.
pub fn m_reflection(amp: &Amplitudes, shells: &[Subshell]) -> Amplitudes {
    amp.iter()
        .map(|(d, c)| {
            let (det, phase) = reflect_det(*d, shells);
            (det, if phase < 0 { -c.clone() } else { c.clone() })
        })
        .collect()
}

/// f64 counterpart of [`m_reflection`] for solver-level states.
pub fn m_reflection_f64(
    state: &BTreeMap<Det, f64>,
    shells: &[Subshell],
) -> BTreeMap<Det, f64> {
    state
        .iter()
        .map(|(d, c)| {
            let (det, phase) = reflect_det(*d, shells);
            (det, c * f64::from(phase))
        })
        .collect()
}

/// Intrinsic spatial-conjugation sign ε of an irreducible block: every block
/// satisfies K amp(m, m_s) = ε (−1)^m amp(−m, m_s) exactly, so on the
/// m_l = 0 slice K acts as multiplication by ε.  States of opposite ε cannot
/// be coupled by any real rotation-invariant Hamiltonian, and only
/// equal-ε pairs yield real density matrices in the real-harmonic basis.
pub fn reflection_parity(block: &IrrepBlock, shells: &[Subshell]) -> Result<i32> {
    let slice = block.amp(0, block.two_s as i32);
    let image = m_reflection(slice, shells);
    if image.len() != slice.len() {
        return Err(Error::Infeasible(
            "reflection image support differs from the m=0 slice".into(),
        ));
    }
    let (d0, c0) = image.iter().next().expect("blocks are nonempty");
    let t0 = slice
        .get(d0)
        .ok_or_else(|| Error::Infeasible("reflection image leaves the m=0 slice".into()))?;
    let eps = if (c0.clone() - t0.clone()).is_zero() {
        1
    } else if (c0.clone() + t0.clone()).is_zero() {
        -1
    } else {
        return Err(Error::Infeasible(
            "m=0 slice is not a reflection eigenvector".into(),
        ));
    };
    for (d, c) in &image {
        let t = slice
            .get(d)
            .ok_or_else(|| Error::Infeasible("reflection image leaves the m=0 slice".into()))?;
        let want = if eps < 0 { -t.clone() } else { t.clone() };
        if !(c.clone() - want).is_zero() {
            return Err(Error::Infeasible(
                "m=0 slice is not a reflection eigenvector".into(),
            ));
        }
    }
    Ok(eps)
}

/// Image of one determinant under spatial conjugation: occupied (shell, m, σ)
/// → (shell, −m, σ), total phase (−1)^{Σm} times the fermionic reordering sign.
fn reflect_det(d: Det, shells: &[Subshell]) -> (Det, i8) {
    let orbitals = orbital_list(shells);
    let mut offset = BTreeMap::new();
    for (idx, so) in orbitals.iter().enumerate() {
        offset.entry(so.shell).or_insert(idx);
    }
    let mut phase = 1i8;
    let mut mapped = Vec::new();
    for p in d.orbitals() {
        let so = &orbitals[p];
        if so.m() % 2 != 0 {
            phase = -phase;
        }
        let base = offset[&so.shell];
        let spin = (p - base) % 2;
        mapped.push(base + 2 * ((so.shell.l as i32 + so.m()) as usize) + spin);
    }
    // Rebuild a†_{f(o1)}…a†_{f(oN)}|0⟩ by creating from the right.
    let mut det = Det::empty();
    for &q in mapped.iter().rev() {
        let (d2, s) = create(det, q).expect("m-reflection is a bijection on orbitals");
        det = d2;
        phase *= s;
    }
    (det, phase)
}

/// Hund-rule term for a reference occupation: maximum S, then maximum L
/// (stretch coupling of per-shell Hund terms), with the configuration parity.
pub fn hund_select(occupation: &BTreeMap<Subshell, u32>) -> Term {
    let mut total_l = 0u32;
    let mut total_two_s = 0u32;
    let mut parity_sum = 0u32;
    for (&shell, &occ) in occupation {
        if occ == 0 || occ == shell.capacity() {
            parity_sum += shell.l * occ;
            continue;
        }
        let blocks = decompose_subshell(shell.l, occ);
        let best_two_s = blocks.iter().map(|b| b.two_s).max().unwrap();
        let best_l = blocks
            .iter()
            .filter(|b| b.two_s == best_two_s)
            .map(|b| b.l)
            .max()
            .unwrap();
        total_l += best_l;
        total_two_s += best_two_s;
        parity_sum += shell.l * occ;
    }
    Term {
        l: total_l,
        two_s: total_two_s,
        parity: if parity_sum % 2 == 0 { 1 } else { -1 },
    }
}

/// Reconstruct exact radical coefficients from floats: each coefficient's
/// square must be rational (continued fractions, denominators up to 10^6,
/// tolerance 1e-9) and the squares must sum to exactly 1.
pub fn rationalize_state(coeffs: &[f64]) -> Result<Vec<Rad>> {
    let mut out = Vec::with_capacity(coeffs.len());
    let mut total = BigRational::zero();
    for &c in coeffs {
        let sq = rationalize_f64(c * c, 1e-9, 1_000_000).ok_or_else(|| {
            Error::Rationalization(format!("coefficient {c} has no small rational square"))
        })?;
        total += &sq;
        let root = Rad::sqrt_rational(&sq);
        out.push(if c < 0.0 { -root } else { root });
    }
    if !total.is_one() {
        return Err(Error::Rationalization(format!(
            "squares sum to {total}, not 1; needs deterministic re-orthogonalization"
        )));
    }
    Ok(out)
}
