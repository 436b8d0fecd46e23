//! Fock-space plumbing: Slater determinants as orbital bitsets, fermionic
//! excitation signs, lifts of one-body operators, configuration enumeration
//! and the tensor-product embedding of per-subshell states.
//!
//! Determinants are orbital-index-ascending products of creation operators;
//! the determinant order everywhere is lexicographic on the sorted occupied
//! index tuple, which restricts consistently to configurations and matches
//! the row-major product order of per-subshell blocks.

use crate::error::{Error, Result};
use crate::exact::Rad;
use crate::exact_linalg::RadMatrix;
use crate::model::{ModelSpec, Subshell};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub const MAX_ORBITALS: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn both() -> [Spin; 2] {
        [Spin::Up, Spin::Down]
    }
}

/// A spin-orbital |n l m sigma>. The global order is: subshells by (n, l);
/// within a subshell m descending; up before down.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinOrbital {
    pub shell: Subshell,
    pub neg_m: i32, // stored negated so derived Ord gives m descending
    pub spin: Spin,
}

impl SpinOrbital {
    pub fn new(shell: Subshell, m: i32, spin: Spin) -> Self {
        SpinOrbital {
            shell,
            neg_m: -m,
            spin,
        }
    }

    pub fn m(&self) -> i32 {
        -self.neg_m
    }
}

impl fmt::Debug for SpinOrbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bar = if self.spin == Spin::Down { "~" } else { "" };
        write!(f, "{}[{}]{}", self.shell, self.m(), bar)
    }
}

/// Ordered list of spin-orbitals spanning the given subshells.
pub fn orbital_list(shells: &[Subshell]) -> Vec<SpinOrbital> {
    let mut out = Vec::new();
    for &shell in shells {
        for m in (-(shell.l as i32)..=shell.l as i32).rev() {
            for spin in Spin::both() {
                out.push(SpinOrbital::new(shell, m, spin));
            }
        }
    }
    out
}

/// A Slater determinant over at most 64 globally ordered spin-orbitals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Det(pub u64);

impl Det {
    pub fn empty() -> Det {
        Det(0)
    }

    pub fn from_orbitals(orbitals: &[usize]) -> Det {
        let mut bits = 0u64;
        for &i in orbitals {
            assert!(i < MAX_ORBITALS);
            bits |= 1 << i;
        }
        Det(bits)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn count(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn orbitals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_ORBITALS).filter(move |&i| self.contains(i))
    }

    fn parity_below(&self, i: usize) -> i8 {
        let mask = (1u64 << i) - 1;
        if (self.0 & mask).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl PartialOrd for Det {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Det {
    /// Lexicographic on the ascending occupied-index tuple: at the lowest
    /// differing orbital, the determinant occupying it comes first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let x = self.0 ^ other.0;
        if x == 0 {
            return std::cmp::Ordering::Equal;
        }
        let i = x.trailing_zeros();
        if self.0 >> i & 1 == 1 {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    }
}

impl fmt::Debug for Det {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, i) in self.orbitals().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ">")
    }
}

/// a_j |det>: sign (-1)^{occupied below j}, None if j empty.
pub fn annihilate(det: Det, j: usize) -> Option<(Det, i8)> {
    if !det.contains(j) {
        return None;
    }
    Some((Det(det.0 & !(1 << j)), det.parity_below(j)))
}

/// a_i^+ |det>: sign (-1)^{occupied below i}, None if i filled.
pub fn create(det: Det, i: usize) -> Option<(Det, i8)> {
    if det.contains(i) {
        return None;
    }
    Some((Det(det.0 | 1 << i), det.parity_below(i)))
}

/// a_i^+ a_j |det> with the fermionic sign, or None when it annihilates.
pub fn apply_excitation(det: Det, i: usize, j: usize) -> Option<(Det, i8)> {
    let (mid, s1) = annihilate(det, j)?;
    let (out, s2) = create(mid, i)?;
    Some((out, s1 * s2))
}

/// All n-subsets of 0..k as determinants in lexicographic tuple order.
pub fn enumerate_dets(k: usize, n: usize) -> Result<Vec<Det>> {
    if k > MAX_ORBITALS {
        return Err(Error::CapacityExceeded(k));
    }
    if n > k {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (0..n).collect();
    loop {
        out.push(Det::from_orbitals(&comb));
        if n == 0 {
            break;
        }
        // Advance to next combination in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if comb[i] + 1 <= k - (n - i) {
                comb[i] += 1;
                for j in i + 1..n {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
    Ok(out)
}

/// Indexed determinant space with O(1) lookup.
#[derive(Clone, Debug)]
pub struct DetSpace {
    pub dets: Vec<Det>,
    index: HashMap<u64, usize>,
}

impl DetSpace {
    pub fn new(dets: Vec<Det>) -> Self {
        let index = dets.iter().enumerate().map(|(i, d)| (d.0, i)).collect();
        DetSpace { dets, index }
    }

    /// Full n-electron space over k orbitals in lexicographic order.
    pub fn full(k: usize, n: usize) -> Result<Self> {
        Ok(DetSpace::new(enumerate_dets(k, n)?))
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn index_of(&self, det: Det) -> Option<usize> {
        self.index.get(&det.0).copied()
    }
}

/// Column-major view of a sparse single-particle matrix: entries b[i][j]
/// grouped by j.
fn by_column(b: &RadMatrix) -> Vec<Vec<(usize, Rad)>> {
    let mut cols = vec![Vec::new(); b.ncols];
    for i in 0..b.nrows {
        for (j, v) in b.row(i) {
            cols[*j].push((i, v.clone()));
        }
    }
    cols
}

/// Lift a one-body operator b (single-particle matrix over k orbitals) to
/// the many-body space: B = sum_ij b_ij a_i^+ a_j.
pub fn lift_one_body(b: &RadMatrix, space: &DetSpace) -> RadMatrix {
    let cols = by_column(b);
    let mut out = RadMatrix::zeros(space.len(), space.len());
    for (col, &det) in space.dets.iter().enumerate() {
        for j in det.orbitals() {
            for (i, bij) in &cols[j] {
                if let Some((new_det, sign)) = apply_excitation(det, *i, j) {
                    if let Some(row) = space.index_of(new_det) {
                        let val = if sign < 0 {
                            -bij.clone()
                        } else {
                            bij.clone()
                        };
                        out.add_to(row, col, val);
                    }
                }
            }
        }
    }
    out
}

/// Apply a one-body operator to a sparse state directly.
pub fn apply_one_body(b: &RadMatrix, state: &BTreeMap<Det, Rad>) -> BTreeMap<Det, Rad> {
    let cols = by_column(b);
    let mut out: BTreeMap<Det, Rad> = BTreeMap::new();
    for (&det, coeff) in state {
        for j in det.orbitals() {
            for (i, bij) in &cols[j] {
                if let Some((new_det, sign)) = apply_excitation(det, *i, j) {
                    let mut v = coeff.mul(bij);
                    if sign < 0 {
                        v = -v;
                    }
                    if v.is_zero() {
                        continue;
                    }
                    let entry = out.entry(new_det).or_insert_with(Rad::zero);
                    *entry += v;
                    if entry.is_zero() {
                        out.remove(&new_det);
                    }
                }
            }
        }
    }
    out
}

/// Per-subshell electron counts; core shells carry full occupation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub occupations: BTreeMap<Subshell, u32>,
}

impl Configuration {
    pub fn occ(&self, shell: Subshell) -> u32 {
        self.occupations.get(&shell).copied().unwrap_or(0)
    }

    pub fn n_electrons(&self) -> u32 {
        self.occupations.values().sum()
    }

    /// dim C^d = prod_j C(2(2l_j+1), d_j).
    pub fn dim(&self) -> u64 {
        self.occupations
            .iter()
            .map(|(s, &d)| binomial(s.capacity() as u64, d as u64))
            .product()
    }

    /// Label like "3d5 4s1" over non-core, occupied shells.
    pub fn label(&self, core: &[Subshell]) -> String {
        let parts: Vec<String> = self
            .occupations
            .iter()
            .filter(|(s, &d)| d > 0 && !core.contains(s))
            .map(|(s, d)| format!("{s}{d}"))
            .collect();
        if parts.is_empty() {
            "core".into()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .occupations
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(s, d)| format!("{s}{d}"))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// All configurations compatible with the model: core shells full, valence
/// electrons distributed over active shells, occupation constraints pinned.
/// Ordered by descending occupation vector over active shells in (n, l)
/// order, so e.g. [Ar]3d2 precedes [Ar]3d1 4s1 precedes [Ar]4s2.
pub fn enumerate_configurations(spec: &ModelSpec) -> Result<Vec<Configuration>> {
    spec.validate()?;
    let core = spec.core_shells();
    let active = spec.active_shells();
    let valence = spec.n_electrons - spec.core_capacity();
    let mut out = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    distribute(&active, spec, valence, &mut current, &mut out);
    let base: BTreeMap<Subshell, u32> = core.iter().map(|&s| (s, s.capacity())).collect();
    Ok(out
        .into_iter()
        .map(|occs| {
            let mut occupations = base.clone();
            for (shell, d) in active.iter().zip(occs) {
                occupations.insert(*shell, d);
            }
            Configuration { occupations }
        })
        .collect())
}

fn distribute(
    active: &[Subshell],
    spec: &ModelSpec,
    remaining: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    let k = current.len();
    if k == active.len() {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    let shell = active[k];
    let choices: Vec<u32> = match spec.occupation_constraints.get(&shell) {
        Some(&fixed) => vec![fixed],
        None => (0..=shell.capacity().min(remaining)).rev().collect(),
    };
    for d in choices {
        if d > remaining {
            continue;
        }
        current.push(d);
        distribute(active, spec, remaining - d, current, out);
        current.pop();
    }
}

/// Determinants of a configuration within the global orbital order, in the
/// global lexicographic order (equivalently: row-major product of the
/// per-subshell lexicographic blocks).
pub fn configuration_dets(
    config: &Configuration,
    orbitals: &[SpinOrbital],
) -> Result<Vec<Det>> {
    if orbitals.len() > MAX_ORBITALS {
        return Err(Error::CapacityExceeded(orbitals.len()));
    }
    // Offsets of each subshell's block in the global order.
    let mut blocks: Vec<(usize, usize, u32)> = Vec::new(); // (offset, size, occ)
    let mut i = 0;
    while i < orbitals.len() {
        let shell = orbitals[i].shell;
        let size = shell.capacity() as usize;
        blocks.push((i, size, config.occ(shell)));
        i += size;
    }
    let mut dets = vec![Det::empty()];
    for (offset, size, occ) in blocks {
        let local = enumerate_dets(size, occ as usize)?;
        let mut next = Vec::with_capacity(dets.len() * local.len());
        for d in &dets {
            for l in &local {
                next.push(Det(d.0 | (l.0 << offset)));
            }
        }
        dets = next;
    }
    Ok(dets)
}

/// Tensor-product embedding of two sparse states on disjoint ascending
/// orbital blocks; an isometry with no fermionic sign because every orbital
/// of `high` lies above every orbital of `low`.
pub fn embed_product(
    low: &BTreeMap<Det, Rad>,
    high: &BTreeMap<Det, Rad>,
) -> BTreeMap<Det, Rad> {
    let mut out = BTreeMap::new();
    for (a, ca) in low {
        for (b, cb) in high {
            debug_assert_eq!(a.0 & b.0, 0, "embed_product blocks overlap");
            debug_assert!(
                a.0 == 0 || b.0 == 0 || (63 - a.0.leading_zeros()) < b.0.trailing_zeros(),
                "embed_product blocks out of order"
            );
            let v = ca.mul(cb);
            if !v.is_zero() {
                out.insert(Det(a.0 | b.0), v);
            }
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    for i in 0..k {
        num = num * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    num.try_into().expect("binomial overflow")
}

pub fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    for i in 0..k {
        num = num * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    num
}

/// Exact cost ratio of full-space diagonalization vs block-per-configuration
/// diagonalization with exponent p:
/// C(sum g, N)^p / sum over occupation partitions of prod_j C(g_j, n_j)^p.
pub fn exact_partition_cost(subshell_dims: &[u32], n_electrons: u32, p: u32) -> BigRational {
    let total: u32 = subshell_dims.iter().sum();
    let numerator = big_binomial(total as u64, n_electrons as u64).pow(p);
    let mut denominator = BigInt::zero();
    let mut stack: Vec<(usize, u32, BigInt)> = vec![(0, n_electrons, BigInt::one())];
    while let Some((j, remaining, partial)) = stack.pop() {
        if j == subshell_dims.len() {
            if remaining == 0 {
                denominator += partial;
            }
            continue;
        }
        for nj in 0..=subshell_dims[j].min(remaining) {
            let term = big_binomial(subshell_dims[j] as u64, nj as u64).pow(p);
            stack.push((j + 1, remaining - nj, &partial * term));
        }
    }
    BigRational::new(numerator, denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SymmetryChoice;

    #[test]
    fn det_order_is_tuple_lex() {
        let d = |v: &[usize]| Det::from_orbitals(v);
        assert!(d(&[0, 1]) < d(&[0, 2]));
        assert!(d(&[0, 5]) < d(&[1, 4]));
        assert!(d(&[1, 4]) < d(&[2, 3]));
        let mut all = enumerate_dets(4, 2).unwrap();
        let sorted = {
            let mut s = all.clone();
            s.sort();
            s
        };
        assert_eq!(all, sorted);
        all.dedup();
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn excitation_signs() {
        // a_2^+ a_3 |{1,3}> = +|{1,2}> (1-based orbitals from the worked example;
        // 0-based here).
        let det = Det::from_orbitals(&[0, 2]);
        let (out, sign) = apply_excitation(det, 1, 2).unwrap();
        assert_eq!(out, Det::from_orbitals(&[0, 1]));
        assert_eq!(sign, 1);
        // a_2^+ a_1 |{1,3}> = +|{2,3}>: operator algebra, not the count in the
        // untouched determinant.
        let (out, sign) = apply_excitation(det, 1, 0).unwrap();
        assert_eq!(out, Det::from_orbitals(&[1, 2]));
        assert_eq!(sign, 1);
        // i = j occupied: diagonal with +1.
        let (out, sign) = apply_excitation(det, 2, 2).unwrap();
        assert_eq!((out, sign), (det, 1));
        // j empty or i filled: None.
        assert!(apply_excitation(det, 1, 1).is_none());
        assert!(apply_excitation(det, 0, 2).is_none());
    }

    #[test]
    fn excitation_then_reverse_is_identity() {
        for bits in 0..(1u64 << 6) {
            let det = Det(bits);
            for i in 0..6 {
                for j in 0..6 {
                    if let Some((mid, s1)) = apply_excitation(det, i, j) {
                        let (back, s2) = apply_excitation(mid, j, i).unwrap();
                        assert_eq!(back, det);
                        assert_eq!(s1 * s2, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn space_sizes() {
        assert_eq!(DetSpace::full(28, 6).unwrap().len(), 376740);
        assert_eq!(DetSpace::full(6, 3).unwrap().len(), 20);
    }

    #[test]
    fn configuration_enumeration_minimal_ca() {
        let spec = ModelSpec {
            n_electrons: 20,
            nuclear_charge: 20.0,
            min_shell: "3p".parse().unwrap(),
            max_shell: "4s".parse().unwrap(),
            occupation_constraints: BTreeMap::new(),
            symmetry: SymmetryChoice::Hund,
        };
        let configs = enumerate_configurations(&spec).unwrap();
        let d3: Subshell = "3d".parse().unwrap();
        let s4: Subshell = "4s".parse().unwrap();
        let pattern: Vec<(u32, u32)> = configs.iter().map(|c| (c.occ(d3), c.occ(s4))).collect();
        assert_eq!(pattern, vec![(2, 0), (1, 1), (0, 2)]);
        assert_eq!(configs[0].dim(), 45);
        assert_eq!(configs[1].dim(), 20);
        assert_eq!(configs[2].dim(), 1);
    }

    #[test]
    fn configuration_dets_match_product_order() {
        // Two subshells with one electron each over 2 orbitals: dets in
        // row-major product order {0,2},{0,3},{1,2},{1,3}.
        let config = Configuration {
            occupations: [
                (Subshell::new(1, 0), 1),
                (Subshell::new(2, 0), 1),
            ]
            .into_iter()
            .collect(),
        };
        let orbitals = orbital_list(&[Subshell::new(1, 0), Subshell::new(2, 0)]);
        let dets = configuration_dets(&config, &orbitals).unwrap();
        let expect: Vec<Det> = [[0usize, 2], [0, 3], [1, 2], [1, 3]]
            .iter()
            .map(|v| Det::from_orbitals(v))
            .collect();
        assert_eq!(dets, expect);
        // Also: equals the lex-sorted filter of the full space.
        let mut filtered: Vec<Det> = DetSpace::full(4, 2)
            .unwrap()
            .dets
            .into_iter()
            .filter(|d| d.contains(0) != d.contains(1) && d.contains(2) != d.contains(3))
            .collect();
        filtered.sort();
        assert_eq!(dets, filtered);
    }

    #[test]
    fn partition_cost_exact_value() {
        let cost = exact_partition_cost(&[6, 10, 2], 12, 3);
        let expect = BigRational::new(BigInt::from(50774322144u64), BigInt::from(938076521u64));
        assert_eq!(cost, expect);
    }

    #[test]
    fn embed_is_isometry() {
        let mut a = BTreeMap::new();
        a.insert(Det::from_orbitals(&[0]), Rad::from_ratio(1, 2));
        a.insert(Det::from_orbitals(&[1]), Rad::from_ratio(-1, 2));
        let mut b = BTreeMap::new();
        b.insert(Det::from_orbitals(&[2, 3]), Rad::one());
        let prod = embed_product(&a, &b);
        assert_eq!(prod.len(), 2);
        assert_eq!(
            prod[&Det::from_orbitals(&[1, 2, 3])],
            Rad::from_ratio(-1, 2)
        );
    }
}
