//! Model specification: which subshells participate, cutoff rules, occupation
//! constraints, and the derived reference configuration used for term
//! selection and screening-rule exponent defaults.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub const L_LETTERS: [char; 7] = ['s', 'p', 'd', 'f', 'g', 'h', 'i'];
pub const TERM_LETTERS: [char; 13] = [
    'S', 'P', 'D', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'O', 'Q',
];

/// A subshell (n, l), ordered lexicographically by (n, l).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subshell {
    pub n: u32,
    pub l: u32,
}

impl Subshell {
    pub fn new(n: u32, l: u32) -> Self {
        assert!(l < n, "subshell requires l < n");
        Subshell { n, l }
    }

    /// Number of spin-orbitals 2(2l+1).
    pub fn capacity(&self) -> u32 {
        2 * (2 * self.l + 1)
    }

    /// Number of spatial orbitals 2l+1.
    pub fn spatial_dim(&self) -> u32 {
        2 * self.l + 1
    }

    fn madelung_key(&self) -> (u32, u32) {
        (self.n + self.l, self.n)
    }
}

impl fmt::Display for Subshell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.n, L_LETTERS[self.l as usize])
    }
}

impl fmt::Debug for Subshell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Subshell {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Invalid(format!("bad subshell label `{s}`"));
        if s.len() < 2 {
            return Err(err());
        }
        let (digits, letter) = s.split_at(s.len() - 1);
        let n: u32 = digits.parse().map_err(|_| err())?;
        let lc = letter.chars().next().unwrap().to_ascii_lowercase();
        let l = L_LETTERS.iter().position(|&c| c == lc).ok_or_else(err)? as u32;
        if l >= n {
            return Err(err());
        }
        Ok(Subshell { n, l })
    }
}

/// All subshells (n, l) with (n, l) <= cutoff in lexicographic order.
pub fn shells_through(cutoff: Subshell) -> Vec<Subshell> {
    let mut out = Vec::new();
    for n in 1..=cutoff.n {
        for l in 0..n {
            let s = Subshell { n, l };
            if s <= cutoff {
                out.push(s);
            }
        }
    }
    out
}

/// Spectroscopic term: total orbital momentum l, spin multiplicity via 2s,
/// and spatial parity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub l: u32,
    pub two_s: u32,
    pub parity: i8,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = TERM_LETTERS
            .get(self.l as usize)
            .copied()
            .unwrap_or('?');
        write!(f, "{}{}", self.two_s + 1, letter)?;
        if self.parity < 0 {
            write!(f, "o")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Term {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Invalid(format!("bad term symbol `{s}`"));
        let (body, parity) = match s.strip_suffix('o').or_else(|| s.strip_suffix('*')) {
            Some(b) => (b, -1i8),
            None => (s, 1i8),
        };
        if body.len() < 2 {
            return Err(err());
        }
        let (mult, letter) = body.split_at(body.len() - 1);
        let mult: u32 = mult.parse().map_err(|_| err())?;
        if mult == 0 {
            return Err(err());
        }
        let lc = letter.chars().next().unwrap().to_ascii_uppercase();
        let l = TERM_LETTERS.iter().position(|&c| c == lc).ok_or_else(err)? as u32;
        Ok(Term {
            l,
            two_s: mult - 1,
            parity,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SymmetryChoice {
    /// Maximum S, then maximum L, for the reference configuration.
    Hund,
    Explicit(Term),
}

/// Full model specification for a CI run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_electrons: u32,
    pub nuclear_charge: f64,
    /// Subshells at or below this cutoff are kept fully occupied.
    pub min_shell: Subshell,
    /// Subshells above this cutoff are kept empty.
    pub max_shell: Subshell,
    /// Fixed occupations for individual active subshells (e.g. 4s = 1).
    #[serde(default)]
    pub occupation_constraints: BTreeMap<Subshell, u32>,
    pub symmetry: SymmetryChoice,
}

impl ModelSpec {
    pub fn core_shells(&self) -> Vec<Subshell> {
        shells_through(self.min_shell)
    }

    pub fn all_shells(&self) -> Vec<Subshell> {
        shells_through(self.max_shell)
    }

    pub fn active_shells(&self) -> Vec<Subshell> {
        shells_through(self.max_shell)
            .into_iter()
            .filter(|s| *s > self.min_shell)
            .collect()
    }

    pub fn core_capacity(&self) -> u32 {
        self.core_shells().iter().map(|s| s.capacity()).sum()
    }

    pub fn total_capacity(&self) -> u32 {
        self.all_shells().iter().map(|s| s.capacity()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_shell < self.min_shell {
            return Err(Error::Infeasible(format!(
                "max shell {} below min shell {}",
                self.max_shell, self.min_shell
            )));
        }
        let c = self.core_capacity();
        let t = self.total_capacity();
        if self.n_electrons < c || self.n_electrons > t {
            return Err(Error::Infeasible(format!(
                "N = {} outside [{c}, {t}] for cutoffs {}..{}",
                self.n_electrons, self.min_shell, self.max_shell
            )));
        }
        let active = self.active_shells();
        let mut constrained_sum = 0;
        for (shell, occ) in &self.occupation_constraints {
            if !active.contains(shell) {
                return Err(Error::Infeasible(format!(
                    "occupation constraint on non-active shell {shell}"
                )));
            }
            if *occ > shell.capacity() {
                return Err(Error::Infeasible(format!(
                    "occupation {} exceeds capacity of {shell}",
                    occ
                )));
            }
            constrained_sum += occ;
        }
        let valence = self.n_electrons - c;
        if constrained_sum > valence {
            return Err(Error::Infeasible(format!(
                "constrained occupations sum to {constrained_sum} > {valence} valence electrons"
            )));
        }
        let free_capacity: u32 = active
            .iter()
            .filter(|s| !self.occupation_constraints.contains_key(s))
            .map(|s| s.capacity())
            .sum();
        if valence - constrained_sum > free_capacity {
            return Err(Error::Infeasible(
                "occupation constraints leave too few orbitals for remaining electrons".into(),
            ));
        }
        Ok(())
    }

    /// Reference configuration: core shells full, actives filled in Madelung
    /// order (n+l, then n) with constrained shells pinned to their value.
    pub fn reference_occupation(&self) -> BTreeMap<Subshell, u32> {
        let mut occ: BTreeMap<Subshell, u32> = BTreeMap::new();
        let mut remaining = self.n_electrons;
        for s in self.core_shells() {
            occ.insert(s, s.capacity());
            remaining -= s.capacity();
        }
        let mut actives = self.active_shells();
        actives.sort_by_key(|s| s.madelung_key());
        for s in &actives {
            if let Some(&fixed) = self.occupation_constraints.get(s) {
                occ.insert(*s, fixed);
                remaining -= fixed;
            }
        }
        for s in &actives {
            if self.occupation_constraints.contains_key(s) {
                continue;
            }
            let put = remaining.min(s.capacity());
            occ.insert(*s, put);
            remaining -= put;
        }
        debug_assert_eq!(remaining, 0);
        occ
    }

    /// Slater screening-rule effective charges per subshell, computed against
    /// the reference configuration. Shells unoccupied in the reference get the
    /// charge a probe electron would see.
    pub fn screening_exponents(&self) -> BTreeMap<Subshell, f64> {
        let occ = self.reference_occupation();
        let mut out = BTreeMap::new();
        for shell in self.all_shells() {
            out.insert(shell, slater_effective_charge(self.nuclear_charge, &occ, shell));
        }
        out
    }
}

/// Slater group index: (1s), (2s2p), (3s3p), (3d), (4s4p), (4d), (4f), ...
fn slater_group(s: Subshell) -> (u32, u32) {
    // Key: (n, class) with class 0 for s/p, 1 for d, 2 for f...
    let class = match s.l {
        0 | 1 => 0,
        l => l - 1,
    };
    (s.n, class)
}

fn slater_effective_charge(z: f64, occ: &BTreeMap<Subshell, u32>, target: Subshell) -> f64 {
    let tg = slater_group(target);
    let target_occupied = occ.get(&target).copied().unwrap_or(0) > 0;
    let mut sigma = 0.0;
    for (&shell, &n_el) in occ {
        if n_el == 0 {
            continue;
        }
        let g = slater_group(shell);
        if g == tg {
            // Probe electron belongs to the group when the target is occupied.
            let others = n_el as f64 - if shell == target && target_occupied { 1.0 } else { 0.0 };
            sigma += if tg == (1, 0) { 0.30 } else { 0.35 } * others;
        } else if g < tg {
            // Lower groups shield fully for d/f electrons; for s/p electrons
            // the (n-1)-row groups shield 0.85, deeper rows fully.
            sigma += if target.l <= 1 && shell.n + 1 == target.n {
                0.85 * n_el as f64
            } else {
                1.00 * n_el as f64
            };
        }
    }
    (z - sigma).max(0.05 * z).max(0.5)
}
