//! Exact combinatorial dimension counts for the chromium valence space and
//! the exact cost ratio of configuration-blocked diagonalization.

use atomci::angular::configuration_parity;
use atomci::fock::{
    big_binomial, binomial, enumerate_configurations, exact_partition_cost, orbital_list,
};
use atomci::lsdecomp::decompose_configuration;
use atomci::model::{ModelSpec, Subshell, SymmetryChoice};
use atomci::solver::build_subspace;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// Chromium with a 3p core boundary, valence shells through 4d, and the 4s
/// occupation pinned to one electron.
fn chromium_pinned() -> ModelSpec {
    let mut constraints = BTreeMap::new();
    constraints.insert(Subshell::new(4, 0), 1);
    ModelSpec {
        n_electrons: 24,
        nuclear_charge: 24.0,
        min_shell: Subshell::new(3, 1),
        max_shell: Subshell::new(4, 2),
        occupation_constraints: constraints,
        symmetry: SymmetryChoice::Hund,
    }
}

#[test]
fn full_valence_space_dimension() {
    assert_eq!(binomial(28, 6), 376_740);
    assert_eq!(big_binomial(28, 6), BigInt::from(376_740));
}

#[test]
fn pinned_active_space_dimension() {
    assert_eq!(binomial(26, 5), 65_780);

    // Independent recount: sum over enumerated configurations of the number
    // of determinants the five unpinned electrons span in 3d, 4p, 4d.
    let spec = chromium_pinned();
    let active = [Subshell::new(3, 2), Subshell::new(4, 1), Subshell::new(4, 2)];
    let mut total = 0u64;
    for config in enumerate_configurations(&spec).unwrap() {
        total += active
            .iter()
            .map(|s| binomial(s.capacity() as u64, config.occ(*s) as u64))
            .product::<u64>();
    }
    assert_eq!(total, 65_780);
}

#[test]
fn septet_s_subspace_dimensions() {
    let spec = chromium_pinned();

    // Count every even-parity (L = 0, 2S = 6) block across all
    // configurations: 14 blocks spanning 98 states.
    let mut blocks = 0usize;
    let mut span = 0usize;
    for config in enumerate_configurations(&spec).unwrap() {
        if configuration_parity(&config) != 1 {
            continue;
        }
        let shells: Vec<Subshell> = config
            .occupations
            .iter()
            .filter(|(_, &o)| o > 0)
            .map(|(s, _)| *s)
            .collect();
        let orbitals = orbital_list(&shells);
        for b in decompose_configuration(&config, &orbitals, Some((0, 6))) {
            blocks += 1;
            span += b.block.dim();
        }
    }
    assert_eq!(span, 98, "total septet-S span");
    assert_eq!(blocks, 14, "septet-S blocks at fixed (L_z, S_z)");

    // The working basis keeps one state per block: maximal S_z, L_z = 0.
    let subspace = build_subspace(&spec).unwrap();
    assert_eq!(subspace.term.l, 0);
    assert_eq!(subspace.term.two_s, 6);
    assert_eq!(subspace.dimension(), 14);
}

#[test]
fn partition_cost_ratio_is_exact() {
    let cost = exact_partition_cost(&[6, 10, 2], 12, 3);
    let expect = BigRational::new(
        BigInt::from(50_774_322_144u64),
        BigInt::from(938_076_521u64),
    );
    assert_eq!(cost, expect);
}
