//! Closed-form integral machinery vs. an independent multipole/quadrature
//! oracle, on a realistic 23-spatial-orbital transition-metal basis.

mod common;

use atomci::coulomb::{coulomb_integral, spatial_orbitals, CoulombEngine};
use atomci::model::{shells_through, Subshell};
use atomci::sto::STOBasis;
use common::{OracleBasis, SplitMix};

fn tm_basis() -> STOBasis {
    let shells = shells_through(Subshell::new(4, 2));
    let exponents = [23.7, 21.4, 20.2, 15.6, 13.9, 12.4, 5.7, 9.5, 10.0];
    STOBasis::new(&shells, &exponents).unwrap()
}

#[test]
fn smallest_repulsion_integral_closed_form() {
    // A single 1s orbital with exponent zeta: (1s1s|1s1s) = 5 zeta / 8.
    let engine = CoulombEngine::new();
    for zeta in [1.0, 2.0, 16.25] {
        let basis = STOBasis::new(&[Subshell::new(1, 0)], &[zeta]).unwrap();
        let v = coulomb_integral(&basis, &engine, 0, 0, 0, 0);
        assert!(
            (v - 0.625 * zeta).abs() < 1e-10 * zeta,
            "zeta={zeta}: {v} vs {}",
            0.625 * zeta
        );
        // the oracle agrees with the same closed form
        let oracle = OracleBasis::new(&basis);
        let w = oracle.coulomb(0, 0, 0, 0);
        assert!((w - 0.625 * zeta).abs() < 1e-9 * zeta, "oracle {w}");
    }
}

#[test]
fn oracle_confirms_orthonormality() {
    let basis = tm_basis();
    let oracle = OracleBasis::new(&basis);
    let n = oracle.len();
    assert_eq!(n, 23);
    for i in 0..n {
        for j in 0..n {
            let s = oracle.overlap(i, j);
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((s - expected).abs() < 1e-9, "<{i}|{j}> = {s}");
        }
    }
}

#[test]
fn one_body_integrals_match_oracle() {
    let basis = tm_basis();
    let oracle = OracleBasis::new(&basis);
    let orbitals = spatial_orbitals(&basis);
    let z = 24.0;
    let mut checked = 0;
    for (a, &(sa, ha)) in orbitals.iter().enumerate() {
        for (b, &(sb, hb)) in orbitals.iter().enumerate() {
            if basis.shells[sa].l != basis.shells[sb].l || ha != hb {
                continue;
            }
            let system = basis.one_body_integral(sa, sb, z);
            let reference = oracle.one_body(a, b, z);
            let scale = reference.abs().max(1.0);
            assert!(
                (system - reference).abs() < 1e-8 * scale,
                "h[{a},{b}] = {system} vs oracle {reference}"
            );
            checked += 1;
        }
    }
    assert!(checked > 23);
}

#[test]
fn random_repulsion_integrals_match_oracle() {
    let basis = tm_basis();
    let oracle = OracleBasis::new(&basis);
    let engine = CoulombEngine::new();
    let n = oracle.len();
    let mut rng = SplitMix(0x5eed_c0de);
    let mut nonzero = 0;
    let mut trivial = 0;
    let mut worst: (f64, [usize; 4]) = (0.0, [0; 4]);
    while nonzero < 120 {
        let q = [rng.range(n), rng.range(n), rng.range(n), rng.range(n)];
        let reference = oracle.coulomb(q[0], q[1], q[2], q[3]);
        let system = coulomb_integral(&basis, &engine, q[0], q[1], q[2], q[3]);
        if reference.abs() < 1e-10 {
            // zero by angular selection; the system must agree it vanishes
            assert!(system.abs() < 1e-8, "{q:?}: {system} vs ~0");
            trivial += 1;
            assert!(trivial < 4000, "selection rules rejected too many draws");
            continue;
        }
        let rel = (system - reference).abs() / reference.abs();
        if rel > worst.0 {
            worst = (rel, q);
        }
        assert!(
            rel < 1e-8,
            "{q:?}: {system} vs oracle {reference} (rel {rel:.2e})"
        );
        nonzero += 1;
    }
    println!("120 nonzero quadruples matched; worst relative deviation {:.2e} at {:?}", worst.0, worst.1);
}

#[test]
fn repulsion_integrals_scale_linearly_with_dilation() {
    // Scaling every exponent by t scales every (ij|kl) by exactly t.
    let shells = shells_through(Subshell::new(4, 2));
    let base = [23.7, 21.4, 20.2, 15.6, 13.9, 12.4, 5.7, 9.5, 10.0];
    let engine = CoulombEngine::new();
    let b1 = STOBasis::new(&shells, &base).unwrap();
    let quads = [
        [0usize, 0, 0, 0],
        [5, 6, 5, 6],
        [10, 11, 12, 13],
        [15, 16, 17, 18],
        [3, 9, 14, 22],
        [20, 21, 20, 21],
    ];
    for t in [0.5, 2.0] {
        let scaled: Vec<f64> = base.iter().map(|z| z * t).collect();
        let b2 = STOBasis::new(&shells, &scaled).unwrap();
        for q in quads {
            let v1 = coulomb_integral(&b1, &engine, q[0], q[1], q[2], q[3]);
            let v2 = coulomb_integral(&b2, &engine, q[0], q[1], q[2], q[3]);
            assert!(
                (v2 - t * v1).abs() <= 1e-10 * (1.0 + (t * v1).abs()),
                "t={t} {q:?}: {v2} vs {}",
                t * v1
            );
        }
    }
}
