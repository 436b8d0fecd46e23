//! Independent check of a two-configuration Hamiltonian block: both basis
//! states are single determinants, so the matrix elements follow from the
//! textbook one- and two-electron excitation rules applied directly to the
//! integral tables.

use atomci::coulomb::{build_tensor, CoulombEngine};
use atomci::model::{ModelSpec, Subshell, SymmetryChoice};
use atomci::solver::{one_body_matrix, EnergyModel};
use atomci::sto::STOBasis;
use std::collections::BTreeMap;

fn det_energy(occ: &[(usize, u8)], h: &nalgebra::DMatrix<f64>, t: &atomci::coulomb::CoulombTensor) -> f64 {
    let mut e = 0.0;
    for &(p, _) in occ {
        e += h[(p, p)];
    }
    for (a, &(p, sp)) in occ.iter().enumerate() {
        for &(q, sq) in occ.iter().take(a) {
            e += t.get(p, p, q, q);
            if sp == sq {
                e -= t.get(p, q, p, q);
            }
        }
    }
    e
}

fn single_excitation(
    common: &[(usize, u8)],
    a: usize,
    b: usize,
    h: &nalgebra::DMatrix<f64>,
    t: &atomci::coulomb::CoulombTensor,
) -> f64 {
    // Both determinants ordered identically aside from a -> b (same spin up).
    let mut v = h[(a, b)];
    for &(q, sq) in common {
        v += t.get(a, b, q, q);
        if sq == 0 {
            v -= t.get(a, q, b, q);
        }
    }
    v
}

fn main() {
    let mut constraints = BTreeMap::new();
    constraints.insert(Subshell::new(4, 0), 2);
    let spec = ModelSpec {
        n_electrons: 21,
        nuclear_charge: 21.0,
        min_shell: Subshell::new(3, 1),
        max_shell: Subshell::new(4, 2),
        occupation_constraints: constraints,
        symmetry: SymmetryChoice::Hund,
    };
    let exps = [20.68, 18.42, 17.15, 13.06, 11.34, 10.07, 5.31, 1.0, 8.46];

    let model = EnergyModel::new(&spec).unwrap();
    let hm = model.hamiltonian(&exps).unwrap();
    println!("model H = [[{:.9}, {:.9}], [{:.9}, {:.9}]]", hm[(0, 0)], hm[(0, 1)], hm[(1, 0)], hm[(1, 1)]);
    for s in &model.subspace.states {
        println!("state: {}  dets {:?}", s.label, s.vector.len());
    }

    // Direct evaluation. Spatial orbital offsets for shells 1s..4d:
    // 1s=0, 2s=1, 2p=2..4, 3s=5, 3p=6..8, 3d=9..13, 4s=14, 4p=15..17, 4d=18..22.
    let shells: Vec<Subshell> = model.subspace.shells.clone();
    let basis = STOBasis::new(&shells, &exps).unwrap();
    let engine = CoulombEngine::new();
    let tensor = build_tensor(&basis, &engine);
    let h1 = one_body_matrix(&basis, 21.0);

    let mut core: Vec<(usize, u8)> = Vec::new();
    for p in [0usize, 1, 2, 3, 4, 5, 6, 7, 8, 14] {
        core.push((p, 0));
        core.push((p, 1));
    }
    let d3 = {
        let mut o = core.clone();
        o.push((9, 0));
        o
    };
    let d4 = {
        let mut o = core.clone();
        o.push((18, 0));
        o
    };
    let h11 = det_energy(&d3, &h1, &tensor);
    let h22 = det_energy(&d4, &h1, &tensor);
    let h12 = single_excitation(&core, 9, 18, &h1, &tensor);
    println!("rules H = [[{h11:.9}, {h12:.9}], [., {h22:.9}]]");
    println!(
        "diffs: {:.2e} {:.2e} {:.2e}",
        (hm[(0, 0)] - h11).abs(),
        (hm[(1, 1)] - h22).abs(),
        (hm[(0, 1)].abs() - h12.abs()).abs()
    );
    let disc = ((h11 - h22) * 0.5).hypot(h12);
    let lo = 0.5 * (h11 + h22) - disc;
    let e_model = model.energy(&exps).unwrap();
    println!("lowest eigenvalue: rules {lo:.9}  model {e_model:.9}  diff {:.2e}", (lo - e_model).abs());
}
