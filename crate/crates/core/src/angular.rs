//! Exact angular-momentum and spin operators: single-particle matrices over
//! an ordered spin-orbital list and their second-quantized lifts, with
//! Condon-Shortley phases (raising amplitudes positive).

use crate::exact::Rad;
use crate::exact_linalg::RadMatrix;
use crate::fock::{lift_one_body, Configuration, DetSpace, SpinOrbital, Spin};
use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Clone, Debug)]
pub struct SingleParticleOps {
    pub lz: RadMatrix,
    pub lplus: RadMatrix,
    pub lminus: RadMatrix,
    pub sz: RadMatrix,
    pub splus: RadMatrix,
    pub sminus: RadMatrix,
}

/// sqrt(l(l+1) - m(m+1)): amplitude of L+ from m to m+1.
fn raise_amp(l: i64, m: i64) -> Rad {
    Rad::sqrt_rational(&BigRational::from_integer(BigInt::from(
        l * (l + 1) - m * (m + 1),
    )))
}

pub fn single_particle_operators(orbitals: &[SpinOrbital]) -> SingleParticleOps {
    let k = orbitals.len();
    let mut lz = RadMatrix::zeros(k, k);
    let mut lplus = RadMatrix::zeros(k, k);
    let mut sz = RadMatrix::zeros(k, k);
    let mut splus = RadMatrix::zeros(k, k);
    let find = |shell, m: i32, spin| {
        orbitals
            .iter()
            .position(|o| o.shell == shell && o.m() == m && o.spin == spin)
    };
    for (j, o) in orbitals.iter().enumerate() {
        let l = o.shell.l as i64;
        let m = o.m() as i64;
        lz.add_to(j, j, Rad::from_integer(m));
        sz.add_to(
            j,
            j,
            if o.spin == Spin::Up {
                Rad::from_ratio(1, 2)
            } else {
                Rad::from_ratio(-1, 2)
            },
        );
        if m < l {
            let i = find(o.shell, o.m() + 1, o.spin).expect("orbital list misses m+1 partner");
            lplus.add_to(i, j, raise_amp(l, m));
        }
        if o.spin == Spin::Down {
            let i = find(o.shell, o.m(), Spin::Up).expect("orbital list misses spin partner");
            splus.add_to(i, j, Rad::one());
        }
    }
    let lminus = transpose(&lplus);
    let sminus = transpose(&splus);
    SingleParticleOps {
        lz,
        lplus,
        lminus,
        sz,
        splus,
        sminus,
    }
}

fn transpose(m: &RadMatrix) -> RadMatrix {
    let mut out = RadMatrix::zeros(m.ncols, m.nrows);
    for r in 0..m.nrows {
        for (c, v) in m.row(r) {
            out.add_to(*c, r, v.clone());
        }
    }
    out
}

/// Second-quantized operators on a determinant space, with L^2 and S^2
/// assembled exactly as Lz^2 + Lz + L- L+ (and the spin analog).
#[derive(Clone, Debug)]
pub struct ManyBodyOps {
    pub lz: RadMatrix,
    pub lplus: RadMatrix,
    pub lminus: RadMatrix,
    pub sz: RadMatrix,
    pub splus: RadMatrix,
    pub sminus: RadMatrix,
    pub l2: RadMatrix,
    pub s2: RadMatrix,
}

pub fn many_body_operators(space: &DetSpace, orbitals: &[SpinOrbital]) -> ManyBodyOps {
    let sp = single_particle_operators(orbitals);
    let lz = lift_one_body(&sp.lz, space);
    let lplus = lift_one_body(&sp.lplus, space);
    let lminus = lift_one_body(&sp.lminus, space);
    let sz = lift_one_body(&sp.sz, space);
    let splus = lift_one_body(&sp.splus, space);
    let sminus = lift_one_body(&sp.sminus, space);
    let l2 = lz.matmul(&lz).add(&lz).add(&lminus.matmul(&lplus));
    let s2 = sz.matmul(&sz).add(&sz).add(&sminus.matmul(&splus));
    ManyBodyOps {
        lz,
        lplus,
        lminus,
        sz,
        splus,
        sminus,
        l2,
        s2,
    }
}

/// Spatial parity (-1)^(sum over subshells of occupation * l).
pub fn configuration_parity(config: &Configuration) -> i8 {
    let total: u32 = config
        .occupations
        .iter()
        .map(|(shell, occ)| shell.l * occ)
        .sum();
    if total % 2 == 0 {
        1
    } else {
        -1
    }
}
