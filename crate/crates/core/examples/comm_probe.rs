use atomci::angular::many_body_operators;
use atomci::exact_linalg::RadMatrix;
use atomci::fock::{orbital_list, Det, DetSpace};
use atomci::lsdecomp::decompose_subshell;
use atomci::model::Subshell;
use atomci::rdm::rdm_pair;
use nalgebra::DMatrix;

fn dense(m: &RadMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows, m.ncols, |r, c| m.get(r, c).to_f64())
}

fn main() {
    for (l_sub, n) in [(1u32, 2u32), (1, 3), (2, 2), (2, 3)] {
        let shell = Subshell::new(l_sub + 1, l_sub);
        let orbitals = orbital_list(&[shell]);
        let n_so = orbitals.len();
        let pair_space = DetSpace::full(n_so, 2).unwrap();
        let dim = pair_space.len();
        let ops = many_body_operators(&pair_space, &orbitals);
        let (l2, s2, lz, sz) = (dense(&ops.l2), dense(&ops.s2), dense(&ops.lz), dense(&ops.sz));
        for (bi, block) in decompose_subshell(l_sub, n).iter().enumerate() {
            let state = block.state_f64(0, block.two_s as i32);
            let rdms = rdm_pair(&state, &state, n_so).unwrap();
            let mut gamma = DMatrix::zeros(dim, dim);
            for (&((p1, p2), (q1, q2)), &v) in &rdms.gamma2 {
                let bra = pair_space.index_of(Det::from_orbitals(&[p1 as usize, p2 as usize])).unwrap();
                let ket = pair_space.index_of(Det::from_orbitals(&[q1 as usize, q2 as usize])).unwrap();
                gamma[(bra, ket)] = v;
            }
            let r = |a: &DMatrix<f64>| (&gamma * a - a * &gamma).amax();
            println!(
                "l={l_sub} n={n} block {bi} (L={},2S={}): [G,L2]={:.2e} [G,S2]={:.2e} [G,Lz]={:.2e} [G,Sz]={:.2e}",
                block.l, block.two_s, r(&l2), r(&s2), r(&lz), r(&sz)
            );
        }
    }
}
