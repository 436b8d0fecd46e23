//! Variational solver: build the symmetry-projected basis of a model,
//! assemble the Hamiltonian from reduced density matrices and closed-form
//! integrals, diagonalize, and optimize orbital exponents.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::angular::configuration_parity;
use crate::coulomb::{
    build_tensor_restricted, spatial_orbitals, CoulombEngine, CoulombTensor,
};
use crate::error::{Error, Result};
use crate::fock::{enumerate_configurations, orbital_list, Configuration, Det};
use crate::lsdecomp::{decompose_configuration, hund_select, reflection_parity};
use crate::model::{ModelSpec, Subshell, SymmetryChoice, Term};
use crate::nelder_mead::{self, Minimum};
use crate::rdm::{
    contract_energy, rdm_pair, spin_trace, transform_to_real_basis, two_body_support,
    SpinTracedRdmPair,
};
use crate::sto::STOBasis;

/// One symmetry-adapted basis vector: a fixed linear combination of
/// determinants carrying definite (L, S, parity), taken on the
/// (m_l = 0, m_s = S) slice.
#[derive(Clone, Debug)]
pub struct BasisState {
    pub config: Configuration,
    /// Coupling-path label, unique within the subspace.
    pub label: String,
    /// Unit-norm amplitudes over determinants of the full orbital list.
    pub vector: BTreeMap<Det, f64>,
    /// Eigenvalue (+1/-1) under the m -> -m reflection on this slice.
    /// Hamiltonian matrix elements vanish between opposite values.
    pub reflection: i32,
}

/// The full symmetry-projected space of a model: every configuration block
/// matching the target term, in deterministic order.
#[derive(Clone, Debug)]
pub struct SymmetrySubspace {
    pub spec: ModelSpec,
    pub term: Term,
    /// All subshells of the model in global order (core first).
    pub shells: Vec<Subshell>,
    pub states: Vec<BasisState>,
    pub n_spin_orbitals: usize,
}

impl SymmetrySubspace {
    pub fn dimension(&self) -> usize {
        self.states.len()
    }
}

/// Enumerate configurations, decompose each onto the target term, and keep
/// one basis state per block.
pub fn build_subspace(spec: &ModelSpec) -> Result<SymmetrySubspace> {
    spec.validate()?;
    let shells = spec.all_shells();
    let orbitals = orbital_list(&shells);
    let term = match &spec.symmetry {
        SymmetryChoice::Explicit(t) => *t,
        SymmetryChoice::Hund => hund_select(&spec.reference_occupation()),
    };

    let mut states = Vec::new();
    for config in enumerate_configurations(spec)? {
        if configuration_parity(&config) != term.parity {
            continue;
        }
        let blocks = decompose_configuration(&config, &orbitals, Some((term.l, term.two_s)));
        let repeated = blocks.len() > 1
            && blocks
                .iter()
                .any(|b| blocks.iter().filter(|c| c.block.path == b.block.path).count() > 1);
        for b in &blocks {
            let label = if repeated {
                format!("{} #{}", b.block.path, b.ordinal + 1)
            } else {
                b.block.path.clone()
            };
            let reflection = reflection_parity(&b.block, &shells)?;
            states.push(BasisState {
                config: config.clone(),
                label,
                vector: b.block.state_f64(0, b.block.two_s as i32),
                reflection,
            });
        }
    }
    if states.is_empty() {
        return Err(Error::Infeasible(format!(
            "no configuration supports the target symmetry {term}"
        )));
    }
    Ok(SymmetrySubspace {
        spec: spec.clone(),
        term,
        n_spin_orbitals: orbitals.len(),
        shells,
        states,
    })
}

/// Spin-traced transition density matrices for every unordered pair of basis
/// states, already rotated to the real orbital basis. Pairs whose matrix
/// element vanishes by reflection symmetry are not stored.
pub struct RdmSet {
    pub n: usize,
    pairs: Vec<Option<Arc<SpinTracedRdmPair>>>,
}

impl RdmSet {
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        j * (j + 1) / 2 + i
    }

    /// Density pair for <state_i| ... |state_j>, i <= j; `None` means the
    /// Hamiltonian matrix element is identically zero.
    pub fn get(&self, i: usize, j: usize) -> Option<&SpinTracedRdmPair> {
        self.pairs[self.slot(i, j)].as_deref()
    }

    pub fn present(&self) -> Vec<&SpinTracedRdmPair> {
        self.pairs.iter().flatten().map(Arc::as_ref).collect()
    }

    /// Upper-triangle storage in (i <= j), slot j(j+1)/2 + i order.
    pub fn slots(&self) -> &[Option<Arc<SpinTracedRdmPair>>] {
        &self.pairs
    }

    /// Rebuild a set from its upper-triangle slots (e.g. from a cache file).
    pub fn from_slots(n: usize, pairs: Vec<Option<Arc<SpinTracedRdmPair>>>) -> Result<Self> {
        if pairs.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} RDM slots for dimension {n}",
                pairs.len()
            )));
        }
        Ok(RdmSet { n, pairs })
    }
}

/// Compute all state-pair density matrices of a subspace in parallel.
pub fn compute_rdms(sub: &SymmetrySubspace) -> Result<RdmSet> {
    let n = sub.states.len();
    let index: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..=j).map(move |i| (i, j)))
        .collect();
    let pairs: Vec<Option<Arc<SpinTracedRdmPair>>> = index
        .par_iter()
        .map(|&(i, j)| -> Result<Option<Arc<SpinTracedRdmPair>>> {
            let (si, sj) = (&sub.states[i], &sub.states[j]);
            if si.reflection != sj.reflection {
                return Ok(None);
            }
            let so = rdm_pair(&sj.vector, &si.vector, sub.n_spin_orbitals)?;
            let real = transform_to_real_basis(&spin_trace(&so), &sub.shells)?;
            Ok(Some(Arc::new(real)))
        })
        .collect::<Result<_>>()?;
    Ok(RdmSet { n, pairs })
}

/// Union of two-electron integral quadruples the subspace can touch.
pub fn contraction_support(rdms: &RdmSet) -> Vec<(u16, u16, u16, u16)> {
    two_body_support(&rdms.present())
}

/// One-electron matrix (kinetic + nuclear attraction for charge `z`) over the
/// spatial orbitals of the basis. Diagonal in the real-harmonic index, so an
/// entry is nonzero only when both orbitals share l and the harmonic.
pub fn one_body_matrix(basis: &STOBasis, z: f64) -> DMatrix<f64> {
    let orbitals = spatial_orbitals(basis);
    let k = orbitals.len();
    let mut h = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let (sa, ha) = orbitals[a];
            let (sb, hb) = orbitals[b];
            if basis.shells[sa].l == basis.shells[sb].l && ha == hb {
                h[(a, b)] = basis.one_body_integral(sa, sb, z);
            }
        }
    }
    h
}

fn assemble_with<F>(rdms: &RdmSet, h1: &DMatrix<f64>, two_body: F) -> DMatrix<f64>
where
    F: Fn(usize, usize, usize, usize) -> f64,
{
    let n = rdms.n;
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = match rdms.get(i, j) {
                Some(r) => contract_energy(r, h1, &two_body),
                None => 0.0,
            };
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Hamiltonian matrix over the subspace from precomputed density matrices,
/// a one-electron matrix, and a Coulomb tensor.
pub fn assemble_hamiltonian(
    rdms: &RdmSet,
    h1: &DMatrix<f64>,
    tensor: &CoulombTensor,
) -> DMatrix<f64> {
    assemble_with(rdms, h1, |a, b, c, d| tensor.get(a, b, c, d))
}

/// Dense symmetric eigendecomposition with ascending eigenvalues and a
/// deterministic sign convention (largest-magnitude component positive).
pub fn eigensolve(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let mut pivot = 0usize;
        for r in 0..n {
            if v[r].abs() > v[pivot].abs() + 1e-14 {
                pivot = r;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, col)] = sign * v[r];
        }
    }
    (values, vectors)
}

/// A symmetry subspace frozen together with everything reusable across
/// exponent changes: density matrices, their integral support, and the
/// integral engine with its compiled caches.
pub struct EnergyModel {
    pub subspace: SymmetrySubspace,
    pub rdms: RdmSet,
    pub support: Vec<(u16, u16, u16, u16)>,
    engine: CoulombEngine,
}

impl EnergyModel {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let subspace = build_subspace(spec)?;
        let rdms = compute_rdms(&subspace)?;
        let support = contraction_support(&rdms);
        Ok(EnergyModel {
            subspace,
            rdms,
            support,
            engine: CoulombEngine::new(),
        })
    }

    /// Assemble a model from an already-built subspace and density set
    /// (e.g. loaded from cache); the contraction support is recomputed.
    pub fn from_parts(subspace: SymmetrySubspace, rdms: RdmSet) -> Result<Self> {
        if rdms.n != subspace.states.len() {
            return Err(Error::DimensionMismatch(format!(
                "density set for {} states, subspace has {}",
                rdms.n,
                subspace.states.len()
            )));
        }
        let support = contraction_support(&rdms);
        Ok(EnergyModel {
            subspace,
            rdms,
            support,
            engine: CoulombEngine::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.subspace.states.len()
    }

    /// Hamiltonian at the given per-shell exponents (one per model subshell,
    /// in shell order). Only integrals inside the contraction support are
    /// computed.
    pub fn hamiltonian(&self, exponents: &[f64]) -> Result<DMatrix<f64>> {
        let basis = STOBasis::new(&self.subspace.shells, exponents)?;
        let h1 = one_body_matrix(&basis, self.subspace.spec.nuclear_charge);
        self.engine.clear_values();
        let tensor = build_tensor_restricted(&basis, &self.engine, &self.support);
        Ok(assemble_hamiltonian(&self.rdms, &h1, &tensor))
    }

    /// Lowest eigenvalue at the given exponents.
    pub fn energy(&self, exponents: &[f64]) -> Result<f64> {
        let h = self.hamiltonian(exponents)?;
        Ok(eigensolve(&h).0[0])
    }

    /// Kinetic and potential expectation values of a normalized subspace
    /// vector at the given exponents.
    pub fn kinetic_potential(&self, exponents: &[f64], vector: &[f64]) -> Result<(f64, f64)> {
        let basis = STOBasis::new(&self.subspace.shells, exponents)?;
        let t_mat = assemble_with(&self.rdms, &one_body_matrix(&basis, 0.0), |_, _, _, _| 0.0);
        let h = self.hamiltonian(exponents)?;
        let v = DMatrix::from_column_slice(vector.len(), 1, vector);
        let t = (v.transpose() * &t_mat * &v)[(0, 0)];
        let e = (v.transpose() * &h * &v)[(0, 0)];
        Ok((t, e - t))
    }

    /// Shells whose exponent can influence the energy: occupied somewhere in
    /// the subspace, or below an occupied shell of the same l (through
    /// orthogonalization).
    pub fn participating_shells(&self) -> Vec<bool> {
        let shells = &self.subspace.shells;
        let occupied: Vec<bool> = shells
            .iter()
            .map(|&s| self.subspace.states.iter().any(|st| st.config.occ(s) > 0))
            .collect();
        shells
            .iter()
            .map(|s| {
                shells
                    .iter()
                    .zip(&occupied)
                    .any(|(t, &occ)| occ && t.l == s.l && t.n >= s.n)
            })
            .collect()
    }
}

/// Settings for exponent optimization.
#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    /// Initial simplex step in ln(exponent) coordinates.
    pub initial_step: f64,
    /// Energy-spread convergence threshold (hartree).
    pub f_tolerance: f64,
    /// Evaluation budget; 0 means 500 per optimized dimension.
    pub max_evaluations: usize,
    /// Simplex restarts after convergence.
    pub restarts: usize,
    /// Keep core-shell exponents fixed at their initial values.
    pub freeze_core: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            initial_step: 0.05,
            f_tolerance: 1e-7,
            max_evaluations: 0,
            restarts: 1,
            freeze_core: false,
        }
    }
}

/// Squared weight of each configuration in a subspace vector, with the
/// per-state coefficient magnitudes grouped under it.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigWeight {
    pub configuration: String,
    pub weight: f64,
    /// (coupling-path label, |coefficient|) for each basis state.
    pub amplitudes: Vec<(String, f64)>,
}

/// Group the entries of a normalized subspace vector by configuration.
pub fn configuration_weights(sub: &SymmetrySubspace, vector: &[f64]) -> Vec<ConfigWeight> {
    let core = sub.spec.core_shells();
    let mut out: Vec<ConfigWeight> = Vec::new();
    for (state, &c) in sub.states.iter().zip(vector) {
        let label = state.config.label(&core);
        if out.last().map(|w| &w.configuration) != Some(&label) {
            out.push(ConfigWeight {
                configuration: label,
                weight: 0.0,
                amplitudes: Vec::new(),
            });
        }
        let entry = out.last_mut().unwrap();
        entry.weight += c * c;
        entry.amplitudes.push((state.label.clone(), c.abs()));
    }
    out
}

/// Outcome of an energy evaluation or exponent optimization.
#[derive(Clone, Debug)]
pub struct EnergyResult {
    pub term: Term,
    pub dimension: usize,
    /// Exponent per model subshell; `None` for shells that cannot influence
    /// the energy of this subspace.
    pub exponents: Vec<(Subshell, Option<f64>)>,
    /// Lowest eigenvalue (hartree).
    pub energy: f64,
    pub eigenvalues: Vec<f64>,
    pub ground_vector: Vec<f64>,
    pub weights: Vec<ConfigWeight>,
    /// 2<T>/|<V>| for the ground vector; 1 at a variational optimum.
    pub virial_ratio: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn finish(
    model: &EnergyModel,
    exponents: &[f64],
    evaluations: usize,
    converged: bool,
) -> Result<EnergyResult> {
    let h = model.hamiltonian(exponents)?;
    let (eigenvalues, vectors) = eigensolve(&h);
    let ground: Vec<f64> = vectors.column(0).iter().copied().collect();
    let (t, v) = model.kinetic_potential(exponents, &ground)?;
    let participating = model.participating_shells();
    let exponents_out = model
        .subspace
        .shells
        .iter()
        .zip(exponents)
        .zip(&participating)
        .map(|((&s, &z), &p)| (s, if p { Some(z) } else { None }))
        .collect();
    Ok(EnergyResult {
        term: model.subspace.term,
        dimension: model.dimension(),
        exponents: exponents_out,
        energy: eigenvalues[0],
        eigenvalues,
        weights: configuration_weights(&model.subspace, &ground),
        ground_vector: ground,
        virial_ratio: 2.0 * t / v.abs(),
        evaluations,
        converged,
    })
}

/// Diagonalize at fixed exponents (no optimization).
pub fn evaluate(model: &EnergyModel, exponents: &[f64]) -> Result<EnergyResult> {
    if exponents.len() != model.subspace.shells.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} exponents for {} shells",
            exponents.len(),
            model.subspace.shells.len()
        )));
    }
    finish(model, exponents, 1, true)
}

/// Minimize the lowest eigenvalue over the exponents of participating shells
/// (optionally excluding core shells), starting from `initial`. Works in
/// ln(exponent) coordinates so steps are relative and positivity is built in.
pub fn optimize_exponents(
    model: &EnergyModel,
    initial: &[f64],
    options: &OptimizeOptions,
) -> Result<EnergyResult> {
    let shells = &model.subspace.shells;
    if initial.len() != shells.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} exponents for {} shells",
            initial.len(),
            shells.len()
        )));
    }
    let core = model.subspace.spec.core_shells();
    let participating = model.participating_shells();
    let free: Vec<usize> = (0..shells.len())
        .filter(|&i| participating[i] && !(options.freeze_core && core.contains(&shells[i])))
        .collect();

    let mut current = initial.to_vec();
    if free.is_empty() {
        return finish(model, &current, 1, true);
    }

    let x0: Vec<f64> = free.iter().map(|&i| current[i].ln()).collect();
    let nm_options = nelder_mead::Options {
        initial_step: options.initial_step,
        f_tolerance: options.f_tolerance,
        x_tolerance: 1e-6,
        max_evaluations: options.max_evaluations,
        restarts: options.restarts,
    };
    let mut scratch = current.clone();
    let objective = |x: &[f64]| -> f64 {
        for (&i, &xi) in free.iter().zip(x) {
            scratch[i] = xi.exp();
        }
        // An invalid basis (e.g. coincident same-l exponents) is steered away
        // from with a large finite value rather than a panic.
        model.energy(&scratch).unwrap_or(f64::MAX / 4.0)
    };
    let Minimum {
        x,
        evaluations,
        converged,
        ..
    } = nelder_mead::minimize(objective, &x0, &nm_options);
    for (&i, &xi) in free.iter().zip(&x) {
        current[i] = xi.exp();
    }
    finish(model, &current, evaluations, converged)
}
