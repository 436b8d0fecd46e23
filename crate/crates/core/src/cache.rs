//! On-disk cache for the exponent-independent precomputation stages:
//! subshell decomposition tables (exact coefficients), symmetry-subspace
//! bases, and state-pair density matrices.
//!
//! Every file starts with a 4-byte tag and a little-endian schema version,
//! followed by a structured payload. Files whose tag or version does not
//! match are refused with an error — never reinterpreted. Writes go to a
//! temporary sibling and are renamed into place, so runs sharing a cache
//! directory only ever see complete files.
//!
//! Keys are SHA-256 digests of a canonical fingerprint of the inputs (the
//! model specification, or the subshell and occupation for term tables), so
//! any change to the model produces a different key and a clean miss, while
//! exponent changes — which never enter the fingerprint — always hit.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::Rad;
use crate::fock::{enumerate_configurations, Configuration, Det};
use crate::lsdecomp::{decompose_subshell, seed_subshell_table, Amplitudes, IrrepBlock};
use crate::model::{ModelSpec, Subshell, SymmetryChoice, Term};
use crate::rdm::{BasisTag, PairMap, SpinTracedRdmPair};
use crate::solver::{
    build_subspace, compute_rdms, BasisState, EnergyModel, RdmSet, SymmetrySubspace,
};

const MAGIC: [u8; 4] = *b"ACIC";
const VERSION: u32 = 1;

/// How one artifact was obtained during a cached operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CacheOutcome {
    Hit,
    Miss,
    Disabled,
}

/// Cache activity of one model build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheUse {
    pub subspace: CacheOutcome,
    pub rdms: CacheOutcome,
    /// Subshell term tables seeded from disk before the build.
    pub subshell_tables_loaded: usize,
}

impl CacheUse {
    fn disabled() -> Self {
        CacheUse {
            subspace: CacheOutcome::Disabled,
            rdms: CacheOutcome::Disabled,
            subshell_tables_loaded: 0,
        }
    }
}

/// A directory of versioned cache files.
#[derive(Clone, Debug)]
pub struct CacheDir {
    root: PathBuf,
}

impl CacheDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CacheDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn file(&self, kind: &str, key: &str) -> PathBuf {
        self.root.join(format!("{kind}-{key}.bin"))
    }

    /// Read and strip the header; `Ok(None)` when the file does not exist,
    /// an error when it exists but carries the wrong tag or version.
    fn read_payload(&self, path: &Path) -> Result<Option<Vec<u8>>> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        if bytes.len() < 8 || bytes[0..4] != MAGIC {
            return Err(Error::Cache(format!(
                "{} is not a cache file of this tool",
                path.display()
            )));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Cache(format!(
                "{} has schema version {version}, this build expects {VERSION}; \
                 remove the stale cache directory",
                path.display()
            )));
        }
        Ok(Some(bytes[8..].to_vec()))
    }

    fn write_payload(&self, path: &Path, payload: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.root)?;
        let mut bytes = Vec::with_capacity(payload.len() + 8);
        bytes.extend_from_slice(&MAGIC);
        bytes.extend_from_slice(&VERSION.to_le_bytes());
        bytes.extend_from_slice(payload);
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(format!(".tmp-{}", std::process::id()));
        let tmp = PathBuf::from(tmp);
        fs::write(&tmp, &bytes)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    fn load<T: for<'de> Deserialize<'de>>(&self, kind: &str, key: &str) -> Result<Option<T>> {
        let path = self.file(kind, key);
        match self.read_payload(&path)? {
            None => Ok(None),
            Some(payload) => serde_json::from_slice(&payload)
                .map(Some)
                .map_err(|e| Error::Cache(format!("{}: corrupt payload: {e}", path.display()))),
        }
    }

    fn store<T: Serialize>(&self, kind: &str, key: &str, value: &T) -> Result<()> {
        let payload = serde_json::to_vec(value)
            .map_err(|e| Error::Cache(format!("serialization failed: {e}")))?;
        self.write_payload(&self.file(kind, key), &payload)
    }
}

// ---------------------------------------------------------------------------
// Keys
// ---------------------------------------------------------------------------

fn sha_hex(input: &str) -> String {
    let digest = Sha256::digest(input.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Canonical description of everything the symbolic stages depend on.
/// Exponents are deliberately absent: the symbolic artifacts are
/// exponent-independent.
pub fn spec_fingerprint(spec: &ModelSpec) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    write!(
        s,
        "model;n={};zbits={:016x};min={}.{};max={}.{}",
        spec.n_electrons,
        spec.nuclear_charge.to_bits(),
        spec.min_shell.n,
        spec.min_shell.l,
        spec.max_shell.n,
        spec.max_shell.l
    )
    .unwrap();
    s.push_str(";pins=");
    for (shell, occ) in &spec.occupation_constraints {
        write!(s, "{}.{}:{},", shell.n, shell.l, occ).unwrap();
    }
    match &spec.symmetry {
        SymmetryChoice::Hund => s.push_str(";sym=hund"),
        SymmetryChoice::Explicit(t) => {
            write!(s, ";sym={}:{}:{}", t.l, t.two_s, t.parity).unwrap()
        }
    }
    s
}

pub fn spec_key(spec: &ModelSpec) -> String {
    sha_hex(&spec_fingerprint(spec))
}

fn subshell_key(l: u32, n: u32) -> String {
    sha_hex(&format!("subshell;l={l};n={n}"))
}

// ---------------------------------------------------------------------------
// Stored forms
// ---------------------------------------------------------------------------

/// Exact radical number as (radicand, numerator, denominator) decimal
/// strings; the value is the sum of num/den * sqrt(radicand).
#[derive(Serialize, Deserialize)]
struct StoredRad(Vec<(String, String, String)>);

fn store_rad(r: &Rad) -> StoredRad {
    StoredRad(
        r.terms()
            .map(|(d, c)| (d.to_string(), c.numer().to_string(), c.denom().to_string()))
            .collect(),
    )
}

fn load_rad(s: &StoredRad) -> Result<Rad> {
    let bad = |what: &str| Error::Cache(format!("malformed exact coefficient: {what}"));
    let mut terms = Vec::with_capacity(s.0.len());
    for (d, num, den) in &s.0 {
        let d = BigUint::from_str(d).map_err(|_| bad(d))?;
        let num = BigInt::from_str(num).map_err(|_| bad(num))?;
        let den = BigInt::from_str(den).map_err(|_| bad(den))?;
        if den == BigInt::from(0) {
            return Err(bad("zero denominator"));
        }
        terms.push((d, BigRational::new(num, den)));
    }
    Ok(Rad::from_terms(terms))
}

#[derive(Serialize, Deserialize)]
struct StoredAmplitudes(Vec<(u64, StoredRad)>);

fn store_amplitudes(a: &Amplitudes) -> StoredAmplitudes {
    StoredAmplitudes(a.iter().map(|(d, c)| (d.0, store_rad(c))).collect())
}

fn load_amplitudes(s: &StoredAmplitudes) -> Result<Amplitudes> {
    s.0.iter()
        .map(|(bits, c)| Ok((Det(*bits), load_rad(c)?)))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct StoredBlock {
    l: u32,
    two_s: u32,
    norm2: StoredRad,
    path: String,
    amps: Vec<Vec<StoredAmplitudes>>,
}

#[derive(Serialize, Deserialize)]
struct StoredSubshellTable {
    l: u32,
    n: u32,
    blocks: Vec<StoredBlock>,
}

fn store_block(b: &IrrepBlock) -> StoredBlock {
    StoredBlock {
        l: b.l,
        two_s: b.two_s,
        norm2: store_rad(&b.norm2),
        path: b.path.clone(),
        amps: b
            .amps
            .iter()
            .map(|row| row.iter().map(store_amplitudes).collect())
            .collect(),
    }
}

fn load_block(s: &StoredBlock) -> Result<IrrepBlock> {
    Ok(IrrepBlock {
        l: s.l,
        two_s: s.two_s,
        norm2: load_rad(&s.norm2)?,
        amps: s
            .amps
            .iter()
            .map(|row| row.iter().map(load_amplitudes).collect())
            .collect::<Result<_>>()?,
        path: s.path.clone(),
    })
}

#[derive(Serialize, Deserialize)]
struct StoredState {
    /// (n, l, occupation) per subshell, including core shells.
    occupations: Vec<(u32, u32, u32)>,
    label: String,
    reflection: i32,
    /// (determinant bits, amplitude) over the model's global orbital list.
    vector: Vec<(u64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct StoredSubspace {
    fingerprint: String,
    term: String,
    shells: Vec<(u32, u32)>,
    n_spin_orbitals: usize,
    states: Vec<StoredState>,
}

#[derive(Serialize, Deserialize)]
struct StoredPair {
    n_spatial: usize,
    n_electrons: u32,
    /// Row-major n_spatial x n_spatial one-body matrix.
    gamma1: Vec<f64>,
    /// ((k,l),(i,j), value) entries of the two-body map.
    gamma2: Vec<(u16, u16, u16, u16, f64)>,
}

#[derive(Serialize, Deserialize)]
struct StoredRdms {
    fingerprint: String,
    n: usize,
    slots: Vec<Option<StoredPair>>,
}

// ---------------------------------------------------------------------------
// Subshell tables
// ---------------------------------------------------------------------------

/// Write the exact decomposition table of one subshell power, unless a file
/// for it already exists. Returns whether a file was written.
pub fn store_subshell_table(dir: &CacheDir, l: u32, n: u32) -> Result<bool> {
    let key = subshell_key(l, n);
    if dir.file("subshell", &key).exists() {
        return Ok(false);
    }
    let blocks = decompose_subshell(l, n);
    let stored = StoredSubshellTable {
        l,
        n,
        blocks: blocks.iter().map(store_block).collect(),
    };
    dir.store("subshell", &key, &stored)?;
    Ok(true)
}

/// Load every subshell table present in the directory into the in-process
/// memo. Returns how many tables were seeded.
pub fn load_subshell_tables(dir: &CacheDir) -> Result<usize> {
    let entries = match fs::read_dir(dir.root()) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let mut seeded = 0;
    for entry in entries {
        let path = entry?.path();
        let name = match path.file_name().and_then(|n| n.to_str()) {
            Some(n) => n,
            None => continue,
        };
        if !name.starts_with("subshell-") || !name.ends_with(".bin") {
            continue;
        }
        let payload = match dir.read_payload(&path)? {
            Some(p) => p,
            None => continue,
        };
        let stored: StoredSubshellTable = serde_json::from_slice(&payload)
            .map_err(|e| Error::Cache(format!("{}: corrupt payload: {e}", path.display())))?;
        let blocks = stored
            .blocks
            .iter()
            .map(load_block)
            .collect::<Result<Vec<_>>>()?;
        seed_subshell_table(stored.l, stored.n, blocks);
        seeded += 1;
    }
    Ok(seeded)
}

/// Every (l, occupation) subshell power the spec's configurations use.
fn subshell_powers(spec: &ModelSpec) -> Result<BTreeSet<(u32, u32)>> {
    let mut powers = BTreeSet::new();
    for config in enumerate_configurations(spec)? {
        for (shell, &occ) in &config.occupations {
            if occ > 0 {
                powers.insert((shell.l, occ));
            }
        }
    }
    Ok(powers)
}

// ---------------------------------------------------------------------------
// Subspace and density artifacts
// ---------------------------------------------------------------------------

fn store_subspace(dir: &CacheDir, key: &str, fingerprint: &str, sub: &SymmetrySubspace) -> Result<()> {
    let stored = StoredSubspace {
        fingerprint: fingerprint.to_string(),
        term: sub.term.to_string(),
        shells: sub.shells.iter().map(|s| (s.n, s.l)).collect(),
        n_spin_orbitals: sub.n_spin_orbitals,
        states: sub
            .states
            .iter()
            .map(|st| StoredState {
                occupations: st
                    .config
                    .occupations
                    .iter()
                    .map(|(s, &o)| (s.n, s.l, o))
                    .collect(),
                label: st.label.clone(),
                reflection: st.reflection,
                vector: st.vector.iter().map(|(d, &c)| (d.0, c)).collect(),
            })
            .collect(),
    };
    dir.store("subspace", key, &stored)
}

fn load_subspace(
    dir: &CacheDir,
    key: &str,
    fingerprint: &str,
    spec: &ModelSpec,
) -> Result<Option<SymmetrySubspace>> {
    let stored: StoredSubspace = match dir.load("subspace", key)? {
        Some(s) => s,
        None => return Ok(None),
    };
    if stored.fingerprint != fingerprint {
        return Err(Error::Cache(format!(
            "subspace cache entry {key} was written for a different model"
        )));
    }
    let term = Term::from_str(&stored.term)?;
    let shells: Vec<Subshell> = stored
        .shells
        .iter()
        .map(|&(n, l)| Subshell::new(n, l))
        .collect();
    let states = stored
        .states
        .into_iter()
        .map(|st| BasisState {
            config: Configuration {
                occupations: st
                    .occupations
                    .into_iter()
                    .map(|(n, l, o)| (Subshell::new(n, l), o))
                    .collect(),
            },
            label: st.label,
            reflection: st.reflection,
            vector: st.vector.into_iter().map(|(bits, c)| (Det(bits), c)).collect(),
        })
        .collect();
    Ok(Some(SymmetrySubspace {
        spec: spec.clone(),
        term,
        shells,
        states,
        n_spin_orbitals: stored.n_spin_orbitals,
    }))
}

fn store_rdms(dir: &CacheDir, key: &str, fingerprint: &str, rdms: &RdmSet) -> Result<()> {
    let slots = rdms
        .slots()
        .iter()
        .map(|slot| {
            slot.as_ref().map(|pair| {
                debug_assert_eq!(pair.basis, BasisTag::RealCartesian);
                StoredPair {
                    n_spatial: pair.n_spatial,
                    n_electrons: pair.n_electrons,
                    gamma1: pair.gamma1.transpose().as_slice().to_vec(),
                    gamma2: pair
                        .gamma2
                        .iter()
                        .map(|(&((k, l), (i, j)), &v)| (k, l, i, j, v))
                        .collect(),
                }
            })
        })
        .collect();
    let stored = StoredRdms {
        fingerprint: fingerprint.to_string(),
        n: rdms.n,
        slots,
    };
    dir.store("rdms", key, &stored)
}

fn load_rdms(dir: &CacheDir, key: &str, fingerprint: &str) -> Result<Option<RdmSet>> {
    let stored: StoredRdms = match dir.load("rdms", key)? {
        Some(s) => s,
        None => return Ok(None),
    };
    if stored.fingerprint != fingerprint {
        return Err(Error::Cache(format!(
            "density cache entry {key} was written for a different model"
        )));
    }
    let slots = stored
        .slots
        .into_iter()
        .map(|slot| {
            slot.map(|pair| {
                let n = pair.n_spatial;
                let gamma2: PairMap = pair
                    .gamma2
                    .into_iter()
                    .map(|(k, l, i, j, v)| (((k, l), (i, j)), v))
                    .collect();
                Arc::new(SpinTracedRdmPair {
                    n_spatial: n,
                    n_electrons: pair.n_electrons,
                    gamma1: DMatrix::from_row_slice(n, n, &pair.gamma1),
                    gamma2,
                    basis: BasisTag::RealCartesian,
                })
            })
        })
        .collect();
    Ok(Some(RdmSet::from_slots(stored.n, slots)?))
}

// ---------------------------------------------------------------------------
// Model assembly through the cache
// ---------------------------------------------------------------------------

/// Build an `EnergyModel`, reading every exponent-independent artifact from
/// the cache when present and writing whatever had to be computed. With no
/// cache directory this is exactly `EnergyModel::new`.
pub fn load_or_build_model(
    spec: &ModelSpec,
    dir: Option<&CacheDir>,
) -> Result<(EnergyModel, CacheUse)> {
    let dir = match dir {
        Some(d) => d,
        None => return Ok((EnergyModel::new(spec)?, CacheUse::disabled())),
    };
    spec.validate()?;
    let fingerprint = spec_fingerprint(spec);
    let key = sha_hex(&fingerprint);

    let seeded = load_subshell_tables(dir)?;

    let (subspace, subspace_outcome) = match load_subspace(dir, &key, &fingerprint, spec)? {
        Some(sub) => (sub, CacheOutcome::Hit),
        None => {
            let sub = build_subspace(spec)?;
            store_subspace(dir, &key, &fingerprint, &sub)?;
            for (l, n) in subshell_powers(spec)? {
                store_subshell_table(dir, l, n)?;
            }
            (sub, CacheOutcome::Miss)
        }
    };

    let (rdms, rdms_outcome) = match load_rdms(dir, &key, &fingerprint)? {
        Some(r) => (r, CacheOutcome::Hit),
        None => {
            let r = compute_rdms(&subspace)?;
            store_rdms(dir, &key, &fingerprint, &r)?;
            (r, CacheOutcome::Miss)
        }
    };

    let model = EnergyModel::from_parts(subspace, rdms)?;
    Ok((
        model,
        CacheUse {
            subspace: subspace_outcome,
            rdms: rdms_outcome,
            subshell_tables_loaded: seeded,
        },
    ))
}

/// Precompute and store every symbolic artifact for a spec without running
/// any numerics. Subsequent builds of the same spec hit on every artifact.
pub fn precompute(spec: &ModelSpec, dir: &CacheDir) -> Result<CacheUse> {
    let (_, usage) = load_or_build_model(spec, Some(dir))?;
    Ok(usage)
}
