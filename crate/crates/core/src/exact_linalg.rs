//! Sparse exact linear algebra over the `Rad` field: matrix products for
//! assembling many-body operators, reduced row echelon kernels for
//! highest-weight extraction, and Gram-Schmidt for degenerate kernels.

use crate::exact::Rad;
use std::collections::BTreeMap;

pub type SparseVec = BTreeMap<usize, Rad>;

#[derive(Clone, Debug)]
pub struct RadMatrix {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<SparseVec>,
}

impl RadMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        RadMatrix {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RadMatrix::zeros(n, n);
        for i in 0..n {
            m.rows[i].insert(i, Rad::one());
        }
        m
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: Rad) {
        if v.is_zero() {
            return;
        }
        let entry = self.rows[r].entry(c).or_insert_with(Rad::zero);
        *entry += v;
        if entry.is_zero() {
            self.rows[r].remove(&c);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Rad {
        self.rows[r].get(&c).cloned().unwrap_or_else(Rad::zero)
    }

    pub fn row(&self, r: usize) -> &SparseVec {
        &self.rows[r]
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn scale(&self, s: &Rad) -> RadMatrix {
        let mut out = self.clone();
        for row in &mut out.rows {
            for v in row.values_mut() {
                *v = (&*v).mul(s);
            }
            row.retain(|_, v| !v.is_zero());
        }
        out
    }

    pub fn add(&self, other: &RadMatrix) -> RadMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (r, row) in other.rows.iter().enumerate() {
            for (c, v) in row {
                out.add_to(r, *c, v.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &RadMatrix) -> RadMatrix {
        self.add(&other.scale(&(-Rad::one())))
    }

    pub fn matmul(&self, other: &RadMatrix) -> RadMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = RadMatrix::zeros(self.nrows, other.ncols);
        for r in 0..self.nrows {
            for (k, a) in &self.rows[r] {
                for (c, b) in &other.rows[*k] {
                    out.add_to(r, *c, a.mul(b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = Rad::zero();
            for (c, a) in row {
                if let Some(x) = v.get(c) {
                    acc += a.mul(x);
                }
            }
            if !acc.is_zero() {
                out.insert(r, acc);
            }
        }
        out
    }

    /// Stack matrices vertically (same column count).
    pub fn vstack(blocks: &[&RadMatrix]) -> RadMatrix {
        let ncols = blocks[0].ncols;
        assert!(blocks.iter().all(|b| b.ncols == ncols));
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let mut rows = Vec::with_capacity(nrows);
        for b in blocks {
            rows.extend(b.rows.iter().cloned());
        }
        RadMatrix { nrows, ncols, rows }
    }

    /// Kernel basis via reduced row echelon form with fixed left-to-right
    /// pivot order. Basis vectors are emitted in free-column order, each with
    /// a 1 in its free column; fully deterministic.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        let mut rows: Vec<SparseVec> = self.rows.iter().filter(|r| !r.is_empty()).cloned().collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row index in `rows`, column)
        let mut next_row = 0usize;
        for col in 0..self.ncols {
            // Find pivot among rows not yet used.
            let Some(pr) = (next_row..rows.len()).find(|&r| rows[r].contains_key(&col)) else {
                continue;
            };
            rows.swap(next_row, pr);
            let inv = rows[next_row][&col].inverse();
            rows[next_row] = scale_vec(&rows[next_row], &inv);
            let pivot_row = rows[next_row].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next_row {
                    if let Some(f) = row.get(&col).cloned() {
                        axpy(row, &(-f), &pivot_row);
                    }
                }
            }
            pivots.push((next_row, col));
            next_row += 1;
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = SparseVec::new();
            v.insert(free, Rad::one());
            for &(r, c) in &pivots {
                if let Some(x) = rows[r].get(&free) {
                    let neg = -x.clone();
                    if !neg.is_zero() {
                        v.insert(c, neg);
                    }
                }
            }
            basis.push(v);
        }
        basis
    }
}

pub fn scale_vec(v: &SparseVec, s: &Rad) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, x) in v {
        let y = x.mul(s);
        if !y.is_zero() {
            out.insert(*i, y);
        }
    }
    out
}

/// v += s * w
pub fn axpy(v: &mut SparseVec, s: &Rad, w: &SparseVec) {
    for (i, x) in w {
        let add = x.mul(s);
        if add.is_zero() {
            continue;
        }
        let entry = v.entry(*i).or_insert_with(Rad::zero);
        *entry += add;
        if entry.is_zero() {
            v.remove(i);
        }
    }
}

pub fn inner(u: &SparseVec, v: &SparseVec) -> Rad {
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let mut acc = Rad::zero();
    for (i, x) in small {
        if let Some(y) = large.get(i) {
            acc += x.mul(y);
        }
    }
    acc
}

/// Sequential Gram-Schmidt without normalization (stays in the field).
pub fn gram_schmidt(vecs: &[SparseVec]) -> Vec<SparseVec> {
    let mut out: Vec<SparseVec> = Vec::with_capacity(vecs.len());
    for v in vecs {
        let mut w = v.clone();
        for u in &out {
            let c = inner(&w, u) / inner(u, u);
            axpy(&mut w, &(-c), u);
        }
        assert!(!w.is_empty(), "gram_schmidt given dependent vectors");
        out.push(w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rad;

    #[test]
    fn kernel_of_projector() {
        // M = [[1, -1], [0, 0]] has kernel spanned by (1, 1).
        let mut m = RadMatrix::zeros(2, 2);
        m.add_to(0, 0, Rad::one());
        m.add_to(0, 1, -Rad::one());
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert_eq!(v.get(&0), v.get(&1));
    }

    #[test]
    fn kernel_with_radical_entries() {
        // [sqrt(6), -2] kernel: (2, sqrt(6)) direction (up to scaling).
        let sqrt6 = Rad::sqrt_rational(&num_rational::BigRational::from_integer(6.into()));
        let mut m = RadMatrix::zeros(1, 2);
        m.add_to(0, 0, sqrt6.clone());
        m.add_to(0, 1, Rad::from_integer(-2));
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        // check M v = 0
        let prod = m.mul_vec(v);
        assert!(prod.is_empty());
        let ratio = v[&1].clone() / v[&0].clone();
        assert!((ratio.to_f64() - 6f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_orthogonalizes() {
        let mut a = SparseVec::new();
        a.insert(0, Rad::one());
        a.insert(1, Rad::one());
        let mut b = SparseVec::new();
        b.insert(0, Rad::one());
        b.insert(2, Rad::from_integer(3));
        let ortho = gram_schmidt(&[a, b]);
        assert!(inner(&ortho[0], &ortho[1]).is_zero());
    }
}
