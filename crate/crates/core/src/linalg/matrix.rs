use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Zero};

/// Exact scalar usable as a matrix entry.
pub trait Scalar: Clone + Num + Neg<Output = Self> + Debug {}

impl<T: Clone + Num + Neg<Output = T> + Debug> Scalar for T {}

/// Column-compressed sparse matrix with no stored zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMatrix<T = BigInt> {
    rows: usize,
    cols: usize,
    columns: Vec<BTreeMap<usize, T>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, columns: vec![BTreeMap::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, c, v) in entries {
            m.add_to(r, c, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(BTreeMap::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.columns[c].get(&r).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        if v.is_zero() {
            self.columns[c].remove(&r);
        } else {
            self.columns[c].insert(r, v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: T) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        if v.is_zero() {
            return;
        }
        match self.columns[c].entry(r) {
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + v;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
            Entry::Vacant(e) => {
                e.insert(v);
            }
        }
    }

    pub fn column(&self, c: usize) -> &BTreeMap<usize, T> {
        &self.columns[c]
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(&r, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(r, c, v)| (c, r, v.clone())))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for (c, col) in rhs.columns.iter().enumerate() {
            let mut acc: BTreeMap<usize, T> = BTreeMap::new();
            for (&k, b) in col {
                for (&r, a) in &self.columns[k] {
                    let term = a.clone() * b.clone();
                    match acc.entry(r) {
                        Entry::Occupied(mut o) => {
                            let s = o.get().clone() + term;
                            *o.get_mut() = s;
                        }
                        Entry::Vacant(e) => {
                            e.insert(term);
                        }
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.columns[c] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in sum");
        let mut out = self.clone();
        for (r, c, v) in rhs.iter() {
            out.add_to(r, c, v.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-T::one())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_triplets(self.rows, self.cols, self.iter().map(|(r, c, v)| (r, c, v.clone() * s.clone())))
    }

    pub fn mul_vec(&self, v: &BTreeMap<usize, T>) -> BTreeMap<usize, T> {
        let mut out: BTreeMap<usize, T> = BTreeMap::new();
        for (&c, x) in v {
            for (&r, a) in &self.columns[c] {
                let e = out.entry(r).or_insert_with(T::zero);
                *e = e.clone() + a.clone() * x.clone();
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Submatrix on the given row and column index lists (in that order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut row_pos = vec![usize::MAX; self.rows];
        for (i, &r) in rows.iter().enumerate() {
            row_pos[r] = i;
        }
        let mut out = Self::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for (&r, v) in &self.columns[c] {
                if row_pos[r] != usize::MAX {
                    out.columns[j].insert(row_pos[r], v.clone());
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.cols]; self.rows];
        for (r, c, v) in self.iter() {
            d[r][c] = v.clone();
        }
        d
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_triplets(
            r,
            c,
            rows.iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, v.clone()))),
        )
    }

    /// Block-stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&Self]) -> Self {
        let cols = parts.first().map_or(0, |m| m.cols);
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for m in parts {
            assert_eq!(m.cols, cols);
            for (r, c, v) in m.iter() {
                out.set(off + r, c, v.clone());
            }
            off += m.rows;
        }
        out
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hstack(parts: &[&Self]) -> Self {
        let rows = parts.first().map_or(0, |m| m.rows);
        let mut columns = Vec::new();
        for m in parts {
            assert_eq!(m.rows, rows);
            columns.extend(m.columns.iter().cloned());
        }
        Self { rows, cols: columns.len(), columns }
    }
}

impl SparseMatrix<BigInt> {
    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_triplets(
            r,
            c,
            rows.iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, BigInt::from(v)))),
        )
    }

    pub fn to_rational(&self) -> SparseMatrix<BigRational> {
        SparseMatrix::from_triplets(
            self.rows,
            self.cols,
            self.iter().map(|(r, c, v)| (r, c, BigRational::from_integer(v.clone()))),
        )
    }

    /// Entries reduced into `[0, m)`, zeros dropped.
    pub fn reduce_mod(&self, m: &BigInt) -> Self {
        Self::from_triplets(
            self.rows,
            self.cols,
            self.iter().map(|(r, c, v)| {
                let mut x = v % m;
                if x < BigInt::zero() {
                    x += m;
                }
                (r, c, x)
            }),
        )
    }

    pub fn is_zero_mod(&self, m: &BigInt) -> bool {
        self.iter().all(|(_, _, v)| (v % m).is_zero())
    }
}

impl SparseMatrix<BigRational> {
    /// `Some` when every entry is an integer.
    pub fn to_integer(&self) -> Option<SparseMatrix<BigInt>> {
        let mut out = SparseMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            if !v.is_integer() {
                return None;
            }
            out.set(r, c, v.to_integer());
        }
        Some(out)
    }
}

impl<T: Scalar> Debug for SparseMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "SparseMatrix {}x{} ({} nnz)", self.rows, self.cols, self.nnz())?;
        if self.rows <= 12 && self.cols <= 12 {
            for row in self.to_dense() {
                writeln!(f, "  {row:?}")?;
            }
        }
        Ok(())
    }
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.nnz() == self.rows
            && (0..self.rows).all(|i| self.get(i, i).is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_transpose() {
        let a = SparseMatrix::from_i64(&[vec![1, 2], vec![0, 3]]);
        let b = SparseMatrix::from_i64(&[vec![4, 0], vec![-1, 1]]);
        let p = a.mul(&b);
        assert_eq!(p, SparseMatrix::from_i64(&[vec![2, 2], vec![-3, 3]]));
        assert_eq!(a.transpose().get(1, 0), BigInt::from(2));
        assert!(a.sub(&a).is_zero());
        assert!(SparseMatrix::<BigInt>::identity(3).is_identity());
    }

    #[test]
    fn cancelling_entries_are_not_stored() {
        let mut m = SparseMatrix::<BigInt>::zeros(2, 2);
        m.add_to(0, 0, BigInt::from(3));
        m.add_to(0, 0, BigInt::from(-3));
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn select_and_stack() {
        let a = SparseMatrix::from_i64(&[vec![1, 2, 3], vec![4, 5, 6]]);
        let s = a.select(&[1], &[2, 0]);
        assert_eq!(s, SparseMatrix::from_i64(&[vec![6, 4]]));
        let h = SparseMatrix::hstack(&[&a, &a]);
        assert_eq!(h.cols(), 6);
        let v = SparseMatrix::vstack(&[&a, &a]);
        assert_eq!(v.rows(), 4);
        assert_eq!(v.get(3, 2), BigInt::from(6));
    }
}
