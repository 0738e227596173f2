//! Smith normal form over `ℤ`.
//!
//! Two routes:
//! * [`smith_normal_form`]: dense reduction that also returns unimodular
//!   transforms `U·A·V = D`. Used for small matrices and as an oracle.
//! * [`invariant_factors`]: sparse elimination without transforms, the
//!   workhorse behind every homology computation. It runs in checked `i64`
//!   and restarts in `BigInt` on overflow.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::SparseMatrix;
use crate::error::{Error, Result};

/// Result of [`smith_normal_form`]: `left · A · right = diag(diagonal)`.
#[derive(Clone, Debug)]
pub struct Smith {
    /// Length `min(rows, cols)`; nonzero entries first, each dividing the next.
    pub diagonal: Vec<BigInt>,
    pub left: SparseMatrix,
    pub right: SparseMatrix,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|d| !d.is_zero()).count()
    }

    pub fn diagonal_matrix(&self) -> SparseMatrix {
        let mut d = SparseMatrix::zeros(self.left.rows(), self.right.cols());
        for (i, v) in self.diagonal.iter().enumerate() {
            d.set(i, i, v.clone());
        }
        d
    }
}

/// Dense Smith normal form with transforms, smallest-entry pivoting.
pub fn smith_normal_form(a: &SparseMatrix) -> Smith {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.to_dense();
    let mut u = identity_dense(m);
    let mut v = identity_dense(n);

    let mut t = 0;
    while t < m.min(n) {
        let Some((pi, pj)) = smallest_nonzero(&d, t, t) else { break };
        swap_rows(&mut d, &mut u, t, pi);
        swap_cols(&mut d, &mut v, t, pj);
        loop {
            let mut moved = false;
            for i in t + 1..m {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = d[i][t].div_floor(&d[t][t]);
                row_axpy(&mut d, &mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    moved = true;
                }
            }
            for j in t + 1..n {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = d[t][j].div_floor(&d[t][t]);
                col_axpy(&mut d, &mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    moved = true;
                }
            }
            if moved {
                let (pi, pj) = smallest_in_cross(&d, t);
                swap_rows(&mut d, &mut u, t, pi);
                swap_cols(&mut d, &mut v, t, pj);
                continue;
            }
            // Row and column are clear; enforce divisibility on the rest.
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[i][j].is_multiple_of(&d[t][t])));
            match bad {
                Some(i) => row_axpy(&mut d, &mut u, t, i, &-BigInt::one()),
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let diagonal = (0..m.min(n)).map(|i| d[i][i].clone()).collect();
    Smith { diagonal, left: SparseMatrix::from_dense(&u), right: SparseMatrix::from_dense(&v) }
}

/// Rejects non-integral input before running [`smith_normal_form`].
pub fn smith_normal_form_rational(a: &SparseMatrix<BigRational>) -> Result<Smith> {
    let a = a.to_integer().ok_or(Error::RationalInput)?;
    Ok(smith_normal_form(&a))
}

fn identity_dense(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn smallest_nonzero(d: &[Vec<BigInt>], r0: usize, c0: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in d.iter().enumerate().skip(r0) {
        for (j, x) in row.iter().enumerate().skip(c0) {
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < d[bi][bj].abs()) {
                best = Some((i, j));
                if x.abs().is_one() {
                    return best;
                }
            }
        }
    }
    best
}

fn smallest_in_cross(d: &[Vec<BigInt>], t: usize) -> (usize, usize) {
    let mut best = (t, t);
    for i in t..d.len() {
        if !d[i][t].is_zero() && d[i][t].abs() < d[best.0][best.1].abs() {
            best = (i, t);
        }
    }
    for j in t..d[t].len() {
        if !d[t][j].is_zero() && d[t][j].abs() < d[best.0][best.1].abs() {
            best = (t, j);
        }
    }
    best
}

fn swap_rows(d: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    d.swap(a, b);
    u.swap(a, b);
}

fn swap_cols(d: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in d.iter_mut() {
        row.swap(a, b);
    }
    for row in v.iter_mut() {
        row.swap(a, b);
    }
}

/// `row[dst] -= q · row[src]` on both the matrix and the left transform.
fn row_axpy(d: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for mat in [d, u] {
        let (s, t) = if src < dst {
            let (lo, hi) = mat.split_at_mut(dst);
            (&lo[src], &mut hi[0])
        } else {
            let (lo, hi) = mat.split_at_mut(src);
            (&hi[0], &mut lo[dst])
        };
        for (x, y) in t.iter_mut().zip(s) {
            if !y.is_zero() {
                *x -= q * y;
            }
        }
    }
}

/// `col[dst] -= q · col[src]` on both the matrix and the right transform.
fn col_axpy(d: &mut [Vec<BigInt>], v: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for mat in [d, v] {
        for row in mat.iter_mut() {
            if !row[src].is_zero() {
                let delta = q * &row[src];
                row[dst] -= delta;
            }
        }
    }
}

/// Integer entry type for the sparse eliminator.
trait EntryInt: Clone + Integer + Signed + Debug {
    /// `self - q·p`, or `None` on overflow.
    fn sub_mul(&self, q: &Self, p: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl EntryInt for i64 {
    fn sub_mul(&self, q: &Self, p: &Self) -> Option<Self> {
        q.checked_mul(*p).and_then(|qp| self.checked_sub(qp))
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl EntryInt for BigInt {
    fn sub_mul(&self, q: &Self, p: &Self) -> Option<Self> {
        Some(self - q * p)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

struct Overflow;

struct Eliminator<T> {
    rows: Vec<Vec<(usize, T)>>,
    col_rows: Vec<Vec<usize>>,
    col_count: Vec<usize>,
}

impl<T: EntryInt> Eliminator<T> {
    fn new(a: &SparseMatrix, conv: impl Fn(&BigInt) -> Option<T>) -> Option<Self> {
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); a.rows()];
        let mut col_rows = vec![Vec::new(); a.cols()];
        let mut col_count = vec![0; a.cols()];
        for (r, c, v) in a.iter() {
            rows[r].push((c, conv(v)?));
            col_rows[c].push(r);
            col_count[c] += 1;
        }
        Some(Self { rows, col_rows, col_count })
    }

    fn entry(&self, r: usize, c: usize) -> Option<&T> {
        let row = &self.rows[r];
        row.binary_search_by_key(&c, |e| e.0).ok().map(|i| &row[i].1)
    }

    fn pick_pivot(&self) -> Option<(usize, usize)> {
        let mut best: Option<(T, usize, usize, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let rl = row.len().saturating_sub(1);
            for (c, v) in row {
                let a = v.abs();
                let cost = rl * (self.col_count[*c] - 1);
                let better = match &best {
                    None => true,
                    Some((ba, bc, _, _)) => match a.cmp(ba) {
                        Ordering::Less => true,
                        Ordering::Equal => cost < *bc,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    if a.is_one() && cost == 0 {
                        return Some((r, *c));
                    }
                    best = Some((a, cost, r, *c));
                }
            }
        }
        best.map(|(_, _, r, c)| (r, c))
    }

    /// `row[dst] -= q · row[src]`.
    fn row_op(&mut self, dst: usize, src: usize, q: &T) -> Result<(), Overflow> {
        let a = std::mem::take(&mut self.rows[dst]);
        let b = &self.rows[src];
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let ca = a.get(i).map_or(usize::MAX, |e| e.0);
            let cb = b.get(j).map_or(usize::MAX, |e| e.0);
            match ca.cmp(&cb) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let v = T::zero().sub_mul(q, &b[j].1).ok_or(Overflow)?;
                    if !v.is_zero() {
                        self.col_count[cb] += 1;
                        self.col_rows[cb].push(dst);
                        out.push((cb, v));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let v = a[i].1.sub_mul(q, &b[j].1).ok_or(Overflow)?;
                    if v.is_zero() {
                        self.col_count[ca] -= 1;
                    } else {
                        out.push((ca, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        self.rows[dst] = out;
        Ok(())
    }

    fn rows_in_col(&mut self, c: usize) -> Vec<usize> {
        let mut list = std::mem::take(&mut self.col_rows[c]);
        list.sort_unstable();
        list.dedup();
        list.retain(|&r| self.entry(r, c).is_some());
        self.col_rows[c] = list.clone();
        list
    }

    fn run(mut self) -> Result<Vec<BigInt>, Overflow> {
        let mut diag = Vec::new();
        while let Some((mut r, mut c)) = self.pick_pivot() {
            loop {
                let p = self.entry(r, c).expect("pivot present").clone();
                let mut next_row: Option<(T, usize)> = None;
                for r2 in self.rows_in_col(c) {
                    if r2 == r {
                        continue;
                    }
                    let v = self.entry(r2, c).expect("listed").clone();
                    let q = v.div_floor(&p);
                    if !q.is_zero() {
                        self.row_op(r2, r, &q)?;
                    }
                    if let Some(rem) = self.entry(r2, c) {
                        let a = rem.abs();
                        if next_row.as_ref().is_none_or(|(b, _)| a < *b) {
                            next_row = Some((a, r2));
                        }
                    }
                }
                if let Some((_, r2)) = next_row {
                    r = r2;
                    continue;
                }
                // Column c holds only the pivot: clear row r with column operations.
                let mut next_col: Option<(T, usize)> = None;
                let row = std::mem::take(&mut self.rows[r]);
                let mut kept = Vec::with_capacity(row.len());
                for (c2, v) in row {
                    if c2 == c {
                        kept.push((c2, v));
                        continue;
                    }
                    let q = v.div_floor(&p);
                    let rem = v.sub_mul(&q, &p).ok_or(Overflow)?;
                    if rem.is_zero() {
                        self.col_count[c2] -= 1;
                    } else {
                        let a = rem.abs();
                        if next_col.as_ref().is_none_or(|(b, _)| a < *b) {
                            next_col = Some((a, c2));
                        }
                        kept.push((c2, rem));
                    }
                }
                self.rows[r] = kept;
                if let Some((_, c2)) = next_col {
                    c = c2;
                    continue;
                }
                break;
            }
            let p = self.entry(r, c).expect("pivot present").abs();
            diag.push(p.to_big());
            self.rows[r].clear();
            self.col_count[c] = 0;
            self.col_rows[c].clear();
        }
        Ok(diag)
    }
}

/// Nonzero invariant factors `d₁ | d₂ | …` of an integer matrix.
pub fn invariant_factors(a: &SparseMatrix) -> Vec<BigInt> {
    let diag = Eliminator::<i64>::new(a, |v| v.to_i64().filter(|x| x.unsigned_abs() < 1 << 31))
        .and_then(|e| e.run().ok())
        .unwrap_or_else(|| {
            Eliminator::<BigInt>::new(a, |v| Some(v.clone()))
                .expect("BigInt conversion is total")
                .run()
                .unwrap_or_else(|_| unreachable!("BigInt arithmetic cannot overflow"))
        });
    normalize_chain(diag)
}

/// Turns any diagonal form into the divisibility chain with the same cokernel.
pub fn normalize_chain(mut diag: Vec<BigInt>) -> Vec<BigInt> {
    let ones = diag.iter().filter(|d| d.is_one()).count();
    diag.retain(|d| !d.is_one());
    let n = diag.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = diag[i].gcd(&diag[j]);
            let l = diag[i].lcm(&diag[j]);
            diag[i] = g;
            diag[j] = l;
        }
    }
    let mut out = vec![BigInt::one(); ones];
    out.extend(diag);
    out
}
