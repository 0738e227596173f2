//! Ranks over prime fields and over `ℚ`, plus exact rational solving.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::matrix::SparseMatrix;

/// Rank of `a` reduced modulo the prime `p`.
pub fn rank_over_field(a: &SparseMatrix, p: u64) -> usize {
    assert!(p >= 2, "field characteristic must be a prime");
    let pb = BigInt::from(p);
    let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); a.rows()];
    for (r, c, v) in a.iter() {
        let mut x = v % &pb;
        if x.is_negative() {
            x += &pb;
        }
        let x = x.to_u64().expect("reduced below p");
        if x != 0 {
            rows[r].insert(c, x);
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let mut pivots: BTreeMap<usize, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut rank = 0;
    for mut row in rows {
        while let Some((&c, &v)) = row.iter().next() {
            match pivots.get(&c) {
                Some(prow) => {
                    // prow is normalized with leading 1 at column c.
                    let f = v;
                    for (&cc, &pv) in prow {
                        let e = row.entry(cc).or_insert(0);
                        *e = (*e + p - mulmod(f, pv)) % p;
                        if *e == 0 {
                            row.remove(&cc);
                        }
                    }
                }
                None => {
                    let inv = mod_inverse(v, p);
                    let norm = row.iter().map(|(&k, &x)| (k, mulmod(x, inv))).collect();
                    pivots.insert(c, norm);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "{a} is not invertible modulo {p}");
    t.rem_euclid(p as i128) as u64
}

/// Row echelon form over `ℚ` kept as pivot-column → normalized row.
#[derive(Clone, Debug, Default)]
pub struct RationalEchelon {
    pivots: BTreeMap<usize, BTreeMap<usize, BigRational>>,
}

impl RationalEchelon {
    /// Reduces `v` against the current pivots; returns the remainder.
    pub fn reduce(&self, v: &BTreeMap<usize, BigRational>) -> BTreeMap<usize, BigRational> {
        let mut row = v.clone();
        row.retain(|_, x| !x.is_zero());
        let mut out = BTreeMap::new();
        while let Some((&c, x)) = row.iter().next() {
            let x = x.clone();
            match self.pivots.get(&c) {
                Some(prow) => {
                    for (&cc, pv) in prow {
                        let e = row.entry(cc).or_insert_with(BigRational::zero);
                        *e -= &x * pv;
                        if e.is_zero() {
                            row.remove(&cc);
                        }
                    }
                }
                None => {
                    row.remove(&c);
                    out.insert(c, x);
                }
            }
        }
        out
    }

    /// Inserts `v`; returns `true` when it was independent of the span.
    pub fn insert(&mut self, v: &BTreeMap<usize, BigRational>) -> bool {
        let rem = self.reduce(v);
        let Some((&c, lead)) = rem.iter().next() else { return false };
        let inv = lead.recip();
        let norm: BTreeMap<usize, BigRational> = rem.iter().map(|(&k, x)| (k, x * &inv)).collect();
        // Keep earlier pivot rows free of the new pivot column.
        for prow in self.pivots.values_mut() {
            if let Some(f) = prow.get(&c).cloned() {
                for (&k, x) in &norm {
                    let e = prow.entry(k).or_insert_with(BigRational::zero);
                    *e -= &f * x;
                    if e.is_zero() {
                        prow.remove(&k);
                    }
                }
            }
        }
        self.pivots.insert(c, norm);
        true
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn contains(&self, v: &BTreeMap<usize, BigRational>) -> bool {
        self.reduce(v).is_empty()
    }
}

fn column_rational(a: &SparseMatrix<BigRational>, c: usize) -> BTreeMap<usize, BigRational> {
    a.column(c).clone()
}

/// Exact rank over `ℚ` by rational elimination (no Smith form involved).
pub fn rational_rank(a: &SparseMatrix) -> usize {
    rational_rank_q(&a.to_rational())
}

pub fn rational_rank_q(a: &SparseMatrix<BigRational>) -> usize {
    let mut ech = RationalEchelon::default();
    for c in 0..a.cols() {
        ech.insert(&column_rational(a, c));
    }
    ech.rank()
}

/// Column-space echelon of `a`.
pub fn column_echelon(a: &SparseMatrix<BigRational>) -> RationalEchelon {
    let mut ech = RationalEchelon::default();
    for c in 0..a.cols() {
        ech.insert(&column_rational(a, c));
    }
    ech
}

/// Some solution `x` of `a·x = b` over `ℚ`, when one exists.
#[allow(clippy::needless_range_loop)]
pub fn solve_rational(a: &SparseMatrix<BigRational>, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    let mut aug: Vec<Vec<BigRational>> = a.to_dense();
    for (row, bi) in aug.iter_mut().zip(b) {
        row.push(bi.clone());
    }
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !aug[i][c].is_zero()) else { continue };
        aug.swap(r, p);
        let inv = aug[r][c].recip();
        for x in aug[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=n {
                    let d = &f * &aug[r][j];
                    aug[i][j] -= d;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    if aug[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = aug[i][n].clone();
    }
    Some(x)
}
