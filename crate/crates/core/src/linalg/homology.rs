//! Cohomology of bounded complexes of free `ℤ`-modules, over `ℤ` or `ℤ/M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::matrix::SparseMatrix;
use super::smith::{invariant_factors, normalize_chain};
use crate::error::{Error, Result};

/// Coefficient ring for a homology computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coefficients {
    Integers,
    Mod(u64),
}

/// A finitely generated module over `ℤ` or `ℤ/M`.
///
/// Over `ℤ`, `free_rank` counts `ℤ` summands; over `ℤ/M` it counts `ℤ/M`
/// summands and `torsion` lists the remaining cyclic factors `ℤ/d`, `d | M`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_ints")]
    pub torsion: Vec<BigInt>,
}

pub(crate) fn serialize_ints<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match x.to_u64() {
            Some(u) => seq.serialize_element(&u)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

impl HomologyGroup {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        Self { free_rank: rank, torsion: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Builds the invariant-factor form from arbitrary cyclic orders.
    pub fn from_parts(free_rank: usize, cyclic: impl IntoIterator<Item = BigInt>) -> Self {
        let parts: Vec<BigInt> = cyclic.into_iter().filter(|d| !d.is_one() && !d.is_zero()).collect();
        let torsion = normalize_chain(parts).into_iter().filter(|d| !d.is_one()).collect();
        Self { free_rank, torsion }
    }

    /// Direct sum.
    pub fn sum(&self, other: &Self) -> Self {
        Self::from_parts(
            self.free_rank + other.free_rank,
            self.torsion.iter().chain(&other.torsion).cloned(),
        )
    }

    /// Prime-power factors of the torsion part, sorted.
    pub fn primary_parts(&self) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        for d in &self.torsion {
            let mut n = d.to_u64().expect("torsion orders fit in u64");
            let mut p = 2;
            while p * p <= n {
                if n % p == 0 {
                    let mut e = 0;
                    while n % p == 0 {
                        n /= p;
                        e += 1;
                    }
                    out.push((p, e));
                }
                p += 1;
            }
            if n > 1 {
                out.push((n, 1));
            }
        }
        out.sort_unstable();
        out
    }

    /// `true` when `self` is isomorphic to a direct summand of `other`.
    pub fn is_summand_of(&self, other: &Self) -> bool {
        if self.free_rank > other.free_rank {
            return false;
        }
        let mut big = other.primary_parts();
        for part in self.primary_parts() {
            match big.iter().position(|q| *q == part) {
                Some(i) => {
                    big.remove(i);
                }
                None => return false,
            }
        }
        true
    }

    /// Number of cyclic summands (the rank for a free `ℤ/M`-module).
    pub fn generators(&self) -> usize {
        self.free_rank + self.torsion.len()
    }
}

impl std::fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".to_string() } else { format!("Z^{}", self.free_rank) });
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Dimension, rank and invariant factors of the two maps around one degree.
#[derive(Clone, Debug)]
pub struct DegreeData {
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    /// Invariant factors `> 1` of the incoming map.
    pub torsion_in: Vec<BigInt>,
    /// Invariant factors `> 1` of the outgoing map.
    pub torsion_out: Vec<BigInt>,
}

impl DegreeData {
    pub fn over(&self, ring: Coefficients) -> HomologyGroup {
        let free = self.dim - self.rank_in - self.rank_out;
        match ring {
            Coefficients::Integers => HomologyGroup::from_parts(free, self.torsion_in.iter().cloned()),
            Coefficients::Mod(m) => mod_homology(free, &self.torsion_in, &self.torsion_out, m),
        }
    }
}

/// `H ⊗ ℤ/M ⊕ Tor(H⁺¹, ℤ/M)`, split into `ℤ/M` summands and the rest.
fn mod_homology(free: usize, tin: &[BigInt], tout: &[BigInt], m: u64) -> HomologyGroup {
    let mb = BigInt::from(m);
    let mut full = free;
    let mut rest = Vec::new();
    for d in tin.iter().chain(tout) {
        let g = d.gcd(&mb);
        if g == mb {
            full += 1;
        } else if !g.is_one() {
            rest.push(g);
        }
    }
    HomologyGroup::from_parts(full, rest)
}

pub fn degree_data(d_in: &SparseMatrix, d_out: &SparseMatrix) -> Result<DegreeData> {
    let dim = d_out.cols();
    if d_in.rows() != dim {
        return Err(Error::Precondition(format!(
            "incoming map has {} rows but the middle space has dimension {dim}",
            d_in.rows()
        )));
    }
    if d_in.cols() > 0 && d_out.rows() > 0 && !d_out.mul(d_in).is_zero() {
        return Err(Error::NonzeroComposition(format!("{}x{} after {}x{}", d_out.rows(), d_out.cols(), d_in.rows(), d_in.cols())));
    }
    let fin = invariant_factors(d_in);
    let fout = invariant_factors(d_out);
    Ok(DegreeData {
        dim,
        rank_in: fin.len(),
        rank_out: fout.len(),
        torsion_in: fin.into_iter().filter(|d| !d.is_one()).collect(),
        torsion_out: fout.into_iter().filter(|d| !d.is_one()).collect(),
    })
}

/// `ker(d_out) / im(d_in)` with the given coefficients.
///
/// Over `ℤ/M` the answer is read off the integral invariant factors through
/// the universal coefficient theorem.
pub fn homology_at(d_in: &SparseMatrix, d_out: &SparseMatrix, ring: Coefficients) -> Result<HomologyGroup> {
    if let Coefficients::Mod(m) = ring {
        if m == 0 {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
    }
    Ok(degree_data(d_in, d_out)?.over(ring))
}

/// Dimension of `ker(d_out)/im(d_in)` over `𝔽_p` (an independent route for prime moduli).
pub fn homology_dim_over_field(d_in: &SparseMatrix, d_out: &SparseMatrix, p: u64) -> usize {
    d_out.cols() - super::field::rank_over_field(d_in, p) - super::field::rank_over_field(d_out, p)
}
