//! Bounded cochain complexes of free `ℤ`-modules.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::homology::{degree_data, Coefficients, DegreeData, HomologyGroup};
use crate::linalg::SparseMatrix;

/// A cochain complex `C^lo → C^{lo+1} → …` with explicit differentials.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    lo: i64,
    dims: Vec<usize>,
    /// `diffs[i]` maps degree `lo + i` to `lo + i + 1`.
    diffs: Vec<SparseMatrix>,
}

impl GradedComplex {
    /// Builds a complex from per-degree dimensions and the maps between them;
    /// checks shapes and that consecutive maps compose to zero.
    pub fn new(lo: i64, dims: Vec<usize>, diffs: Vec<SparseMatrix>) -> Result<Self> {
        if diffs.len() + 1 != dims.len().max(1) {
            return Err(Error::Precondition(format!(
                "{} degrees need {} differentials, got {}",
                dims.len(),
                dims.len().saturating_sub(1),
                diffs.len()
            )));
        }
        for (i, m) in diffs.iter().enumerate() {
            if m.cols() != dims[i] || m.rows() != dims[i + 1] {
                return Err(Error::Precondition(format!(
                    "differential out of degree {} has shape {}x{}, expected {}x{}",
                    lo + i as i64,
                    m.rows(),
                    m.cols(),
                    dims[i + 1],
                    dims[i]
                )));
            }
        }
        let c = Self { lo, dims, diffs };
        c.check_squares()?;
        Ok(c)
    }

    /// Slices a complex out of one global differential on a graded basis.
    ///
    /// `degrees[j]` is the degree of basis vector `j`; `total` must only map
    /// degree `n` into degree `n + 1`.
    pub fn from_global(degrees: &[i64], total: &SparseMatrix) -> Result<Self> {
        let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (j, &n) in degrees.iter().enumerate() {
            by_degree.entry(n).or_default().push(j);
        }
        for (r, c, _) in total.iter() {
            if degrees[r] != degrees[c] + 1 {
                return Err(Error::Precondition(format!(
                    "differential maps degree {} to degree {}",
                    degrees[c], degrees[r]
                )));
            }
        }
        let Some((&lo, _)) = by_degree.first_key_value() else {
            return Self::new(0, Vec::new(), Vec::new());
        };
        let hi = *by_degree.last_key_value().unwrap().0;
        let empty = Vec::new();
        let idx = |n: i64| by_degree.get(&n).unwrap_or(&empty);
        let dims = (lo..=hi).map(|n| idx(n).len()).collect();
        let diffs = (lo..hi).map(|n| total.select(idx(n + 1), idx(n))).collect();
        Self::new(lo, dims, diffs)
    }

    pub fn lowest_degree(&self) -> i64 {
        self.lo
    }

    pub fn highest_degree(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }

    pub fn dim(&self, n: i64) -> usize {
        self.slot(n).map_or(0, |i| self.dims[i])
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    fn slot(&self, n: i64) -> Option<usize> {
        let i = n - self.lo;
        (i >= 0 && (i as usize) < self.dims.len()).then_some(i as usize)
    }

    /// The map `C^n → C^{n+1}` (a zero matrix of the right shape outside the range).
    pub fn differential(&self, n: i64) -> SparseMatrix {
        match self.slot(n) {
            Some(i) if i < self.diffs.len() => self.diffs[i].clone(),
            _ => SparseMatrix::zeros(self.dim(n + 1), self.dim(n)),
        }
    }

    pub fn check_squares(&self) -> Result<()> {
        for (i, pair) in self.diffs.windows(2).enumerate() {
            let prod = pair[1].mul(&pair[0]);
            if !prod.is_zero() {
                return Err(Error::NonzeroComposition(format!(
                    "d∘d out of degree {} has {} nonzero entries",
                    self.lo + i as i64,
                    prod.nnz()
                )));
            }
        }
        Ok(())
    }

    pub fn degree_data(&self, n: i64) -> Result<DegreeData> {
        degree_data(&self.differential(n - 1), &self.differential(n))
    }

    /// `H^n` with the given coefficients.
    pub fn cohomology(&self, n: i64, ring: Coefficients) -> Result<HomologyGroup> {
        if let Coefficients::Mod(0) = ring {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        Ok(self.degree_data(n)?.over(ring))
    }
}

/// Puts `m` on each of `copies` diagonal blocks of a basis indexed `outer * copies + inner`.
pub(crate) fn kron_identity(m: &SparseMatrix, copies: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        m.rows() * copies,
        m.cols() * copies,
        m.iter()
            .flat_map(|(r, c, v)| (0..copies).map(move |k| (r * copies + k, c * copies + k, v.clone()))),
    )
}

/// Diagonal matrix with the given `±1` (or any integer) entries.
pub(crate) fn diagonal(entries: impl IntoIterator<Item = i64>) -> SparseMatrix {
    let v: Vec<i64> = entries.into_iter().collect();
    let n = v.len();
    SparseMatrix::from_triplets(n, n, v.into_iter().enumerate().map(|(i, s)| (i, i, s.into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn cyclic_group_segment() {
        // ℤ --0--> ℤ --2--> ℤ in degrees 1, 2, 3.
        let c = GradedComplex::new(
            1,
            vec![1, 1, 1],
            vec![SparseMatrix::zeros(1, 1), SparseMatrix::from_i64(&[vec![2]])],
        )
        .unwrap();
        let h2 = c.cohomology(2, Coefficients::Integers).unwrap();
        assert_eq!(h2.free_rank, 0);
        let h3 = c.cohomology(3, Coefficients::Integers).unwrap();
        assert_eq!(h3.torsion, vec![BigInt::from(2)]);
        assert!(c.cohomology(1, Coefficients::Integers).unwrap() == HomologyGroup::free(1));
        assert!(c.cohomology(7, Coefficients::Integers).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_shapes_and_nonzero_squares() {
        assert!(GradedComplex::new(0, vec![1, 2], vec![SparseMatrix::zeros(1, 1)]).is_err());
        let one = SparseMatrix::from_i64(&[vec![1]]);
        let e = GradedComplex::new(0, vec![1, 1, 1], vec![one.clone(), one]).unwrap_err();
        assert!(matches!(e, Error::NonzeroComposition(_)));
    }

    #[test]
    fn slices_global_differential() {
        // Basis: v0 in degree 0, v1 in degree 1, v2 in degree 0; d v0 = 3 v1.
        let total = SparseMatrix::from_triplets(3, 3, [(1, 0, BigInt::from(3))]);
        let c = GradedComplex::from_global(&[0, 1, 0], &total).unwrap();
        assert_eq!(c.dim(0), 2);
        assert_eq!(c.cohomology(0, Coefficients::Integers).unwrap(), HomologyGroup::free(1));
        assert_eq!(c.cohomology(1, Coefficients::Integers).unwrap().torsion, vec![BigInt::from(3)]);
        let bad = SparseMatrix::from_triplets(3, 3, [(2, 0, BigInt::from(1))]);
        assert!(GradedComplex::from_global(&[0, 1, 0], &bad).is_err());
    }

    #[test]
    fn kron_places_blocks() {
        let m = SparseMatrix::from_i64(&[vec![0, 5]]);
        let k = kron_identity(&m, 2);
        assert_eq!(k.rows(), 2);
        assert_eq!(k.get(0, 2), BigInt::from(5));
        assert_eq!(k.get(1, 3), BigInt::from(5));
        assert_eq!(k.nnz(), 2);
    }
}
