//! Anderson's resolution `ℒ_z = ⊕_{y | z̄} 𝒜_{z/z(y)}[y]` of `𝒰_z`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::complex::GradedComplex;
use crate::error::{Error, Result};
use crate::formal_products::FormalProduct;
use crate::linalg::SparseMatrix;
use crate::norm_distribution::{columns_to_matrix, corestriction_a, Coords, Distribution};
use crate::system::NormSystem;

/// Koszul sign of local prime `i` inside the local squarefree mask `y`.
pub(crate) fn omega_local(i: usize, y: u32) -> i64 {
    if y >> i & 1 == 0 {
        0
    } else if (y & ((1 << i) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Basis symbol `[a, y]`: `a` indexes `A_z` (its stalk avoids `y`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LSymbol {
    pub y: u32,
    pub a: usize,
}

/// `ℒ_z` with its split differential.
#[derive(Clone, Debug)]
pub struct Anderson {
    dist: Distribution,
    basis: Vec<LSymbol>,
    index: HashMap<LSymbol, usize>,
    d1: Vec<SparseMatrix>,
    d2: Vec<SparseMatrix>,
}

impl Anderson {
    pub fn new(sys: &NormSystem, z: &FormalProduct) -> Result<Self> {
        Ok(Self::from_distribution(Distribution::new(sys, z)?))
    }

    /// Basis order: by `y` (as a formal product), then by `a`.
    pub fn from_distribution(dist: Distribution) -> Self {
        let frame = dist.frame();
        let full = frame.full_mask();
        let mut ys: Vec<u32> = (0..=full).collect();
        ys.sort_by_key(|&y| frame.squarefree(y));
        let mut basis = Vec::new();
        for &y in &ys {
            for a in dist.symbols_within(full & !y) {
                basis.push(LSymbol { y, a });
            }
        }
        let index = basis.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut l = Self { dist, basis, index, d1: Vec::new(), d2: Vec::new() };
        for i in 0..l.dist.frame().rank() {
            let (d1, d2) = l.split_piece(i);
            l.d1.push(d1);
            l.d2.push(d2);
        }
        l
    }

    fn split_piece(&self, i: usize) -> (SparseMatrix, SparseMatrix) {
        let n = self.basis.len();
        let (mut t1, mut t2) = (Vec::new(), Vec::new());
        for (c, s) in self.basis.iter().enumerate() {
            let w = omega_local(i, s.y);
            if w == 0 {
                continue;
            }
            let y = s.y & !(1 << i);
            for (a, v) in self.dist.norm_lift(i, s.a) {
                t1.push((self.index[&LSymbol { y, a }], c, -v * w));
            }
            for (a, v) in self.dist.poly_part(i, s.a) {
                t2.push((self.index[&LSymbol { y, a }], c, v * w));
            }
        }
        (SparseMatrix::from_triplets(n, n, t1), SparseMatrix::from_triplets(n, n, t2))
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn basis(&self) -> &[LSymbol] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn position(&self, s: LSymbol) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// Cohomological degree `−deg y` of each basis vector.
    pub fn degrees(&self) -> Vec<i64> {
        self.basis.iter().map(|s| -(s.y.count_ones() as i64)).collect()
    }

    /// `d_{1,x} = −ω N[z(x) a, y/x]` for local prime `i`.
    pub fn d1_piece(&self, i: usize) -> &SparseMatrix {
        &self.d1[i]
    }

    /// `d_{2,x} = ω p(x;Fr⁻¹)[a, y/x]` for local prime `i`.
    pub fn d2_piece(&self, i: usize) -> &SparseMatrix {
        &self.d2[i]
    }

    pub fn d1(&self) -> SparseMatrix {
        sum(self.len(), &self.d1)
    }

    pub fn d2(&self) -> SparseMatrix {
        sum(self.len(), &self.d2)
    }

    /// `d[a,y] = Σ_{x|y} ω(x,y) λ_{z(x)}[a, y/x]` on the whole basis.
    pub fn differential(&self) -> SparseMatrix {
        self.d1().add(&self.d2())
    }

    pub fn complex(&self) -> Result<GradedComplex> {
        GradedComplex::from_global(&self.degrees(), &self.differential())
    }

    /// Positions of the degree-0 basis vectors `[a, 𝟏]`, in order.
    pub fn degree_zero(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.basis[j].y == 0).collect()
    }

    /// `u: ℒ⁰_z → 𝒰_z`, `[a, 𝟏] ↦ reduce(a)`, as a `|G_z| × dim ℒ⁰` matrix.
    pub fn augmentation(&self) -> SparseMatrix {
        let r = self.dist.reduction_matrix();
        let zero = self.degree_zero();
        let a: Vec<usize> = zero.iter().map(|&j| self.basis[j].a).collect();
        r.select(&(0..r.rows()).collect::<Vec<_>>(), &a)
    }

    /// `σ_{z(x_i)}` acting on `ℒ_z` through the `a` coordinate.
    pub fn sigma_matrix(&self, i: usize) -> SparseMatrix {
        let s = self.dist.sigma_matrix(i, 1);
        let mut t = Vec::new();
        for (c, sym) in self.basis.iter().enumerate() {
            for (&a, v) in s.column(sym.a) {
                t.push((self.index[&LSymbol { y: sym.y, a }], c, v.clone()));
            }
        }
        SparseMatrix::from_triplets(self.len(), self.len(), t)
    }

    /// `λ_{y''}` applied to `a` (product of `λ_{z(x)}` over `x | y''`).
    fn lambda_product(&self, a: usize, ypp: u32) -> Result<Coords> {
        let mut v = Coords::from([(a, BigInt::one())]);
        for i in self.dist.frame().bits(ypp) {
            v = self.dist.lambda_local(i, &v)?;
        }
        Ok(v)
    }

    /// The map `C•_y → ℒ_z`, `y''e_{y'} ↦ λ_{y''}[a, y']`, for a symbol `a`
    /// of `B₀` whose stalk has support `z̄/y`. Columns follow [`koszul_basis`]
    /// on the local primes of `y`.
    pub fn koszul_embedding(&self, a: usize) -> Result<SparseMatrix> {
        let (mask, _) = self.dist.symbol(a);
        if self.dist.b0_position(a).is_none() {
            return Err(Error::Precondition("Koszul summands are indexed by B₀".into()));
        }
        let frame = self.dist.frame();
        let y = frame.full_mask() & !mask;
        let vars: Vec<usize> = frame.bits(y).collect();
        let mut cols = Vec::new();
        for (yp, ypp) in koszul_basis(vars.len()) {
            let (yp, ypp) = (spread(yp, &vars), spread(ypp, &vars));
            let mut col = Coords::new();
            for (b, v) in self.lambda_product(a, ypp)? {
                col.insert(self.index[&LSymbol { y: yp, a: b }], v);
            }
            cols.push(col);
        }
        Ok(columns_to_matrix(self.len(), &cols))
    }

    /// Lifts `cor_{w,z}` to `ℒ_w → ℒ_z`, `[a, y] ↦ [cor a, y]`.
    pub fn corestriction(small: &Anderson, big: &Anderson) -> Result<SparseMatrix> {
        let cor = corestriction_a(&small.dist, &big.dist)?;
        let (fw, fz) = (small.dist.frame(), big.dist.frame());
        let mut t = Vec::new();
        for (c, s) in small.basis.iter().enumerate() {
            let mut y = 0u32;
            for i in fw.bits(s.y) {
                y |= 1 << fz.local_index(fw.primes[i]).expect("w | z");
            }
            for (&a, v) in cor.column(s.a) {
                t.push((big.index[&LSymbol { y, a }], c, v.clone()));
            }
        }
        Ok(SparseMatrix::from_triplets(big.len(), small.len(), t))
    }
}

fn sum(n: usize, parts: &[SparseMatrix]) -> SparseMatrix {
    parts.iter().fold(SparseMatrix::zeros(n, n), |acc, m| acc.add(m))
}

fn spread(local: u32, vars: &[usize]) -> u32 {
    vars.iter().enumerate().filter(|(k, _)| local >> k & 1 == 1).fold(0, |m, (_, &i)| m | 1 << i)
}

/// Basis `(y', y'')` of the truncated Koszul complex on `k` variables: pairs of
/// disjoint subsets, ordered by `y'` then `y''`.
pub fn koszul_basis(k: usize) -> Vec<(u32, u32)> {
    let full = (1u32 << k) - 1;
    let mut out = Vec::new();
    for yp in 0..=full {
        for ypp in 0..=full {
            if yp & ypp == 0 {
                out.push((yp, ypp));
            }
        }
    }
    out
}

/// The truncated Koszul complex `C•_y` on `k` variables: basis `y'' e_{y'}`
/// in degree `−deg y'`, `d(y'' e_{y'}) = Σ_{x|y'} ω(x,y') x y'' e_{y'/x}`.
pub fn koszul_truncated(k: usize) -> Result<GradedComplex> {
    let basis = koszul_basis(k);
    let (d, degrees) = koszul_differential(&basis);
    GradedComplex::from_global(&degrees, &d)
}

pub(crate) fn koszul_differential(basis: &[(u32, u32)]) -> (SparseMatrix, Vec<i64>) {
    let pos: HashMap<(u32, u32), usize> = basis.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mut t = Vec::new();
    for (c, &(yp, ypp)) in basis.iter().enumerate() {
        for i in 0..32 {
            let w = omega_local(i, yp);
            if w != 0 {
                t.push((pos[&(yp & !(1 << i), ypp | 1 << i)], c, BigInt::from(w)));
            }
        }
    }
    let degrees = basis.iter().map(|(yp, _)| -(yp.count_ones() as i64)).collect();
    (SparseMatrix::from_triplets(basis.len(), basis.len(), t), degrees)
}

/// Koszul differential on the basis of [`koszul_basis`].
pub fn koszul_matrix(k: usize) -> SparseMatrix {
    koszul_differential(&koszul_basis(k)).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rational_rank, Coefficients, HomologyGroup};

    fn e1() -> NormSystem {
        NormSystem::new(
            "E1",
            vec!["x1".into(), "x2".into()],
            vec![vec![2], vec![4]],
            vec![vec![0, 3], vec![1, 0]],
            vec![vec![1.into(), (-1).into()], vec![1.into(), (-1).into()]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn omega_signs() {
        assert_eq!(omega_local(0, 0b111), 1);
        assert_eq!(omega_local(1, 0b111), -1);
        assert_eq!(omega_local(1, 0b101), 0);
    }

    #[test]
    fn e1_component_sizes_and_squares() {
        let sys = e1();
        let l = Anderson::new(&sys, &sys.parse_product("x1*x2").unwrap()).unwrap();
        let c = l.complex().unwrap();
        assert_eq!((c.dim(0), c.dim(-1), c.dim(-2)), (15, 8, 1));
        let d = l.differential();
        assert!(d.mul(&d).is_zero());
        let (d1, d2) = (l.d1(), l.d2());
        assert!(d1.mul(&d1).is_zero());
        assert!(d2.mul(&d2).is_zero());
        assert!(d1.mul(&d2).add(&d2.mul(&d1)).is_zero());
    }

    #[test]
    fn unit_target_is_a_point() {
        let sys = e1();
        let l = Anderson::new(&sys, &FormalProduct::unit()).unwrap();
        assert_eq!(l.len(), 1);
        assert!(l.differential().is_zero());
    }

    #[test]
    fn augmentation_kills_boundaries() {
        let sys = e1();
        let l = Anderson::new(&sys, &sys.parse_product("x1*x2").unwrap()).unwrap();
        let c = l.complex().unwrap();
        let u = l.augmentation();
        assert!(u.mul(&c.differential(-1)).is_zero());
        assert_eq!(rational_rank(&u), 8);
        assert_eq!(c.cohomology(0, Coefficients::Integers).unwrap(), HomologyGroup::free(8));
        assert!(c.cohomology(-1, Coefficients::Integers).unwrap().is_zero());
    }

    #[test]
    fn koszul_small_cases() {
        let c0 = koszul_truncated(0).unwrap();
        assert_eq!(c0.total_dim(), 1);
        let c2 = koszul_truncated(2).unwrap();
        assert_eq!(c2.cohomology(0, Coefficients::Integers).unwrap(), HomologyGroup::free(1));
        assert!(c2.cohomology(-1, Coefficients::Integers).unwrap().is_zero());
        assert!(c2.cohomology(-2, Coefficients::Integers).unwrap().is_zero());
    }

    #[test]
    fn differential_commutes_with_group() {
        let sys = e1();
        let l = Anderson::new(&sys, &sys.parse_product("x1*x2").unwrap()).unwrap();
        let d = l.differential();
        for i in 0..2 {
            let s = l.sigma_matrix(i);
            assert_eq!(d.mul(&s), s.mul(&d));
        }
    }
}
