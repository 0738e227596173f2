//! Group cohomology of `G_z` with coefficients in `ℤ` and in `𝒰_z`.
//!
//! Everything is built on the tensor product `P_z•` of the 2-periodic
//! resolutions of the cyclic factors `G_{z(x)}`. Its basis symbols `[w]` are
//! formal products with `w̄ | z̄`; here they are exponent vectors over the
//! local primes of `z`. `P_z•` is infinite, so every complex is truncated in
//! `deg w` and reports only cover a guaranteed band of degrees.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::anderson::{omega_local, Anderson, LSymbol};
use crate::complex::{diagonal, kron_identity, GradedComplex};
use crate::error::{Error, Result};
use crate::formal_products::FormalProduct;
use crate::linalg::homology::serialize_ints;
use crate::linalg::{Coefficients, HomologyGroup, SparseMatrix};
use crate::norm_distribution::Distribution;
use crate::system::{Frame, NormSystem};

/// Exponent vectors of length `k` with total degree `≤ max_deg`, ordered by
/// degree and then lexicographically.
#[derive(Clone, Debug)]
pub struct Monomials {
    list: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl Monomials {
    pub fn new(k: usize, max_deg: u32) -> Self {
        let mut list = Vec::new();
        let mut cur = vec![0u32; k];
        fill(&mut list, &mut cur, 0, max_deg);
        list.sort_by(|a, b| (degree(a), a).cmp(&(degree(b), b)));
        let index = list.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { list, index }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.list[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.list.iter().map(Vec::as_slice)
    }

    pub fn position(&self, w: &[u32]) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Index of `w·x_i`, if it is inside the truncation.
    pub fn times(&self, w: usize, i: usize) -> Option<usize> {
        let mut v = self.list[w].clone();
        v[i] += 1;
        self.position(&v)
    }
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for e in 0..=left {
        cur[pos] = e;
        fill(out, cur, pos + 1, left - e);
    }
    cur[pos] = 0;
}

pub fn degree(w: &[u32]) -> u32 {
    w.iter().sum()
}

/// Support mask of an exponent vector.
pub fn support(w: &[u32]) -> u32 {
    w.iter().enumerate().filter(|(_, &e)| e > 0).fold(0, |m, (i, _)| m | 1 << i)
}

/// `(−1)^{Σ_{x'<x_i} v_{x'}(w)}`.
fn sign_below(w: &[u32], i: usize) -> i64 {
    if w[..i].iter().sum::<u32>() % 2 == 0 {
        1
    } else {
        -1
    }
}

fn parity(n: u32) -> i64 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Builds the product `x_0^{w_0}·…` in system indexing.
fn product(frame: &Frame, w: &[u32]) -> FormalProduct {
    let mut exps = vec![0u32; frame.primes.iter().max().map_or(0, |m| m + 1)];
    for (i, &e) in w.iter().enumerate() {
        exps[frame.primes[i]] = e;
    }
    FormalProduct::from_exponents(exps)
}

// ---------------------------------------------------------------------------
// Projective resolution and the trivial module
// ---------------------------------------------------------------------------

/// Truncation of `P_z•` to `deg w ≤ max_deg`, graded cohomologically by
/// `−deg w`; the basis is `g[w]` indexed `w * |G_z| + g`.
///
/// `∂[w] = Σ_{x|w} (−1)^{Σ_{x'<x} v_{x'}(w)} α_{z(x)}[w/x]` with `α = σ − 1`
/// for `v_x(w)` odd and `N` for `v_x(w)` even.
pub fn build_p(sys: &NormSystem, z: &FormalProduct, max_deg: u32) -> Result<GradedComplex> {
    let frame = sys.frame(z)?;
    let k = frame.rank();
    let full = frame.full_mask();
    let gsize = frame.group_size(full);
    let monos = Monomials::new(k, max_deg);
    let n = monos.len() * gsize;
    let mut t = Vec::new();
    for (wi, w) in monos.iter().enumerate() {
        for g in 0..gsize {
            let col = wi * gsize + g;
            let res = frame.decode(full, g);
            for i in 0..k {
                if w[i] == 0 {
                    continue;
                }
                let mut lower = w.to_vec();
                lower[i] -= 1;
                let li = monos.position(&lower).expect("lower degrees are present");
                let s = BigInt::from(sign_below(w, i));
                let ord = frame.orders[i];
                let mut h = res.clone();
                if w[i] % 2 == 1 {
                    h[i] = (h[i] + 1) % ord;
                    t.push((li * gsize + frame.encode(full, &h), col, s.clone()));
                    t.push((li * gsize + g, col, -s));
                } else {
                    for e in 0..ord {
                        h[i] = e;
                        t.push((li * gsize + frame.encode(full, &h), col, s.clone()));
                    }
                }
            }
        }
    }
    let degrees: Vec<i64> = monos.iter().flat_map(|w| std::iter::repeat_n(-(degree(w) as i64), gsize)).collect();
    GradedComplex::from_global(&degrees, &SparseMatrix::from_triplets(n, n, t))
}

/// `Hom_{G_z}(P_z•, ℤ)` restricted to the symbols `[w]` whose support
/// contains `required`; `δ[w] = Σ_x sign · a_x [wx]` with `a_x = |G_{z(x)}|`
/// for `v_x(w)` odd and `0` for even.
pub fn build_i(frame: &Frame, max_deg: u32, required: u32) -> Result<(GradedComplex, Vec<Vec<u32>>)> {
    let monos = Monomials::new(frame.rank(), max_deg);
    let keep: Vec<usize> = (0..monos.len()).filter(|&i| support(monos.get(i)) & required == required).collect();
    let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    let mut t = Vec::new();
    for (col, &wi) in keep.iter().enumerate() {
        let w = monos.get(wi);
        for i in 0..frame.rank() {
            if w[i] % 2 == 1 {
                if let Some(up) = monos.times(wi, i) {
                    t.push((pos[&up], col, BigInt::from(sign_below(w, i) * frame.orders[i] as i64)));
                }
            }
        }
    }
    let degrees: Vec<i64> = keep.iter().map(|&i| degree(monos.get(i)) as i64).collect();
    let words = keep.iter().map(|&i| monos.get(i).to_vec()).collect();
    let n = keep.len();
    Ok((GradedComplex::from_global(&degrees, &SparseMatrix::from_triplets(n, n, t))?, words))
}

/// The total complex `⊕_{y' | y} Hom(P_{z/z(y')}, ℤ)` whose horizontal maps
/// are `−Σ_{x | y/y'} ω(x, y/y') res_x`; graded by `deg w + deg y'`.
pub fn build_restriction_complex(frame: &Frame, y: u32, max_deg: u32) -> Result<GradedComplex> {
    let monos = Monomials::new(frame.rank(), max_deg);
    let subs: Vec<u32> = (0..=y).filter(|s| s & !y == 0).collect();
    let mut basis: Vec<(u32, usize)> = Vec::new();
    for &yp in &subs {
        for wi in 0..monos.len() {
            if support(monos.get(wi)) & yp == 0 {
                basis.push((yp, wi));
            }
        }
    }
    let pos: HashMap<(u32, usize), usize> = basis.iter().enumerate().map(|(j, b)| (*b, j)).collect();
    let mut t = Vec::new();
    for (col, &(yp, wi)) in basis.iter().enumerate() {
        let w = monos.get(wi);
        for i in 0..frame.rank() {
            if w[i] % 2 == 1 {
                if let Some(up) = monos.times(wi, i) {
                    t.push((pos[&(yp, up)], col, BigInt::from(sign_below(w, i) * frame.orders[i] as i64)));
                }
            }
            let rest = y & !yp;
            let om = omega_local(i, rest);
            if om != 0 && w[i] == 0 {
                let s = -om * parity(degree(w));
                t.push((pos[&(yp | 1 << i, wi)], col, BigInt::from(s)));
            }
        }
    }
    let degrees: Vec<i64> = basis.iter().map(|&(yp, wi)| (degree(monos.get(wi)) + yp.count_ones()) as i64).collect();
    let n = basis.len();
    GradedComplex::from_global(&degrees, &SparseMatrix::from_triplets(n, n, t))
}

/// Closed-form `H_{ℤ,w}` blocks: `(degree, copies, m_w)` for a nonempty support,
/// or `(0, 1, 0)` standing for `ℤ` when `w = 𝟏`.
fn trivial_blocks(orders: &[u64], w: &[u32]) -> Vec<(u32, u64, u64)> {
    let supp = support(w);
    if supp == 0 {
        return vec![(0, 1, 0)];
    }
    let t = supp.count_ones();
    let m = (0..orders.len()).filter(|i| supp >> i & 1 == 1).fold(0u64, |g, i| g.gcd(&orders[i]));
    (1..=t).map(|i| (2 * degree(w) - t + i, binomial(t - 1, i - 1), m)).collect()
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn block_group(copies: u64, m: u64) -> HomologyGroup {
    if m == 0 {
        HomologyGroup::free(copies as usize)
    } else {
        HomologyGroup::from_parts(0, std::iter::repeat_n(BigInt::from(m), copies as usize))
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_ints")]
    pub torsion: Vec<BigInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lineage: Option<Vec<String>>,
}

impl DegreeReport {
    pub fn group(&self) -> HomologyGroup {
        HomologyGroup { free_rank: self.free_rank, torsion: self.torsion.clone() }
    }
}

/// Cohomology in the degrees `band.0 ..= band.1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub system: String,
    pub target: String,
    pub coefficients: String,
    pub q_max: u32,
    pub band: (i64, i64),
    pub degrees: Vec<DegreeReport>,
}

impl CohomologyReport {
    fn new(sys: &NormSystem, z: &FormalProduct, ring: Coefficients, q_max: u32, groups: Vec<HomologyGroup>) -> Self {
        let coefficients = match ring {
            Coefficients::Integers => "Z".to_string(),
            Coefficients::Mod(m) => format!("Z/{m}"),
        };
        let degrees = groups
            .into_iter()
            .enumerate()
            .map(|(n, g)| DegreeReport { degree: n as i64, free_rank: g.free_rank, torsion: g.torsion, lineage: None })
            .collect();
        Self {
            system: sys.name().to_string(),
            target: sys.display(z),
            coefficients,
            q_max,
            band: (0, q_max as i64 - 1),
            degrees,
        }
    }

    pub fn degree(&self, n: i64) -> Result<&DegreeReport> {
        if n < self.band.0 || n > self.band.1 {
            return Err(Error::BandExceeded { requested: n, max: self.band.1 });
        }
        Ok(&self.degrees[(n - self.band.0) as usize])
    }

    pub fn groups(&self) -> Vec<HomologyGroup> {
        self.degrees.iter().map(DegreeReport::group).collect()
    }

    /// `true` when both reports agree on every degree of `self`'s band.
    pub fn agrees_within_band(&self, other: &Self) -> bool {
        (self.band.0..=self.band.1).all(|n| match (self.degree(n), other.degree(n)) {
            (Ok(a), Ok(b)) => a.free_rank == b.free_rank && a.torsion == b.torsion,
            _ => false,
        })
    }
}

fn band_groups(c: &GradedComplex, q_max: u32, ring: Coefficients) -> Result<Vec<HomologyGroup>> {
    (0..q_max as i64).map(|n| c.cohomology(n, ring)).collect()
}

/// Computed `H^q(G_z, ℤ)` (or `ℤ/M`) for `q < q_max` from the cochain complex.
pub fn trivial_cohomology(sys: &NormSystem, z: &FormalProduct, q_max: u32, ring: Coefficients) -> Result<CohomologyReport> {
    let frame = sys.frame(z)?;
    let (c, _) = build_i(&frame, q_max + 1, 0)?;
    Ok(CohomologyReport::new(sys, z, ring, q_max, band_groups(&c, q_max, ring)?))
}

/// Closed-form `H^q(G_z, ℤ) = ⊕_{w̄|z̄} H_{ℤ,w}` for `q < q_max`.
pub fn predicted_trivial(sys: &NormSystem, z: &FormalProduct, q_max: u32) -> Result<CohomologyReport> {
    let frame = sys.frame(z)?;
    let groups = predicted_blocks(&frame, q_max, |_| [0u32]);
    Ok(CohomologyReport::new(sys, z, Coefficients::Integers, q_max, groups))
}

// Sum over (y, w) with y ⊆ w̄ ⊆ z̄ of H_{ℤ,w} shifted down by deg y; the
// `ys` callback lists which y-masks contribute for a support.
fn predicted_blocks<F, I>(frame: &Frame, q_max: u32, ys: F) -> Vec<HomologyGroup>
where
    F: Fn(u32) -> I,
    I: IntoIterator<Item = u32>,
{
    let k = frame.rank() as u32;
    let monos = Monomials::new(frame.rank(), q_max + k);
    let mut free = vec![0usize; q_max as usize];
    let mut tors: Vec<Vec<BigInt>> = vec![Vec::new(); q_max as usize];
    for w in monos.iter() {
        for y in ys(support(w)) {
            let shift = y.count_ones() as i64;
            for (q, copies, m) in trivial_blocks(&frame.orders, w) {
                let n = q as i64 - shift;
                if n < 0 || n >= q_max as i64 {
                    continue;
                }
                let g = block_group(copies, m);
                free[n as usize] += g.free_rank;
                tors[n as usize].extend(g.torsion);
            }
        }
    }
    free.into_iter().zip(tors).map(|(f, t)| HomologyGroup::from_parts(f, t)).collect()
}

fn submasks(s: u32) -> Vec<u32> {
    (0..=s).filter(|m| m & !s == 0).collect()
}

pub fn theorem_b_applies(sys: &NormSystem, z: &FormalProduct) -> Result<()> {
    sys.check_target(z)?;
    for x in z.primes() {
        if !sys.poly_at_one(x).is_zero() {
            return Err(Error::Precondition(format!(
                "p({};1) = {} is not zero",
                sys.prime_name(x),
                sys.poly_at_one(x)
            )));
        }
    }
    Ok(())
}

pub fn theorem_a_applies(sys: &NormSystem, z: &FormalProduct, m: u64) -> Result<()> {
    sys.check_target(z)?;
    if m == 0 {
        return Err(Error::Precondition("modulus must be positive".into()));
    }
    let mb = BigInt::from(m);
    for x in z.primes() {
        let n = sys.order(x, z.valuation(x))?;
        if n % m != 0 {
            return Err(Error::Precondition(format!("{m} does not divide |G_{{z({})}}| = {n}", sys.prime_name(x))));
        }
        if !(sys.poly_at_one(x) % &mb).is_zero() {
            return Err(Error::Precondition(format!(
                "{m} does not divide p({};1) = {}",
                sys.prime_name(x),
                sys.poly_at_one(x)
            )));
        }
    }
    Ok(())
}

/// `H*(G_z, 𝒰_z) = ⊕_{y | w̄ | z̄} H_{ℤ,w}[y]` when `p(x;1) = 0` for all `x | z`.
pub fn predicted_theorem_b(sys: &NormSystem, z: &FormalProduct, q_max: u32) -> Result<CohomologyReport> {
    theorem_b_applies(sys, z)?;
    let frame = sys.frame(z)?;
    let groups = predicted_blocks(&frame, q_max, submasks);
    Ok(CohomologyReport::new(sys, z, Coefficients::Integers, q_max, groups))
}

/// Labels `(y, w)` with `y | w̄ | z̄` and `deg w − deg y = n`, per degree `n < q_max`.
pub fn theorem_a_pairs(frame: &Frame, q_max: u32) -> Vec<Vec<(u32, Vec<u32>)>> {
    let k = frame.rank() as u32;
    let monos = Monomials::new(frame.rank(), q_max + k);
    let mut out = vec![Vec::new(); q_max as usize];
    for w in monos.iter() {
        for y in submasks(support(w)) {
            let n = degree(w) as i64 - y.count_ones() as i64;
            if (0..q_max as i64).contains(&n) {
                out[n as usize].push((y, w.to_vec()));
            }
        }
    }
    out
}

fn label(sys: &NormSystem, frame: &Frame, y: u32, w: &[u32]) -> String {
    format!("c({}, {})", sys.display(&frame.squarefree(y)), sys.display(&product(frame, w)))
}

/// Prediction: `H^n(G_z, 𝒰_z/M𝒰_z)` is free over `ℤ/M` on the classes `c(y, w)`.
pub fn predicted_theorem_a(sys: &NormSystem, z: &FormalProduct, m: u64, q_max: u32) -> Result<CohomologyReport> {
    theorem_a_applies(sys, z, m)?;
    let frame = sys.frame(z)?;
    let pairs = theorem_a_pairs(&frame, q_max);
    let groups = pairs.iter().map(|p| HomologyGroup::free(p.len())).collect();
    let mut report = CohomologyReport::new(sys, z, Coefficients::Mod(m), q_max, groups);
    for (d, p) in report.degrees.iter_mut().zip(&pairs) {
        d.lineage = Some(p.iter().map(|(y, w)| label(sys, &frame, *y, w)).collect());
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The Hom complex K = Hom(P, ℒ)
// ---------------------------------------------------------------------------

/// Which pair of differentials to use on `𝐊_z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Plain,
    Tilde,
}

/// `𝐊_z = Hom_{G_z}(P_z•, ℒ_z)` on the basis `[a, y, w]`, truncated at
/// `deg w ≤ max_w`, indexed `l * |W| + w` for the `ℒ_z` position `l`.
#[derive(Clone, Debug)]
pub struct KComplex {
    l: Anderson,
    monos: Monomials,
    d1: Vec<SparseMatrix>,
    d2: Vec<SparseMatrix>,
    d3: Vec<SparseMatrix>,
    q_max: u32,
}

impl KComplex {
    /// Truncates at `deg w ≤ q_max + deg z̄`, enough for degrees `< q_max`.
    pub fn new(sys: &NormSystem, z: &FormalProduct, q_max: u32) -> Result<Self> {
        let l = Anderson::new(sys, z)?;
        let k = l.distribution().frame().rank();
        let monos = Monomials::new(k, q_max + k as u32);
        let nw = monos.len();
        let d1 = (0..k).map(|i| kron_identity(l.d1_piece(i), nw)).collect();
        let d2 = (0..k).map(|i| kron_identity(l.d2_piece(i), nw)).collect();
        let mut kc = Self { l, monos, d1, d2, d3: Vec::new(), q_max };
        kc.d3 = (0..k).map(|i| kc.delta_piece(i)).collect();
        Ok(kc)
    }

    fn nw(&self) -> usize {
        self.monos.len()
    }

    pub fn len(&self) -> usize {
        self.l.len() * self.nw()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn q_max(&self) -> u32 {
        self.q_max
    }

    pub fn rank(&self) -> usize {
        self.d1.len()
    }

    pub fn anderson(&self) -> &Anderson {
        &self.l
    }

    pub fn monomials(&self) -> &Monomials {
        &self.monos
    }

    /// `(ℒ symbol, w)` of basis vector `j`.
    pub fn symbol(&self, j: usize) -> (LSymbol, &[u32]) {
        (self.l.basis()[j / self.nw()], self.monos.get(j % self.nw()))
    }

    /// Total degree `deg w − deg y`.
    pub fn degrees(&self) -> Vec<i64> {
        (0..self.len())
            .map(|j| {
                let (s, w) = self.symbol(j);
                degree(w) as i64 - s.y.count_ones() as i64
            })
            .collect()
    }

    // d_{3,x}[a,y,w] = (−1)^{deg y} (−1)^{Σ_{x'<x} v_{x'}(w)} α_{z(x)}[a, y, wx]
    // with α = 1 − σ for v_x(w) even and N for v_x(w) odd.
    fn delta_piece(&self, i: usize) -> SparseMatrix {
        let dist = self.l.distribution();
        let id = SparseMatrix::identity(dist.len());
        let one_minus_sigma = id.sub(&dist.sigma_matrix(i, 1));
        let norm = dist.norm_matrix(i);
        let nw = self.nw();
        let mut t = Vec::new();
        for (li, s) in self.l.basis().iter().enumerate() {
            for wi in 0..nw {
                let Some(up) = self.monos.times(wi, i) else { continue };
                let w = self.monos.get(wi);
                let alpha = if w[i].is_multiple_of(2) { &one_minus_sigma } else { &norm };
                let sign = parity(s.y.count_ones()) * sign_below(w, i);
                for (&a, v) in alpha.column(s.a) {
                    let row = self.l.position(LSymbol { y: s.y, a }).expect("σ keeps the stalk");
                    t.push((row * nw + up, li * nw + wi, v * sign));
                }
            }
        }
        SparseMatrix::from_triplets(self.len(), self.len(), t)
    }

    pub fn d1_piece(&self, i: usize) -> &SparseMatrix {
        &self.d1[i]
    }

    pub fn d2_piece(&self, i: usize) -> &SparseMatrix {
        &self.d2[i]
    }

    pub fn d3_piece(&self, i: usize) -> &SparseMatrix {
        &self.d3[i]
    }

    /// All pieces `d_{j,x}` labelled `(j, local prime)`.
    pub fn pieces(&self, conv: Convention) -> Vec<((usize, usize), SparseMatrix)> {
        let mut out = Vec::new();
        for i in 0..self.rank() {
            out.push(((1, i), self.convert(conv, 1, i, &self.d1[i])));
            out.push(((2, i), self.convert(conv, 2, i, &self.d2[i])));
            out.push(((3, i), self.convert(conv, 3, i, &self.d3[i])));
        }
        out
    }

    fn convert(&self, conv: Convention, j: usize, i: usize, m: &SparseMatrix) -> SparseMatrix {
        match conv {
            Convention::Plain => m.clone(),
            Convention::Tilde if j < 3 => m.mul(&self.sign_diag(|_, w| sign_below(w, i))),
            Convention::Tilde => m.mul(&self.sign_diag(|y, _| {
                parity(y.count_ones()) * parity((y & ((2u32 << i) - 1)).count_ones())
            })),
        }
    }

    fn sign_diag(&self, f: impl Fn(u32, &[u32]) -> i64) -> SparseMatrix {
        diagonal((0..self.len()).map(|j| {
            let (s, w) = self.symbol(j);
            f(s.y, w)
        }))
    }

    fn sum(&self, conv: Convention, which: &[usize]) -> SparseMatrix {
        self.pieces(conv)
            .into_iter()
            .filter(|((j, _), _)| which.contains(j))
            .fold(SparseMatrix::zeros(self.len(), self.len()), |acc, (_, m)| acc.add(&m))
    }

    /// `d = d₁ + d₂` (or `d̃`).
    pub fn d(&self, conv: Convention) -> SparseMatrix {
        self.sum(conv, &[1, 2])
    }

    /// `δ = Σ_x d_{3,x}` (or `δ̃`).
    pub fn delta(&self, conv: Convention) -> SparseMatrix {
        self.sum(conv, &[3])
    }

    pub fn total(&self, conv: Convention) -> SparseMatrix {
        self.sum(conv, &[1, 2, 3])
    }

    /// `ε[a,y,w] = (−1)^{Σ_{x'<x} v_x(y) v_{x'}(w)}`.
    pub fn epsilon(&self) -> SparseMatrix {
        self.sign_diag(|y, w| (0..w.len()).filter(|&i| y >> i & 1 == 1).map(|i| sign_below(w, i)).product())
    }

    /// Checks `d_{j,x}² = 0` and `d_{j,x} d_{j',x'} + d_{j',x'} d_{j,x} = 0`.
    pub fn check_identities(&self, conv: Convention) -> Result<()> {
        let pieces = self.pieces(conv);
        for (a, (la, ma)) in pieces.iter().enumerate() {
            for (lb, mb) in &pieces[a..] {
                let prod = if la == lb { ma.mul(ma) } else { ma.mul(mb).add(&mb.mul(ma)) };
                if !prod.is_zero() {
                    return Err(Error::IdentityFailure(format!(
                        "{conv:?} pieces d_{}{} and d_{}{} do not anticommute",
                        la.0, la.1, lb.0, lb.1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn complex(&self, conv: Convention) -> Result<GradedComplex> {
        GradedComplex::from_global(&self.degrees(), &self.total(conv))
    }

    /// `H^n(𝐊_z)` for `n < q_max`.
    pub fn report(&self, sys: &NormSystem, ring: Coefficients) -> Result<CohomologyReport> {
        let c = self.complex(Convention::Plain)?;
        let z = self.l.distribution().frame().z.clone();
        Ok(CohomologyReport::new(sys, &z, ring, self.q_max, band_groups(&c, self.q_max, ring)?))
    }

    /// Positions of the `𝐐_z` generators `[𝟏, y, w]` with `y | w̄`.
    pub fn quotient_positions(&self) -> Vec<usize> {
        let unit = self.l.distribution().unit_symbol();
        (0..self.len())
            .filter(|&j| {
                let (s, w) = self.symbol(j);
                s.a == unit && s.y & !support(w) == 0
            })
            .collect()
    }

    fn split(&self) -> (Vec<usize>, Vec<usize>) {
        let q = self.quotient_positions();
        let mut in_q = vec![false; self.len()];
        for &j in &q {
            in_q[j] = true;
        }
        let s = (0..self.len()).filter(|&j| !in_q[j]).collect();
        (q, s)
    }

    /// Whether `𝐒` is stable under `d₁`, `d₂` and `δ` (modulo `M` if given).
    pub fn s_is_stable(&self, modulus: Option<u64>) -> bool {
        let (q, s) = self.split();
        [1usize, 2, 3].iter().all(|&j| {
            let block = self.sum(Convention::Plain, &[j]).select(&q, &s);
            match modulus {
                None => block.is_zero(),
                Some(m) => block.is_zero_mod(&BigInt::from(m)),
            }
        })
    }

    /// `𝐐_z = 𝐊_z / 𝐒` with the induced differential.
    pub fn quotient_complex(&self) -> Result<GradedComplex> {
        let (q, _) = self.split();
        let degrees = self.degrees();
        let qd: Vec<i64> = q.iter().map(|&j| degrees[j]).collect();
        GradedComplex::from_global(&qd, &self.total(Convention::Plain).select(&q, &q))
    }

    /// The subcomplex `𝐒` itself.
    pub fn s_complex(&self) -> Result<GradedComplex> {
        let (_, s) = self.split();
        let degrees = self.degrees();
        let sd: Vec<i64> = s.iter().map(|&j| degrees[j]).collect();
        GradedComplex::from_global(&sd, &self.total(Convention::Plain).select(&s, &s))
    }

    /// Lineage labels `c(y, w)` of the `𝐐_z` generators in degree `n`.
    pub fn lineage(&self, sys: &NormSystem, n: i64) -> Vec<String> {
        let frame = self.l.distribution().frame();
        let degrees = self.degrees();
        self.quotient_positions()
            .into_iter()
            .filter(|&j| degrees[j] == n)
            .map(|j| {
                let (s, w) = self.symbol(j);
                label(sys, frame, s.y, w)
            })
            .collect()
    }
}

/// `𝐊̄_z = Hom_{G_z}(P_z•, 𝒰_z)` computed directly on the `B₀` basis of `𝒰_z`,
/// together with the comparison map `u: 𝐊_z → 𝐊̄_z`.
#[derive(Clone, Debug)]
pub struct DirectComplex {
    pub complex: GradedComplex,
    /// `u` on the whole basis of `𝐊_z`.
    pub u: SparseMatrix,
    pub total: SparseMatrix,
}

pub fn build_direct(k: &KComplex) -> Result<DirectComplex> {
    let dist: &Distribution = k.l.distribution();
    let r = dist.reduction_matrix();
    let incl = dist.b0_inclusion();
    let rank = dist.rank();
    let monos = &k.monos;
    let nw = monos.len();
    let n = rank * nw;
    let mut t = Vec::new();
    for i in 0..dist.frame().rank() {
        let id = SparseMatrix::identity(dist.len());
        let oms = r.mul(&id.sub(&dist.sigma_matrix(i, 1))).mul(&incl);
        let nm = r.mul(&dist.norm_matrix(i)).mul(&incl);
        for b in 0..rank {
            for wi in 0..nw {
                let Some(up) = monos.times(wi, i) else { continue };
                let w = monos.get(wi);
                let alpha = if w[i].is_multiple_of(2) { &oms } else { &nm };
                for (&b2, v) in alpha.column(b) {
                    t.push((b2 * nw + up, b * nw + wi, v * sign_below(w, i)));
                }
            }
        }
    }
    let total = SparseMatrix::from_triplets(n, n, t);
    let degrees: Vec<i64> = (0..n).map(|j| degree(monos.get(j % nw)) as i64).collect();
    let complex = GradedComplex::from_global(&degrees, &total)?;
    let mut ut = Vec::new();
    for j in 0..k.len() {
        let (s, _) = k.symbol(j);
        if s.y != 0 {
            continue;
        }
        let wi = j % nw;
        for (&b, v) in r.column(s.a) {
            ut.push((b * nw + wi, j, v.clone()));
        }
    }
    let u = SparseMatrix::from_triplets(n, k.len(), ut);
    Ok(DirectComplex { complex, u, total })
}

/// `H*(G_z, 𝒰_z)` from `𝐊_z`, degrees `< q_max`.
pub fn cohomology_u(sys: &NormSystem, z: &FormalProduct, q_max: u32) -> Result<CohomologyReport> {
    KComplex::new(sys, z, q_max)?.report(sys, Coefficients::Integers)
}

/// `H*(G_z, 𝒰_z/M𝒰_z)` from `𝐊_z/M𝐊_z`; lineage labels are attached when
/// the divisibility hypotheses for the mod-M prediction hold.
pub fn cohomology_u_mod(sys: &NormSystem, z: &FormalProduct, m: u64, q_max: u32) -> Result<CohomologyReport> {
    let k = KComplex::new(sys, z, q_max)?;
    let mut report = k.report(sys, Coefficients::Mod(m))?;
    if theorem_a_applies(sys, z, m).is_ok() {
        for d in &mut report.degrees {
            d.lineage = Some(k.lineage(sys, d.degree));
        }
    }
    Ok(report)
}

/// `H*(G_z, 𝒰_z)` from `Hom(P_z•, 𝒰_z)` directly.
pub fn cohomology_u_direct(sys: &NormSystem, z: &FormalProduct, q_max: u32, ring: Coefficients) -> Result<CohomologyReport> {
    let k = KComplex::new(sys, z, q_max)?;
    let direct = build_direct(&k)?;
    Ok(CohomologyReport::new(sys, z, ring, q_max, band_groups(&direct.complex, q_max, ring)?))
}
