//! Norm-distribution systems and the finite abelian groups `G_z`.
//!
//! Every `G_{x^k}` is cyclic with a chosen generator `σ_{x^k}`; the quotient
//! `G_{x^{k+1}} → G_{x^k}` sends generator to generator, so an element of a
//! cyclic factor is just a residue. `G_z` is the product of its cyclic
//! factors over the primes of `z`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_products::{FormalProduct, PrimeSymbol};

/// Full configuration of a norm distribution over `𝒯 = ℤ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSystem {
    name: String,
    primes: Vec<PrimeSymbol>,
    /// `orders[x][k - 1] = |G_{x^k}|`.
    orders: Vec<Vec<u64>>,
    /// `frobenius[x][x']`: `Fr_x` acts on every `G_{x'^k}` as `σ^f`.
    frobenius: Vec<Vec<i64>>,
    /// Coefficients `c_0, c_1, …` of `p(x; t)`.
    polys: Vec<Vec<BigInt>>,
    modulus: Option<u64>,
}

impl NormSystem {
    pub fn new(
        name: impl Into<String>,
        prime_names: Vec<String>,
        orders: Vec<Vec<u64>>,
        frobenius: Vec<Vec<i64>>,
        polys: Vec<Vec<BigInt>>,
        modulus: Option<u64>,
    ) -> Result<Self> {
        let k = prime_names.len();
        if orders.len() != k || frobenius.len() != k || polys.len() != k {
            return Err(Error::Config(format!(
                "expected {k} entries in every per-prime table"
            )));
        }
        for (x, name) in prime_names.iter().enumerate() {
            if prime_names[..x].contains(name) {
                return Err(Error::Config(format!("duplicate prime `{name}`")));
            }
            let tower = &orders[x];
            if tower.is_empty() {
                return Err(Error::UnconfiguredExponent { prime: name.clone(), exponent: 1 });
            }
            if let Some(&bad) = tower.iter().find(|&&n| n == 0) {
                return Err(Error::Config(format!("group order {bad} for `{name}` is not positive")));
            }
            for w in tower.windows(2) {
                if w[1] % w[0] != 0 {
                    return Err(Error::TowerDivisibility {
                        prime: name.clone(),
                        lower: w[0],
                        upper: w[1],
                    });
                }
            }
            if frobenius[x].len() != k {
                return Err(Error::Config(format!(
                    "Frobenius row for `{name}` must have {k} entries"
                )));
            }
        }
        let mut frobenius = frobenius;
        for (x, row) in frobenius.iter_mut().enumerate() {
            row[x] = 0;
        }
        let polys = polys
            .into_iter()
            .map(|mut c| {
                while c.last().is_some_and(Zero::is_zero) {
                    c.pop();
                }
                c
            })
            .collect();
        let primes = prime_names
            .into_iter()
            .enumerate()
            .map(|(index, name)| PrimeSymbol { index, name })
            .collect();
        Ok(Self { name: name.into(), primes, orders, frobenius, polys, modulus })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn primes(&self) -> &[PrimeSymbol] {
        &self.primes
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    pub fn prime_index(&self, name: &str) -> Result<usize> {
        self.primes
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPrime(name.to_string()))
    }

    pub fn prime_name(&self, x: usize) -> &str {
        &self.primes[x].name
    }

    pub fn tower(&self, x: usize) -> &[u64] {
        &self.orders[x]
    }

    pub fn frobenius_exponent(&self, x: usize, to: usize) -> i64 {
        self.frobenius[x][to]
    }

    pub fn frobenius_table(&self) -> &[Vec<i64>] {
        &self.frobenius
    }

    pub fn poly(&self, x: usize) -> &[BigInt] {
        &self.polys[x]
    }

    pub fn polys(&self) -> &[Vec<BigInt>] {
        &self.polys
    }

    /// `p(x; 1)`.
    pub fn poly_at_one(&self, x: usize) -> BigInt {
        self.polys[x].iter().sum()
    }

    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    pub fn with_modulus(mut self, modulus: Option<u64>) -> Self {
        self.modulus = modulus;
        self
    }

    /// Same groups and Frobenius data, different polynomials.
    pub fn with_polys(&self, name: impl Into<String>, polys: Vec<Vec<BigInt>>) -> Result<Self> {
        Self::new(
            name,
            self.primes.iter().map(|p| p.name.clone()).collect(),
            self.orders.clone(),
            self.frobenius.clone(),
            polys,
            self.modulus,
        )
    }

    /// The trivial distribution `p(x; t) = 1` on the same groups.
    pub fn trivial_variant(&self) -> Self {
        self.with_polys(format!("{}/trivial", self.name), vec![vec![BigInt::one()]; self.primes.len()])
            .expect("same shape as a validated system")
    }

    /// `|G_{x^k}|`; `k = 0` gives the trivial group.
    pub fn order(&self, x: usize, k: u32) -> Result<u64> {
        if k == 0 {
            return Ok(1);
        }
        let tower = self
            .orders
            .get(x)
            .ok_or_else(|| Error::UnknownPrime(format!("#{x}")))?;
        tower.get(k as usize - 1).copied().ok_or_else(|| Error::UnconfiguredExponent {
            prime: self.primes[x].name.clone(),
            exponent: k,
        })
    }

    /// Checks that every prime of `z` is known with a configured exponent.
    pub fn check_target(&self, z: &FormalProduct) -> Result<()> {
        if z.exponents().len() > self.primes.len() {
            return Err(Error::UnknownPrime(format!("x{}", z.exponents().len())));
        }
        for x in z.primes() {
            self.order(x, z.valuation(x))?;
        }
        Ok(())
    }

    pub fn group_order(&self, z: &FormalProduct) -> Result<u64> {
        self.check_target(z)?;
        z.primes()
            .into_iter()
            .map(|x| self.order(x, z.valuation(x)))
            .product()
    }

    /// Renders `z` with the configured prime names.
    pub fn display(&self, z: &FormalProduct) -> String {
        if z.is_unit() {
            return "1".into();
        }
        z.primes()
            .into_iter()
            .map(|x| match z.valuation(x) {
                1 => self.primes[x].name.clone(),
                e => format!("{}^{e}", self.primes[x].name),
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Parses `"x1^2*x2"`-style targets using configured names or the
    /// positional aliases `x1, x2, …`.
    pub fn parse_product(&self, text: &str) -> Result<FormalProduct> {
        let text = text.trim();
        let mut exps = vec![0u32; self.primes.len()];
        if text.is_empty() || text == "1" {
            return Ok(FormalProduct::unit());
        }
        for factor in text.split(['*', '.', '·']) {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (
                    b.trim(),
                    e.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Config(format!("bad exponent in `{factor}`")))?,
                ),
                None => (factor, 1),
            };
            let x = match self.prime_index(base) {
                Ok(x) => x,
                Err(e) => match base.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    Some(i) if i >= 1 && i <= self.primes.len() => i - 1,
                    _ => return Err(e),
                },
            };
            exps[x] += exp;
        }
        let z = FormalProduct::from_exponents(exps);
        self.check_target(&z)?;
        Ok(z)
    }

    pub fn identity(&self, z: &FormalProduct) -> Result<GroupElement> {
        self.check_target(z)?;
        Ok(GroupElement {
            target: z.clone(),
            components: z.primes().into_iter().map(|x| (x, 0)).collect(),
        })
    }

    /// `σ_{z(x)}` as an element of `G_z`.
    pub fn generator(&self, z: &FormalProduct, x: usize) -> Result<GroupElement> {
        let mut g = self.identity(z)?;
        let n = self.order(x, z.valuation(x))?;
        match g.components.get_mut(&x) {
            Some(r) => *r = 1 % n,
            None => {
                return Err(Error::NotDivisible {
                    divisor: self.primes[x].name.clone(),
                    dividend: self.display(z),
                })
            }
        }
        Ok(g)
    }

    pub fn element(&self, z: &FormalProduct, residues: &[(usize, i64)]) -> Result<GroupElement> {
        let mut g = self.identity(z)?;
        for &(x, r) in residues {
            let n = self.order(x, z.valuation(x))? as i64;
            match g.components.get_mut(&x) {
                Some(slot) => *slot = r.rem_euclid(n) as u64,
                None => return Err(Error::Precondition(format!("{} does not divide target", self.prime_name(x)))),
            }
        }
        Ok(g)
    }

    /// All elements of `G_z` in lexicographic residue order.
    pub fn elements(&self, z: &FormalProduct) -> Result<Vec<GroupElement>> {
        self.check_target(z)?;
        let primes = z.primes();
        let orders: Vec<u64> = primes
            .iter()
            .map(|&x| self.order(x, z.valuation(x)))
            .collect::<Result<_>>()?;
        let total: u64 = orders.iter().product();
        Ok((0..total)
            .map(|mut idx| {
                let mut res = vec![0; primes.len()];
                for i in (0..primes.len()).rev() {
                    res[i] = idx % orders[i];
                    idx /= orders[i];
                }
                GroupElement {
                    target: z.clone(),
                    components: primes.iter().copied().zip(res).collect(),
                }
            })
            .collect())
    }

    /// Image of `g` in `G_{z'}` for `z' | target`.
    pub fn restrict(&self, g: &GroupElement, to: &FormalProduct) -> Result<GroupElement> {
        if !to.divides(&g.target) {
            return Err(Error::NotDivisible {
                divisor: self.display(to),
                dividend: self.display(&g.target),
            });
        }
        let mut components = BTreeMap::new();
        for x in to.primes() {
            let n = self.order(x, to.valuation(x))?;
            components.insert(x, g.components[&x] % n);
        }
        Ok(GroupElement { target: to.clone(), components })
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        if g.target != h.target {
            return Err(Error::TargetMismatch(self.display(&g.target), self.display(&h.target)));
        }
        let mut components = BTreeMap::new();
        for (&x, &r) in &g.components {
            let n = self.order(x, g.target.valuation(x))?;
            components.insert(x, (r + h.components[&x]) % n);
        }
        Ok(GroupElement { target: g.target.clone(), components })
    }

    /// `N_{z(x)}`: the sum of all elements of `G_{z(x)}`.
    pub fn norm_element(&self, z: &FormalProduct, x: usize) -> Result<GroupRingElement> {
        if z.valuation(x) == 0 {
            return Err(Error::NotDivisible {
                divisor: self.primes.get(x).map_or_else(|| format!("#{x}"), |p| p.name.clone()),
                dividend: self.display(z),
            });
        }
        let zx = FormalProduct::prime_power(x, z.valuation(x));
        self.norm_of(&zx)
    }

    /// `N_z`, the sum of all elements of `G_z`.
    pub fn norm_of(&self, z: &FormalProduct) -> Result<GroupRingElement> {
        let terms = self
            .elements(z)?
            .into_iter()
            .map(|g| (g, BigInt::one()))
            .collect();
        Ok(GroupRingElement { target: z.clone(), terms })
    }

    /// `p(x; Fr_x^{-1})` in `ℤ[G_{z'}]`, for `x ∤ z'`.
    pub fn frobenius_poly(&self, x: usize, target: &FormalProduct) -> Result<GroupRingElement> {
        if target.valuation(x) > 0 {
            return Err(Error::Precondition(format!(
                "{} divides {}",
                self.prime_name(x),
                self.display(target)
            )));
        }
        self.check_target(target)?;
        let mut out = GroupRingElement::zero(target.clone());
        for (i, c) in self.polys[x].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let shift: Vec<(usize, i64)> = target
                .primes()
                .into_iter()
                .map(|t| (t, -(i as i64) * self.frobenius[x][t]))
                .collect();
            let g = self.element(target, &shift)?;
            out.add_term(g, c.clone());
        }
        Ok(out)
    }

    /// `N^{z}_{z'}`: sends each `g ∈ G_{z'}` to the sum of its preimages in `G_z`.
    pub fn inflate(&self, a: &GroupRingElement, to: &FormalProduct) -> Result<GroupRingElement> {
        if !a.target.divides(to) {
            return Err(Error::NotDivisible {
                divisor: self.display(&a.target),
                dividend: self.display(to),
            });
        }
        let mut out = GroupRingElement::zero(to.clone());
        for h in self.elements(to)? {
            let image = self.restrict(&h, &a.target)?;
            if let Some(c) = a.terms.get(&image) {
                out.add_term(h, c.clone());
            }
        }
        Ok(out)
    }

    pub fn ring_multiply(&self, a: &GroupRingElement, b: &GroupRingElement) -> Result<GroupRingElement> {
        if a.target != b.target {
            return Err(Error::TargetMismatch(self.display(&a.target), self.display(&b.target)));
        }
        let mut out = GroupRingElement::zero(a.target.clone());
        for (g, c) in &a.terms {
            for (h, d) in &b.terms {
                out.add_term(self.multiply(g, h)?, c * d);
            }
        }
        Ok(out)
    }

    /// Local coordinates for work inside `G_z` and its stalk subgroups.
    pub fn frame(&self, z: &FormalProduct) -> Result<Frame> {
        Frame::new(self, z)
    }
}

/// Element of `G_{target}` stored as one residue per prime of the target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub target: FormalProduct,
    pub components: BTreeMap<usize, u64>,
}

impl GroupElement {
    pub fn component(&self, x: usize) -> Option<u64> {
        self.components.get(&x).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.components.values().all(|&r| r == 0)
    }
}

/// Sparse element of the integral group ring `ℤ[G_{target}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    pub target: FormalProduct,
    pub terms: BTreeMap<GroupElement, BigInt>,
}

impl GroupRingElement {
    pub fn zero(target: FormalProduct) -> Self {
        Self { target, terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, g: GroupElement, c: BigInt) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(g) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    pub fn coefficient(&self, g: &GroupElement) -> BigInt {
        self.terms.get(g).cloned().unwrap_or_default()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), -c);
        }
        out
    }
}

/// Coordinates for `G_z` with the primes of `z` renumbered `0..k`.
///
/// Subgroups `G_{z'}` for stalks `z'` are addressed by bitmasks over the local
/// primes, and their elements by a mixed-radix index (first prime most
/// significant). Stalks share the full-exponent cyclic factors of `z`, which
/// is all the distribution and resolution code needs.
#[derive(Clone, Debug)]
pub struct Frame {
    pub z: FormalProduct,
    /// System indices of the primes of `z`, ascending.
    pub primes: Vec<usize>,
    /// `|G_{z(x)}|` for each local prime.
    pub orders: Vec<u64>,
    /// `frob[i][j]`: exponent of `Fr_{primes[i]}` on `G_{z(primes[j])}`, reduced.
    pub frob: Vec<Vec<u64>>,
    pub polys: Vec<Vec<BigInt>>,
}

impl Frame {
    pub fn new(sys: &NormSystem, z: &FormalProduct) -> Result<Self> {
        sys.check_target(z)?;
        let primes = z.primes();
        if primes.len() > 16 {
            return Err(Error::Precondition("more than 16 primes in a target".into()));
        }
        let orders: Vec<u64> = primes
            .iter()
            .map(|&x| sys.order(x, z.valuation(x)))
            .collect::<Result<_>>()?;
        let frob = primes
            .iter()
            .map(|&x| {
                primes
                    .iter()
                    .zip(&orders)
                    .map(|(&t, &n)| sys.frobenius_exponent(x, t).rem_euclid(n as i64) as u64)
                    .collect()
            })
            .collect();
        let polys = primes.iter().map(|&x| sys.poly(x).to_vec()).collect();
        Ok(Self { z: z.clone(), primes, orders, frob, polys })
    }

    pub fn rank(&self) -> usize {
        self.primes.len()
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.primes.len()) - 1
    }

    pub fn group_size(&self, mask: u32) -> usize {
        self.bits(mask).map(|i| self.orders[i] as usize).product()
    }

    pub fn bits(&self, mask: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.primes.len()).filter(move |i| mask >> i & 1 == 1)
    }

    /// The stalk of `z` supported on `mask`.
    pub fn stalk(&self, mask: u32) -> FormalProduct {
        let mut exps = vec![0; self.z.exponents().len()];
        for i in self.bits(mask) {
            exps[self.primes[i]] = self.z.valuation(self.primes[i]);
        }
        FormalProduct::from_exponents(exps)
    }

    pub fn squarefree(&self, mask: u32) -> FormalProduct {
        FormalProduct::from_mask(mask, &self.primes)
    }

    /// Masks of every subset, sorted by the canonical order of their stalks.
    pub fn masks_in_order(&self, within: u32) -> Vec<u32> {
        let mut masks: Vec<u32> = (0..=within).filter(|m| m & !within == 0).collect();
        masks.sort_by_key(|&m| self.stalk(m));
        masks
    }

    pub fn encode(&self, mask: u32, res: &[u64]) -> usize {
        let mut idx = 0usize;
        for i in self.bits(mask) {
            idx = idx * self.orders[i] as usize + res[i] as usize;
        }
        idx
    }

    pub fn decode(&self, mask: u32, mut idx: usize) -> Vec<u64> {
        let mut res = vec![0; self.primes.len()];
        let bits: Vec<usize> = self.bits(mask).collect();
        for &i in bits.iter().rev() {
            let n = self.orders[i] as usize;
            res[i] = (idx % n) as u64;
            idx /= n;
        }
        res
    }

    /// `p(x_i; Fr^{-1})` acting on the element `res` of `G_{stalk(mask)}`.
    pub fn frobenius_poly_action(&self, i: usize, mask: u32, res: &[u64]) -> Vec<(Vec<u64>, BigInt)> {
        self.poly_action(i, &self.polys[i], mask, res)
    }

    /// `q(Fr_{x_i}^{-1})` for an arbitrary integer polynomial `q`.
    pub fn poly_action(&self, i: usize, poly: &[BigInt], mask: u32, res: &[u64]) -> Vec<(Vec<u64>, BigInt)> {
        debug_assert!(mask >> i & 1 == 0);
        let mut out: BTreeMap<Vec<u64>, BigInt> = BTreeMap::new();
        for (j, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut g = res.to_vec();
            for l in self.bits(mask) {
                let n = self.orders[l];
                let shift = (j as u64 % n) * self.frob[i][l] % n;
                g[l] = (g[l] + n - shift) % n;
            }
            *out.entry(g).or_default() += c;
        }
        out.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }

    /// Public group element of `G_{stalk(mask)}`.
    pub fn group_element(&self, mask: u32, res: &[u64]) -> GroupElement {
        GroupElement {
            target: self.stalk(mask),
            components: self.bits(mask).map(|i| (self.primes[i], res[i])).collect(),
        }
    }

    pub fn local_index(&self, x: usize) -> Option<usize> {
        self.primes.iter().position(|&p| p == x)
    }

    pub fn mask_of(&self, y: &FormalProduct) -> Result<u32> {
        let mut mask = 0;
        for x in y.primes() {
            let i = self
                .local_index(x)
                .ok_or_else(|| Error::Precondition(format!("{y} does not divide the support")))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn e1() -> NormSystem {
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

    fn e2() -> NormSystem {
        NormSystem::new(
            "E2",
            vec!["x1".into(), "x2".into()],
            vec![vec![2, 4], vec![3]],
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![1.into(), (-1).into()], vec![1.into(), (-1).into()]],
            None,
        )
        .unwrap()
    }

    fn fp(e: &[u32]) -> FormalProduct {
        FormalProduct::from_exponents(e.to_vec())
    }

    #[test]
    fn group_orders() {
        assert_eq!(e1().group_order(&fp(&[1, 1])).unwrap(), 8);
        assert_eq!(e1().group_order(&FormalProduct::unit()).unwrap(), 1);
        assert_eq!(e2().group_order(&fp(&[2, 1])).unwrap(), 12);
        assert!(e1().group_order(&fp(&[2])).is_err());
        assert!(e1().group_order(&fp(&[0, 0, 1])).is_err());
    }

    #[test]
    fn restriction_examples() {
        let sys = e1();
        let g = sys.element(&fp(&[1, 1]), &[(0, 1), (1, 3)]).unwrap();
        let r = sys.restrict(&g, &fp(&[0, 1])).unwrap();
        assert_eq!(r.component(1), Some(3));
        assert_eq!(r.component(0), None);
        assert!(sys.restrict(&g, &FormalProduct::unit()).unwrap().is_identity());

        let sys = e2();
        let g = sys.element(&fp(&[2]), &[(0, 3)]).unwrap();
        assert_eq!(sys.restrict(&g, &fp(&[1])).unwrap().component(0), Some(1));
        assert!(sys.restrict(&g, &fp(&[3])).is_err());
    }

    #[test]
    fn restriction_is_a_tower_compatible_homomorphism() {
        let sys = NormSystem::new(
            "tower",
            vec!["x".into()],
            vec![vec![2, 4, 8]],
            vec![vec![0]],
            vec![vec![1.into()]],
            None,
        )
        .unwrap();
        let top = fp(&[3]);
        for g in sys.elements(&top).unwrap() {
            for h in sys.elements(&top).unwrap() {
                let gh = sys.multiply(&g, &h).unwrap();
                let lhs = sys.restrict(&gh, &fp(&[2])).unwrap();
                let rhs = sys
                    .multiply(&sys.restrict(&g, &fp(&[2])).unwrap(), &sys.restrict(&h, &fp(&[2])).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
            let direct = sys.restrict(&g, &fp(&[1])).unwrap();
            let staged = sys.restrict(&sys.restrict(&g, &fp(&[2])).unwrap(), &fp(&[1])).unwrap();
            assert_eq!(direct, staged);
        }
    }

    #[test]
    fn norm_elements() {
        let sys = e1();
        let n = sys.norm_element(&fp(&[1, 1]), 1).unwrap();
        assert_eq!(n.terms.len(), 4);
        assert!(n.terms.values().all(|c| c == &BigInt::one()));
        assert_eq!(n.target, fp(&[0, 1]));
        assert_eq!(sys.norm_of(&FormalProduct::unit()).unwrap().terms.len(), 1);
        assert_eq!(e2().norm_element(&fp(&[2, 1]), 0).unwrap().terms.len(), 4);
        assert!(sys.norm_element(&fp(&[1]), 1).is_err());
    }

    #[test]
    fn norm_absorbs_group() {
        let sys = e1();
        let z = fp(&[0, 1]);
        let n = sys.norm_of(&z).unwrap();
        for g in sys.elements(&z).unwrap() {
            let mut single = GroupRingElement::zero(z.clone());
            single.add_term(g, BigInt::one());
            assert_eq!(sys.ring_multiply(&n, &single).unwrap(), n);
        }
    }

    #[test]
    fn frobenius_poly_examples() {
        let sys = e1();
        assert!(sys.frobenius_poly(0, &FormalProduct::unit()).unwrap().is_zero());
        let p = sys.frobenius_poly(0, &fp(&[0, 1])).unwrap();
        let id = sys.identity(&fp(&[0, 1])).unwrap();
        let s1 = sys.element(&fp(&[0, 1]), &[(1, 1)]).unwrap();
        assert_eq!(p.terms.len(), 2);
        assert_eq!(p.coefficient(&id), BigInt::one());
        assert_eq!(p.coefficient(&s1), BigInt::from(-1));
        assert!(sys.frobenius_poly(0, &fp(&[1])).is_err());

        let trivial = sys.trivial_variant();
        let p = trivial.frobenius_poly(1, &fp(&[1])).unwrap();
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.coefficient(&trivial.identity(&fp(&[1])).unwrap()), BigInt::one());
    }

    #[test]
    fn frobenius_poly_restricts_termwise() {
        let sys = NormSystem::new(
            "three",
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![2], vec![4], vec![3]],
            vec![vec![0, 3, 2], vec![1, 0, 1], vec![1, 1, 0]],
            vec![
                vec![2.into(), (-1).into(), 5.into()],
                vec![1.into(), (-1).into()],
                vec![0.into(), (-1).into()],
            ],
            None,
        )
        .unwrap();
        let big = fp(&[0, 1, 1]);
        let small = fp(&[0, 1]);
        let p = sys.frobenius_poly(0, &big).unwrap();
        let mut pushed = GroupRingElement::zero(small.clone());
        for (g, c) in &p.terms {
            pushed.add_term(sys.restrict(g, &small).unwrap(), c.clone());
        }
        assert_eq!(pushed, sys.frobenius_poly(0, &small).unwrap());
    }

    #[test]
    fn ring_products() {
        let sys = NormSystem::new("c2", vec!["x".into()], vec![vec![2]], vec![vec![0]], vec![vec![1.into()]], None)
            .unwrap();
        let z = fp(&[1]);
        let id = sys.identity(&z).unwrap();
        let s = sys.generator(&z, 0).unwrap();
        let mut one_minus = GroupRingElement::zero(z.clone());
        one_minus.add_term(id.clone(), BigInt::one());
        one_minus.add_term(s.clone(), BigInt::from(-1));
        let sq = sys.ring_multiply(&one_minus, &one_minus).unwrap();
        assert_eq!(sq.coefficient(&id), BigInt::from(2));
        assert_eq!(sq.coefficient(&s), BigInt::from(-2));
        let n = sys.norm_of(&z).unwrap();
        assert!(sys.ring_multiply(&n, &one_minus).unwrap().is_zero());
        let mut unit = GroupRingElement::zero(z.clone());
        unit.add_term(id, BigInt::one());
        assert_eq!(sys.ring_multiply(&unit, &one_minus).unwrap(), one_minus);
        assert!(sys.ring_multiply(&unit, &GroupRingElement::zero(FormalProduct::unit())).is_err());
    }

    #[test]
    fn coprime_product_decomposition() {
        let sys = e1();
        let z = fp(&[1, 1]);
        let elems = sys.elements(&z).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for g in &elems {
            let a = sys.restrict(g, &fp(&[1])).unwrap();
            let b = sys.restrict(g, &fp(&[0, 1])).unwrap();
            assert!(seen.insert((a, b)));
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn tower_must_divide() {
        let err = NormSystem::new("bad", vec!["x".into()], vec![vec![2, 3]], vec![vec![0]], vec![vec![1.into()]], None);
        assert!(matches!(err, Err(Error::TowerDivisibility { .. })));
    }

    #[test]
    fn parses_targets() {
        let sys = e2();
        assert_eq!(sys.parse_product("x1^2*x2").unwrap(), fp(&[2, 1]));
        assert_eq!(sys.parse_product("1").unwrap(), FormalProduct::unit());
        assert!(sys.parse_product("x3").is_err());
        assert!(sys.parse_product("x2^2").is_err());
    }
}
