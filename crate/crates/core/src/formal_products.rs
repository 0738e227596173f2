//! Formal products over a totally ordered set of prime symbols.
//!
//! A [`FormalProduct`] is a finite multiset of primes. Primes are identified by
//! their position in the ordered prime list of a [`crate::NormSystem`]; the
//! position *is* the total order. Squarefree products double as the subsets
//! `y` used throughout the resolution and cohomology code.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime symbol: its position in the total order plus a display name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeSymbol {
    pub index: usize,
    pub name: String,
}

impl PartialOrd for PrimeSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrimeSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index.cmp(&other.index)
    }
}

/// Exponent vector indexed by prime position, with trailing zeros trimmed so
/// that equality and the derived lexicographic order are canonical.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormalProduct {
    exps: Vec<u32>,
}

impl FormalProduct {
    /// The empty product.
    pub fn unit() -> Self {
        Self { exps: Vec::new() }
    }

    pub fn prime(x: usize) -> Self {
        Self::prime_power(x, 1)
    }

    pub fn prime_power(x: usize, k: u32) -> Self {
        let mut exps = vec![0; x + 1];
        exps[x] = k;
        Self::from_exponents(exps)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Self { exps }
    }

    /// Squarefree product of the primes whose bit is set in `mask`, where bit
    /// `i` stands for `primes[i]`.
    pub fn from_mask(mask: u32, primes: &[usize]) -> Self {
        let len = primes.iter().copied().max().map_or(0, |m| m + 1);
        let mut exps = vec![0; len];
        for (i, &p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                exps[p] = 1;
            }
        }
        Self::from_exponents(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn is_unit(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn valuation(&self, x: usize) -> u32 {
        self.exps.get(x).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.exps.iter().all(|&e| e <= 1)
    }

    /// Primes dividing the product, ascending.
    pub fn primes(&self) -> Vec<usize> {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.exps
            .iter()
            .enumerate()
            .all(|(i, &e)| e <= other.valuation(i))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.exps.len().max(other.exps.len());
        Self::from_exponents((0..n).map(|i| self.valuation(i) + other.valuation(i)).collect())
    }

    /// `self / other`, or `None` when `other` does not divide `self`.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if !other.divides(self) {
            return None;
        }
        Some(Self::from_exponents(
            (0..self.exps.len())
                .map(|i| self.valuation(i) - other.valuation(i))
                .collect(),
        ))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let n = self.exps.len().min(other.exps.len());
        Self::from_exponents((0..n).map(|i| self.exps[i].min(other.exps[i])).collect())
    }

    pub fn is_coprime(&self, other: &Self) -> bool {
        self.gcd(other).is_unit()
    }

    /// The squarefree support `z̄`.
    pub fn support(&self) -> Self {
        Self::from_exponents(self.exps.iter().map(|&e| u32::from(e > 0)).collect())
    }

    /// `z' |ₛ z`: `z'` divides `z` and is coprime to the cofactor.
    pub fn is_stalk_of(&self, z: &Self) -> bool {
        self.exps
            .iter()
            .enumerate()
            .all(|(i, &e)| e == 0 || e == z.valuation(i))
    }

    /// The stalk `z(y)` of `self` supported on the squarefree `y`.
    pub fn stalk(&self, y: &Self) -> Result<Self> {
        if !y.is_squarefree() {
            return Err(Error::NotSquarefree(y.to_string()));
        }
        if !y.divides(&self.support()) {
            return Err(Error::NotDivisible {
                divisor: y.to_string(),
                dividend: self.support().to_string(),
            });
        }
        Ok(Self::from_exponents(
            (0..y.exps.len())
                .map(|i| if y.valuation(i) == 1 { self.valuation(i) } else { 0 })
                .collect(),
        ))
    }

    /// Every stalk of `self`, one per squarefree divisor of the support,
    /// sorted in the canonical order.
    pub fn stalks(&self) -> Vec<Self> {
        let primes = self.primes();
        let mut out: Vec<Self> = (0..1u32 << primes.len())
            .map(|mask| {
                let mut exps = vec![0; self.exps.len()];
                for (i, &p) in primes.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        exps[p] = self.exps[p];
                    }
                }
                Self::from_exponents(exps)
            })
            .collect();
        out.sort();
        out
    }

    /// All divisors of `self` (not only stalks), sorted.
    pub fn divisors(&self) -> Vec<Self> {
        let mut out = vec![Self::unit()];
        for (p, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for d in &out {
                for k in 0..=e {
                    next.push(d.mul(&Self::prime_power(p, k)));
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

impl fmt::Display for FormalProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FormalProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Koszul sign of `x` inside the squarefree `y`: zero when `x ∤ y`, otherwise
/// `(-1)^{#{x' | y : x' < x}}`.
pub fn omega(x: usize, y: &FormalProduct) -> Result<i32> {
    if !y.is_squarefree() {
        return Err(Error::NotSquarefree(y.to_string()));
    }
    Ok(omega_mask(x, y))
}

pub(crate) fn omega_mask(x: usize, y: &FormalProduct) -> i32 {
    if y.valuation(x) == 0 {
        return 0;
    }
    let below: u32 = (0..x).map(|i| y.valuation(i)).sum();
    if below.is_multiple_of(2) {
        1
    } else {
        -1
    }
}
