//! System configuration files and named presets.
//!
//! A configuration file is TOML:
//!
//! ```toml
//! name = "E1"
//! modulus = 2            # optional
//!
//! [primes]
//! names = ["x1", "x2"]
//!
//! [orders]               # |G_{x^k}| for k = 1, 2, ...
//! x1 = [2]
//! x2 = [4]
//!
//! [frobenius]            # Fr_x acts on G_{x'^k} as σ^f
//! x1 = { x2 = 3 }
//! x2 = { x1 = 1 }
//!
//! [poly]                 # coefficients c0, c1, ... of p(x; t)
//! x1 = [1, -1]
//! x2 = [1, -1]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::system::NormSystem;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    modulus: Option<u64>,
    primes: RawPrimes,
    orders: BTreeMap<String, Vec<u64>>,
    #[serde(default)]
    frobenius: BTreeMap<String, BTreeMap<String, i64>>,
    poly: BTreeMap<String, Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrimes {
    names: Vec<String>,
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<NormSystem> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    let names = raw.primes.names;
    let known = |section: &str, key: &String| -> Result<()> {
        if names.contains(key) {
            Ok(())
        } else {
            Err(Error::Config(format!("[{section}] names unknown prime `{key}`")))
        }
    };
    for key in raw.orders.keys().chain(raw.poly.keys()).chain(raw.frobenius.keys()) {
        let section = if raw.orders.contains_key(key) {
            "orders"
        } else if raw.poly.contains_key(key) {
            "poly"
        } else {
            "frobenius"
        };
        known(section, key)?;
    }
    let mut orders = Vec::new();
    let mut polys = Vec::new();
    let mut frob = Vec::new();
    for x in &names {
        orders.push(raw.orders.get(x).cloned().ok_or_else(|| Error::Config(format!("[orders] missing `{x}`")))?);
        let p = raw.poly.get(x).ok_or_else(|| Error::Config(format!("[poly] missing `{x}`")))?;
        polys.push(p.iter().map(|&c| BigInt::from(c)).collect());
        let row = raw.frobenius.get(x);
        let mut out = Vec::new();
        for t in &names {
            if t == x {
                out.push(0);
                continue;
            }
            match row.and_then(|r| r.get(t)) {
                Some(&f) => out.push(f),
                None => return Err(Error::MissingFrobenius { from: x.clone(), to: t.clone() }),
            }
        }
        if let Some(r) = row {
            for t in r.keys() {
                known("frobenius", t)?;
            }
        }
        frob.push(out);
    }
    let name = raw.name.unwrap_or_else(|| "config".into());
    NormSystem::new(name, names, orders, frob, polys, raw.modulus)
}

pub fn load_config(path: &Path) -> Result<NormSystem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Short descriptions of the preset families.
pub const PRESETS: &[(&str, &str)] = &[
    ("cyclotomic:N", "universal ordinary distribution of level N, p(x;t) = 1 - t"),
    ("predistribution:N", "same groups as cyclotomic:N, p(x;t) = -t"),
    ("trivial:AxBx...", "cyclic orders A, B, ...; all Frobenius exponents 1; p(x;t) = 1"),
    ("carlitz:q:P1,P2,...", "Carlitz cyclotomic level P1*P2*... over F_q[T] (q prime), p(x;t) = 1 - t"),
];

/// Resolves a preset name such as `cyclotomic:15`.
pub fn preset(name: &str) -> Result<NormSystem> {
    let (family, arg) = name.split_once(':').ok_or_else(|| Error::UnknownPreset(name.into()))?;
    let bad = |why: &str| Error::Config(format!("preset `{name}`: {why}"));
    match family {
        "cyclotomic" | "predistribution" => {
            let n: u64 = arg.parse().map_err(|_| bad("level must be a positive integer"))?;
            let poly: Vec<BigInt> = if family == "cyclotomic" {
                vec![1.into(), (-1).into()]
            } else {
                vec![0.into(), (-1).into()]
            };
            cyclotomic(name, n, poly).map_err(|e| match e {
                Error::Config(m) => bad(&m),
                other => other,
            })
        }
        "trivial" => {
            let orders: Vec<u64> = arg
                .split('x')
                .map(|s| s.parse().ok().filter(|&n: &u64| n > 0))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("expected orders like 2x3"))?;
            let k = orders.len();
            let names = (1..=k).map(|i| format!("x{i}")).collect();
            let frob = (0..k).map(|i| (0..k).map(|j| i64::from(i != j)).collect()).collect();
            NormSystem::new(
                name,
                names,
                orders.into_iter().map(|n| vec![n]).collect(),
                frob,
                vec![vec![1.into()]; k],
                None,
            )
        }
        "carlitz" => carlitz(name, arg).map_err(|e| match e {
            Error::Config(m) => bad(&m),
            other => other,
        }),
        _ => Err(Error::UnknownPreset(name.into())),
    }
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Smallest generator of the cyclic group `(ℤ/m)^×` of order `phi`.
fn primitive_root(m: u64, phi: u64) -> u64 {
    if m <= 2 {
        return 1;
    }
    let primes: Vec<u64> = factor(phi).into_iter().map(|(p, _)| p).collect();
    (2..m)
        .find(|&g| num_integer::gcd(g, m) == 1 && primes.iter().all(|&q| pow_mod(g, phi / q, m) != 1))
        .expect("the unit group is cyclic")
}

fn discrete_log(a: u64, g: u64, m: u64, phi: u64) -> u64 {
    let mut x = 1 % m;
    for e in 0..phi.max(1) {
        if x == a % m {
            return e;
        }
        x = (x as u128 * g as u128 % m as u128) as u64;
    }
    unreachable!("{a} is not a power of {g} mod {m}")
}

fn cyclotomic(name: &str, n: u64, poly: Vec<BigInt>) -> Result<NormSystem> {
    if n < 2 {
        return Err(Error::Config("level must be at least 2".into()));
    }
    let fac = factor(n);
    if fac.iter().any(|&(p, e)| p == 2 && e > 2) {
        return Err(Error::Config("(Z/2^k)^x is not cyclic for k > 2".into()));
    }
    // Generator mod p^max(2, e) so it stays a generator at every level.
    let data: Vec<(u64, u32, u64, u64)> = fac
        .iter()
        .map(|&(p, e)| {
            let top = p.pow(e);
            let phi_top = top / p * (p - 1);
            let g = if p == 2 {
                if e == 2 {
                    3
                } else {
                    1
                }
            } else {
                primitive_root(p * p, p * (p - 1))
            };
            (p, e, g, phi_top)
        })
        .collect();
    let names = data.iter().map(|(p, ..)| p.to_string()).collect();
    let orders = data
        .iter()
        .map(|&(p, e, ..)| (1..=e).map(|k| p.pow(k) / p * (p - 1)).collect())
        .collect();
    let frob = data
        .iter()
        .map(|&(p, ..)| {
            data.iter()
                .map(|&(q, f, g, phi)| if q == p { 0 } else { discrete_log(p, g, q.pow(f), phi) as i64 })
                .collect()
        })
        .collect();
    NormSystem::new(name, names, orders, frob, vec![poly; data.len()], None)
}

// Polynomials over F_q as coefficient vectors, lowest degree first, trimmed.
type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_mulmod(a: &Poly, b: &Poly, m: &Poly, q: u64) -> Poly {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % q;
        }
    }
    poly_rem(trim(prod), m, q)
}

fn poly_rem(mut a: Poly, m: &Poly, q: u64) -> Poly {
    let dm = m.len() - 1;
    let inv = pow_mod(m[dm], q - 2, q);
    while a.len() > dm {
        let c = a[a.len() - 1] * inv % q;
        let shift = a.len() - 1 - dm;
        for (i, &mi) in m.iter().enumerate() {
            a[shift + i] = (a[shift + i] + q - c * mi % q) % q;
        }
        a = trim(a);
    }
    a
}

fn poly_powmod(b: &Poly, mut e: u64, m: &Poly, q: u64) -> Poly {
    let mut r = poly_rem(vec![1], m, q);
    let mut b = poly_rem(b.clone(), m, q);
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mulmod(&r, &b, m, q);
        }
        b = poly_mulmod(&b, &b, m, q);
        e >>= 1;
    }
    r
}

fn parse_poly(text: &str, q: u64) -> Result<Poly> {
    let mut coeffs: Vec<u64> = Vec::new();
    let cleaned = text.replace(' ', "").replace('-', "+-");
    for term in cleaned.split('+').filter(|t| !t.is_empty()) {
        let (neg, term) = match term.strip_prefix('-') {
            Some(t) => (true, t),
            None => (false, term),
        };
        let (c, deg) = match term.split_once('T') {
            None => (term.parse::<u64>().map_err(|_| Error::Config(format!("bad term `{term}`")))?, 0),
            Some((c, rest)) => {
                let c = c.trim_end_matches('*');
                let c = if c.is_empty() { 1 } else { c.parse().map_err(|_| Error::Config(format!("bad term `{term}`")))? };
                let d = match rest.strip_prefix('^') {
                    Some(d) => d.parse().map_err(|_| Error::Config(format!("bad exponent in `{term}`")))?,
                    None if rest.is_empty() => 1usize,
                    None => return Err(Error::Config(format!("bad term `{term}`"))),
                };
                (c, d)
            }
        };
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        let c = c % q;
        coeffs[deg] = (coeffs[deg] + if neg { q - c } else { c }) % q;
    }
    let p = trim(coeffs);
    if p.len() < 2 || p[p.len() - 1] != 1 {
        return Err(Error::Config(format!("`{text}` is not a monic polynomial of positive degree")));
    }
    Ok(p)
}

fn is_irreducible(p: &Poly, q: u64) -> bool {
    // Brute force over monic divisors of degree ≤ deg/2; fine for small q^deg.
    let d = p.len() - 1;
    for k in 1..=d / 2 {
        let count = q.pow(k as u32);
        for idx in 0..count {
            let mut f = Vec::with_capacity(k + 1);
            let mut t = idx;
            for _ in 0..k {
                f.push(t % q);
                t /= q;
            }
            f.push(1);
            if poly_rem(p.clone(), &f, q).is_empty() {
                return false;
            }
        }
    }
    true
}

fn poly_from_index(mut idx: u64, deg: usize, q: u64) -> Poly {
    let mut f = Vec::with_capacity(deg);
    for _ in 0..deg {
        f.push(idx % q);
        idx /= q;
    }
    trim(f)
}

fn carlitz(name: &str, arg: &str) -> Result<NormSystem> {
    let (q, list) = arg.split_once(':').ok_or_else(|| Error::Config("expected carlitz:q:P1,P2".into()))?;
    let q: u64 = q.parse().map_err(|_| Error::Config("q must be a prime".into()))?;
    if q < 2 || factor(q).len() != 1 || factor(q)[0].1 != 1 {
        return Err(Error::Config("q must be a prime".into()));
    }
    let polys: Vec<Poly> = list.split(',').map(|s| parse_poly(s, q)).collect::<Result<_>>()?;
    for (i, p) in polys.iter().enumerate() {
        if !is_irreducible(p, q) {
            return Err(Error::Config(format!("`{}` is not irreducible", list.split(',').nth(i).unwrap())));
        }
        if polys[..i].contains(p) {
            return Err(Error::Config("repeated prime".into()));
        }
    }
    // (F_q[T]/P)^× is cyclic of order q^deg P − 1; pick its smallest generator.
    let data: Vec<(u64, Vec<Poly>)> = polys
        .iter()
        .map(|p| {
            let deg = p.len() - 1;
            let order = q.pow(deg as u32) - 1;
            let primes: Vec<u64> = factor(order).into_iter().map(|(r, _)| r).collect();
            let gen = (1..q.pow(deg as u32))
                .map(|i| poly_from_index(i, deg, q))
                .find(|g| primes.iter().all(|&r| poly_powmod(g, order / r, p, q) != vec![1]))
                .expect("finite field units are cyclic");
            let mut powers = Vec::with_capacity(order as usize);
            let mut x = vec![1];
            for _ in 0..order {
                powers.push(x.clone());
                x = poly_mulmod(&x, &gen, p, q);
            }
            (order, powers)
        })
        .collect();
    let frob = polys
        .iter()
        .enumerate()
        .map(|(i, p)| {
            polys
                .iter()
                .enumerate()
                .map(|(j, m)| {
                    if i == j {
                        return 0;
                    }
                    let r = poly_rem(p.clone(), m, q);
                    data[j].1.iter().position(|x| *x == r).expect("coprime residues are units") as i64
                })
                .collect()
        })
        .collect();
    let names = list.split(',').map(|s| s.replace(' ', "")).collect();
    let orders = data.iter().map(|(o, _)| vec![*o]).collect();
    NormSystem::new(name, names, orders, frob, vec![vec![1.into(), (-1).into()]; polys.len()], None)
}
