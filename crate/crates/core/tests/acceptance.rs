//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Expected values come from oracles written here, independently of the
//! library: Künneth for trivial-module cohomology, a closed form for the
//! blocks `H_{ℤ,w}`, brute-force enumeration of the pairs `(y, w)`, a Smith
//! coset oracle for normal forms, dense mod-p ranks, and the character of the
//! regular representation.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use normdist::cohomology::{build_direct, build_restriction_complex};
use normdist::linalg::field::rational_rank_q;
use normdist::linalg::{invariant_factors, rational_rank, smith_normal_form, solve_rational};
use normdist::{
    cohomology_u, cohomology_u_direct, cohomology_u_mod, connecting_map, corestriction, preset, trivial_cohomology,
    Anderson, CohomologyReport, Coefficients, Convention, Coords, Distribution, FormalProduct, HomologyGroup,
    KComplex, NormSystem, SparseMatrix,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn poly(c: &[i64]) -> Vec<BigInt> {
    c.iter().map(|&x| BigInt::from(x)).collect()
}

fn e1() -> NormSystem {
    NormSystem::new(
        "E1",
        vec!["x1".into(), "x2".into()],
        vec![vec![2], vec![4]],
        vec![vec![0, 3], vec![1, 0]],
        vec![poly(&[1, -1]), poly(&[1, -1])],
        None,
    )
    .unwrap()
}

/// Three primes with three different polynomials.
fn mixed() -> NormSystem {
    NormSystem::new(
        "mixed",
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![2, 4], vec![3], vec![2]],
        vec![vec![0, 1, 1], vec![3, 0, 1], vec![1, 2, 0]],
        vec![poly(&[1, -1]), poly(&[0, -1]), poly(&[1])],
        None,
    )
    .unwrap()
}

struct Case {
    sys: NormSystem,
    z: FormalProduct,
}

fn case(sys: NormSystem, z: &str) -> Case {
    let z = sys.parse_product(z).unwrap();
    Case { sys, z }
}

/// Systems spanning trivial, `1 − t`, `−t` and mixed polynomials; at most three
/// primes, exponents at most 2, cyclic orders in {2, 3, 4, 6}.
fn suite() -> Vec<Case> {
    vec![
        case(preset("trivial:2x3").unwrap(), "x1*x2"),
        case(preset("trivial:2x3x4").unwrap(), "x1*x2*x3"),
        case(e1(), "x1*x2"),
        case(preset("cyclotomic:21").unwrap(), "3*7"),
        case(preset("cyclotomic:63").unwrap(), "3^2*7"),
        case(preset("cyclotomic:105").unwrap(), "3*5*7"),
        case(preset("predistribution:15").unwrap(), "3*5"),
        case(preset("predistribution:35").unwrap(), "5*7"),
        case(mixed(), "a^2*b*c"),
    ]
}

fn q_for(c: &Case) -> u32 {
    if c.z.primes().len() > 2 {
        3
    } else {
        4
    }
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// `|G_{z(x)}|` read straight from the configured towers.
fn local_orders(sys: &NormSystem, z: &FormalProduct) -> Vec<u64> {
    z.primes().into_iter().map(|x| sys.tower(x)[z.valuation(x) as usize - 1]).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Rank over `F_p` by dense elimination.
fn rank_mod_p(m: &SparseMatrix, p: i64) -> usize {
    let mut a = vec![vec![0i64; m.cols()]; m.rows()];
    for (r, c, v) in m.iter() {
        a[r][c] = (v % BigInt::from(p)).to_i64().unwrap().rem_euclid(p);
    }
    let inv = |x: i64| (1..p).find(|y| x * y % p == 1).unwrap();
    let mut rank = 0;
    for col in 0..m.cols() {
        let Some(piv) = (rank..m.rows()).find(|&r| a[r][col] != 0) else { continue };
        a.swap(rank, piv);
        let s = inv(a[rank][col]);
        for v in a[rank].iter_mut() {
            *v = *v * s % p;
        }
        for r in 0..m.rows() {
            if r != rank && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..m.cols() {
                    a[r][c] = (a[r][c] - f * a[rank][c]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Cohomology of a finitely generated abelian group list per degree, tracked as
/// (free rank, cyclic torsion orders).
#[derive(Clone, Debug, Default)]
struct Graded(Vec<(usize, Vec<u64>)>);

impl Graded {
    fn group(&self, n: usize) -> HomologyGroup {
        let (f, t) = &self.0[n];
        HomologyGroup::from_parts(*f, t.iter().map(|&d| BigInt::from(d)))
    }
}

/// `H^q(ℤ/n, ℤ)`: `ℤ`, then `0, ℤ/n, 0, ℤ/n, …`.
fn cyclic_cohomology(n: u64, top: usize) -> Graded {
    Graded((0..=top).map(|q| if q == 0 { (1, vec![]) } else if q % 2 == 0 { (0, vec![n]) } else { (0, vec![]) }).collect())
}

/// Künneth for `H*(G × H, ℤ)` with finitely generated cohomology:
/// `Hⁿ = ⊕_{i+j=n} Hⁱ ⊗ Hʲ ⊕ ⊕_{i+j=n+1} Tor(Hⁱ, Hʲ)`.
fn kunneth(a: &Graded, b: &Graded, top: usize) -> Graded {
    let mut out = vec![(0usize, Vec::new()); top + 1];
    let tensor = |x: &(usize, Vec<u64>), y: &(usize, Vec<u64>)| {
        let free = x.0 * y.0;
        let mut t = Vec::new();
        for _ in 0..x.0 {
            t.extend(&y.1);
        }
        for _ in 0..y.0 {
            t.extend(&x.1);
        }
        for &m in &x.1 {
            for &n in &y.1 {
                t.push(gcd(m, n));
            }
        }
        (free, t)
    };
    let tor = |x: &(usize, Vec<u64>), y: &(usize, Vec<u64>)| {
        let mut t = Vec::new();
        for &m in &x.1 {
            for &n in &y.1 {
                t.push(gcd(m, n));
            }
        }
        t
    };
    for n in 0..=top {
        for i in 0..=n {
            let (f, t) = tensor(&a.0[i], &b.0[n - i]);
            out[n].0 += f;
            out[n].1.extend(t);
        }
        for i in 0..=(n + 1).min(top) {
            if n + 1 - i <= top {
                out[n].1.extend(tor(&a.0[i], &b.0[n + 1 - i]));
            }
        }
    }
    Graded(out)
}

fn trivial_oracle(orders: &[u64], top: usize) -> Graded {
    // One extra degree so the Tor terms of the top degree are present.
    let mut acc = Graded(vec![(1, vec![])].into_iter().chain((1..=top + 1).map(|_| (0, vec![]))).collect());
    for &n in orders {
        acc = kunneth(&acc, &cyclic_cohomology(n, top + 1), top + 1);
    }
    acc
}

/// Exponent vectors of total degree at most `max` in `k` variables.
fn monomials(k: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|w: Vec<u32>| {
                let used: u32 = w.iter().sum();
                (0..=max - used).map(move |e| {
                    let mut v = w.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    out
}

fn supp(w: &[u32]) -> u32 {
    w.iter().enumerate().filter(|(_, &e)| e > 0).fold(0, |m, (i, _)| m | 1 << i)
}

/// `H^n_{ℤ,w}` from the closed form: `ℤ` in degree 0 for `w = 1`; otherwise
/// `C(t−1, i−1)` copies of `ℤ/m_w` in degree `2 deg w − t + i`, `t = deg w̄`.
fn block(orders: &[u64], w: &[u32], n: u32) -> HomologyGroup {
    let s = supp(w);
    if s == 0 {
        return if n == 0 { HomologyGroup::free(1) } else { HomologyGroup::zero() };
    }
    let t = s.count_ones();
    let deg: u32 = w.iter().sum();
    let m = (0..orders.len()).filter(|i| s >> i & 1 == 1).fold(0, |g, i| gcd(g, orders[i]));
    let lo = 2 * deg - t;
    if n <= lo || n > lo + t {
        return HomologyGroup::zero();
    }
    let copies = binom(t as u64 - 1, (n - lo - 1) as u64);
    HomologyGroup::from_parts(0, std::iter::repeat_n(BigInt::from(m), copies as usize))
}

/// `⊕_w ⊕_{y ⊆ w̄, y ⊇ need} H^{n+|y| − shift}_{ℤ,w}`; `shift = false` sums `H^n` directly.
fn block_sum(orders: &[u64], n: u32, shifted: bool, need: u32) -> HomologyGroup {
    let k = orders.len();
    let mut acc = HomologyGroup::zero();
    for w in monomials(k, n + k as u32 + 1) {
        let s = supp(&w);
        if s & need != need {
            continue;
        }
        if shifted {
            for y in 0..=s {
                if y & !s == 0 {
                    acc = acc.sum(&block(orders, &w, n + y.count_ones()));
                }
            }
        } else {
            acc = acc.sum(&block(orders, &w, n));
        }
    }
    acc
}

/// `#{(y, w) : y ⊆ w̄ ⊆ z̄, deg w − deg y = n}` by enumeration.
fn pair_count(k: usize, n: u32) -> usize {
    let mut count = 0;
    for w in monomials(k, n + k as u32) {
        let s = supp(&w);
        let deg: u32 = w.iter().sum();
        for y in 0..=s {
            if y & !s == 0 && deg == n + y.count_ones() {
                count += 1;
            }
        }
    }
    count
}

fn groups_in_band(r: &CohomologyReport) -> Vec<HomologyGroup> {
    r.groups()
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn c1_freeness() -> Outcome {
    let start = Instant::now();
    let cases = suite();
    for c in &cases {
        let dist = Distribution::new(&c.sys, &c.z).map_err(|e| e.to_string())?;
        let d = dist.relation_matrix();
        let inv = invariant_factors(&d);
        let order: u64 = local_orders(&c.sys, &c.z).iter().product();
        ensure(inv.iter().all(One::is_one), || format!("{}: invariants {:?}", c.sys.name(), inv))?;
        ensure((dist.len() - inv.len()) as u64 == order, || {
            format!("{}: rank {} vs |G_z| {order}", c.sys.name(), dist.len() - inv.len())
        })?;
        for p in [2, 3, 5, 7] {
            ensure(rank_mod_p(&d, p) == inv.len(), || format!("{}: rank mod {p} drops", c.sys.name()))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("{} systems, {t:.2?}", cases.len()))
}

fn c2_reduce_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let cases = suite();
    for c in &cases {
        let dist = Distribution::new(&c.sys, &c.z).unwrap();
        let d = dist.relation_matrix();
        let snf = smith_normal_form(&d);
        let r = snf.rank();
        let rows: Vec<usize> = (r..dist.len()).collect();
        let all: Vec<usize> = (0..dist.len()).collect();
        // Rows r.. of the left transform send 𝒜_z onto coker D ≅ ℤ^{|G_z|}.
        let q = snf.left.select(&rows, &all);
        let qb = q.mul(&dist.b0_inclusion()).to_rational();
        for _ in 0..100 {
            let mut v = Coords::new();
            for i in 0..dist.len() {
                if rng.gen_bool(0.3) {
                    let x: i64 = rng.gen_range(-5..=5);
                    if x != 0 {
                        v.insert(i, BigInt::from(x));
                    }
                }
            }
            let rhs: Vec<BigRational> = {
                let qv = q.mul_vec(&v);
                (0..q.rows()).map(|i| BigRational::from_integer(qv.get(&i).cloned().unwrap_or_default())).collect()
            };
            let sol = solve_rational(&qb, &rhs).ok_or("coset oracle has no solution")?;
            let got = dist.reduce(&v);
            for (j, s) in sol.iter().enumerate() {
                ensure(s.is_integer(), || format!("{}: non-integral coset coordinate", c.sys.name()))?;
                let g = got.get(&j).cloned().unwrap_or_default();
                ensure(s.to_integer() == g, || format!("{}: reduce disagrees at B0 #{j}", c.sys.name()))?;
            }
        }
    }
    Ok(format!("{} systems x 100 random vectors", cases.len()))
}

fn c3_anderson() -> Outcome {
    let cases = suite();
    for c in &cases {
        let l = Anderson::new(&c.sys, &c.z).unwrap();
        let cx = l.complex().map_err(|e| e.to_string())?;
        let order: u64 = local_orders(&c.sys, &c.z).iter().product();
        for n in cx.lowest_degree()..0 {
            let h = cx.cohomology(n, Coefficients::Integers).unwrap();
            ensure(h.is_zero(), || format!("{}: H^{n}(L) = {h:?}", c.sys.name()))?;
        }
        let h0 = cx.cohomology(0, Coefficients::Integers).unwrap();
        ensure(h0 == HomologyGroup::free(order as usize), || format!("{}: H^0(L) = {h0:?}", c.sys.name()))?;
        // The augmentation realizes the isomorphism H^0(L) ≅ U_z.
        let u = l.augmentation();
        let inv = invariant_factors(&u);
        ensure(inv.len() == order as usize && inv.iter().all(One::is_one), || format!("{}: u not onto", c.sys.name()))?;
        ensure(u.mul(&cx.differential(-1)).is_zero(), || format!("{}: u d != 0", c.sys.name()))?;
    }
    Ok(format!("{} systems", cases.len()))
}

fn anticommute(pieces: &[((usize, usize), SparseMatrix)]) -> Result<usize, String> {
    let mut checked = 0;
    for (a, (la, ma)) in pieces.iter().enumerate() {
        for (lb, mb) in &pieces[a..] {
            let prod = if la == lb { ma.mul(ma) } else { ma.mul(mb).add(&mb.mul(ma)) };
            ensure(prod.is_zero(), || format!("pieces {la:?} and {lb:?}"))?;
            checked += 1;
        }
    }
    Ok(checked)
}

fn c4_identities() -> Outcome {
    let cases = suite();
    let mut total = 0;
    for c in &cases {
        let l = Anderson::new(&c.sys, &c.z).unwrap();
        let (d1, d2, d) = (l.d1(), l.d2(), l.differential());
        ensure(d.mul(&d).is_zero(), || format!("{}: d^2 on L", c.sys.name()))?;
        ensure(d1.mul(&d1).is_zero() && d2.mul(&d2).is_zero(), || format!("{}: d1^2 or d2^2", c.sys.name()))?;
        ensure(d1.mul(&d2).add(&d2.mul(&d1)).is_zero(), || format!("{}: d1d2 + d2d1", c.sys.name()))?;
        let k = KComplex::new(&c.sys, &c.z, q_for(c)).unwrap();
        for conv in [Convention::Plain, Convention::Tilde] {
            let t = k.total(conv);
            ensure(t.mul(&t).is_zero(), || format!("{}: (d+delta)^2 {conv:?}", c.sys.name()))?;
            total += anticommute(&k.pieces(conv)).map_err(|e| format!("{}: {conv:?} {e}", c.sys.name()))?;
        }
    }
    Ok(format!("{} systems, {total} piece identities", cases.len()))
}

fn c5_epsilon() -> Outcome {
    let sys = e1();
    let z = sys.parse_product("x1*x2").unwrap();
    let k = KComplex::new(&sys, &z, 4).unwrap();
    let e = k.epsilon();
    ensure(e.iter().all(|(r, c, v)| r == c && v.abs().is_one()), || "eps is not a sign diagonal".into())?;
    ensure(e.mul(&e).is_identity(), || "eps^2 != 1".into())?;
    ensure(e.mul(&k.d(Convention::Tilde)).mul(&e) == k.d(Convention::Plain), || "eps d~ eps != d".into())?;
    ensure(e.mul(&k.delta(Convention::Tilde)).mul(&e) == k.delta(Convention::Plain), || "eps delta~ eps != delta".into())?;
    Ok(format!("E1, q_max = 4, rank {}", k.len()))
}

fn trivial_cases() -> Vec<Case> {
    vec![
        case(e1(), "x1*x2"),
        case(preset("trivial:2x3").unwrap(), "x1*x2"),
        case(preset("cyclotomic:63").unwrap(), "3^2*7"),
        case(preset("trivial:2x3x4").unwrap(), "x1*x2*x3"),
        case(mixed(), "a^2*b*c"),
        case(preset("cyclotomic:5").unwrap(), "5"),
    ]
}

fn c6_trivial() -> Outcome {
    let cases = trivial_cases();
    for c in &cases {
        let orders = local_orders(&c.sys, &c.z);
        let got = trivial_cohomology(&c.sys, &c.z, 6, Coefficients::Integers).map_err(|e| e.to_string())?;
        let kun = trivial_oracle(&orders, 5);
        for q in 0..=5u32 {
            let g = got.degree(q as i64).unwrap().group();
            ensure(g == kun.group(q as usize), || format!("{}: H^{q} = {g:?}, Kunneth {:?}", c.sys.name(), kun.group(q as usize)))?;
            let closed = block_sum(&orders, q, false, 0);
            ensure(g == closed, || format!("{}: H^{q} = {g:?}, closed form {closed:?}", c.sys.name()))?;
        }
        let classical = HomologyGroup::from_parts(0, orders.iter().map(|&n| BigInt::from(n)));
        ensure(got.degree(2).unwrap().group() == classical, || format!("{}: H^2 != prod Z/n", c.sys.name()))?;
        // Stalks contribute direct summands.
        for s in c.z.stalks() {
            let small = trivial_cohomology(&c.sys, &s, 6, Coefficients::Integers).unwrap();
            for q in 0..=5 {
                let (a, b) = (small.degree(q).unwrap().group(), got.degree(q).unwrap().group());
                ensure(a.is_summand_of(&b), || format!("{}: H^{q} of stalk {} not a summand", c.sys.name(), c.sys.display(&s)))?;
            }
        }
    }
    Ok(format!("{} systems, q <= 5", cases.len()))
}

fn c7_theorem_a() -> Outcome {
    let runs: Vec<(Case, u64, u32)> = vec![
        (case(e1(), "x1*x2"), 2, 4),
        (case(preset("cyclotomic:15").unwrap(), "3*5"), 2, 4),
        (case(preset("cyclotomic:63").unwrap(), "3^2*7"), 3, 4),
        (case(preset("cyclotomic:63").unwrap(), "3^2*7"), 6, 4),
        (case(preset("carlitz:3:T,T+1").unwrap(), "T*T+1"), 2, 4),
        (case(preset("cyclotomic:105").unwrap(), "3*5*7"), 2, 3),
    ];
    let mut e1_ranks = Vec::new();
    for (c, m, q) in &runs {
        let k = c.z.primes().len();
        let got = cohomology_u_mod(&c.sys, &c.z, *m, *q).map_err(|e| e.to_string())?;
        for n in 0..*q {
            let d = got.degree(n as i64).unwrap();
            let want = pair_count(k, n);
            ensure(d.free_rank == want && d.torsion.is_empty(), || {
                format!("{} mod {m}: H^{n} rank {} torsion {:?}, want {want}", c.sys.name(), d.free_rank, d.torsion)
            })?;
            let lineage = d.lineage.as_ref().ok_or("missing lineage")?;
            ensure(lineage.len() == want, || format!("{}: lineage size", c.sys.name()))?;
            if c.sys.name() == "E1" {
                e1_ranks.push(d.free_rank);
            }
        }
    }
    ensure(e1_ranks[..2] == [4, 8], || format!("E1 ranks {e1_ranks:?}"))?;
    Ok(format!("{} (system, M) pairs; E1 mod 2: {:?}", runs.len(), e1_ranks))
}

fn theorem_b_cases() -> Vec<Case> {
    vec![
        case(e1(), "x1*x2"),
        case(preset("cyclotomic:21").unwrap(), "3*7"),
        case(preset("cyclotomic:63").unwrap(), "3^2*7"),
        case(preset("carlitz:3:T,T+1").unwrap(), "T*T+1"),
        case(preset("cyclotomic:105").unwrap(), "3*5*7"),
    ]
}

fn c8_theorem_b() -> Outcome {
    let cases = theorem_b_cases();
    for c in &cases {
        let q = q_for(c);
        let orders = local_orders(&c.sys, &c.z);
        let got = cohomology_u(&c.sys, &c.z, q).map_err(|e| e.to_string())?;
        for n in 0..q {
            let want = block_sum(&orders, n, true, 0);
            let g = got.degree(n as i64).unwrap().group();
            ensure(g == want, || format!("{}: H^{n} = {g:?}, want {want:?}", c.sys.name()))?;
        }
        // Rank consequence of the restriction spectral sequence, two primes.
        if orders.len() == 2 {
            let frame = c.sys.frame(&c.z).unwrap();
            for y in 0..4u32 {
                let rc = build_restriction_complex(&frame, y, q + 1).map_err(|e| e.to_string())?;
                for n in 0..q {
                    let g = rc.cohomology(n as i64, Coefficients::Integers).unwrap();
                    let want = block_sum(&orders, n, false, y);
                    ensure(g == want, || format!("{}: restriction y={y} H^{n} = {g:?}, want {want:?}", c.sys.name()))?;
                }
            }
        }
    }
    Ok(format!("{} systems with p(x;t) = 1 - t", cases.len()))
}

fn c9_quasi_isomorphisms() -> Outcome {
    let mut notes = Vec::new();
    for c in suite() {
        let q = q_for(&c);
        let k = KComplex::new(&c.sys, &c.z, q).unwrap();
        let kc = k.complex(Convention::Plain).map_err(|e| e.to_string())?;
        let direct = build_direct(&k).map_err(|e| e.to_string())?;
        ensure(direct.total.mul(&direct.u) == direct.u.mul(&k.total(Convention::Plain)), || {
            format!("{}: u is not a chain map", c.sys.name())
        })?;
        let stable = k.s_is_stable(None);
        let qs = if stable { Some((k.quotient_complex().unwrap(), k.s_complex().unwrap())) } else { None };
        let theorem_b = c.z.primes().iter().all(|&x| c.sys.poly_at_one(x).is_zero());
        ensure(!theorem_b || stable, || format!("{}: S not stable", c.sys.name()))?;
        for n in 0..q as i64 {
            let hk = kc.cohomology(n, Coefficients::Integers).unwrap();
            let hd = direct.complex.cohomology(n, Coefficients::Integers).unwrap();
            ensure(hk == hd, || format!("{}: H^{n}(K) = {hk:?} vs Hom(P,U) {hd:?}", c.sys.name()))?;
            if let Some((qc, sc)) = &qs {
                let hq = qc.cohomology(n, Coefficients::Integers).unwrap();
                ensure(hq == hk, || format!("{}: rho fails at H^{n}", c.sys.name()))?;
                ensure(sc.cohomology(n, Coefficients::Integers).unwrap().is_zero(), || format!("{}: S not acyclic", c.sys.name()))?;
            }
        }
        if stable {
            notes.push(c.sys.name().to_string());
        }
    }
    // rho_M on pairs satisfying the divisibility hypotheses.
    for (c, m) in [(case(e1(), "x1*x2"), 2u64), (case(preset("cyclotomic:63").unwrap(), "3^2*7"), 3)] {
        let k = KComplex::new(&c.sys, &c.z, 4).unwrap();
        ensure(k.s_is_stable(Some(m)), || format!("{}: S not stable mod {m}", c.sys.name()))?;
        let (kc, qc) = (k.complex(Convention::Plain).unwrap(), k.quotient_complex().unwrap());
        for n in 0..4 {
            let a = kc.cohomology(n, Coefficients::Mod(m)).unwrap();
            let b = qc.cohomology(n, Coefficients::Mod(m)).unwrap();
            ensure(a == b, || format!("{}: rho_M fails at H^{n}", c.sys.name()))?;
        }
    }
    Ok(format!("K = Hom(P,U) on all; rho on {}; rho_M on 2 pairs", notes.join(", ")))
}

/// Character of `U_z ⊗ ℚ` equals that of `ℚ[G_z]`.
fn regular_character(dist: &Distribution) -> bool {
    let orders = &dist.frame().orders;
    let r = dist.reduction_matrix();
    let incl = dist.b0_inclusion();
    let n: u64 = orders.iter().product();
    let mut g = vec![0u64; orders.len()];
    for _ in 0..n {
        let mut act = SparseMatrix::identity(dist.len());
        for (i, &k) in g.iter().enumerate() {
            act = dist.sigma_matrix(i, k).mul(&act);
        }
        let m = r.mul(&act).mul(&incl);
        let trace: BigInt = (0..m.rows()).map(|i| m.get(i, i)).sum();
        let want = if g.iter().all(|&k| k == 0) { BigInt::from(n) } else { BigInt::zero() };
        if trace != want {
            return false;
        }
        for (i, slot) in g.iter_mut().enumerate() {
            *slot += 1;
            if *slot < orders[i] {
                break;
            }
            *slot = 0;
        }
    }
    true
}

fn c10_connecting() -> Outcome {
    let pairs = [
        (preset("cyclotomic:15").unwrap(), preset("predistribution:15").unwrap(), "3*5"),
        (preset("cyclotomic:15").unwrap(), preset("cyclotomic:15").unwrap().trivial_variant(), "3*5"),
        (e1(), e1().with_polys("E1/-t", vec![poly(&[0, -1]), poly(&[1])]).unwrap(), "x1*x2"),
        (preset("cyclotomic:105").unwrap(), preset("predistribution:105").unwrap(), "3*5*7"),
    ];
    for (s1, s2, z) in &pairs {
        let z = s1.parse_product(z).unwrap();
        let p12 = connecting_map(s1, s2, &z).map_err(|e| e.to_string())?;
        let p21 = connecting_map(s2, s1, &z).map_err(|e| e.to_string())?;
        ensure(p21.mul(&p12).is_identity(), || format!("{} -> {}: phi21 phi12 != 1", s1.name(), s2.name()))?;
        let dist1 = Distribution::new(s1, &z).unwrap();
        let dist2 = Distribution::new(s2, &z).unwrap();
        let (d1, d2) = (dist1.relation_matrix().to_rational(), dist2.relation_matrix().to_rational());
        let r2 = rational_rank_q(&d2);
        ensure(rational_rank_q(&SparseMatrix::hstack(&[&d2, &p12.mul(&d1)])) == r2, || {
            format!("{} -> {}: phi12 D1 not in D2", s1.name(), s2.name())
        })?;
        let order: u64 = local_orders(s1, &z).iter().product();
        for (d, dist) in [(&d1, &dist1), (&d2, &dist2)] {
            ensure((d.rows() - rational_rank_q(d)) as u64 == order, || "rational rank".into())?;
            ensure(regular_character(dist), || "U (x) Q is not the regular representation".into())?;
        }
    }
    Ok(format!("{} system pairs", pairs.len()))
}

fn c11_corestriction() -> Outcome {
    let mut maps = 0;
    let mut splits = 0;
    for c in suite() {
        let big = Distribution::new(&c.sys, &c.z).unwrap();
        for w in c.z.divisors() {
            if w == c.z {
                continue;
            }
            let m = corestriction(&c.sys, &w, &c.z).map_err(|e| e.to_string())?;
            ensure(rational_rank(&m) == m.cols(), || format!("{}: cor from {} not injective", c.sys.name(), c.sys.display(&w)))?;
            maps += 1;
            if !w.is_stalk_of(&c.z) {
                continue;
            }
            // Symbols of B0 ∩ A_w are symbols of B0 ∩ A_z; picking those rows must give 1.
            let small = Distribution::new(&c.sys, &w).unwrap();
            let (fw, fz) = (small.frame(), big.frame());
            let mut rows = Vec::new();
            for &i in small.b0() {
                let (mask, res) = small.symbol(i);
                let (mut zm, mut zr) = (0u32, vec![0u64; fz.orders.len()]);
                for b in 0..fw.orders.len() {
                    if mask >> b & 1 == 1 {
                        let j = fz.primes.iter().position(|&p| p == fw.primes[b]).unwrap();
                        zm |= 1 << j;
                        zr[j] = res[b];
                    }
                }
                rows.push(big.b0_position(big.index(zm, &zr)).ok_or("stalk symbol outside B0")?);
            }
            let cols: Vec<usize> = (0..m.cols()).collect();
            ensure(m.select(&rows, &cols).is_identity(), || format!("{}: no splitting from {}", c.sys.name(), c.sys.display(&w)))?;
            splits += 1;
        }
    }
    Ok(format!("{maps} corestrictions injective, {splits} split"))
}

fn c12_truncation() -> Outcome {
    let mut reports = 0;
    let mut same = |a: CohomologyReport, b: CohomologyReport| -> Result<(), String> {
        reports += 1;
        ensure(a.agrees_within_band(&b) && groups_in_band(&a).len() + 2 == b.groups().len(), || {
            format!("{} {} over {} changes under q_max + 2", a.system, a.target, a.coefficients)
        })
    };
    for c in suite() {
        let q = q_for(&c) - 1;
        same(cohomology_u(&c.sys, &c.z, q).unwrap(), cohomology_u(&c.sys, &c.z, q + 2).unwrap())?;
        same(
            trivial_cohomology(&c.sys, &c.z, q, Coefficients::Integers).unwrap(),
            trivial_cohomology(&c.sys, &c.z, q + 2, Coefficients::Integers).unwrap(),
        )?;
        if c.z.primes().len() == 2 {
            same(
                cohomology_u_direct(&c.sys, &c.z, q, Coefficients::Integers).unwrap(),
                cohomology_u_direct(&c.sys, &c.z, q + 2, Coefficients::Integers).unwrap(),
            )?;
            same(cohomology_u_mod(&c.sys, &c.z, 2, q).unwrap(), cohomology_u_mod(&c.sys, &c.z, 2, q + 2).unwrap())?;
        }
    }
    Ok(format!("{reports} reports stable"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 freeness and rank of U_z", c1_freeness),
        ("2 reduce matches the Smith coset oracle", c2_reduce_oracle),
        ("3 Anderson resolution is acyclic", c3_anderson),
        ("4 differential identities", c4_identities),
        ("5 epsilon conjugation", c5_epsilon),
        ("6 trivial-module cohomology", c6_trivial),
        ("7 theorem a (mod M)", c7_theorem_a),
        ("8 theorem b (integral)", c8_theorem_b),
        ("9 quasi-isomorphism cross-checks", c9_quasi_isomorphisms),
        ("10 connecting map", c10_connecting),
        ("11 corestriction", c11_corestriction),
        ("12 truncation soundness", c12_truncation),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{:.2?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why} [{:.2?}]", t.elapsed());
            }
        }
    }
    let total = start.elapsed();
    println!("{} of 12 criteria passed in {total:.2?}", 12 - failed);
    if total > Duration::from_secs(60) {
        println!("FAIL  suite exceeded 60 s");
        failed += 1;
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
