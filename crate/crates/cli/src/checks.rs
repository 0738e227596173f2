//! Verification checks run by `normdist verify`.

use std::time::Instant;

use clap::ValueEnum;
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use normdist::anderson::koszul_matrix;
use normdist::cohomology::{build_direct, theorem_a_applies, theorem_b_applies};
use normdist::linalg::field::rational_rank_q;
use normdist::linalg::{invariant_factors, rational_rank};
use normdist::{
    connecting_map, corestriction, cohomology_u, cohomology_u_mod, koszul_truncated, predicted_theorem_a,
    predicted_theorem_b, predicted_trivial, trivial_cohomology, Anderson, CohomologyReport, Coefficients,
    Convention, Distribution, Error, FormalProduct, HomologyGroup, KComplex, NormSystem, Result, SparseMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Check {
    Anderson,
    Basis,
    Connecting,
    Corestriction,
    Epsilon,
    Koszul,
    TheoremA,
    TheoremB,
    Trivial,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Anderson,
        Check::Basis,
        Check::Connecting,
        Check::Corestriction,
        Check::Epsilon,
        Check::Koszul,
        Check::TheoremA,
        Check::TheoremB,
        Check::Trivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Anderson => "anderson",
            Check::Basis => "basis",
            Check::Connecting => "connecting",
            Check::Corestriction => "corestriction",
            Check::Epsilon => "epsilon",
            Check::Koszul => "koszul",
            Check::TheoremA => "theorem_a",
            Check::TheoremB => "theorem_b",
            Check::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "skipped: inapplicable")]
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        }
    }
}

/// Computed against predicted groups in one degree.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeComparison {
    pub degree: i64,
    pub computed: HomologyGroup,
    pub predicted: HomologyGroup,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lineage: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub degrees: Vec<DegreeComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

/// Everything a check needs to know about the run.
pub struct Context<'a> {
    pub sys: &'a NormSystem,
    pub z: &'a FormalProduct,
    pub modulus: Option<u64>,
    pub q_max: u32,
}

enum Outcome {
    Pass(String, Vec<DegreeComparison>),
    Fail(String, Vec<DegreeComparison>),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail, Vec::new())
    } else {
        Outcome::Fail(detail, Vec::new())
    }
}

pub fn run_check(check: Check, ctx: &Context, timings: bool) -> CheckResult {
    let start = Instant::now();
    let outcome = match check {
        Check::Anderson => anderson(ctx),
        Check::Basis => basis(ctx),
        Check::Connecting => connecting(ctx),
        Check::Corestriction => corestriction_check(ctx),
        Check::Epsilon => epsilon(ctx),
        Check::Koszul => koszul(ctx),
        Check::TheoremA => theorem_a(ctx),
        Check::TheoremB => theorem_b(ctx),
        Check::Trivial => trivial(ctx),
    };
    let (status, detail, degrees) = match outcome {
        Ok(Outcome::Pass(d, g)) => (Status::Pass, d, g),
        Ok(Outcome::Fail(d, g)) => (Status::Fail, d, g),
        Ok(Outcome::Skip(d)) => (Status::Skipped, d, Vec::new()),
        Err(e) => (Status::Fail, format!("error: {e}"), Vec::new()),
    };
    CheckResult {
        name: check.name(),
        status,
        detail,
        degrees,
        elapsed_ms: timings.then(|| start.elapsed().as_millis() as u64),
    }
}

fn all_ones(inv: &[BigInt]) -> bool {
    inv.iter().all(One::is_one)
}

fn basis(ctx: &Context) -> Result<Outcome> {
    let dist = Distribution::new(ctx.sys, ctx.z)?;
    let inv = invariant_factors(&dist.relation_matrix());
    let order = ctx.sys.group_order(ctx.z)? as usize;
    let rank = dist.len() - inv.len();
    Ok(verdict(
        all_ones(&inv) && rank == order && dist.rank() == order,
        format!("|A_z| = {}, relation rank {}, invariants all 1: {}, rank of U_z {rank}, |G_z| = {order}", dist.len(), inv.len(), all_ones(&inv)),
    ))
}

fn anderson(ctx: &Context) -> Result<Outcome> {
    let l = Anderson::new(ctx.sys, ctx.z)?;
    let (d1, d2) = (l.d1(), l.d2());
    let identities = d1.mul(&d1).is_zero() && d2.mul(&d2).is_zero() && d1.mul(&d2).add(&d2.mul(&d1)).is_zero();
    let c = l.complex()?;
    let order = ctx.sys.group_order(ctx.z)? as usize;
    let mut acyclic = true;
    for n in c.lowest_degree()..0 {
        acyclic &= c.cohomology(n, Coefficients::Integers)?.is_zero();
    }
    let h0 = c.cohomology(0, Coefficients::Integers)?;
    // u is onto and kills exactly the boundaries.
    let u = l.augmentation();
    let onto = all_ones(&invariant_factors(&u)) && invariant_factors(&u).len() == order;
    let kills = u.mul(&c.differential(-1)).is_zero();
    Ok(verdict(
        identities && acyclic && h0 == HomologyGroup::free(order) && onto && kills,
        format!(
            "d1^2 = d2^2 = d1d2+d2d1 = 0: {identities}; H^n = 0 for n < 0: {acyclic}; H^0 = Z^{} (|G_z| = {order}); u onto with u d = 0: {}",
            h0.free_rank,
            onto && kills
        ),
    ))
}

fn compare(computed: &CohomologyReport, predicted: &CohomologyReport) -> (bool, Vec<DegreeComparison>) {
    let rows: Vec<DegreeComparison> = computed
        .degrees
        .iter()
        .zip(&predicted.degrees)
        .map(|(c, p)| DegreeComparison {
            degree: c.degree,
            computed: c.group(),
            predicted: p.group(),
            lineage: c.lineage.clone(),
        })
        .collect();
    (rows.iter().all(|r| r.computed == r.predicted), rows)
}

fn with_rows(ok: bool, detail: String, rows: Vec<DegreeComparison>) -> Outcome {
    if ok {
        Outcome::Pass(detail, rows)
    } else {
        Outcome::Fail(detail, rows)
    }
}

fn trivial(ctx: &Context) -> Result<Outcome> {
    let computed = trivial_cohomology(ctx.sys, ctx.z, ctx.q_max, Coefficients::Integers)?;
    let predicted = predicted_trivial(ctx.sys, ctx.z, ctx.q_max)?;
    let (ok, rows) = compare(&computed, &predicted);
    let mut detail = format!("H^q(G_z, Z) for q < {} matches the closed form: {ok}", ctx.q_max);
    let mut classical = true;
    if ctx.q_max > 2 {
        let orders = ctx.z.primes().into_iter().map(|x| ctx.sys.order(x, ctx.z.valuation(x)).map(BigInt::from));
        let want = HomologyGroup::from_parts(0, orders.collect::<Result<Vec<_>>>()?);
        classical = computed.degree(2)?.group() == want;
        detail.push_str(&format!("; H^2 = prod Z/n_x: {classical}"));
    }
    Ok(with_rows(ok && classical, detail, rows))
}

fn theorem_b(ctx: &Context) -> Result<Outcome> {
    if let Err(e) = theorem_b_applies(ctx.sys, ctx.z) {
        return Ok(Outcome::Skip(inapplicable(e)));
    }
    let k = KComplex::new(ctx.sys, ctx.z, ctx.q_max)?;
    let computed = k.report(ctx.sys, Coefficients::Integers)?;
    let predicted = predicted_theorem_b(ctx.sys, ctx.z, ctx.q_max)?;
    let (ok, rows) = compare(&computed, &predicted);
    let direct = build_direct(&k)?;
    let mut agree = true;
    for n in 0..ctx.q_max as i64 {
        agree &= direct.complex.cohomology(n, Coefficients::Integers)? == computed.degree(n)?.group();
    }
    Ok(with_rows(
        ok && agree,
        format!("K_z matches the prediction: {ok}; K_z agrees with Hom(P_z, U_z): {agree}"),
        rows,
    ))
}

fn theorem_a(ctx: &Context) -> Result<Outcome> {
    let Some(m) = ctx.modulus else {
        return Ok(Outcome::Skip("skipped: inapplicable (no modulus given)".into()));
    };
    if let Err(e) = theorem_a_applies(ctx.sys, ctx.z, m) {
        return Ok(Outcome::Skip(inapplicable(e)));
    }
    let computed = cohomology_u_mod(ctx.sys, ctx.z, m, ctx.q_max)?;
    let predicted = predicted_theorem_a(ctx.sys, ctx.z, m, ctx.q_max)?;
    let (ok, rows) = compare(&computed, &predicted);
    let k = KComplex::new(ctx.sys, ctx.z, ctx.q_max)?;
    let stable = k.s_is_stable(Some(m));
    Ok(with_rows(
        ok && stable,
        format!("Z/{m}-ranks match the pair count: {ok}; S stable mod {m}: {stable}"),
        rows,
    ))
}

fn inapplicable(e: Error) -> String {
    match e {
        Error::Precondition(why) => format!("skipped: inapplicable ({why})"),
        other => format!("skipped: inapplicable ({other})"),
    }
}

fn epsilon(ctx: &Context) -> Result<Outcome> {
    let k = KComplex::new(ctx.sys, ctx.z, ctx.q_max)?;
    let plain = k.check_identities(Convention::Plain).is_ok();
    let tilde = k.check_identities(Convention::Tilde).is_ok();
    let e = k.epsilon();
    let square = e.mul(&e).is_identity();
    let conj_d = e.mul(&k.d(Convention::Tilde)).mul(&e) == k.d(Convention::Plain);
    let conj_delta = e.mul(&k.delta(Convention::Tilde)).mul(&e) == k.delta(Convention::Plain);
    Ok(verdict(
        plain && tilde && square && conj_d && conj_delta,
        format!(
            "rank {}: identities plain {plain}, tilde {tilde}; eps^2 = 1: {square}; eps d~ eps = d: {conj_d}; eps delta~ eps = delta: {conj_delta}",
            k.len()
        ),
    ))
}

/// A second system on the same groups with different polynomials.
fn partner(sys: &NormSystem) -> Result<NormSystem> {
    let all_trivial = sys.polys().iter().all(|p| p.len() == 1 && p[0].is_one());
    if all_trivial {
        sys.with_polys(format!("{}/1-t", sys.name()), vec![vec![BigInt::one(), -BigInt::one()]; sys.prime_count()])
    } else {
        Ok(sys.trivial_variant())
    }
}

fn connecting(ctx: &Context) -> Result<Outcome> {
    let other = partner(ctx.sys)?;
    let phi12 = connecting_map(ctx.sys, &other, ctx.z)?;
    let phi21 = connecting_map(&other, ctx.sys, ctx.z)?;
    let inverse = phi21.mul(&phi12).is_identity() && phi12.mul(&phi21).is_identity();
    let d1 = Distribution::new(ctx.sys, ctx.z)?.relation_matrix().to_rational();
    let d2 = Distribution::new(&other, ctx.z)?.relation_matrix().to_rational();
    let r2 = rational_rank_q(&d2);
    let maps_relations = rational_rank_q(&SparseMatrix::hstack(&[&d2, &phi12.mul(&d1)])) == r2;
    let order = ctx.sys.group_order(ctx.z)? as usize;
    let rank1 = d1.rows() - rational_rank_q(&d1);
    let rank2 = d2.rows() - r2;
    Ok(verdict(
        inverse && maps_relations && rank1 == order && rank2 == order,
        format!(
            "against {}: phi21 phi12 = 1: {inverse}; phi12 D1 in D2: {maps_relations}; dim U_z (x) Q = {rank1}, {rank2} (|G_z| = {order})",
            other.name()
        ),
    ))
}

fn corestriction_check(ctx: &Context) -> Result<Outcome> {
    let big = Distribution::new(ctx.sys, ctx.z)?;
    let mut injective = 0;
    let mut split = 0;
    let mut failures = Vec::new();
    let divisors: Vec<FormalProduct> = ctx.z.divisors().into_iter().filter(|w| w != ctx.z).collect();
    for w in &divisors {
        let m = corestriction(ctx.sys, w, ctx.z)?;
        if rational_rank(&m) == m.cols() {
            injective += 1;
        } else {
            failures.push(format!("not injective from {}", ctx.sys.display(w)));
        }
        if w.is_stalk_of(ctx.z) {
            let small = Distribution::new(ctx.sys, w)?;
            if splits(&small, &big, &m) {
                split += 1;
            } else {
                failures.push(format!("no splitting from {}", ctx.sys.display(w)));
            }
            // The lift to the resolutions commutes with the differentials.
            let (lw, lz) = (Anderson::new(ctx.sys, w)?, Anderson::new(ctx.sys, ctx.z)?);
            let c = Anderson::corestriction(&lw, &lz)?;
            if lz.differential().mul(&c) != c.mul(&lw.differential()) {
                failures.push(format!("lift from {} is not a chain map", ctx.sys.display(w)));
            }
        }
    }
    let detail = format!(
        "{injective}/{} proper divisors injective, {split} stalks split{}",
        divisors.len(),
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    Ok(verdict(failures.is_empty(), detail))
}

/// Projecting onto the `B₀` coordinates that come from `w` undoes the corestriction.
fn splits(small: &Distribution, big: &Distribution, m: &SparseMatrix) -> bool {
    let (fw, fz) = (small.frame(), big.frame());
    let mut rows = Vec::new();
    for &i in small.b0() {
        let (mask, res) = small.symbol(i);
        let mut zmask = 0u32;
        let mut zres = vec![0u64; fz.rank()];
        for b in fw.bits(mask) {
            let j = fz.local_index(fw.primes[b]).expect("w divides z");
            zmask |= 1 << j;
            zres[j] = res[b];
        }
        let Some(pos) = big.b0_position(big.index(zmask, &zres)) else { return false };
        rows.push(pos);
    }
    let cols: Vec<usize> = (0..m.cols()).collect();
    m.select(&rows, &cols).is_identity()
}

fn koszul(ctx: &Context) -> Result<Outcome> {
    let k = ctx.z.primes().len();
    let mut exact = true;
    for j in 0..=k {
        let c = koszul_truncated(j)?;
        for n in c.lowest_degree()..=c.highest_degree() {
            let h = c.cohomology(n, Coefficients::Integers)?;
            exact &= if n == 0 { h == HomologyGroup::free(1) } else { h.is_zero() };
        }
    }
    let l = Anderson::new(ctx.sys, ctx.z)?;
    let d = l.differential();
    let mut chain = true;
    let mut blocks = Vec::new();
    for &a in l.distribution().b0() {
        let e = l.koszul_embedding(a)?;
        let vars = (k as u32).saturating_sub(l.distribution().symbol(a).0.count_ones()) as usize;
        chain &= d.mul(&e) == e.mul(&koszul_matrix(vars));
        blocks.push(e);
    }
    let refs: Vec<&SparseMatrix> = blocks.iter().collect();
    let all = SparseMatrix::hstack(&refs);
    let inv = invariant_factors(&all);
    let iso = all.rows() == all.cols() && inv.len() == all.cols() && all_ones(&inv);
    Ok(verdict(
        exact && chain && iso,
        format!(
            "truncated Koszul complexes on <= {k} variables have H = Z in degree 0 only: {exact}; summand maps are chain maps: {chain}; L_z = sum over B0 of Koszul summands (unimodular {}x{}): {iso}",
            all.rows(),
            all.cols()
        ),
    ))
}

/// `H*(G_z, U_z)` or `H*(G_z, U_z/M)` as requested by the `cohomology` subcommand.
pub fn cohomology(ctx: &Context) -> Result<CohomologyReport> {
    match ctx.modulus {
        Some(m) => cohomology_u_mod(ctx.sys, ctx.z, m, ctx.q_max),
        None => cohomology_u(ctx.sys, ctx.z, ctx.q_max),
    }
}
