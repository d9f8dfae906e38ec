//! Exact 3-adic analysis of the rational core `f·L_f`: valuations, the unit
//! congruence `f·L_f ≡ 1 (mod 3)`, the higher congruence families, the
//! iterated-derivative congruences, and the `π(3^t;X)` density table.
//!
//! β never enters any statement here: the membership claims
//! `D̂(f,f,h;3) − b_f(h) ∈ (3^t/β)·ℤ_(3)` are equivalent to valuation
//! inequalities on the exact rational `[q^h](f·L_f)`, which is how they are
//! checked — float-free end to end. Density scans run in residue arithmetic
//! mod `3^T`; a valuation below `T` is detected exactly and `v ≥ max(t)` is
//! all the table needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::modularforms::{newform_eta3_8, weakform_m9};
use crate::qseries::QSeries;
use crate::residue::ResidueSeries;
use crate::shiftedconv::{exact_l_f, exact_product};

/// p-adic valuation: `Finite(v)` or `Infinity` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vp {
    Finite(i64),
    Infinity,
}

impl Vp {
    pub fn at_least(&self, bound: i64) -> bool {
        match self {
            Vp::Infinity => true,
            Vp::Finite(v) => *v >= bound,
        }
    }
}

impl std::fmt::Display for Vp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vp::Finite(v) => write!(f, "{v}"),
            Vp::Infinity => write!(f, "∞"),
        }
    }
}

/// `v_p(num) − v_p(den)`; `Infinity` for 0.
pub fn vp(x: &BigRational, p: u64) -> Vp {
    if x.is_zero() {
        return Vp::Infinity;
    }
    Vp::Finite(vp_int(x.numer(), p) - vp_int(x.denom(), p))
}

fn vp_int(x: &BigInt, p: u64) -> i64 {
    let mut n = x.abs();
    let p = BigInt::from(p);
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatementId {
    UnitCongruence,
    Family9n6,
    Family36n30,
    DPower { t: u32, r: u32 },
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub exponent: i64,
    pub found: Vp,
    pub required: i64,
}

#[derive(Clone, Debug)]
pub struct PadicReport {
    pub p: u64,
    pub statement: StatementId,
    pub range: (i64, i64),
    pub pass: bool,
    pub failures: Vec<Failure>,
}

fn report(p: u64, statement: StatementId, range: (i64, i64), failures: Vec<Failure>) -> PadicReport {
    PadicReport { p, statement, range, pass: failures.is_empty(), failures }
}

/// `f·L_f ≡ 1 (mod 3)`: the constant term is exactly 1 and every coefficient
/// at `1 ≤ h < window` has `v₃ ≥ 1`. Exact rational arithmetic throughout.
pub fn unit_congruence_check(window: i64) -> Result<PadicReport> {
    if window < 2 {
        return Err(Error::InvalidParameter("window must be at least 2".into()));
    }
    let core = exact_product(window)?;
    let mut failures = Vec::new();
    if core.coeff(0) != BigRational::from_integer(BigInt::from(1)) {
        failures.push(Failure { exponent: 0, found: vp(&core.coeff(0), 3), required: 0 });
    }
    for h in 1..window {
        let v = vp(&core.coeff(h), 3);
        if !v.at_least(1) {
            failures.push(Failure { exponent: h, found: v, required: 1 });
        }
    }
    Ok(report(3, StatementId::UnitCongruence, (0, window), failures))
}

/// The two higher congruence families, checked exactly:
/// `v₃ ≥ 2` on `h ≡ 6 (mod 9)` and `v₃ ≥ 3` on `h ≡ 30 (mod 36)`.
pub fn congruence_families_check(window: i64) -> Result<Vec<PadicReport>> {
    if window < 31 {
        return Err(Error::InvalidParameter(
            "window must contain a member of each family (≥ 31)".into(),
        ));
    }
    let core = exact_product(window)?;
    let mut out = Vec::with_capacity(2);
    for (statement, modulus, residue, required) in [
        (StatementId::Family9n6, 9i64, 6i64, 2i64),
        (StatementId::Family36n30, 36, 30, 3),
    ] {
        let mut failures = Vec::new();
        let mut h = residue;
        while h < window {
            let v = vp(&core.coeff(h), 3);
            if !v.at_least(required) {
                failures.push(Failure { exponent: h, found: v, required });
            }
            h += modulus;
        }
        out.push(report(3, statement, (residue, window), failures));
    }
    Ok(out)
}

/// Weight of the newform pipeline.
const WEIGHT: u32 = 4;

/// Minimal `r` with `r·φ(p^t) ≥ k−1`.
pub fn minimal_admissible_r(p: u64, t: u32, k: u32) -> u32 {
    let phi = (p - 1) * p.pow(t - 1);
    ((k as u64 - 1).div_ceil(phi)) as u32
}

/// Iterated-derivative congruence with the minimal admissible `r`.
pub fn d_power_congruence_check(p: u64, t: u32, window: i64) -> Result<PadicReport> {
    let r = minimal_admissible_r(p, t, WEIGHT);
    d_power_congruence_check_with_r(p, t, r, window)
}

/// `L_f ≡ D^{r(p−1)p^{t−1}−k+1}(−m) (mod p^t)` coefficientwise, in exact
/// residue arithmetic. `r` must satisfy `r·φ(p^t) ≥ k−1`; both sides have
/// support coprime to p = 3, which `reduce_mod`/`eichler_integral` enforce.
pub fn d_power_congruence_check_with_r(
    p: u64,
    t: u32,
    r: u32,
    window: i64,
) -> Result<PadicReport> {
    if t < 1 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let phi = (p - 1) * p.pow(t - 1);
    if (r as u64) * phi < (WEIGHT as u64) - 1 {
        return Err(Error::InvalidParameter(format!(
            "r = {r} is not admissible: r·φ({p}^{t}) = {} < k−1",
            r as u64 * phi
        )));
    }
    let exponent = (r as u64) * phi - (WEIGHT as u64 - 1);

    let m = weakform_m9(window)?;
    let neg_m = m.neg().reduce_mod(p, t)?;
    // 𝓕₀ in the CM normalization: L_f = −E_m
    let lhs = neg_m.eichler_integral(WEIGHT)?;
    let rhs = neg_m.d_operator(exponent as u32);

    let mut failures = Vec::new();
    for h in -1..window {
        let (a, b) = (lhs.coeff(h), rhs.coeff(h));
        if a != b {
            let diff = (a as i64 - b as i64).rem_euclid(p.pow(t) as i64) as u64;
            let mut v = 0i64;
            let mut d = diff;
            while d % p == 0 && d > 0 {
                d /= p;
                v += 1;
            }
            failures.push(Failure { exponent: h, found: Vp::Finite(v), required: t as i64 });
        }
    }
    Ok(report(p, StatementId::DPower { t, r }, (-1, window), failures))
}

/// One entry of the density table: the count of `1 ≤ h ≤ X` with
/// `v₃([q^h](f·L_f)) ≥ t`, with the proportion kept as an exact rational.
#[derive(Clone, Debug)]
pub struct DensityRow {
    pub t: u32,
    pub x: u64,
    pub count: u64,
    pub proportion: BigRational,
}

impl DensityRow {
    /// Proportion rounded to three decimals (the table's print precision).
    pub fn rounded3(&self) -> f64 {
        ((self.count as f64 / self.x as f64) * 1000.0).round() / 1000.0
    }
}

/// Residues of `f·L_f` modulo `3^T` on `[0, window)`.
pub fn product_residues(window: i64, t_precision: u32) -> Result<ResidueSeries> {
    let f = newform_eta3_8(window).reduce_mod(3, t_precision)?;
    let m = weakform_m9(window + 2)?.reduce_mod(3, t_precision)?;
    let l_f = m.eichler_integral(WEIGHT)?.neg();
    Ok(f.mul(&l_f))
}

/// The `π(3^t;X)` table: exact counts mod `3^T`, no floats. Requires
/// `T > max(t)` so the valuation boundary is decidable.
pub fn density_table(
    t_values: &[u32],
    x_values: &[u64],
    t_precision: u32,
) -> Result<Vec<DensityRow>> {
    let t_max = t_values.iter().copied().max().unwrap_or(0);
    if t_precision <= t_max {
        return Err(Error::InvalidParameter(format!(
            "T = {t_precision} cannot distinguish the valuation boundary at t = {t_max}"
        )));
    }
    let x_max = x_values.iter().copied().max().unwrap_or(0);
    if x_max == 0 || t_values.is_empty() {
        return Err(Error::InvalidParameter("need at least one X and one t".into()));
    }
    let window = x_max as i64 + 2;
    let residues = product_residues(window, t_precision)?;

    let mut rows = Vec::with_capacity(t_values.len() * x_values.len());
    for &x in x_values {
        for &t in t_values {
            let modulus = 3u64.pow(t);
            let count = (1..=x as i64)
                .filter(|&h| residues.coeff(h) % modulus == 0)
                .count() as u64;
            rows.push(DensityRow {
                t,
                x,
                count,
                proportion: BigRational::new(BigInt::from(count), BigInt::from(x)),
            });
        }
    }
    Ok(rows)
}

/// An arithmetic progression `h ≡ residue (mod modulus)` whose members all
/// carry `v₃ ≥ t` up to the scanned window. `vacuous` marks classes where no
/// coefficient with `v₃ < T` was observed at all (in particular the classes
/// off the support progression, where every coefficient is exactly zero).
#[derive(Clone, Debug)]
pub struct ScanFinding {
    pub modulus: u64,
    pub residue: u64,
    pub t: u32,
    pub vacuous: bool,
}

pub const SCAN_MODULI: [u64; 6] = [3, 9, 18, 27, 36, 72];

/// Empirical congruence-family scan: report every progression (over the
/// given moduli) with uniform valuation ≥ t up to the window. No completeness
/// claim is made; this is an observation tool.
pub fn congruence_scan(window: i64, t: u32, moduli: &[u64]) -> Result<Vec<ScanFinding>> {
    if window < 2 {
        return Err(Error::InvalidParameter("window must be at least 2".into()));
    }
    let t_precision = t + 3;
    let residues = product_residues(window, t_precision)?;
    let modulus_t = 3u64.pow(t);
    let mut findings = Vec::new();
    for &m in moduli {
        if m == 0 {
            continue;
        }
        for r in 0..m {
            let mut pass = true;
            let mut vacuous = true;
            let mut h = if r == 0 { m as i64 } else { r as i64 };
            while h < window {
                let res = residues.coeff(h);
                if res != 0 {
                    vacuous = false;
                }
                if res % modulus_t != 0 {
                    pass = false;
                    break;
                }
                h += m as i64;
            }
            if pass {
                findings.push(ScanFinding { modulus: m, residue: r, t, vacuous });
            }
        }
    }
    Ok(findings)
}

/// General-α normalized mock modular form `F_α = L_f − α·E_f` (the α = 0
/// choice is the CM normalization used everywhere else in the pipeline).
/// Provided for completeness; the pipeline itself never takes this path and
/// it is deliberately left untested.
pub fn normalized_mock(alpha: &BigRational, window: i64) -> Result<QSeries> {
    let l_f = exact_l_f(window)?;
    let e_f = newform_eta3_8(window).eichler_integral(WEIGHT);
    Ok(l_f.sub(&e_f.scale(alpha)))
}
