//! Kloosterman sums `K(m,n,c) = Σ_{d (c)*} e((m·d̄ + n·d)/c)`, evaluated by
//! high-precision summation over a certified table of roots of unity, plus
//! the multiplicativity and vanishing properties as testable operations.
//!
//! The sum is invariant under `d ↦ −d`, hence real; the imaginary part is
//! still accumulated and checked against the certified error budget.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixed::{ulp, unit_table, Fixed};
use crate::residue::is_prime_u64;
use crate::specialfn::PrecisionReal;

pub const DEFAULT_PRECISION: u32 = 128;

/// Extra working bits so the reported bound `c²·2^{−precision}` holds with
/// room to spare.
const GUARD_BITS: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KloostermanQuery {
    pub m: i64,
    pub n: i64,
    pub c: u64,
}

impl KloostermanQuery {
    pub fn new(m: i64, n: i64, c: u64) -> Result<Self> {
        if c < 1 {
            return Err(Error::InvalidParameter("modulus c must be at least 1".into()));
        }
        Ok(KloostermanQuery { m, n, c })
    }
}

/// Multiplicative inverse of `d` modulo `c`, as the representative in `[0, c)`.
pub fn mod_inverse(d: i64, c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::InvalidParameter("modulus must be positive".into()));
    }
    if c == 1 {
        return Ok(0);
    }
    let a = d.rem_euclid(c as i64) as u64;
    crate::residue::mod_inverse_u64(a, c).map_err(|_| Error::NoModularInverse { d, c })
}

/// Default "is zero" tolerance: `2^{−64}·c`.
pub fn default_zero_tolerance(c: u64) -> f64 {
    c as f64 * (-64.0f64).exp2()
}

/// Real part of the sum (the sum itself, up to certified error).
pub fn kloosterman_sum(query: &KloostermanQuery, precision: u32) -> PrecisionReal {
    kloosterman_sum_complex(query, precision).0
}

/// Raw complex sum `(Re, Im)`. `Im` vanishes mathematically; it is returned
/// so realness can be asserted against the same error budget.
pub fn kloosterman_sum_complex(query: &KloostermanQuery, precision: u32) -> (PrecisionReal, PrecisionReal) {
    let c = query.c;
    let wp = precision + GUARD_BITS;
    if c == 1 {
        // the trivial group contributes e(0) = 1
        return (
            PrecisionReal { value: Fixed::one(precision), error_bound: ulp(precision) },
            PrecisionReal { value: Fixed::zero(precision), error_bound: ulp(precision) },
        );
    }
    let table = unit_table(c, wp);
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    let mut summands: u64 = 0;
    for d in 1..c {
        if gcd_u64(d, c) != 1 {
            continue;
        }
        let dbar = crate::residue::mod_inverse_u64(d, c).expect("gcd checked");
        let idx = ((query.m as i128 * dbar as i128 + query.n as i128 * d as i128)
            .rem_euclid(c as i128)) as usize;
        re += &table.cos[idx];
        im += &table.sin[idx];
        summands += 1;
    }
    let err = summands as f64 * table.entry_err + ulp(precision);
    debug_assert!(err <= (c as f64) * (c as f64) * ulp(precision));
    (
        PrecisionReal { value: Fixed::from_mant(re, wp).with_prec(precision), error_bound: err },
        PrecisionReal { value: Fixed::from_mant(im, wp).with_prec(precision), error_bound: err },
    )
}

/// Twisted-argument multiplicativity across a coprime factorization:
/// `K(m,n,c₁c₂) = K(m·c̄₂, n·c̄₂, c₁) · K(m·c̄₁, n·c̄₁, c₂)`.
pub fn check_multiplicativity(m: i64, n: i64, c1: u64, c2: u64, tol: f64) -> Result<bool> {
    if gcd_u64(c1, c2) != 1 {
        return Err(Error::NonCoprimeModuli { a: c1, b: c2 });
    }
    let prec = DEFAULT_PRECISION;
    let c2_inv_mod_c1 = mod_inverse(c2 as i64, c1)? as i64;
    let c1_inv_mod_c2 = mod_inverse(c1 as i64, c2)? as i64;
    let whole = kloosterman_sum(&KloostermanQuery::new(m, n, c1 * c2)?, prec);
    let left = kloosterman_sum(
        &KloostermanQuery::new(m * c2_inv_mod_c1, n * c2_inv_mod_c1, c1)?,
        prec,
    );
    let right = kloosterman_sum(
        &KloostermanQuery::new(m * c1_inv_mod_c2, n * c1_inv_mod_c2, c2)?,
        prec,
    );
    let diff = whole.to_f64() - left.to_f64() * right.to_f64();
    Ok(diff.abs() < tol)
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub max_abs: f64,
    pub worst_case: (i64, i64, u64),
    pub pass: bool,
    pub tolerance: f64,
    pub cases: usize,
}

/// Scan `K(m, np, p²c)` over `1 ≤ n ≤ n_max`, `1 ≤ c ≤ c_max`. Every value
/// vanishes when `p ∤ m`; the scan reports the largest observed magnitude and
/// passes iff it stays below `tol`.
pub fn vanishing_scan(
    p: u64,
    m: i64,
    n_max: i64,
    c_max: u64,
    tol: f64,
    precision: u32,
) -> Result<VanishingReport> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if m.rem_euclid(p as i64) == 0 {
        return Err(Error::HypothesisViolated(format!(
            "p = {p} divides m = {m}; the vanishing statement does not apply"
        )));
    }
    let grid: Vec<(i64, u64)> = (1..=n_max)
        .flat_map(|n| (1..=c_max).map(move |c| (n, c)))
        .collect();
    let values: Vec<(f64, (i64, i64, u64))> = grid
        .par_iter()
        .map(|&(n, c)| {
            let np = n * p as i64;
            let modulus = p * p * c;
            let k = kloosterman_sum(
                &KloostermanQuery { m, n: np, c: modulus },
                precision,
            );
            (k.to_f64().abs(), (m, np, modulus))
        })
        .collect();
    // sequential reduction in grid order keeps the worst case deterministic
    let mut max_abs = -1.0f64;
    let mut worst = (m, 0, 0);
    for (v, case) in values {
        if v > max_abs {
            max_abs = v;
            worst = case;
        }
        log::debug!(
            "K({}, {}, {}) = {:.3e}; Weil-type bound {:.3e}",
            case.0,
            case.1,
            case.2,
            v,
            weil_bound(case.0, case.1, case.2)
        );
    }
    Ok(VanishingReport {
        max_abs,
        worst_case: worst,
        pass: max_abs < tol,
        tolerance: tol,
        cases: grid.len(),
    })
}

/// Observational Weil-type bound `d(c)·√gcd(m,n,c)·√c` (logged, not asserted).
fn weil_bound(m: i64, n: i64, c: u64) -> f64 {
    let g = gcd_u64(gcd_u64(m.unsigned_abs(), n.unsigned_abs()), c).max(1);
    let d = (1..=c).filter(|t| c % t == 0).count() as f64;
    d * (g as f64).sqrt() * (c as f64).sqrt()
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
