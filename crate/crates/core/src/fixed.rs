//! Dyadic fixed-point reals with arbitrary-precision mantissas.
//!
//! A [`Fixed`] holds `mant / 2^prec` with `mant` a [`BigInt`]. Addition and
//! subtraction are exact; multiplication and division round to nearest, so a
//! single operation contributes at most half an ulp (`2^-prec-1`) of absolute
//! error. The transcendental helpers in this module (π, cos/sin of rational
//! multiples of 2π, exp) return explicit absolute error bounds so callers can
//! do certified accounting instead of trusting a rounding model.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Fixed-point real: `mant / 2^prec`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed {
    mant: BigInt,
    prec: u32,
}

/// One ulp at `prec` bits, as an f64 upper bound.
pub fn ulp(prec: u32) -> f64 {
    (-(prec as f64)).exp2()
}

/// Round `x / 2^shift` to nearest, half away from zero.
fn round_shr(x: &BigInt, shift: u32) -> BigInt {
    if shift == 0 {
        return x.clone();
    }
    let half = BigInt::from(1) << (shift - 1);
    if x.is_negative() {
        -((-x + half) >> shift)
    } else {
        (x + half) >> shift
    }
}

/// Round `n / d` to nearest, half away from zero. `d` must be nonzero.
fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    let (na, da) = (n.abs(), d.abs());
    let q = (&na * 2u32 + &da) / (&da * 2u32);
    if n.is_negative() != d.is_negative() && !q.is_zero() {
        -q
    } else {
        q
    }
}

impl Fixed {
    pub fn zero(prec: u32) -> Self {
        Fixed { mant: BigInt::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        Fixed { mant: BigInt::from(1) << prec, prec }
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Fixed { mant: BigInt::from(v) << prec, prec }
    }

    pub fn from_mant(mant: BigInt, prec: u32) -> Self {
        Fixed { mant, prec }
    }

    /// Exact conversion: every finite f64 is a dyadic rational.
    /// Loses nothing as long as `prec` covers the f64's exponent; otherwise
    /// rounds to nearest (an additional half-ulp).
    pub fn from_f64(v: f64, prec: u32) -> Self {
        assert!(v.is_finite(), "cannot represent non-finite f64");
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074i64) // subnormal
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mant = BigInt::from(m) * sign;
        let shift = e + prec as i64;
        let mant = if shift >= 0 {
            mant << (shift as u32)
        } else {
            round_shr(&mant, (-shift) as u32)
        };
        Fixed { mant, prec }
    }

    /// `num/den` rounded to nearest representable value (≤ half an ulp off).
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero());
        Fixed { mant: div_round(&(num << prec), den), prec }
    }

    pub fn from_ratio_i64(num: i64, den: i64, prec: u32) -> Self {
        Self::from_ratio(&BigInt::from(num), &BigInt::from(den), prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        Fixed { mant: self.mant.abs(), prec: self.prec }
    }

    pub fn neg(&self) -> Self {
        Fixed { mant: -&self.mant, prec: self.prec }
    }

    /// Exact.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        Fixed { mant: &self.mant + &rhs.mant, prec: self.prec }
    }

    /// Exact.
    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        Fixed { mant: &self.mant - &rhs.mant, prec: self.prec }
    }

    /// Rounds to nearest: result is within half an ulp of the true product.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        Fixed { mant: round_shr(&(&self.mant * &rhs.mant), self.prec), prec: self.prec }
    }

    /// Exact (mantissa product of an integer).
    pub fn mul_int(&self, k: i64) -> Self {
        Fixed { mant: &self.mant * k, prec: self.prec }
    }

    /// Rounds to nearest.
    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0);
        Fixed { mant: div_round(&self.mant, &BigInt::from(k)), prec: self.prec }
    }

    /// Rounds to nearest.
    pub fn div(&self, rhs: &Self) -> Self {
        assert_eq!(self.prec, rhs.prec, "precision mismatch");
        assert!(!rhs.mant.is_zero(), "division by zero");
        Fixed { mant: div_round(&(&self.mant << self.prec), &rhs.mant), prec: self.prec }
    }

    /// Floor square root; result is within one ulp of the true root.
    /// Panics on negative input.
    pub fn sqrt(&self) -> Self {
        assert!(!self.mant.is_negative(), "sqrt of negative value");
        let shifted: BigInt = &self.mant << self.prec;
        Fixed { mant: shifted.sqrt(), prec: self.prec }
    }

    /// Change precision, rounding to nearest when narrowing.
    pub fn with_prec(&self, prec: u32) -> Self {
        if prec >= self.prec {
            Fixed { mant: &self.mant << (prec - self.prec), prec }
        } else {
            Fixed { mant: round_shr(&self.mant, self.prec - prec), prec }
        }
    }

    pub fn to_f64(&self) -> f64 {
        // BigInt::to_f64 rounds and saturates to ±inf; fine for reporting.
        self.mant.to_f64().unwrap_or(f64::INFINITY) * ulp(self.prec)
    }

    /// Decimal rendering with `digits` fractional digits, truncated toward zero.
    pub fn to_decimal(&self, digits: u32) -> String {
        let neg = self.mant.is_negative();
        let a = self.mant.abs();
        let int_part: BigInt = &a >> self.prec;
        let frac: BigInt = &a - (&int_part << self.prec);
        let scaled: BigInt = (frac * BigInt::from(10u32).pow(digits)) >> self.prec;
        let frac_str = format!("{:0>width$}", scaled.to_string(), width = digits as usize);
        format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac_str)
    }
}

impl std::fmt::Display for Fixed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_decimal(30))
    }
}

/// `arctan(1/x)` scaled by `2^scale_bits`, with the number of accumulated
/// floor errors (in ulps at that scale). Alternating series, so the tail is
/// bounded by the first omitted term, which is below one ulp at termination.
fn arctan_inv_scaled(x: u64, scale_bits: u32) -> (BigInt, u64) {
    let scale = BigInt::from(1) << scale_bits;
    let x2 = BigInt::from(x) * x;
    let mut xpow = BigInt::from(x);
    let mut total = BigInt::zero();
    let mut j: u64 = 0;
    loop {
        let term = &scale / (&xpow * (2 * j + 1));
        if term.is_zero() {
            break;
        }
        if j % 2 == 0 {
            total += &term;
        } else {
            total -= &term;
        }
        xpow *= &x2;
        j += 1;
    }
    (total, j + 1)
}

/// π to `prec` bits, within one ulp (Machin: π = 16 arctan(1/5) − 4 arctan(1/239)).
pub fn pi(prec: u32) -> Fixed {
    let guard = prec + 32;
    let (a, ea) = arctan_inv_scaled(5, guard);
    let (b, eb) = arctan_inv_scaled(239, guard);
    let mant = a * 16 - b * 4;
    // error at guard scale: 16·ea + 4·eb ulps, far below 2^31; rounding to
    // prec adds half an ulp there.
    debug_assert!(16 * ea + 4 * eb < 1 << 31);
    Fixed { mant: round_shr(&mant, 32), prec }
}

/// cos and sin of `2π·num/den` with an absolute error bound, by Taylor series
/// after exact reduction of the fraction into [0, 1/4] using symmetries.
///
/// Valid for any `0 ≤ num`, `den ≥ 1`.
pub fn cos_sin_2pi_frac(num: u64, den: u64, prec: u32) -> (Fixed, Fixed, f64) {
    let nred = num % den;
    // Octant-free reduction: fold [0,1) to [0,1/4] tracking the images of
    // cos and sin. Work with the fraction 4·nred/den = q + r/den, q ∈ {0..3}.
    let q = (4 * nred) / den;
    let r = (4 * nred) % den; // angle = (q + r/den)·π/2
    let (c, s, err) = cos_sin_taylor(r, 4 * den, prec);
    // cos((q·π/2) + t) / sin likewise, t ∈ [0, π/2)
    let (cv, sv) = match q {
        0 => (c, s),
        1 => (s.neg(), c),
        2 => (c.neg(), s.neg()),
        3 => (s, c.neg()),
        _ => unreachable!(),
    };
    (cv, sv, err)
}

/// cos and sin of `2π·num/den` for `num/den ≤ 1/4` by direct Taylor summation.
/// Returns (cos, sin, absolute error bound covering both).
fn cos_sin_taylor(num: u64, den: u64, prec: u32) -> (Fixed, Fixed, f64) {
    let work = prec + 24;
    let pi_w = pi(work);
    // y = 2π·num/den ≤ π/2;  e_y ≤ 2·e_π·(num/den) + half ulp ≤ 2 ulp
    let y = Fixed {
        mant: div_round(&(&pi_w.mant * (2 * num)), &BigInt::from(den)),
        prec: work,
    };
    let y2 = y.mul(&y);
    let u = ulp(work);

    // cos: Σ (−1)^j y^{2j}/(2j)!     sin: Σ (−1)^j y^{2j+1}/(2j+1)!
    // Terms decrease monotonically from the start since y ≤ π/2 < 2, so the
    // alternating-series tail bound applies at every truncation point.
    let mut cos_acc = Fixed::one(work);
    let mut sin_acc = y.clone();
    let mut ct = Fixed::one(work);
    let mut st = y.clone();
    let mut err: f64 = 3.0 * u; // y rounding + seed terms
    let mut j: i64 = 0;
    loop {
        j += 1;
        ct = ct.mul(&y2).div_int((2 * j - 1) * (2 * j));
        st = st.mul(&y2).div_int((2 * j) * (2 * j + 1));
        let t_f = ct.to_f64().abs().max(st.to_f64().abs());
        if j % 2 == 1 {
            cos_acc = cos_acc.sub(&ct);
            sin_acc = sin_acc.sub(&st);
        } else {
            cos_acc = cos_acc.add(&ct);
            sin_acc = sin_acc.add(&st);
        }
        err += 3.0 * u; // two rounded ops per series step, plus slack
        if t_f < u {
            err += 2.0 * t_f + 2.0 * u; // alternating tails, both series
            break;
        }
    }
    (
        cos_acc.with_prec(prec),
        sin_acc.with_prec(prec),
        err + 2.0 * ulp(prec),
    )
}

/// Table of `(cos, sin)(2π a/c)` mantissas for `a = 0..c`, at `prec` bits,
/// with a per-entry absolute error bound.
///
/// Built by repeated complex rotation by `e(1/c)`. Errors grow linearly: the
/// rotation has unit modulus, so step `a` carries at most
/// `a·(seed_err + 2 ulp)·(1 + c·seed_err)` of accumulated error.
pub struct UnitTable {
    pub cos: Vec<BigInt>,
    pub sin: Vec<BigInt>,
    pub prec: u32,
    pub entry_err: f64,
}

pub fn unit_table(c: u64, prec: u32) -> UnitTable {
    assert!(c >= 1);
    let (cz, sz, ez) = cos_sin_2pi_frac(1, c, prec);
    let n = c as usize;
    let mut cos = Vec::with_capacity(n);
    let mut sin = Vec::with_capacity(n);
    cos.push(BigInt::from(1) << prec);
    sin.push(BigInt::zero());
    let (zm_c, zm_s) = (&cz.mant, &sz.mant);
    for a in 1..n {
        let (pc, ps) = (&cos[a - 1], &sin[a - 1]);
        let nc = round_shr(&(pc * zm_c - ps * zm_s), prec);
        let ns = round_shr(&(ps * zm_c + pc * zm_s), prec);
        cos.push(nc);
        sin.push(ns);
    }
    let step = ez + 2.0 * ulp(prec);
    let entry_err = (c as f64) * step * (1.0 + (c as f64) * ez) + ulp(prec);
    UnitTable { cos, sin, prec, entry_err }
}

/// `e^x` for `x ≥ 0` with an absolute error bound.
pub fn exp_pos(x: &Fixed) -> (Fixed, f64) {
    assert!(!x.is_negative());
    let prec = x.prec();
    let u = ulp(prec);
    let mut acc = Fixed::one(prec);
    let mut term = Fixed::one(prec);
    let mut err = 0.0f64;
    let xf = x.to_f64();
    let mut j: i64 = 0;
    loop {
        j += 1;
        term = term.mul(x).div_int(j);
        acc = acc.add(&term);
        err += 2.0 * u * (1.0 + term.to_f64());
        let tf = term.to_f64();
        if tf < u && (j as f64) > 2.0 * xf {
            // ratio x/(j+1) < 1/2: geometric tail ≤ term
            err += tf + 2.0 * u;
            break;
        }
    }
    (acc, err)
}

/// `1/a` with rounding error ≤ half an ulp (input error must be propagated
/// by the caller as `e_in / a²`).
pub fn recip(a: &Fixed) -> Fixed {
    assert!(!a.is_zero());
    let prec = a.prec();
    Fixed {
        mant: div_round(&(BigInt::from(1) << (2 * prec)), &a.mant),
        prec,
    }
}
