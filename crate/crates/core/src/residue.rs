//! q-series reduced modulo a prime power.
//!
//! A [`ResidueSeries`] carries the same window bookkeeping as
//! [`QSeries`](crate::QSeries) but stores residues in `ℤ/p^Tℤ` as machine
//! words. It is the required arithmetic for congruence and density scans on
//! long windows, where exact-rational convolution would be hopeless.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{parse_bigint, QSeries, MAX_ABS_EXPONENT};

/// Residues must stay below this so products fit in `u64` and long
/// convolutions can accumulate in `u128` without overflow.
const MODULUS_CAP: u64 = 1 << 31;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueSeries {
    p: u64,
    t: u32,
    modulus: u64,
    lead: i64,
    trunc: i64,
    coeffs: BTreeMap<i64, u64>,
}

impl ResidueSeries {
    /// Reduce an exact series modulo `p^t`. Fails if `p` is not prime, the
    /// modulus overflows the word-size cap, or any denominator on the window
    /// is divisible by `p` (reporting the offending exponent).
    pub fn from_qseries(s: &QSeries, p: u64, t: u32) -> Result<Self> {
        let modulus = checked_prime_power(p, t)?;
        let mut coeffs = BTreeMap::new();
        for (n, c) in s.iter_nonzero() {
            if (c.denom() % p).is_zero() {
                return Err(Error::NonIntegralDenominator { exponent: n, p });
            }
            let num = big_mod(c.numer(), modulus);
            let den = big_mod(c.denom(), modulus);
            let r = (num as u128 * mod_inverse_u64(den, modulus)? as u128 % modulus as u128) as u64;
            if r != 0 {
                coeffs.insert(n, r);
            }
        }
        Ok(ResidueSeries { p, t, modulus, lead: s.lead(), trunc: s.trunc(), coeffs })
    }

    pub fn zero(p: u64, t: u32, trunc: i64) -> Result<Self> {
        let modulus = checked_prime_power(p, t)?;
        Ok(ResidueSeries { p, t, modulus, lead: 0, trunc, coeffs: BTreeMap::new() })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn lead(&self) -> i64 {
        self.lead
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn coeff(&self, n: i64) -> u64 {
        debug_assert!(n < self.trunc);
        self.coeffs.get(&n).copied().unwrap_or(0)
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.coeffs.iter().filter(|(_, &c)| c != 0).map(|(&n, &c)| (n, c))
    }

    /// p-adic valuation of the coefficient at `n`, saturated at `t` (a zero
    /// residue only certifies `v_p ≥ t`).
    pub fn valuation_at(&self, n: i64) -> u32 {
        let mut c = self.coeff(n);
        if c == 0 {
            return self.t;
        }
        let mut v = 0;
        while c % self.p == 0 {
            c /= self.p;
            v += 1;
        }
        v
    }

    fn check_compatible(&self, rhs: &Self) {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_compatible(rhs);
        let trunc = self.trunc.min(rhs.trunc);
        let lead = self.lead.min(rhs.lead).min(trunc);
        let mut coeffs = BTreeMap::new();
        for (n, c) in self.iter_nonzero().chain(rhs.iter_nonzero()) {
            if n < trunc {
                let e = coeffs.entry(n).or_insert(0u64);
                *e = (*e + c) % self.modulus;
            }
        }
        coeffs.retain(|_, c| *c != 0);
        ResidueSeries { p: self.p, t: self.t, modulus: self.modulus, lead, trunc, coeffs }
    }

    /// Dense residue convolution with `u128` accumulation.
    pub fn mul(&self, rhs: &Self) -> Self {
        self.check_compatible(rhs);
        let lead = self.lead + rhs.lead;
        let trunc = (self.trunc + rhs.lead).min(rhs.trunc + self.lead);
        if trunc <= lead {
            return ResidueSeries {
                p: self.p,
                t: self.t,
                modulus: self.modulus,
                lead: lead.min(trunc),
                trunc,
                coeffs: BTreeMap::new(),
            };
        }
        let out_len = (trunc - lead) as usize;
        let a = self.body();
        let b = rhs.body();
        let (a, b) = if count_nz(&a) <= count_nz(&b) { (a, b) } else { (b, a) };
        let nz: Vec<usize> = (0..a.len()).filter(|&i| a[i] != 0).collect();
        let m = self.modulus as u128;
        let mut coeffs = BTreeMap::new();
        for k in 0..out_len {
            let lo = nz.partition_point(|&i| (k as i64 - i as i64) >= b.len() as i64);
            let mut acc: u128 = 0;
            for &i in &nz[lo..] {
                if i > k {
                    break;
                }
                acc += a[i] as u128 * b[k - i] as u128;
            }
            let r = (acc % m) as u64;
            if r != 0 {
                coeffs.insert(lead + k as i64, r);
            }
        }
        ResidueSeries { p: self.p, t: self.t, modulus: self.modulus, lead, trunc, coeffs }
    }

    /// `D^j` on residues: coefficient at `q^n` gains `n^j mod p^T`.
    pub fn d_operator(&self, j: u32) -> Self {
        let m = self.modulus;
        let coeffs = self
            .iter_nonzero()
            .map(|(n, c)| {
                let base = (n.rem_euclid(m as i64)) as u64;
                (n, (c as u128 * pow_mod(base, j as u64, m) as u128 % m as u128) as u64)
            })
            .filter(|(_, c)| *c != 0)
            .collect();
        ResidueSeries { lead: self.lead, trunc: self.trunc, coeffs, ..*self }
    }

    /// Formal Eichler integral in weight `k` on residues: multiplies the
    /// coefficient at `q^n` by `n^{1−k} mod p^T` and drops the constant term.
    /// Fails on a nonzero coefficient whose exponent is divisible by `p`.
    pub fn eichler_integral(&self, k: u32) -> Result<Self> {
        assert!(k >= 2 && k % 2 == 0, "weight must be even and at least 2");
        let m = self.modulus;
        let mut coeffs = BTreeMap::new();
        for (n, c) in self.iter_nonzero() {
            if n == 0 {
                continue;
            }
            if n.rem_euclid(self.p as i64) == 0 {
                return Err(Error::NonInvertibleExponent { exponent: n, p: self.p });
            }
            let base = (n.rem_euclid(m as i64)) as u64;
            let inv = mod_inverse_u64(base, m)?;
            let factor = pow_mod(inv, (k - 1) as u64, m);
            let r = (c as u128 * factor as u128 % m as u128) as u64;
            if r != 0 {
                coeffs.insert(n, r);
            }
        }
        Ok(ResidueSeries { lead: self.lead, trunc: self.trunc, coeffs, ..*self })
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus;
        let coeffs = self.iter_nonzero().map(|(n, c)| (n, (m - c) % m)).collect();
        ResidueSeries { lead: self.lead, trunc: self.trunc, coeffs, ..*self }
    }

    fn body(&self) -> Vec<u64> {
        let len = (self.trunc - self.lead) as usize;
        let mut out = vec![0u64; len];
        for (n, c) in self.iter_nonzero() {
            out[(n - self.lead) as usize] = c;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ResidueDoc::from(self)).expect("serializing residue series")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ResidueDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

fn count_nz(a: &[u64]) -> usize {
    a.iter().filter(|&&v| v != 0).count()
}

fn big_mod(x: &num_bigint::BigInt, m: u64) -> u64 {
    x.mod_floor(&num_bigint::BigInt::from(m)).to_u64().expect("residue fits u64")
}

fn checked_prime_power(p: u64, t: u32) -> Result<u64> {
    if p < 2 || !is_prime_u64(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("exponent T must be positive".into()));
    }
    let mut m: u64 = 1;
    for _ in 0..t {
        m = m.checked_mul(p).filter(|&v| v < MODULUS_CAP).ok_or(Error::ModulusTooLarge { p, t })?;
    }
    Ok(m)
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse in `ℤ/mℤ` by extended Euclid.
pub fn mod_inverse_u64(a: u64, m: u64) -> Result<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NoModularInverse { d: a as i64, c: m });
    }
    Ok(s0.rem_euclid(m as i128) as u64)
}

/// Wire form: `{"modulus": "p^T", "lead": int, "trunc": int,
/// "coeffs": [[n, "residue"], ...]}` with decimal residue strings.
#[derive(Serialize, Deserialize)]
struct ResidueDoc {
    modulus: String,
    lead: i64,
    trunc: i64,
    coeffs: Vec<(i64, String)>,
}

impl From<&ResidueSeries> for ResidueDoc {
    fn from(s: &ResidueSeries) -> Self {
        ResidueDoc {
            modulus: format!("{}^{}", s.p, s.t),
            lead: s.lead,
            trunc: s.trunc,
            coeffs: s.iter_nonzero().map(|(n, c)| (n, c.to_string())).collect(),
        }
    }
}

impl TryFrom<ResidueDoc> for ResidueSeries {
    type Error = Error;

    fn try_from(doc: ResidueDoc) -> Result<Self> {
        let (p_s, t_s) = doc
            .modulus
            .split_once('^')
            .ok_or_else(|| Error::MalformedDocument(format!("modulus {:?}", doc.modulus)))?;
        let p = parse_bigint(p_s)?
            .to_u64()
            .ok_or_else(|| Error::MalformedDocument("modulus base out of range".into()))?;
        let t = parse_bigint(t_s)?
            .to_u32()
            .ok_or_else(|| Error::MalformedDocument("modulus exponent out of range".into()))?;
        let modulus = checked_prime_power(p, t)?;
        if doc.lead.abs() > MAX_ABS_EXPONENT || doc.trunc.abs() > MAX_ABS_EXPONENT {
            return Err(Error::MalformedDocument("window bound out of range".into()));
        }
        if doc.lead > doc.trunc {
            return Err(Error::MalformedDocument(format!(
                "lead {} exceeds trunc {}",
                doc.lead, doc.trunc
            )));
        }
        let mut coeffs = BTreeMap::new();
        for (n, s) in doc.coeffs {
            if n < doc.lead || n >= doc.trunc {
                return Err(Error::MalformedDocument(format!("exponent {n} outside window")));
            }
            let r = parse_bigint(&s)?
                .to_u64()
                .filter(|&r| r < modulus)
                .ok_or_else(|| Error::MalformedDocument(format!("residue {s:?} out of range")))?;
            if coeffs.insert(n, r).is_some() {
                return Err(Error::MalformedDocument(format!("duplicate exponent {n}")));
            }
        }
        Ok(ResidueSeries { p, t, modulus, lead: doc.lead, trunc: doc.trunc, coeffs })
    }
}
