//! Truncated Laurent q-series over arbitrary-precision rationals.
//!
//! A [`QSeries`] stores coefficients on a window `[lead, trunc)`: exponents
//! below `lead` are zero by definition, exponents at or above `trunc` are
//! unknown. Windows are tracked pessimistically through every operation, so a
//! result never claims coefficients it cannot certify; in particular
//! `mul` propagates `trunc = min(a.trunc + b.lead, b.trunc + a.lead)`.
//!
//! Coefficients are exact rationals end to end. Multiplication extracts a
//! common denominator and convolves integer bodies when the denominators are
//! tame (with a machine-word fast path when every product fits `i128`),
//! falling back to sparse rational schoolbook convolution otherwise. Stored
//! zeros are tolerated and stripped lazily on comparison and serialization.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residue::ResidueSeries;

/// Window bound for exponents accepted from external documents. Keeps window
/// arithmetic far away from `i64` overflow.
pub const MAX_ABS_EXPONENT: i64 = 1 << 40;

/// Dense output lengths above this use the parallel convolution path.
const PAR_LEN_THRESHOLD: usize = 1 << 12;

/// Common-denominator extraction gives up beyond this many bits.
const DEN_BITS_CAP: u64 = 4096;

#[derive(Clone, Debug)]
pub struct QSeries {
    lead: i64,
    trunc: i64,
    coeffs: BTreeMap<i64, BigRational>,
}

impl QSeries {
    /// Build from `(exponent, coefficient)` pairs. Panics if an exponent
    /// falls outside `[lead, trunc)`.
    pub fn new<I>(lead: i64, trunc: i64, pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let mut coeffs = BTreeMap::new();
        for (n, c) in pairs {
            assert!(
                lead <= n && n < trunc,
                "exponent {n} outside window [{lead}, {trunc})"
            );
            coeffs.insert(n, c);
        }
        QSeries { lead, trunc, coeffs }
    }

    pub fn zero(trunc: i64) -> Self {
        QSeries { lead: 0, trunc, coeffs: BTreeMap::new() }
    }

    pub fn one(trunc: i64) -> Self {
        Self::monomial(0, BigRational::one(), trunc)
    }

    pub fn constant(c: BigRational, trunc: i64) -> Self {
        Self::monomial(0, c, trunc)
    }

    pub fn monomial(n: i64, c: BigRational, trunc: i64) -> Self {
        assert!(n < trunc);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(n, c);
        QSeries { lead: n.min(0), trunc, coeffs }
    }

    /// Test helper: integer coefficients at given exponents.
    pub fn from_i64_pairs(lead: i64, trunc: i64, pairs: &[(i64, i64)]) -> Self {
        Self::new(
            lead,
            trunc,
            pairs
                .iter()
                .map(|&(n, c)| (n, BigRational::from_integer(BigInt::from(c)))),
        )
    }

    pub fn lead(&self) -> i64 {
        self.lead
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Coefficient at `n`. Exponents below the window are genuinely zero;
    /// asking above `trunc` is a caller bug.
    pub fn coeff(&self, n: i64) -> BigRational {
        debug_assert!(n < self.trunc, "coefficient {n} beyond window {}", self.trunc);
        self.coeffs.get(&n).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff_checked(&self, n: i64) -> Result<BigRational> {
        if n >= self.trunc {
            return Err(Error::WindowExceeded { h: n, lead: self.lead, trunc: self.trunc });
        }
        Ok(self.coeff(n))
    }

    /// Nonzero terms in exponent order.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero()).map(|(&n, c)| (n, c))
    }

    pub fn nnz(&self) -> usize {
        self.iter_nonzero().count()
    }

    pub fn is_zero_series(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    /// Smallest exponent with a nonzero coefficient, if any.
    pub fn order(&self) -> Option<i64> {
        self.iter_nonzero().next().map(|(n, _)| n)
    }

    /// Drop stored zeros and tighten `lead` to the window floor.
    pub fn normalized(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    /// Clip to a smaller truncation window.
    pub fn truncated(&self, new_trunc: i64) -> Self {
        assert!(new_trunc <= self.trunc, "cannot widen a window by truncation");
        QSeries {
            lead: self.lead.min(new_trunc),
            trunc: new_trunc,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&n, _)| n < new_trunc)
                .map(|(&n, c)| (n, c.clone()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        QSeries {
            lead: self.lead,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        QSeries {
            lead: self.lead,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, c * s)).collect(),
        }
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        QSeries {
            lead: self.lead + k,
            trunc: self.trunc + k,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n + k, c.clone())).collect(),
        }
    }

    /// Coefficientwise sum on the intersection of the knowledge windows.
    pub fn add(&self, rhs: &Self) -> Self {
        let trunc = self.trunc.min(rhs.trunc);
        let lead = self.lead.min(rhs.lead).min(trunc);
        let mut coeffs = BTreeMap::new();
        for (&n, c) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            if n < trunc {
                let e = coeffs.entry(n).or_insert_with(BigRational::zero);
                *e += c;
            }
        }
        QSeries { lead, trunc, coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// Exact Cauchy product; `trunc = min(a.trunc + b.lead, b.trunc + a.lead)`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let lead = self.lead + rhs.lead;
        let trunc = (self.trunc + rhs.lead).min(rhs.trunc + self.lead);
        if trunc <= lead || self.is_zero_series() || rhs.is_zero_series() {
            return QSeries { lead: lead.min(trunc), trunc, coeffs: BTreeMap::new() };
        }
        let out_len = (trunc - lead) as usize;

        if let (Some(da), Some(db)) = (self.common_denominator(), rhs.common_denominator()) {
            let a = self.integer_body(&da);
            let b = rhs.integer_body(&db);
            let den = da * db;
            let body = conv_int(&a, &b, out_len);
            let coeffs = body
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (lead + i as i64, BigRational::new(v, den.clone())))
                .collect();
            return QSeries { lead, trunc, coeffs };
        }

        // Sparse rational schoolbook.
        let mut coeffs: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (i, ci) in self.iter_nonzero() {
            for (j, cj) in rhs.iter_nonzero() {
                let n = i + j;
                if n >= trunc {
                    break;
                }
                let e = coeffs.entry(n).or_insert_with(BigRational::zero);
                *e += ci * cj;
            }
        }
        QSeries { lead, trunc, coeffs }
    }

    /// Multiplicative inverse on the window. The coefficient at `lead` must
    /// be nonzero; the result satisfies `self.mul(inv) = 1` on the window.
    pub fn invert(&self) -> Result<Self> {
        let lead_coeff = self.coeff(self.lead.min(self.trunc - 1).max(self.lead));
        if self.trunc <= self.lead || lead_coeff.is_zero() {
            return Err(Error::NonInvertibleSeries { lead: self.lead });
        }
        let len = (self.trunc - self.lead) as usize;
        let body: Vec<BigRational> = (0..len as i64).map(|i| self.coeff(self.lead + i)).collect();

        // Integer fast path: a unit constant keeps the inverse integral.
        let integral_unit = body.iter().all(|c| c.denom().is_one())
            && (body[0].numer().is_one() || (-body[0].numer()).is_one());

        let nz: Vec<usize> = (1..len).filter(|&k| !body[k].is_zero()).collect();
        let mut out: Vec<BigRational> = Vec::with_capacity(len);

        if integral_unit {
            let c0 = body[0].numer().clone(); // ±1
            let bi: Vec<BigInt> = body.iter().map(|c| c.numer().clone()).collect();
            let mut r: Vec<BigInt> = Vec::with_capacity(len);
            r.push(c0.clone());
            for n in 1..len {
                let mut s = BigInt::zero();
                for &k in &nz {
                    if k > n {
                        break;
                    }
                    s += &bi[k] * &r[n - k];
                }
                r.push(-&c0 * s);
            }
            out.extend(r.into_iter().map(BigRational::from_integer));
        } else {
            let inv0 = BigRational::one() / body[0].clone();
            let neg_inv0 = -inv0.clone();
            let mut r: Vec<BigRational> = Vec::with_capacity(len);
            r.push(inv0);
            for n in 1..len {
                let mut s = BigRational::zero();
                for &k in &nz {
                    if k > n {
                        break;
                    }
                    s += &body[k] * &r[n - k];
                }
                r.push(&neg_inv0 * s);
            }
            out = r;
        }

        let lead = -self.lead;
        Ok(QSeries {
            lead,
            trunc: lead + len as i64,
            coeffs: out
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (lead + i as i64, c))
                .collect(),
        })
    }

    /// Integer power by repeated squaring; negative powers invert first.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(QSeries::one(self.trunc - self.lead));
        }
        let (mut base, mut k) = if e < 0 {
            (self.invert()?, (-e) as u64)
        } else {
            (self.clone(), e as u64)
        };
        let mut acc: Option<QSeries> = None;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(acc.unwrap())
    }

    /// `j`-th power of the renormalized derivative `D = q·d/dq`:
    /// the coefficient at `q^n` picks up a factor `n^j`.
    pub fn d_operator(&self, j: u32) -> Self {
        if j == 0 {
            return self.clone();
        }
        QSeries {
            lead: self.lead,
            trunc: self.trunc,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&n, c)| (n, c * BigRational::from_integer(BigInt::from(n).pow(j))))
                .collect(),
        }
    }

    /// Formal Eichler integral in weight `k`: coefficient at `q^n` becomes
    /// `A(n)·n^{1−k}` for `n ≠ 0`; the constant term is dropped.
    pub fn eichler_integral(&self, k: u32) -> Self {
        assert!(k >= 2 && k % 2 == 0, "weight must be even and at least 2");
        QSeries {
            lead: self.lead,
            trunc: self.trunc,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&n, _)| n != 0)
                .map(|(&n, c)| {
                    (n, c / BigRational::from_integer(BigInt::from(n).pow(k - 1)))
                })
                .collect(),
        }
    }

    /// Serre derivative `θ_k(a) = D(a) − (k/12)·E₂·a`. The caller supplies
    /// `E₂` expanded to at least the same window.
    pub fn serre_derivative(&self, k: i64, e2: &QSeries) -> Self {
        let correction = e2.mul(self).scale(&BigRational::new(BigInt::from(k), BigInt::from(12)));
        self.d_operator(1).sub(&correction)
    }

    /// Reduce modulo `p^t`. Every denominator on the window must be coprime
    /// to `p`; the offending exponent is reported otherwise.
    pub fn reduce_mod(&self, p: u64, t: u32) -> Result<ResidueSeries> {
        ResidueSeries::from_qseries(self, p, t)
    }

    /// True iff every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.denom().is_one())
    }

    /// Least common multiple of the denominators, unless it exceeds the bit
    /// cap for the integer fast path.
    fn common_denominator(&self) -> Option<BigInt> {
        let mut l = BigInt::one();
        for c in self.coeffs.values() {
            let d = c.denom();
            if !d.is_one() {
                l = lcm_big(&l, d);
                if l.bits() > DEN_BITS_CAP {
                    return None;
                }
            }
        }
        Some(l)
    }

    /// Dense integer body `den·coeff(lead + i)`.
    fn integer_body(&self, den: &BigInt) -> Vec<BigInt> {
        let len = (self.trunc - self.lead) as usize;
        let mut out = vec![BigInt::zero(); len];
        for (n, c) in self.iter_nonzero() {
            let idx = (n - self.lead) as usize;
            out[idx] = c.numer() * (den / c.denom());
        }
        out
    }

    // ---- serialization ----------------------------------------------------

    pub fn to_json(&self) -> String {
        serde_json::to_string(&QSeriesDoc::from(self)).expect("serializing q-series")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: QSeriesDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

impl PartialEq for QSeries {
    /// Equality of knowledge: same truncation window and the same nonzero
    /// coefficients (stored zeros are ignored).
    fn eq(&self, other: &Self) -> bool {
        self.trunc == other.trunc && self.iter_nonzero().eq(other.iter_nonzero())
    }
}

impl Eq for QSeries {}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

// ---- dense integer convolution ---------------------------------------------

/// Schoolbook convolution of integer bodies, clipped to `out_len`. Uses
/// `i64`/`i128` arithmetic when coefficient sizes provably cannot overflow,
/// and parallelizes over output exponents for long windows. Both paths are
/// exact, so results are identical regardless of thread count.
fn conv_int(a: &[BigInt], b: &[BigInt], out_len: usize) -> Vec<BigInt> {
    // Put the sparser operand in the outer role.
    let (a, b) = if count_nonzero(a) <= count_nonzero(b) { (a, b) } else { (b, a) };

    let bits_a = max_bits(a);
    let bits_b = max_bits(b);
    let overlap = a.len().min(b.len()).max(1);
    // each factor must fit i64 and the accumulated sum must fit i128
    let fits = bits_a <= 62
        && bits_b <= 62
        && bits_a + bits_b + (usize::BITS - overlap.leading_zeros()) as u64 + 1 < 127;

    if fits {
        let sa: Vec<i64> = a.iter().map(|v| v.to_i64().unwrap()).collect();
        let sb: Vec<i64> = b.iter().map(|v| v.to_i64().unwrap()).collect();
        let nz: Vec<usize> = (0..sa.len()).filter(|&i| sa[i] != 0).collect();
        let compute = |k: usize| -> i128 {
            let lo = nz.partition_point(|&i| (k as i64 - i as i64) >= sb.len() as i64);
            let mut acc: i128 = 0;
            for &i in &nz[lo..] {
                if i > k {
                    break;
                }
                let bj = sb[k - i];
                if bj != 0 {
                    acc += sa[i] as i128 * bj as i128;
                }
            }
            acc
        };
        let vals: Vec<i128> = if out_len >= PAR_LEN_THRESHOLD {
            (0..out_len).into_par_iter().map(compute).collect()
        } else {
            (0..out_len).map(compute).collect()
        };
        vals.into_iter().map(BigInt::from).collect()
    } else {
        let nz: Vec<usize> = (0..a.len()).filter(|&i| !a[i].is_zero()).collect();
        let compute = |k: usize| -> BigInt {
            let lo = nz.partition_point(|&i| (k as i64 - i as i64) >= b.len() as i64);
            let mut acc = BigInt::zero();
            for &i in &nz[lo..] {
                if i > k {
                    break;
                }
                let bj = &b[k - i];
                if !bj.is_zero() {
                    acc += &a[i] * bj;
                }
            }
            acc
        };
        if out_len >= PAR_LEN_THRESHOLD {
            (0..out_len).into_par_iter().map(compute).collect()
        } else {
            (0..out_len).map(compute).collect()
        }
    }
}

fn count_nonzero(a: &[BigInt]) -> usize {
    a.iter().filter(|v| !v.is_zero()).count()
}

fn max_bits(a: &[BigInt]) -> u64 {
    a.iter().map(|v| v.bits()).max().unwrap_or(0)
}

// ---- JSON document ----------------------------------------------------------

/// Wire form: `{"lead": int, "trunc": int, "coeffs": [[n, "num/den"], ...]}`
/// with coefficients as decimal strings (`"num"` when the denominator is 1).
#[derive(Serialize, Deserialize)]
struct QSeriesDoc {
    lead: i64,
    trunc: i64,
    coeffs: Vec<(i64, String)>,
}

impl From<&QSeries> for QSeriesDoc {
    fn from(s: &QSeries) -> Self {
        QSeriesDoc {
            lead: s.lead,
            trunc: s.trunc,
            coeffs: s
                .iter_nonzero()
                .map(|(n, c)| (n, rational_to_string(c)))
                .collect(),
        }
    }
}

impl TryFrom<QSeriesDoc> for QSeries {
    type Error = Error;

    fn try_from(doc: QSeriesDoc) -> Result<Self> {
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
                return Err(Error::MalformedDocument(format!(
                    "exponent {n} outside window [{}, {})",
                    doc.lead, doc.trunc
                )));
            }
            if coeffs.insert(n, parse_rational(&s)?).is_some() {
                return Err(Error::MalformedDocument(format!("duplicate exponent {n}")));
            }
        }
        Ok(QSeries { lead: doc.lead, trunc: doc.trunc, coeffs })
    }
}

pub(crate) fn rational_to_string(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let (num_s, den_s) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let num = parse_bigint(num_s)?;
    let den = parse_bigint(den_s)?;
    if den.is_zero() {
        return Err(Error::MalformedDocument(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub(crate) fn parse_bigint(s: &str) -> Result<BigInt> {
    let t = s.strip_prefix('-').unwrap_or(s);
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::MalformedDocument(format!("bad integer {s:?}")));
    }
    s.parse::<BigInt>()
        .map_err(|e| Error::MalformedDocument(format!("bad integer {s:?}: {e}")))
}
