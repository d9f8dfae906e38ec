//! The concrete q-expansions used by the pipeline: eta quotients (hence
//! `f = η(3τ)^8` and the weakly holomorphic form `m(τ)`), the quasimodular
//! `E₂`, the two level-3-supported Eisenstein-type series, and ingestion of
//! externally published newform coefficients for cross-validation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{parse_bigint, QSeries};

/// A formal product `∏ η(δτ)^{r_δ}` with distinct positive scales.
///
/// Construction requires `Σ δ·r_δ ≡ 0 (mod 24)` so the expansion has an
/// integral leading power `Σ δ·r_δ / 24`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotient {
    factors: Vec<(u64, i64)>,
}

impl EtaQuotient {
    pub fn new(factors: Vec<(u64, i64)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyEtaQuotient);
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut weighted: i64 = 0;
        for &(delta, r) in &factors {
            if delta == 0 || !seen.insert(delta) {
                return Err(Error::BadEtaScale { scale: delta });
            }
            weighted += delta as i64 * r;
        }
        if weighted.rem_euclid(24) != 0 {
            return Err(Error::FractionalLeadExponent { weighted_sum: weighted });
        }
        Ok(EtaQuotient { factors })
    }

    pub fn factors(&self) -> &[(u64, i64)] {
        &self.factors
    }

    /// `Σ δ·r_δ / 24`.
    pub fn lead_exponent(&self) -> i64 {
        self.factors.iter().map(|&(d, r)| d as i64 * r).sum::<i64>() / 24
    }

    /// Exact expansion on the window `[lead, lead + window)`.
    ///
    /// Each factor contributes `q^{δr/24}·P_δ(q)^r` with
    /// `P_δ = ∏_{n≥1}(1 − q^{δn})`; the fractional powers cancel by the
    /// construction invariant, the integral parts multiply out, negative
    /// powers go through series inversion.
    pub fn expand(&self, window: i64) -> Result<QSeries> {
        assert!(window >= 1, "window must be positive");
        let mut body = QSeries::one(window);
        for &(delta, r) in &self.factors {
            if r == 0 {
                continue;
            }
            let base = euler_product_body(delta, window);
            body = body.mul(&base.pow(r)?);
        }
        Ok(body.shift(self.lead_exponent()))
    }
}

/// Convenience wrapper matching the operation name used throughout.
pub fn eta_quotient_expand(spec: &EtaQuotient, window: i64) -> Result<QSeries> {
    spec.expand(window)
}

/// `∏_{n≥1} (1 − q^{δn})` to exponents below `window`, by the literal Euler
/// product: one sparse-binomial pass per factor. The i64 body escalates to
/// exact big-integer arithmetic if a partial product ever overflows (checked
/// subtraction; the final coefficients are ±1/0 by pentagonal sparsity but
/// intermediate passes are not).
fn euler_product_body(delta: u64, window: i64) -> QSeries {
    let len = window as usize;
    if let Some(v) = euler_product_i64(delta, len) {
        return QSeries::new(
            0,
            window,
            v.into_iter()
                .enumerate()
                .filter(|(_, c)| *c != 0)
                .map(|(i, c)| (i as i64, BigRational::from_integer(BigInt::from(c)))),
        );
    }
    // Fallback: same passes over BigInt.
    let mut v = vec![BigInt::zero(); len];
    v[0] = BigInt::from(1);
    let mut m = delta as usize;
    while m < len {
        for i in (m..len).rev() {
            if !v[i - m].is_zero() {
                let t = v[i - m].clone();
                v[i] -= t;
            }
        }
        m += delta as usize;
    }
    QSeries::new(
        0,
        window,
        v.into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64, BigRational::from_integer(c))),
    )
}

fn euler_product_i64(delta: u64, len: usize) -> Option<Vec<i64>> {
    let mut v = vec![0i64; len];
    v[0] = 1;
    let mut m = delta as usize;
    while m < len {
        for i in (m..len).rev() {
            let s = v[i - m];
            if s != 0 {
                v[i] = v[i].checked_sub(s)?;
            }
        }
        m += delta as usize;
    }
    Some(v)
}

/// `f = η(3τ)^8`, the weight 4 newform on Γ₀(9), on `[1, 1 + window)`.
pub fn newform_eta3_8(window: i64) -> QSeries {
    EtaQuotient::new(vec![(3, 8)])
        .expect("η(3τ)^8 satisfies the 24-divisibility invariant")
        .expand(window)
        .expect("positive eta powers always expand")
}

/// `m(τ) = (η(τ)³/η(9τ)³ + 3)²·η(3τ)^8` on `[−1, window)`.
///
/// The expansion starts `q⁻¹ + 2q² − 49q⁵ + 48q⁸ + …` and is supported on
/// exponents ≡ 2 (mod 3).
pub fn weakform_m9(window: i64) -> Result<QSeries> {
    assert!(window >= 1, "window must be positive");
    let inner_window = window + 1;
    let quotient = EtaQuotient::new(vec![(1, 3), (9, -3)])?;
    let e = quotient
        .expand(inner_window)?
        .add(&QSeries::constant(BigRational::from_integer(BigInt::from(3)), inner_window));
    let f = newform_eta3_8(inner_window);
    let m = e.mul(&e).mul(&f);
    debug_assert!(m.trunc() >= window);
    Ok(m.truncated(window))
}

/// `E₂ = 1 − 24 Σ σ₁(n) qⁿ` on `[0, window)`.
pub fn eisenstein_e2(window: i64) -> QSeries {
    let sigma = sigma1_sieve(window as usize);
    QSeries::new(
        0,
        window,
        std::iter::once((0, BigRational::from_integer(BigInt::from(1)))).chain(
            (1..window as usize)
                .map(|n| (n as i64, BigRational::from_integer(BigInt::from(-24i64 * sigma[n])))),
        ),
    )
}

/// `1 − 24 Σ_{n≥1} σ₁(3n) q^{3n}` on `[0, window)` (unscaled).
pub fn sigma_series_a(window: i64) -> QSeries {
    let sigma = sigma1_sieve(window as usize);
    QSeries::new(
        0,
        window,
        std::iter::once((0, BigRational::from_integer(BigInt::from(1)))).chain(
            (1..window as usize)
                .filter(|n| n % 3 == 0)
                .map(|n| (n as i64, BigRational::from_integer(BigInt::from(-24i64 * sigma[n])))),
        ),
    )
}

/// `1 + 12 Σ_{n≥1} (Σ_{d|3n, 3∤d} d) q^{3n}` on `[0, window)` (unscaled).
pub fn sigma_series_b(window: i64) -> QSeries {
    let len = window.max(0) as usize;
    let mut s = vec![0i64; len];
    for d in 1..len {
        if d % 3 == 0 {
            continue;
        }
        // multiples of d that are divisible by 3
        let mut m = 3 * d;
        while m < len {
            s[m] += d as i64;
            m += 3 * d;
        }
    }
    QSeries::new(
        0,
        window,
        std::iter::once((0, BigRational::from_integer(BigInt::from(1)))).chain(
            (1..len)
                .filter(|&n| s[n] != 0)
                .map(|n| (n as i64, BigRational::from_integer(BigInt::from(12 * s[n])))),
        ),
    )
}

fn sigma1_sieve(len: usize) -> Vec<i64> {
    let mut s = vec![0i64; len.max(1)];
    for d in 1..len {
        let mut m = d;
        while m < len {
            s[m] += d as i64;
            m += d;
        }
    }
    s
}

// ---- external coefficient ingestion -----------------------------------------

/// Wire form: `{"level": int, "weight": int, "an": ["a1", "a2", ...]}` with
/// decimal-string integer coefficients, `an[i]` being the coefficient of
/// `q^{i+1}`.
#[derive(Serialize, Deserialize)]
struct CoefficientDoc {
    level: u32,
    weight: u32,
    an: Vec<String>,
}

const MAX_IMPORT_COEFFS: usize = 1 << 22;

/// An ingested coefficient record, with provenance retained. Imported data is
/// only ever used in cross-check operations, never substituted into the main
/// pipeline.
#[derive(Clone, Debug)]
pub struct ImportedForm {
    pub level: u32,
    pub weight: u32,
    pub series: QSeries,
    pub warnings: Vec<String>,
}

/// Parse a coefficient document, optionally enforcing an expected
/// `(level, weight)`.
pub fn import_coefficients(json: &str, expect: Option<(u32, u32)>) -> Result<ImportedForm> {
    let doc: CoefficientDoc = serde_json::from_str(json)?;
    if let Some((level, weight)) = expect {
        if doc.level != level || doc.weight != weight {
            return Err(Error::DocumentMismatch {
                expected_level: level,
                expected_weight: weight,
                level: doc.level,
                weight: doc.weight,
            });
        }
    }
    if doc.an.len() > MAX_IMPORT_COEFFS {
        return Err(Error::MalformedDocument(format!(
            "coefficient list too long ({} entries)",
            doc.an.len()
        )));
    }
    let mut warnings = Vec::new();
    if doc.an.is_empty() {
        warnings.push("empty coefficient list".to_string());
    }
    let trunc = doc.an.len() as i64 + 1;
    let mut pairs = Vec::with_capacity(doc.an.len());
    for (i, s) in doc.an.iter().enumerate() {
        let v = parse_bigint(s)?;
        if !v.is_zero() {
            pairs.push((i as i64 + 1, BigRational::from_integer(v)));
        }
    }
    Ok(ImportedForm {
        level: doc.level,
        weight: doc.weight,
        series: QSeries::new(1.min(trunc - 1).max(0), trunc, pairs),
        warnings,
    })
}
