//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Series inversion requires a nonzero coefficient at the lead exponent.
    #[error("non-invertible series: zero leading coefficient at exponent {lead}")]
    NonInvertibleSeries { lead: i64 },

    /// Eta quotients must satisfy sum(delta * r_delta) ≡ 0 (mod 24).
    #[error("fractional leading exponent: sum(delta*r) = {weighted_sum} is not divisible by 24")]
    FractionalLeadExponent { weighted_sum: i64 },

    #[error("eta quotient must have at least one factor")]
    EmptyEtaQuotient,

    #[error("eta quotient scales must be distinct and positive (offending scale {scale})")]
    BadEtaScale { scale: u64 },

    /// Reduction mod p^T hit a denominator divisible by p.
    #[error("coefficient at exponent {exponent} has denominator divisible by {p}")]
    NonIntegralDenominator { exponent: i64, p: u64 },

    #[error("exponent {exponent} is divisible by {p}; cannot invert it modulo {p}^T")]
    NonInvertibleExponent { exponent: i64, p: u64 },

    #[error("modulus {p}^{t} does not fit the residue arithmetic word size")]
    ModulusTooLarge { p: u64, t: u32 },

    #[error("moduli {a} and {b} are not coprime")]
    NonCoprimeModuli { a: u64, b: u64 },

    #[error("{d} has no inverse modulo {c}")]
    NoModularInverse { d: i64, c: u64 },

    /// Lemma hypotheses (e.g. p ∤ m for the vanishing scan) violated by the caller.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Truncating a Kloosterman c-sum below the level leaves nothing to sum.
    #[error("empty sum: c_max = {c_max} is below the level N = {level}")]
    EmptySum { c_max: u64, level: u64 },

    #[error("exponent {h} is outside the computed window [{lead}, {trunc})")]
    WindowExceeded { h: i64, lead: i64, trunc: i64 },

    #[error("anchor exponents do not separate the basis")]
    SingularAnchors,

    /// Assembly invariant failure: L(f,f;τ) must be supported on multiples of 3.
    #[error("assembly invariant violated: coefficient {value} at exponent {h} not divisible by 3")]
    SupportViolation { h: i64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed document: {0}")]
    MalformedDocument(String),

    #[error("document mismatch: expected level {expected_level}, weight {expected_weight}; got level {level}, weight {weight}")]
    DocumentMismatch {
        expected_level: u32,
        expected_weight: u32,
        level: u32,
        weight: u32,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
