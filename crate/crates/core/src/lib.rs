//! Exact and certified computation around shifted convolution L-values of
//! the weight 4 newform `f = η(3τ)^8` on Γ₀(9).
//!
//! The crate has two arithmetic regimes and keeps them strictly apart:
//!
//! * **Exact**: truncated Laurent q-series over arbitrary-precision rationals
//!   ([`qseries::QSeries`]), eta-quotient expansions, Eichler integrals,
//!   Serre derivatives, and every 3-adic statement (valuations, congruence
//!   families, density counts via [`residue::ResidueSeries`]). No floating
//!   point enters any of these paths.
//! * **Certified numeric**: Kloosterman sums, Bessel functions and
//!   Poincaré-series Fourier coefficients evaluated in dyadic fixed-point
//!   ([`fixed::Fixed`]) with explicit absolute error bounds and rigorous
//!   truncation tails.
//!
//! The [`shiftedconv`] module ties both together: it assembles the generating
//! function of symmetrized shifted convolution values from the exact product
//! `f·L_f`, the fitted Petersson constant β, and the two weight-2
//! Eisenstein-type series on Γ₀(9).

pub mod error;
pub mod fixed;
pub mod kloosterman;
pub mod modularforms;
pub mod padic;
pub mod poincare;
pub mod qseries;
pub mod residue;
pub mod shiftedconv;
pub mod specialfn;

pub use error::{Error, Result};
pub use qseries::QSeries;
pub use residue::ResidueSeries;
