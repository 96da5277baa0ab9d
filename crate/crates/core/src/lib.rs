//! Hecke eigenvalues of the discriminant form, quartic envelopes of their
//! powers, and summatory diagnostics.
//!
//! * [`hecke`]: exact `tau(n)` tables (NTT or oracle backend), normalized
//!   eigenvalues, local angles and identity checks.
//! * [`envelope`]: the minorant/majorant envelopes, their exponents and the
//!   contact-point optimizer.
//! * [`lfunctions`]: trace polynomials and local Euler factors of symmetric
//!   power L-functions.
//! * [`sums`]: power sums, signed sums, sign counts, envelope summatories,
//!   exponent fits and Sato–Tate statistics.

pub mod arith;
pub mod cache;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod hecke;
pub mod lfunctions;
pub mod ntt;
pub mod series;
pub mod sums;
pub mod verify;

pub use envelope::{
    envelope_at_prime, envelope_coefficients, envelope_coefficients_with, exponent_table,
    exponent_table_csv, exponents, h_eval, optimize_parameters, rho_from_coefficients,
    verify_envelope, EnvelopeCoefficients, EnvelopeParams, EnvelopeReport, ExponentSet, Family,
};
pub use error::{Error, Result};
pub use hecke::{
    build_coefficient_table, Backend, CoefficientTable, FormSpec, PrimeLocalData, Provenance,
};
pub use lfunctions::{
    decomposition_residual, power_to_trace_basis, sym_local_factor, trace_polynomial,
    IntPolynomial, LocalSeries, Multiplicities,
};
pub use sums::{SeriesKind, SumSeries};
