//! Exact arithmetic around the base-shifting digit map.
//!
//! The map under study reads the base-`M` digit string of a natural number
//! and re-evaluates it in base `N`. Reducing the result modulo `M` yields an
//! integer sequence whose behaviour splits cleanly on a divisibility
//! condition between the prime factors of `M` and `N`:
//!
//! * when every prime factor of `M` divides `N` the sequence is purely
//!   periodic ([`periodicity`] computes and bounds the minimal period);
//! * otherwise the sequence never repeats, but its values sorted into
//!   residue classes solve the Prouhet-Tarry-Escott problem ([`pte`]) and
//!   satisfy a family of exact generating-function, finite-difference, and
//!   closed-form summation identities over the cyclotomic field of `M`-th
//!   roots of unity ([`identities`]).
//!
//! Everything is computed with arbitrary-precision integers and rationals;
//! there is no floating point anywhere. Identity checks reduce to exact
//! zero tests in `Q[x]/(Phi_M(x))`, provided by [`cyclotomic`], with dense
//! univariate and sparse multivariate polynomial carriers in [`polyring`].

pub mod arith;
pub mod config;
pub mod cyclotomic;
pub mod digitmap;
pub mod error;
pub mod identities;
pub mod periodicity;
pub mod polyring;
pub mod pte;

pub use config::{Config, Mode};
pub use cyclotomic::CyclotomicNumber;
pub use digitmap::DigitVector;
pub use error::{Error, Result};
pub use identities::{BetaSequence, IdentityId, IdentityReport};
pub use periodicity::{PeriodReport, ScanRecord, ScanReport, ScanSummary};
pub use polyring::{MultiPoly, UniPoly};
pub use pte::PteSolution;
