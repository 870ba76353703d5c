//! Hyper-Kloosterman sums over prime fields, sums of them over square-free
//! and smooth integers, and empirical verifiers for the bounds those sums
//! satisfy.
//!
//! The crate is organized around a handful of immutable tables:
//!
//! * [`fields::PrimeFieldCtx`] - inverses, primitive-root powers, and
//!   discrete logs mod p;
//! * [`kloosterman::KloostermanTable`] - all values K_{s,p}(n), built either
//!   by direct enumeration or by an FFT convolution over the multiplicative
//!   group, each with a declared numerical error budget;
//! * [`integers::SieveTables`] - mu, tau, and prime-factor bounds up to N.
//!
//! On top of those, [`sums`] evaluates the sums under study, [`bounds`]
//! produces the theoretical ceilings they are compared against, and
//! [`acceptance`] packages the whole verification suite.
//!
//! Heavy inner loops are data-parallel via rayon (the default `parallel`
//! feature); the sequential fallback computes bit-identical results.

pub mod acceptance;
pub mod bounds;
pub mod cache;
pub mod error;
pub mod fields;
mod fft;
pub mod integers;
pub mod kahan;
pub mod kloosterman;
mod parallel;
pub mod sums;

pub use error::{Error, Result};
pub use parallel::ExecMode;
