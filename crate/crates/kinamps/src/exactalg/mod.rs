//! Exact arithmetic kernel: arbitrary-precision rationals, sparse multivariate
//! polynomials over opaque variable ids, and reduced rational functions.
//!
//! Values are immutable after construction and all operations are pure, so
//! everything here is safe to share across threads.

mod fracform;
pub mod linalg;
pub mod parse;
mod poly;
mod ratfn;

pub use fracform::FactoredRat;
pub use parse::{format_poly, format_ratfn, parse_ratfn, VarResolver};
pub use poly::{gcd, Mono, Polynomial};
pub use ratfn::RationalFunction;

use num::BigInt;

/// Exact rational scalar. Always stored reduced with a positive denominator.
pub type Rational = num::BigRational;

/// Opaque dense handle for an ambient variable, issued by a space catalog.
/// Stable within one catalog; the `u32` order is the canonical variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
