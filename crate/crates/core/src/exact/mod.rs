//! Exact arithmetic: rationals, polynomials, rational functions and their
//! local Laurent expansions on the Riemann sphere.

pub mod laurent;
pub mod poly;
pub mod rational;
pub mod scalar;

pub use laurent::{derivative, expand_at, order_at, residue_form, LaurentSeries, SpherePoint};
pub use poly::Polynomial;
pub use rational::RationalFunction;
pub use scalar::{format_scalar, int, parse_scalar, ratio, Scalar};
