//! Exact computations with multi-point Krichever–Novikov algebras on the
//! Riemann sphere: bases, almost-graded structure, geometric cocycles,
//! current algebras and their central extensions.

pub mod algebras;
pub mod basis;
pub mod cocycles;
pub mod current;
pub mod error;
pub mod exact;
pub mod lab;
pub mod lie;
pub mod linalg;
pub mod window;

pub use error::{KnError, Result};
