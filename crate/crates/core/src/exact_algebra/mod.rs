//! Exact rational arithmetic, sparse polynomials and their localizations.

pub mod format;
pub mod gens;
pub mod localized;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod rational;

pub use format::{ExprJson, NameTable};
pub use gens::Gen;
pub use localized::{LocalizedExpr, Ring, Rule};
pub use monomial::Monomial;
pub use parse::{parse_expr, parse_with};
pub use poly::Poly;
pub use rational::{int, rat, Rational};
