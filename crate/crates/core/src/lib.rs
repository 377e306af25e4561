//! Exact symbolic computations for the open/closed KdV hierarchy: jet rings,
//! loop equations, free energies, intersection numbers and Virasoro checks.

pub mod correlators;
pub mod error;
pub mod exact_algebra;
pub mod hierarchy;
pub mod iz_coords;
pub mod jet_ring;
pub mod lambda_calc;
pub mod loop_solver;
pub mod reference;
pub mod virasoro;

pub use error::{Error, Result};
pub use exact_algebra::{Gen, LocalizedExpr, Monomial, Poly, Rational, Ring};
