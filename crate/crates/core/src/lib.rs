//! Numerical toolkit for linear independence of neural-network neurons.
//!
//! Builds special analytic activations (bump functions, blends), decides
//! membership in minimal zero sets, and cross-checks combinatorial
//! independence criteria against a Gram-matrix oracle.

pub mod blend;
pub mod complexcurves;
pub mod bump;
pub mod expr;
pub mod fourier;
pub mod growth;
pub mod indep;
pub mod network;
pub mod quadrature;
pub mod zeroset;

pub use expr::{EvalError, ScalarExpr, SignedLogValue};
