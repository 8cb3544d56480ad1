//! Numerical engine for Fourier integral operators with deterministic or
//! random phase and amplitude functions.
//!
//! The pipeline is: smooth maps with exact jets ([`jets`]), seminorm and
//! membership diagnostics ([`symbol_spaces`]), the regularizing operator `L`
//! ([`regularizer`]), nested panel quadrature of the regularized integrals
//! ([`oscillatory`]), Monte Carlo and characteristic-function expectations
//! ([`stochastic`]) and the transport, half-wave and wave scenarios
//! ([`applications`]).

pub mod applications;
pub mod error;
pub mod jets;
pub mod oscillatory;
pub mod regularizer;
pub mod stochastic;
pub mod symbol_spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
