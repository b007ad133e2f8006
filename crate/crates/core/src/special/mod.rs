//! Scalar special functions and the adaptive quadrature they rely on.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod gamma;
pub mod quadrature;

pub use bessel::{bessel_k, bessel_k_sequence};
pub use gamma::{
    factorial, gamma, gen_incomplete_gamma, gen_incomplete_gamma_scaled, gen_incomplete_gamma_with,
    ln_gamma, upper_incomplete_gamma, upper_incomplete_gamma_scaled,
};
pub use quadrature::{integrate, integrate_to_infinity, Integral, QuadratureSettings};
