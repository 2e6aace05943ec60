//! Special functions and quadrature used by the atmospheric channel model.

mod bessel;
mod lambert;
mod quadrature;

pub use bessel::{i0, i0e, i1, i1e};
pub use lambert::{lambert_w0, lambert_w0_exp};
pub use quadrature::{integrate, Integral};
