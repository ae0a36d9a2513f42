//! Fractional Laplacian (−Δ)^s in spectral and singular-integral form, and mollification.

mod grid;
mod integral;
mod mollifier;
mod selftest;
mod spectral;

pub use grid::{FractionalOrder, GridFunction, PeriodicGrid};
pub use integral::{
    apply_periodic_integral, apply_pointwise_integral, IntegralOptions, IntegralValue, PeriodicKernel, TailModel,
};
pub use mollifier::{mollify, Mollifier};
pub use selftest::{operator_self_test, random_trig_polynomial, SelfTestReport, TrigPolynomial};
pub use spectral::{apply_spectral, FftPair, SpectralOperator};
