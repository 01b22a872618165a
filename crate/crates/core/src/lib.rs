//! Total cascade-size (total progeny) distribution of the continuous-state
//! branching process whose generations are Gamma(2, p) distributed.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] — log-gamma, the `W₋₁` branch of Lambert W, bracketed
//!   root finding and adaptive Gauss–Kronrod quadrature.
//! * [`continuum`] — the exact cascade density, its large-size asymptote,
//!   subcritical moments, and the extinction (finite-cascade) probability.
//! * [`discrete`] — the negative-binomial lattice approximation, its exact
//!   cascade mass function, and the random-walk martingale root.
//! * [`simulate`] — Monte Carlo engines for the continuous branching
//!   process, the discrete branching process and the first-passage walk.
//!
//! The analytic modules are generic over the scalar type through [`Real`];
//! the aliases below pin the common `f64` instantiations.

// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod discrete;
mod error;
pub mod numerics;
pub mod simulate;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::{Error, Result};

/// Floating-point scalar the analytic code is written against.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion used when values are reported in error messages.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type ModelParamsF64 = continuum::ModelParams<f64>;
pub type ModelParamsF32 = continuum::ModelParams<f32>;
pub type DensityTableF64 = continuum::DensityTable<f64>;
pub type ExtinctionReportF64 = continuum::ExtinctionReport<f64>;
pub type MomentsF64 = continuum::Moments<f64>;
pub type DiscretizationF64 = discrete::DiscretizationParams<f64>;
pub type CascadePmfF64 = discrete::CascadePmf<f64>;
pub type QuadratureResultF64 = numerics::QuadratureResult<f64>;
