//! Special functions and numerical routines shared by the analytic modules.

mod lambert;
mod log_gamma;
mod quadrature;
mod roots;

use serde::Serialize;

pub use lambert::lambert_w_m1;
pub use log_gamma::log_gamma;
pub(crate) use log_gamma::log_gamma_unchecked;
pub use quadrature::{integrate_adaptive, QuadratureResult};
pub use roots::solve_bracketed;

use crate::{Error, Real, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;

/// Finite interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
            return Err(Error::domain("Interval", lo.as_f64(), "finite lo < hi"));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }
}
