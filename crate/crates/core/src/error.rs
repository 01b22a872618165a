use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the analytic routines and the simulation engines.
///
/// Scalars are carried as `f64` regardless of the scalar type the failing
/// routine was instantiated with.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error(
        "root solver did not converge after {iterations} iterations; best bracket [{lo}, {hi}]"
    )]
    NotConverged { iterations: usize, lo: f64, hi: f64 },

    #[error("quadrature tolerance {requested} not met: value {value} ± {error_estimate} after {evaluations} evaluations")]
    ToleranceNotMet {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
        requested: f64,
    },

    #[error("moments are only defined for p < 1/2 (got p = {p})")]
    NotSubcritical { p: f64 },

    #[error("no nontrivial martingale root in (0, 1) for p = {p}, delta = {delta}")]
    NoNontrivialRoot { p: f64, delta: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            expected,
        }
    }
}
