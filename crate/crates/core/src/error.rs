use thiserror::Error;

/// Domain errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no roots defined for a constant or zero polynomial")]
    NoRoots,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("partial fraction resummation failed: relative error {0:e}")]
    PartialFractions(f64),
    #[error("causal signals only: t = {0} < 0")]
    NegativeTime(f64),
    #[error("non-differentiable gated expression")]
    GatedDerivative,
    #[error("impulsive component outside signal class")]
    Improper,
    #[error("outside region of convergence: Re s = {re} <= abscissa {abscissa}")]
    OutsideRegion { re: f64, abscissa: f64 },
    #[error("s = {0} is at a pole")]
    AtPole(num_complex::Complex64),
    #[error("outside guaranteed convergence: Re s = {re} <= {limit}")]
    OutsideConvergence { re: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("projection degree cap: K = {0} > 64")]
    DegreeCap(usize),
    #[error("order violation: leading output coefficient is zero")]
    OrderViolation,
    #[error("physical systems require real coefficients")]
    NonReal,
    #[error("divergence: reduce dt or check stability")]
    Divergence,
    #[error("nonpositive component {0}")]
    NonPositiveComponent(&'static str),
}

impl Error {
    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoRoots => "no_roots",
            Error::ZeroDenominator => "zero_denominator",
            Error::PartialFractions(_) => "partial_fractions",
            Error::NegativeTime(_) => "negative_time",
            Error::GatedDerivative => "gated_derivative",
            Error::Improper => "improper",
            Error::OutsideRegion { .. } => "outside_region",
            Error::AtPole(_) => "at_pole",
            Error::OutsideConvergence { .. } => "outside_convergence",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegreeCap(_) => "degree_cap",
            Error::OrderViolation => "order_violation",
            Error::NonReal => "non_real",
            Error::Divergence => "divergence",
            Error::NonPositiveComponent(_) => "nonpositive_component",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
