use alloc::string::String;

/// Failure modes shared by all computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("symbol rejected: min Re on the torus is {min_real_part}, below 1/2 - {tolerance}")]
    RejectedRange { min_real_part: f64, tolerance: f64 },
    #[error("symbol rejected: Re phi(+inf) = {re_nu} is not above 1/2")]
    RejectedMean { re_nu: f64 },
    #[error("exponential requires a vanishing constant term, found a_1 = {re}{im:+}i")]
    NonzeroConstant { re: f64, im: f64 },
    #[error("function vanishes on the contour near {re}{im:+}i")]
    BoundaryZero { re: f64, im: f64 },
    #[error("{context} did not converge (value {value}, error estimate {error_estimate})")]
    NonConverged {
        context: &'static str,
        value: f64,
        error_estimate: f64,
    },
    #[error("level w coincides with phi(+inf)")]
    WEqualsNu,
    #[error("mean counting value {value} exceeds the Littlewood bound {bound}")]
    BoundViolation { value: f64, bound: f64 },
    #[error("{what}: point {re}{im:+}i is outside the domain")]
    Domain {
        what: &'static str,
        re: f64,
        im: f64,
    },
    #[error("Jessen routes disagree: time average {time_average}, torus {torus}")]
    RouteMismatch { time_average: f64, torus: f64 },
    #[error("truncation tail {tail} exceeds target {target}")]
    Truncation { tail: f64, target: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(String::from(msg))
}
