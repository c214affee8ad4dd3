use thiserror::Error;

/// Errors raised by kernel evaluation, quadrature and norm computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An adaptive rule exhausted its subdivision budget before meeting the
    /// requested tolerance. The best estimate and its residual are kept.
    #[error("quadrature did not converge after {subdivisions} subdivisions: estimate {estimate:e}, residual {residual:e}")]
    Quadrature {
        estimate: f64,
        residual: f64,
        subdivisions: usize,
    },

    /// The point lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates the invariants of its type.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The evaluation point is too close to the support of the boundary data
    /// for the smooth-integrand rules to apply.
    #[error("evaluation point at distance {distance:.3} from the data support (need at least {required:.3})")]
    Separation { distance: f64, required: f64 },

    /// A field evaluation failed at a lattice node of a norm computation.
    #[error(
        "field evaluation failed at x' = {tangential:?}, x_n = {normal:e}, t = {time:e}: {source}"
    )]
    FieldEvaluation {
        tangential: Vec<f64>,
        normal: f64,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
