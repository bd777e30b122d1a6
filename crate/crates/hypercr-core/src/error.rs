//! Error type shared by the symbolic kernel and the invariant pipeline.

use crate::expr::Var;
use alloc::string::String;
use core::fmt;

/// Errors produced by symbolic operations, evaluation, sampling and the
/// transformation machinery.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation would produce an expression above the node-count guard.
    ExpressionTooLarge { nodes: usize, limit: usize },
    /// Exact evaluation hit a fractional power of a non-perfect power.
    NonRationalOperation,
    /// Exact evaluation hit a negative power of zero.
    DivisionByZero,
    /// Floating evaluation left the real domain (even root of a negative
    /// number, division by zero).
    DomainError(&'static str),
    /// Floating evaluation overflowed to a non-finite value.
    OverflowError,
    /// Rejection sampling could not find enough guard-respecting points.
    SamplingExhausted { attempts: usize, accepted: usize },
    /// Input text failed to parse; `line` and `column` are 1-based.
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    /// An identifier outside {t, x, x', x'', x0, x1, x2} appeared.
    UnknownSymbol {
        line: usize,
        column: usize,
        symbol: String,
    },
    /// A transformation component depends on a jet variable (x1 or x2).
    DependsOnJetVariables(Var),
    /// The supplied inverse does not invert the map at sample points.
    InverseMismatch { residual: f64 },
    /// The frame {d/dx2, ad d/dx2, ad^2 d/dx2, X_F} is symbolically degenerate.
    DegenerateFrame,
    /// d^3F/dx2^3 vanishes identically: the equation is point equivalent to
    /// the trivial one and Psi is undefined.
    TrivializableBranch,
    /// Wedge product of forms whose total degree exceeds the dimension.
    DegreeOverflow,
    /// A check was requested whose hypotheses do not hold.
    PreconditionViolated(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ExpressionTooLarge { nodes, limit } => {
                write!(f, "expression too large: {nodes} nodes exceeds guard {limit}")
            }
            Error::NonRationalOperation => {
                write!(f, "exact evaluation requires a fractional power of a non-perfect power")
            }
            Error::DivisionByZero => write!(f, "division by zero in exact evaluation"),
            Error::DomainError(what) => write!(f, "domain error: {what}"),
            Error::OverflowError => write!(f, "floating-point overflow"),
            Error::SamplingExhausted { attempts, accepted } => write!(
                f,
                "sampling exhausted: {accepted} accepted points after {attempts} attempts"
            ),
            Error::SyntaxError { line, column, message } => {
                write!(f, "syntax error at {line}:{column}: {message}")
            }
            Error::UnknownSymbol { line, column, symbol } => {
                write!(f, "unknown symbol '{symbol}' at {line}:{column}")
            }
            Error::DependsOnJetVariables(v) => {
                write!(f, "transformation component depends on jet variable {}", v.name())
            }
            Error::InverseMismatch { residual } => {
                write!(f, "inverse does not match forward map (residual {residual:e})")
            }
            Error::DegenerateFrame => write!(f, "frame is symbolically degenerate"),
            Error::TrivializableBranch => write!(
                f,
                "d^3F/dx2^3 vanishes identically: point equivalent to the trivial equation"
            ),
            Error::DegreeOverflow => write!(f, "form degree exceeds dimension 4"),
            Error::PreconditionViolated(what) => write!(f, "precondition violated: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
