//! Error type shared by the whole crate.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the geometric operations.
///
/// Lattice positions are reported as `(m, n)` indices; for edge errors the
/// index is the edge's base vertex together with its direction.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inversion of a zero quaternion.
    ZeroQuaternion,
    /// Quaternionic 2x2 matrix with vanishing Study determinant.
    SingularMatrix { study_det: f64 },
    /// A matrix expected to lie in the Moebius group G fails its defining
    /// constraints.
    NotInMobiusGroup { residual: f64 },
    /// The Moebius action (ax+b)(cx+d)^{-1} hit the point at infinity.
    PointAtInfinity,
    /// A light-cone element with vanishing lower-left entry projects to the
    /// point at infinity of the space form.
    ProjectsToInfinity,
    /// Input violates a stated precondition.
    Domain(&'static str),
    /// Consecutive quad vertices coincide.
    DegenerateQuad { m: usize, n: usize },
    /// A quad fails concircularity or the factorization (Toda) condition.
    NotIsothermic { m: usize, n: usize, residual: f64 },
    /// A propagation step failed to close around a quad.
    ClosureFailure { m: usize, n: usize, residual: f64 },
    /// lambda * a_pq = 1 on the named edge; the transform formulas blow up.
    PoleAtEdge { m: usize, n: usize, horizontal: bool },
    /// The central vertex star is spherical, so the solver's 5x5 system is
    /// singular.
    SphericalStar,
    /// Dense linear algebra hit a numerically singular system.
    SingularSystem,
    /// An iterative solve (Newton, bisection) did not converge.
    NoConvergence { what: &'static str, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroQuaternion => write!(f, "cannot invert the zero quaternion"),
            Error::SingularMatrix { study_det } => {
                write!(f, "singular quaternionic matrix (Study determinant {study_det:e})")
            }
            Error::NotInMobiusGroup { residual } => {
                write!(f, "matrix is not in the Moebius group (residual {residual:e})")
            }
            Error::PointAtInfinity => write!(f, "Moebius image is the point at infinity"),
            Error::ProjectsToInfinity => {
                write!(f, "light-cone element projects to the point at infinity")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::DegenerateQuad { m, n } => {
                write!(f, "degenerate quad at ({m}, {n}): repeated consecutive vertices")
            }
            Error::NotIsothermic { m, n, residual } => {
                write!(f, "net is not isothermic at quad ({m}, {n}) (residual {residual:e})")
            }
            Error::ClosureFailure { m, n, residual } => {
                write!(f, "propagation does not close around quad ({m}, {n}) (residual {residual:e})")
            }
            Error::PoleAtEdge { m, n, horizontal } => {
                let dir = if *horizontal { "horizontal" } else { "vertical" };
                write!(f, "lambda*a = 1 on the {dir} edge at ({m}, {n})")
            }
            Error::SphericalStar => write!(f, "vertex star is spherical; system is singular"),
            Error::SingularSystem => write!(f, "numerically singular linear system"),
            Error::NoConvergence { what, residual } => {
                write!(f, "{what} did not converge (residual {residual:e})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
