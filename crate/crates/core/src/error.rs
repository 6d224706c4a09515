use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("atoms {0} and {1} coincide")]
    CoincidentAtoms(usize, usize),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("orbital centers {0} and {1} coincide; the determinant vanishes identically")]
    DegenerateOrbitals(usize, usize),
    #[error("all {0} samples were rejected at density singularities")]
    AllRejected(u64),
    #[error("denominator mean {mean:e} is within 5 standard errors ({stderr:e}) of zero")]
    DenominatorNearZero { mean: f64, stderr: f64 },
    #[error("log-density is not finite at the initial configuration")]
    ZeroDensityInit,
    #[error("quadrature did not converge: last relative refinement change {0:e}")]
    NonConvergent(f64),
    #[error("trial function is not antisymmetric: {0}")]
    NotAntisymmetric(String),
    #[error("trial function is not odd: {0}")]
    NotOdd(String),
    #[error("radial profile is not integrable: {0}")]
    NonIntegrableProfile(String),
    #[error("field is singular within the finite-difference stencil")]
    SingularStencil,
}
