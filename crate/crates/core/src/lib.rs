//! Combinatorial intersection cohomology of rational polyhedral fans.
//!
//! A fan is treated as a finite topological space (open sets = subfans); sheaves of
//! graded modules over the polynomial algebra A = Sym(V*) live on that space as
//! per-cone stalks with restriction maps on covering pairs. The library constructs
//! the structure sheaf of conewise polynomial functions, builds minimal sheaves by
//! induction on the dimension of cones, and computes intersection cohomology data
//! (`ih`, `ip`), cellular cohomology, subdivision pushforwards with their
//! decompositions into minimal sheaves, duality palindromes, global/local Poincare
//! identities, Hard-Lefschetz rank tables, the Stanley g/h recursion, and Kalai-type
//! inequalities, all over exact rational arithmetic.
//!
//! Degrees follow the convention that linear forms sit in degree 2, so everything of
//! interest is supported in even degrees; computations are truncated at an even
//! degree cap (default `2n + 2` for ambient dimension n).

pub mod cellular;
pub mod decomp;
pub mod fan;
pub mod graded;
pub mod ihlib;
pub mod linalg;
pub mod minimal;
pub mod poly;
pub mod report;
pub mod sheaf;
pub mod stanley;

use thiserror::Error;

/// Library error type. Variants mirror the failure classes of the operations:
/// input/validation problems (bad documents, geometric axiom violations,
/// precondition failures) versus failed mathematical assertions.
#[derive(Error, Debug)]
pub enum Error {
    #[error("cone is not pointed: {0}")]
    NotPointed(String),
    #[error("not a fan: {0}")]
    NotAFan(String),
    #[error("bad ray: {0}")]
    BadRay(String),
    #[error("unknown cone id {0}")]
    UnknownCone(usize),
    #[error("cones {0} and {1} are not a covering pair")]
    NotCoveringPair(usize, usize),
    #[error("not a subdivision: {0}")]
    NotASubdivision(String),
    #[error("cone dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),
    #[error("degree cap too small: {0}")]
    CapTooSmall(String),
    #[error("check '{check}' failed: {witness}")]
    CheckFailed { check: String, witness: String },
    #[error("incidence signs inconsistent: {0}")]
    SignInconsistency(String),
    #[error("function is not strictly convex: {0}")]
    NotStrictlyConvex(String),
    #[error("sheaf is not in the flabby locally-free category: {0}")]
    NotInCategory(String),
    #[error("negative multiplicity in decomposition: {0}")]
    NegativeMultiplicity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit status class: 2 for input/validation/precondition problems,
    /// 1 for failed mathematical assertions.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CheckFailed { .. }
            | Error::SignInconsistency(_)
            | Error::NegativeMultiplicity(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
