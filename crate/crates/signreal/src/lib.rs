//! Escape vectors and the sign-real spectral radius, constructively.
//!
//! Given a real matrix `A`, an *escape vector* is a nonzero `x` with
//! `|Ax| >= t|x|` entrywise (or a weighted affine variant
//! `|(Ax)_i - b_i| >= lambda_i` on an `l_p` ball). This crate finds such
//! vectors by exhaustive sign-pattern enumeration, certifies lower bounds on
//! the sign-real spectral radius
//! `xi(A) = max { lambda >= 0 : exists x != 0 with |Ax| >= lambda|x| }`,
//! and mechanically checks the spectral comparison `rho(|A|) <= n * xi(A)`.
//!
//! Everything is desk scale: dense storage, double precision, exhaustive
//! enumeration with explicit caps, and every certificate re-verified from raw
//! inputs by an independent pass.
//!
//! Module map:
//! - [`linalg`]: dense matrices/vectors, `l_p` norms, Hölder conjugates and
//!   explicit dual-norm extremizers;
//! - [`simplex`]: dense LP feasibility/optimization over box-and-halfspace
//!   constraints;
//! - [`minnorm`]: minimum-`l_p`-norm point subject to linear inequalities;
//! - [`plank`]: witness search for weighted affine escape problems;
//! - [`spectral`]: strongly connected components, Perron roots, Frobenius
//!   normal form of `|A|`;
//! - [`xi`]: sign-real spectral radius bounds, the exact small-`n` oracle,
//!   and the `rho(|A|) <= n * xi(A)` verification pipeline;
//! - [`gen`]: reproducible seeded instance generators;
//! - [`jsonio`], [`report`], [`cli`]: JSON schemas, run reports and the
//!   command-line front-end.
//!
//! All operations are pure functions on immutable inputs and are safe to call
//! concurrently from any number of threads.

pub mod cli;
pub mod gen;
pub mod jsonio;
pub mod linalg;
pub mod minnorm;
pub mod plank;
pub mod report;
pub mod simplex;
pub mod spectral;
pub mod xi;

pub use linalg::{Matrix, PExponent};

/// Default tolerances and caps, overridable through CLI flags.
pub mod defaults {
    /// LP feasibility tolerance.
    pub const FEAS_TOL: f64 = 1e-9;
    /// Convex (minimum-norm) solver tolerance.
    pub const CONVEX_TOL: f64 = 1e-8;
    /// Certificate verification tolerance, deliberately stricter than the
    /// solver tolerances so verification never hides solver slack.
    pub const CHECK_TOL: f64 = 1e-9;
    /// Bisection tolerance for the exact xi oracle.
    pub const BISECTION_TOL: f64 = 1e-7;
    /// Largest dimension accepted by the exact xi oracle (4^n pattern pairs
    /// per bisection step).
    pub const XI_N_CAP: usize = 8;
    /// Largest row count accepted by sign-pattern enumeration (2^m patterns).
    pub const ENUM_CAP: usize = 20;
    /// Matrix size cap for non-exact CLI paths.
    pub const SIZE_CAP: usize = 64;
}

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must agree in dimension do not.
    DimensionMismatch { expected: usize, got: usize },
    /// Malformed matrix or vector data (empty, ragged, wrong entry count).
    BadShape(String),
    /// An `l_p` exponent below 1 (or NaN).
    InvalidExponent(f64),
    /// A precondition violation not covered by a more specific variant.
    InvalidInput(String),
    /// An operation that requires a nonzero vector received zero.
    ZeroVector,
    /// Row `i` of the matrix is identically zero where a nonzero row is
    /// required (0-based).
    ZeroRow(usize),
    /// Diagonal scaling entry `i` is zero (0-based).
    ZeroDiagonal(usize),
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// A nonnegative matrix was required; entry `(row, col)` is negative.
    NegativeEntry { row: usize, col: usize },
    /// An index set that must be nonempty is empty.
    EmptyIndexSet,
    /// An index outside `0..len`.
    IndexOutOfRange { index: usize, len: usize },
    /// A hard enumeration or size cap was exceeded.
    CapExceeded {
        what: &'static str,
        limit: usize,
        requested: usize,
    },
    /// An iterative method failed to reach its tolerance within its
    /// iteration budget. Never silently wrong: the partial result is
    /// discarded.
    ToleranceFailure(String),
    /// A search that a theorem guarantees must succeed came up empty. This
    /// falsifies either the implementation or its floating-point
    /// assumptions, so it is reported loudly instead of being coerced into
    /// a "not found" result.
    InternalContradiction(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::BadShape(msg) => write!(f, "bad shape: {msg}"),
            Error::InvalidExponent(p) => write!(f, "invalid l_p exponent {p}: need p >= 1"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ZeroVector => write!(f, "vector must be nonzero"),
            Error::ZeroRow(i) => write!(f, "row {i} is zero where a nonzero row is required"),
            Error::ZeroDiagonal(i) => write!(f, "diagonal entry {i} is zero"),
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            Error::NegativeEntry { row, col } => {
                write!(f, "matrix must be nonnegative, entry ({row},{col}) is negative")
            }
            Error::EmptyIndexSet => write!(f, "index set must be nonempty"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::CapExceeded {
                what,
                limit,
                requested,
            } => write!(f, "{what} cap exceeded: limit {limit}, requested {requested}"),
            Error::ToleranceFailure(msg) => write!(f, "tolerance failure: {msg}"),
            Error::InternalContradiction(msg) => write!(f, "internal contradiction: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
