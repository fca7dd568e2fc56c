//! Numerical workbench for multilinear fractional integral operators.
//!
//! The crate discretizes compactly supported functions on uniform midpoint
//! grids and provides:
//!
//! * kernel evaluation and certification (size condition, annulus smoothness
//!   sequences, Dini integrals) in [`kernels`],
//! * the multilinear fractional integral, the Riesz potential, and their
//!   commutators in [`operators`],
//! * Hardy-Littlewood, sharp, and fractional maximal operators over dyadic
//!   cube families in [`maximal`],
//! * Lebesgue / weak-Lebesgue / BMO norms, Muckenhoupt constants, and
//!   variable-exponent (Luxemburg) norms in [`spaces`],
//! * empirical verification suites that measure the constants in the
//!   corresponding norm inequalities in [`verify`].
//!
//! All heavy loops are data-parallel over output nodes or cubes when the
//! `parallel` feature (default) is enabled, and fall back to sequential
//! iteration without it. Results are deterministic in either mode: parallel
//! maps preserve index order and reductions are associativity-safe.

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN, which the "simpler" comparison would accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Coordinates live in fixed-width `[f64; 2]` buffers indexed by axis/slot;
// index loops over those prefixes read more clearly than iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod corpus;
pub mod error;
mod exec;
pub mod grid;
pub mod kernels;
pub mod maximal;
pub mod operators;
pub mod spaces;
pub mod verify;

pub use corpus::CorpusExpr;
pub use error::FraclabError;
pub use grid::{Cube, CubeFamily, GridDomain, SampledFunction};
pub use kernels::{KernelKind, KernelSpec, ModulusOfContinuity, SmoothnessSequence};
pub use operators::OperatorParams;
pub use spaces::{ExponentForm, ExponentFunction, ExponentVector, WeightVector};
pub use verify::{NormMode, VariableExponentReports, VerificationCase, VerificationReport};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, FraclabError>;
