//! Extragradient-type solvers for nonlinear equations `Fx = 0` and composite
//! inclusions `0 ∈ Fx + Tx`.
//!
//! The crate is organized around a small set of building blocks:
//!
//! * [`linops`] — dense vectors and matrices, evaluatable operators with
//!   per-run evaluation counters, residual metrics, and the Tseng reduction
//!   that turns an inclusion into an equation.
//! * [`prox`] — the concrete resolvents used by the benchmarks: simplex
//!   projection, ℓ1 soft-thresholding, the zero operator, and block products.
//! * [`directions`] — search-direction rules (extragradient, past-extragradient,
//!   and affine combinations) together with their certified constants.
//! * [`stepsizes`] — admissible stepsize intervals and the constants that
//!   appear in the convergence guarantees, as pure calculators.
//! * [`solvers`] — the iteration engines (GEG, GEG2, GFBFS2, RFBS2, GR2 and
//!   the forward/forward-backward baselines), trace recording, and
//!   runtime-checkable Lyapunov certificates.
//! * [`problems`] — reproducible benchmark generators: quadratic minimax,
//!   bilinear matrix games, and ambiguous-feature logistic regression, plus a
//!   LIBSVM reader and known-solution test instances.

pub mod directions;
pub mod error;
pub mod linops;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod solvers;
pub mod stepsizes;

pub use error::{Error, Result};
pub use linops::{AffineMap, DenseMatrix, ForwardMap, Point, Resolvent};
