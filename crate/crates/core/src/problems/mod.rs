//! Reproducible benchmark problem generators and dataset ingestion.
//!
//! Generators are pure functions of `(spec, seed)`: identical inputs produce
//! bit-identical problem data on every platform (see [`crate::rng`]).

mod games;
mod known;
mod libsvm;
mod logit;
mod quad;

pub use games::{gen_matrix_game, GameFamily, GameProblem, MatrixGameSpec};
pub use known::{make_known_solution_inclusion, KnownSolutionProblem};
pub use libsvm::parse_libsvm;
pub use logit::{
    gen_logit_ambiguous, logit_hamiltonian, LogitAmbiguousSpec, LogitData, LogitProblem,
    LogitSource,
};
pub use quad::{gen_quad_minimax, EigenMode, QuadMinimaxSpec, QuadProblem};
