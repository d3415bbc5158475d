//! Vector arithmetic, dense linear algebra, operator abstractions, residual
//! metrics, and the Tseng reduction from inclusions to equations.

mod dense;
mod operator;
mod point;
mod probe;
mod residual;

pub use dense::{spectral_norm, DenseMatrix, LuFactors};
pub use operator::{AffineMap, ForwardMap, Resolvent};
pub use point::Point;
pub use probe::{probe_star_monotone, StarMonotoneReport};
pub use residual::{residual_fb, residual_ne, tseng_hat};
