//! Evaluatable operators with evaluation counters.
//!
//! Counters exist so that per-iteration operator costs are measurable (the
//! benchmark x-axis can be "number of operator evaluations"). Solver steps
//! use the counting entry points; monitoring code (residual reporting,
//! certificates) uses the untracked ones so it never distorts the accounting.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linops::dense::{spectral_norm, DenseMatrix};
use crate::linops::point::Point;

type EvalFn = dyn Fn(&Point) -> Point + Send + Sync;
type ApplyFn = dyn Fn(&Point, f64) -> Point + Send + Sync;

/// Tolerance and budget for the Lipschitz constant of affine maps.
pub(crate) const LIPSCHITZ_TOL: f64 = 1e-10;
pub(crate) const LIPSCHITZ_MAX_ITER: usize = 10_000;

/// A single-valued operator `F : R^p -> R^p`.
///
/// Cloning shares the evaluation counter (both handles observe the same
/// totals); [`ForwardMap::fork`] yields a handle with a fresh counter so each
/// solver run can own its accounting over a shared problem.
#[derive(Clone)]
pub struct ForwardMap {
    dim: usize,
    lipschitz: Option<f64>,
    eval_fn: Arc<EvalFn>,
    evals: Arc<AtomicU64>,
}

impl ForwardMap {
    pub fn new(dim: usize, f: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        ForwardMap {
            dim,
            lipschitz: None,
            eval_fn: Arc::new(f),
            evals: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Counted evaluation: the per-step solver cost.
    pub fn eval(&self, x: &Point) -> Point {
        self.evals.fetch_add(1, Ordering::Relaxed);
        (self.eval_fn)(x)
    }

    /// Evaluation that leaves the counter untouched (for residual monitoring
    /// and certificate checks).
    pub fn eval_untracked(&self, x: &Point) -> Point {
        (self.eval_fn)(x)
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// A handle over the same operator with a zeroed counter.
    pub fn fork(&self) -> ForwardMap {
        ForwardMap {
            dim: self.dim,
            lipschitz: self.lipschitz,
            eval_fn: Arc::clone(&self.eval_fn),
            evals: Arc::new(AtomicU64::new(0)),
        }
    }
}

impl std::fmt::Debug for ForwardMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardMap")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("evals", &self.eval_count())
            .finish()
    }
}

/// The resolvent `x -> J_{eta T}(x)` of a multivalued operator `T`,
/// parameterized by `eta > 0`.
#[derive(Clone)]
pub struct Resolvent {
    dim: usize,
    apply_fn: Arc<ApplyFn>,
    applies: Arc<AtomicU64>,
}

impl Resolvent {
    pub fn new(dim: usize, f: impl Fn(&Point, f64) -> Point + Send + Sync + 'static) -> Self {
        Resolvent {
            dim,
            apply_fn: Arc::new(f),
            applies: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Resolvent of the zero operator: the identity for every `eta`.
    pub fn identity(dim: usize) -> Self {
        Resolvent::new(dim, |x, _| x.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &Point, eta: f64) -> Point {
        self.applies.fetch_add(1, Ordering::Relaxed);
        (self.apply_fn)(x, eta)
    }

    pub fn apply_untracked(&self, x: &Point, eta: f64) -> Point {
        (self.apply_fn)(x, eta)
    }

    pub fn eval_count(&self) -> u64 {
        self.applies.load(Ordering::Relaxed)
    }

    pub fn fork(&self) -> Resolvent {
        Resolvent {
            dim: self.dim,
            apply_fn: Arc::clone(&self.apply_fn),
            applies: Arc::new(AtomicU64::new(0)),
        }
    }
}

impl std::fmt::Debug for Resolvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Resolvent")
            .field("dim", &self.dim)
            .field("applies", &self.eval_count())
            .finish()
    }
}

/// An affine operator `F x = M x + f`, the workhorse of the quadratic
/// minimax benchmarks.
#[derive(Debug, Clone)]
pub struct AffineMap {
    matrix: DenseMatrix,
    offset: Point,
}

impl AffineMap {
    pub fn new(matrix: DenseMatrix, offset: Point) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::invalid("affine map requires a square matrix"));
        }
        if matrix.rows() != offset.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                got: offset.dim(),
            });
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn offset(&self) -> &Point {
        &self.offset
    }

    pub fn eval(&self, x: &Point) -> Point {
        let mut out = self.matrix.matvec(x.as_slice());
        for (o, f) in out.iter_mut().zip(self.offset.as_slice()) {
            *o += f;
        }
        Point::new(out)
    }

    /// The root `-M^{-1} f`, when `M` is invertible.
    pub fn root(&self) -> Result<Point> {
        self.matrix.solve(&self.offset.scale(-1.0))
    }

    /// Wraps the map as a [`ForwardMap`], attaching the spectral norm of the
    /// matrix as the Lipschitz constant.
    pub fn forward_map(&self) -> Result<ForwardMap> {
        let l = spectral_norm(&self.matrix, LIPSCHITZ_TOL, LIPSCHITZ_MAX_ITER)?;
        let map = self.clone();
        Ok(ForwardMap::new(self.dim(), move |x| map.eval(x)).with_lipschitz(l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counted_and_untracked_evals() {
        let f = ForwardMap::new(2, |x: &Point| x.scale(2.0));
        let x = Point::new(vec![1.0, -1.0]);
        f.eval(&x);
        f.eval_untracked(&x);
        f.eval(&x);
        assert_eq!(f.eval_count(), 2);
        let g = f.fork();
        assert_eq!(g.eval_count(), 0);
        g.eval(&x);
        assert_eq!(g.eval_count(), 1);
        assert_eq!(f.eval_count(), 2);
        // clone shares the counter
        let h = f.clone();
        h.eval(&x);
        assert_eq!(f.eval_count(), 3);
    }

    #[test]
    fn identity_resolvent_ignores_eta() {
        let j = Resolvent::identity(2);
        let x = Point::new(vec![1.0, 2.0]);
        assert_eq!(j.apply(&x, 0.3).as_slice(), x.as_slice());
        assert_eq!(j.apply(&x, 7.0).as_slice(), x.as_slice());
        assert_eq!(j.eval_count(), 2);
    }

    #[test]
    fn affine_eval_and_root() {
        let m = DenseMatrix::identity(2);
        let f = AffineMap::new(m, Point::new(vec![-1.0, 0.0])).unwrap();
        let x = Point::new(vec![1.0, 0.0]);
        assert_eq!(f.eval(&x).as_slice(), &[0.0, 0.0]);
        let root = f.root().unwrap();
        assert_eq!(root.as_slice(), &[1.0, 0.0]);
        let fm = f.forward_map().unwrap();
        assert!((fm.lipschitz().unwrap() - 1.0).abs() <= 1e-10);
    }
}
