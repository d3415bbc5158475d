//! Residual metrics and the Tseng reduction.

use crate::linops::operator::{ForwardMap, Resolvent};
use crate::linops::point::Point;

/// Residual `||F x||` of the equation `F x = 0`.
///
/// Uses an untracked evaluation so measuring a run never changes its
/// operator-evaluation accounting.
pub fn residual_ne(f: &ForwardMap, x: &Point) -> f64 {
    f.eval_untracked(x).norm()
}

/// Forward-backward splitting residual
/// `|| (1/eta) (x - J_{eta T}(x - eta F x)) ||`.
///
/// Zero exactly at solutions of `0 ∈ Fx + Tx`; reduces to [`residual_ne`]
/// when `T = 0`.
pub fn residual_fb(f: &ForwardMap, j: &Resolvent, x: &Point, eta: f64) -> f64 {
    debug_assert!(eta > 0.0);
    let fx = f.eval_untracked(x);
    let inner = j.apply_untracked(&x.sub_scaled(eta, &fx), eta);
    x.sub(&inner).norm() / eta
}

/// The Tseng operator
/// `Fhat x = x - J_{lambda T}(x - lambda F x) - lambda (F x - F(J_{lambda T}(x - lambda F x)))`,
/// whose zeros are exactly the solutions of `0 ∈ Fx + Tx`.
///
/// Each evaluation of the returned map costs two evaluations of `f` and one
/// application of `j`, charged to the counters of the handles passed in.
pub fn tseng_hat(f: &ForwardMap, j: &Resolvent, lambda: f64) -> ForwardMap {
    assert!(lambda > 0.0, "tseng_hat requires lambda > 0");
    let f = f.clone();
    let j = j.clone();
    let dim = f.dim();
    ForwardMap::new(dim, move |x: &Point| {
        let fx = f.eval(x);
        let z = j.apply(&x.sub_scaled(lambda, &fx), lambda);
        let fz = f.eval(&z);
        // x - z - lambda (Fx - Fz)
        x.sub(&z).sub_scaled(lambda, &fx.sub(&fz))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::operator::AffineMap;
    use crate::linops::DenseMatrix;

    fn identity_map(dim: usize) -> ForwardMap {
        ForwardMap::new(dim, |x: &Point| x.clone())
    }

    #[test]
    fn residual_ne_is_the_euclidean_norm() {
        let f = identity_map(2);
        assert_eq!(residual_ne(&f, &Point::zeros(2)), 0.0);
        assert_eq!(residual_ne(&f, &Point::new(vec![3.0, 4.0])), 5.0);
    }

    #[test]
    fn residual_ne_vanishes_at_affine_root() {
        let f = AffineMap::new(DenseMatrix::identity(2), Point::new(vec![-1.0, 0.0]))
            .unwrap()
            .forward_map()
            .unwrap();
        assert_eq!(residual_ne(&f, &Point::new(vec![1.0, 0.0])), 0.0);
    }

    #[test]
    fn residual_fb_with_zero_operator_matches_norm() {
        let f = identity_map(3);
        let j = Resolvent::identity(3);
        let x = Point::new(vec![0.5, -0.25, 2.0]);
        let a = residual_fb(&f, &j, &x, 1.0);
        let b = residual_ne(&f, &x);
        assert!((a - b).abs() <= 1e-15 * b.max(1.0));
    }

    #[test]
    fn residual_fb_projection_cases() {
        use crate::prox::simplex_resolvent;
        let zero_f = ForwardMap::new(2, |x: &Point| Point::zeros(x.dim()));
        let j = simplex_resolvent(2);
        // Feasible fixed point of the projection.
        let x = Point::new(vec![0.5, 0.5]);
        assert!(residual_fb(&zero_f, &j, &x, 1.0) <= 1e-15);
        // proj(2, 0) = (1, 0): the residual vector is (1, 0).
        let x = Point::new(vec![2.0, 0.0]);
        assert!((residual_fb(&zero_f, &j, &x, 1.0) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn tseng_hat_scalar_substitution() {
        // T = 0, F = identity, lambda = 0.5: Fhat x = lambda (1 - lambda) x.
        let f = identity_map(1);
        let j = Resolvent::identity(1);
        let hat = tseng_hat(&f, &j, 0.5);
        let v = hat.eval(&Point::new(vec![1.0]));
        assert!((v[0] - 0.25).abs() <= 1e-15);
        assert_eq!(hat.eval(&Point::zeros(1)).as_slice(), &[0.0]);
    }

    #[test]
    fn tseng_hat_eval_accounting() {
        let f = identity_map(1);
        let j = Resolvent::identity(1);
        let hat = tseng_hat(&f, &j, 0.5);
        hat.eval(&Point::new(vec![1.0]));
        assert_eq!(f.eval_count(), 2);
        assert_eq!(j.eval_count(), 1);
        assert_eq!(hat.eval_count(), 1);
        hat.eval(&Point::new(vec![2.0]));
        assert_eq!(f.eval_count(), 4);
        assert_eq!(j.eval_count(), 2);
    }
}
