//! Sampling diagnostics for star-monotonicity around a candidate solution.

use crate::linops::operator::ForwardMap;
use crate::linops::point::Point;
use crate::rng::Stream;

/// Guard below which `||Fx||^2` is considered zero and the ratio skipped.
const RATIO_GUARD: f64 = 1e-12;

/// Result of [`probe_star_monotone`].
///
/// `min_inner_product` is the smallest observed `<Fx, x - x_star>`;
/// `min_comonotone_ratio` the smallest `<Fx, x - x_star> / ||Fx||^2` over the
/// samples where the denominator cleared the guard. A negative ratio
/// witnesses a violation of `rho`-star-comonotonicity for every
/// `rho < -ratio`; nonnegative values are evidence, not a certificate.
#[derive(Debug, Clone, Copy)]
pub struct StarMonotoneReport {
    pub min_inner_product: f64,
    pub min_comonotone_ratio: f64,
    pub samples: usize,
    pub skipped: usize,
}

/// Samples `<Fx, x - x_star>` at seeded Gaussian perturbations of `x_star`.
pub fn probe_star_monotone(
    f: &ForwardMap,
    x_star: &Point,
    samples: usize,
    seed: u64,
) -> StarMonotoneReport {
    assert!(samples >= 1);
    let mut stream = Stream::new(seed, 0);
    let scale = 1.0 + x_star.norm();
    let mut min_inner = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut skipped = 0usize;
    for _ in 0..samples {
        let z = Point::new(stream.normal_vec(x_star.dim()));
        let x = x_star.add_scaled(scale, &z);
        let fx = f.eval_untracked(&x);
        let inner = fx.dot(&x.sub(x_star));
        min_inner = min_inner.min(inner);
        let denom = fx.norm_sq();
        if denom < RATIO_GUARD {
            skipped += 1;
            continue;
        }
        min_ratio = min_ratio.min(inner / denom);
    }
    StarMonotoneReport {
        min_inner_product: min_inner,
        min_comonotone_ratio: min_ratio,
        samples,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::operator::AffineMap;
    use crate::linops::DenseMatrix;

    #[test]
    fn identity_is_star_monotone_at_origin() {
        let f = ForwardMap::new(3, |x: &Point| x.clone());
        let report = probe_star_monotone(&f, &Point::zeros(3), 200, 11);
        assert!(report.min_inner_product >= 0.0);
        assert!(report.min_comonotone_ratio >= 0.0);
        assert_eq!(report.skipped, 0);
    }

    #[test]
    fn rotation_inner_product_vanishes() {
        let f = ForwardMap::new(2, |x: &Point| Point::new(vec![x[1], -x[0]]));
        let report = probe_star_monotone(&f, &Point::zeros(2), 500, 3);
        assert!(report.min_inner_product.abs() <= 1e-12);
    }

    #[test]
    fn indefinite_affine_map_caught_by_ratio() {
        // F x = diag(-0.1, 1) x + f with root -M^{-1} f: nonmonotone, and a
        // sample with |z1| >> |z2| exposes a negative comonotone ratio.
        let m = DenseMatrix::from_rows(vec![vec![-0.1, 0.0], vec![0.0, 1.0]]).unwrap();
        let affine = AffineMap::new(m, Point::new(vec![0.3, -0.7])).unwrap();
        let x_star = affine.root().unwrap();
        let fm = affine.forward_map().unwrap();
        let report = probe_star_monotone(&fm, &x_star, 1000, 5);
        assert!(report.min_comonotone_ratio < 0.0);
        assert!(report.min_inner_product < 0.0);
    }
}
