//! Proximal operators and resolvents used by the benchmark problems:
//! projection onto the standard simplex, ℓ1 soft-thresholding, the zero
//! operator, and block products of resolvents.

use crate::error::{Error, Result};
use crate::linops::{Point, Resolvent};

/// Euclidean projection onto the standard simplex `{ z >= 0, sum z = 1 }`.
///
/// Sort-based thresholding: sort a copy descending, pick the largest pivot
/// index whose threshold keeps the coordinate positive, clip. After clipping,
/// the largest output coordinate absorbs the residual rounding so the
/// coordinates sum to one exactly when added others-first.
pub fn project_simplex(x: &Point) -> Point {
    let q = x.dim();
    assert!(q >= 1, "project_simplex requires dimension >= 1");
    if q == 1 {
        return Point::new(vec![1.0]);
    }
    let mut sorted: Vec<f64> = x.as_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if v - t > 0.0 {
            // Keep scanning: ties resolve to the largest feasible pivot.
            theta = t;
        }
    }
    let mut z: Vec<f64> = x.as_slice().iter().map(|&v| (v - theta).max(0.0)).collect();
    // Absorb rounding into the largest coordinate: 1 - sum(others) is exact
    // to within half an ulp, so others + largest re-sums to exactly 1.
    let imax = z
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let others: f64 = z
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != imax)
        .map(|(_, v)| v)
        .sum();
    z[imax] = 1.0 - others;
    debug_assert!(z[imax] >= 0.0);
    Point::new(z)
}

/// Componentwise soft-thresholding `sign(x_i) * max(|x_i| - t, 0)`, the
/// proximal operator of `t * ||.||_1`.
pub fn prox_l1(x: &Point, t: f64) -> Point {
    assert!(t >= 0.0, "prox_l1 requires a nonnegative threshold");
    Point::new(
        x.as_slice()
            .iter()
            .map(|&v| v.signum() * (v.abs() - t).max(0.0))
            .collect(),
    )
}

/// Resolvent of the zero operator (`apply(x, eta) = x`).
pub fn resolvent_zero(dim: usize) -> Resolvent {
    Resolvent::identity(dim)
}

/// Resolvent of the normal cone of the standard simplex: the projection,
/// independent of `eta`.
pub fn simplex_resolvent(dim: usize) -> Resolvent {
    Resolvent::new(dim, |x, _eta| project_simplex(x))
}

/// Resolvent of `T = weight * d||.||_1`: soft-thresholding at `weight * eta`.
pub fn l1_resolvent(dim: usize, weight: f64) -> Resolvent {
    assert!(weight >= 0.0);
    Resolvent::new(dim, move |x, eta| prox_l1(x, weight * eta))
}

struct Block {
    offset: usize,
    len: usize,
    resolvent: Resolvent,
}

/// A resolvent that applies componentwise over a partition of `[0, p)`.
pub struct BlockResolvent {
    blocks: Vec<Block>,
    dim: usize,
}

impl BlockResolvent {
    /// Builds a block resolvent from `(offset, component)` pairs; the blocks
    /// must tile `[0, p)` without gaps or overlap.
    pub fn new(components: Vec<(usize, Resolvent)>) -> Result<Self> {
        let mut blocks: Vec<Block> = components
            .into_iter()
            .map(|(offset, resolvent)| Block {
                offset,
                len: resolvent.dim(),
                resolvent,
            })
            .collect();
        blocks.sort_by_key(|b| b.offset);
        let mut expected = 0usize;
        for b in &blocks {
            if b.offset != expected {
                return Err(Error::BadBlockLayout(format!(
                    "block at offset {} leaves a gap or overlap (expected offset {})",
                    b.offset, expected
                )));
            }
            if b.len == 0 {
                return Err(Error::BadBlockLayout("empty block".into()));
            }
            expected += b.len;
        }
        if blocks.is_empty() {
            return Err(Error::BadBlockLayout("no blocks".into()));
        }
        Ok(BlockResolvent {
            dim: expected,
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &Point, eta: f64) -> Point {
        debug_assert_eq!(x.dim(), self.dim);
        let mut out = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            let slice = Point::new(x.as_slice()[b.offset..b.offset + b.len].to_vec());
            out.extend_from_slice(b.resolvent.apply_untracked(&slice, eta).as_slice());
        }
        Point::new(out)
    }

    /// Wraps the block product as a single [`Resolvent`] whose counter
    /// increments once per apply.
    pub fn resolvent(self) -> Resolvent {
        let dim = self.dim;
        Resolvent::new(dim, move |x, eta| self.apply(x, eta))
    }
}

/// Convenience constructor mirroring the block layout `(offset, component)`.
pub fn make_block(components: Vec<(usize, Resolvent)>) -> Result<Resolvent> {
    Ok(BlockResolvent::new(components)?.resolvent())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_keeps_feasible_vertices() {
        let z = project_simplex(&Point::new(vec![1.0, 0.0, 0.0]));
        assert_eq!(z.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn simplex_symmetry_gives_uniform() {
        for &c in &[-3.0, 0.0, 0.4, 17.0] {
            let z = project_simplex(&Point::constant(5, c));
            for i in 0..5 {
                // cancellation in x - theta scales with |c|
                assert!((z[i] - 0.2).abs() <= 1e-15 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn simplex_two_dim_vertex() {
        let z = project_simplex(&Point::new(vec![2.0, 0.0]));
        assert!((z[0] - 1.0).abs() <= 1e-15 && z[1] == 0.0);
    }

    #[test]
    fn simplex_sums_to_one_exactly() {
        let mut stream = crate::rng::Stream::new(99, 0);
        for _ in 0..200 {
            let x = Point::new(stream.normal_vec(7));
            let z = project_simplex(&x);
            let imax = (0..7).max_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap()).unwrap();
            let others: f64 = (0..7).filter(|&i| i != imax).map(|i| z[i]).sum();
            assert_eq!(others + z[imax], 1.0);
            assert!((0..7).all(|i| z[i] >= 0.0));
        }
    }

    #[test]
    fn prox_l1_basics() {
        assert_eq!(prox_l1(&Point::zeros(3), 0.7).as_slice(), &[0.0; 3]);
        let x = Point::new(vec![2.0, -0.3]);
        assert_eq!(prox_l1(&x, 0.0).as_slice(), x.as_slice());
        let z = prox_l1(&x, 0.5);
        assert_eq!(z.as_slice(), &[1.5, 0.0]);
    }

    #[test]
    fn prox_l1_subgradient_optimality() {
        // 0 ∈ z - x + t * d|z|: interior coordinates satisfy z - x = -t sign(z),
        // zeroed coordinates satisfy |x| <= t.
        let mut stream = crate::rng::Stream::new(4, 0);
        for _ in 0..200 {
            let x = Point::new(stream.normal_vec(6));
            let t = stream.uniform(0.0, 1.5);
            let z = prox_l1(&x, t);
            for i in 0..6 {
                if z[i] != 0.0 {
                    assert!((z[i] - x[i] + t * z[i].signum()).abs() <= 1e-10);
                } else {
                    assert!(x[i].abs() <= t + 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_resolvent_is_identity() {
        let j = resolvent_zero(2);
        let x = Point::new(vec![1.0, 2.0]);
        assert_eq!(j.apply(&x, 0.3).as_slice(), x.as_slice());
    }

    #[test]
    fn block_layout_validation() {
        assert!(make_block(vec![(0, resolvent_zero(2)), (3, resolvent_zero(2))]).is_err());
        assert!(make_block(vec![(0, resolvent_zero(2)), (1, resolvent_zero(2))]).is_err());
        assert!(make_block(vec![(0, resolvent_zero(2)), (2, resolvent_zero(2))]).is_ok());
    }

    #[test]
    fn block_applies_componentwise() {
        let j = make_block(vec![(0, simplex_resolvent(2)), (2, simplex_resolvent(2))]).unwrap();
        let z = j.apply(&Point::new(vec![2.0, 0.0, 0.5, 0.5]), 1.0);
        assert!((z[0] - 1.0).abs() <= 1e-15 && z[1] == 0.0);
        assert!((z[2] - 0.5).abs() <= 1e-15 && (z[3] - 0.5).abs() <= 1e-15);
        assert_eq!(j.eval_count(), 1);
    }

    #[test]
    fn block_l1_then_simplex() {
        let j = make_block(vec![(0, l1_resolvent(2, 0.5)), (2, simplex_resolvent(2))]).unwrap();
        // eta = 1 so the l1 threshold is 0.5.
        let z = j.apply(&Point::new(vec![2.0, -0.3, 2.0, 0.0]), 1.0);
        assert_eq!(&z.as_slice()[..2], &[1.5, 0.0]);
        assert!((z[2] - 1.0).abs() <= 1e-15 && z[3] == 0.0);
    }

    #[test]
    fn single_zero_block_is_identity() {
        let j = make_block(vec![(0, resolvent_zero(3))]).unwrap();
        let x = Point::new(vec![0.1, -0.2, 0.3]);
        assert_eq!(j.apply(&x, 2.0).as_slice(), x.as_slice());
    }
}
