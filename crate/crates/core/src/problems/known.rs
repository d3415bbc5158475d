//! Constrained test instances with an exactly known solution, enabling
//! Lyapunov certificates that need `x*`.

use crate::error::Result;
use crate::linops::{AffineMap, ForwardMap, Point, Resolvent};
use crate::problems::quad::{gen_quad_minimax, EigenMode, QuadMinimaxSpec};
use crate::prox::{make_block, simplex_resolvent};

pub struct KnownSolutionProblem {
    pub affine: AffineMap,
    pub forward: ForwardMap,
    pub resolvent: Resolvent,
    pub x_star: Point,
    pub lipschitz: f64,
}

/// Builds a monotone quadratic minimax operator over the product of two
/// simplexes whose solution is the relative-interior point
/// `x* = (1/p1, ..., 1/p1, 1/p2, ..., 1/p2)`.
///
/// The matrix is drawn as in the monotone quadratic benchmark (eigenvalues
/// clipped at 0.1) and the offset is set to `-M x*`, so `F x* = 0`; the
/// normal cone at the interior point is `{0}`, hence `0 ∈ F x* + T x*`
/// exactly.
pub fn make_known_solution_inclusion(
    p1: usize,
    p2: usize,
    seed: u64,
) -> Result<KnownSolutionProblem> {
    let spec = QuadMinimaxSpec {
        p1,
        p2,
        eigen_mode: EigenMode::Clip { lower: 0.1 },
        seed,
    };
    let base = gen_quad_minimax(&spec, false, false)?;
    let mut coords = vec![1.0 / p1 as f64; p1];
    coords.extend(vec![1.0 / p2 as f64; p2]);
    let x_star = Point::with_split(coords, p1)?;
    let offset = base.affine.matrix().matvec(x_star.as_slice());
    let affine = AffineMap::new(
        base.affine.matrix().clone(),
        Point::new(offset.into_iter().map(|v| -v).collect()),
    )?;
    let forward = affine.forward_map()?;
    let lipschitz = forward.lipschitz().unwrap();
    let resolvent = make_block(vec![(0, simplex_resolvent(p1)), (p1, simplex_resolvent(p2))])?;
    Ok(KnownSolutionProblem {
        affine,
        forward,
        resolvent,
        x_star,
        lipschitz,
    })
}
