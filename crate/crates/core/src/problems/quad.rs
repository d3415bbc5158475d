//! Quadratic minimax instances: `F x = M x + f` with the saddle-point block
//! matrix `M = [[A, L], [-L^T, B]]`, optionally constrained to a product of
//! simplexes.

use crate::error::{Error, Result};
use crate::linops::{AffineMap, DenseMatrix, ForwardMap, Point};
use crate::prox::{make_block, simplex_resolvent};
use crate::rng::Stream;
use crate::Resolvent;

/// How the eigenvalues of the symmetric diagonal blocks are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenMode {
    /// Standard normal draws clipped from below (`lower >= 0` gives a
    /// monotone operator; the benchmarks use `0.1` and `-0.1`).
    Clip { lower: f64 },
    /// Uniform draws on `[lo, hi)` (possibly strongly nonmonotone).
    Uniform { lo: f64, hi: f64 },
}

/// Specification of one quadratic minimax instance.
///
/// Stream assignment: 0 = raw matrix for `A`'s orthonormal factor, 1 = `A`'s
/// eigenvalues, 2/3 = same for `B`, 4 = coupling matrix `L`, 5/6 = offsets.
#[derive(Debug, Clone, Copy)]
pub struct QuadMinimaxSpec {
    pub p1: usize,
    pub p2: usize,
    pub eigen_mode: EigenMode,
    pub seed: u64,
}

/// A generated instance; `x_star` is present only for unconstrained
/// instances generated with `with_solution`.
pub struct QuadProblem {
    pub affine: AffineMap,
    pub forward: ForwardMap,
    pub resolvent: Option<Resolvent>,
    pub x_star: Option<Point>,
    pub lipschitz: f64,
}

fn symmetric_block(p: usize, seed: u64, stream_q: u64, stream_d: u64, mode: EigenMode) -> DenseMatrix {
    let mut q_stream = Stream::new(seed, stream_q);
    let raw = DenseMatrix::from_fn(p, p, |_, _| q_stream.standard_normal());
    let q = raw.qr_q();
    let mut d_stream = Stream::new(seed, stream_d);
    let eigs: Vec<f64> = (0..p)
        .map(|_| match mode {
            EigenMode::Clip { lower } => d_stream.standard_normal().max(lower),
            EigenMode::Uniform { lo, hi } => d_stream.uniform(lo, hi),
        })
        .collect();
    // Q D Q^T, symmetrized to kill factorization round-off.
    let mut qd = q.clone();
    for i in 0..p {
        for j in 0..p {
            qd[(i, j)] *= eigs[j];
        }
    }
    qd.matmul(&q.transpose()).symmetric_part()
}

/// Generates the instance; `constrained` attaches the product-of-simplexes
/// resolvent, `with_solution` solves for the root of the affine map (only
/// meaningful unconstrained).
pub fn gen_quad_minimax(
    spec: &QuadMinimaxSpec,
    constrained: bool,
    with_solution: bool,
) -> Result<QuadProblem> {
    if spec.p1 == 0 || spec.p2 == 0 {
        return Err(Error::invalid("quadratic minimax requires p1, p2 >= 1"));
    }
    if constrained && with_solution {
        return Err(Error::invalid(
            "direct-solve solutions are only available for unconstrained instances",
        ));
    }
    let (p1, p2) = (spec.p1, spec.p2);
    let a = symmetric_block(p1, spec.seed, 0, 1, spec.eigen_mode);
    let b = symmetric_block(p2, spec.seed, 2, 3, spec.eigen_mode);
    let mut l_stream = Stream::new(spec.seed, 4);
    let l = DenseMatrix::from_fn(p1, p2, |_, _| l_stream.standard_normal());
    let matrix = DenseMatrix::saddle_blocks(&a, &b, &l)?;
    let mut b_stream = Stream::new(spec.seed, 5);
    let mut c_stream = Stream::new(spec.seed, 6);
    let mut offset = b_stream.normal_vec(p1);
    offset.extend(c_stream.normal_vec(p2));
    let affine = AffineMap::new(matrix, Point::with_split(offset, p1)?)?;
    let forward = affine.forward_map()?;
    let lipschitz = forward.lipschitz().unwrap();
    let x_star = if with_solution {
        Some(affine.root()?)
    } else {
        None
    };
    let resolvent = if constrained {
        Some(make_block(vec![
            (0, simplex_resolvent(p1)),
            (p1, simplex_resolvent(p2)),
        ])?)
    } else {
        None
    };
    Ok(QuadProblem {
        affine,
        forward,
        resolvent,
        x_star,
        lipschitz,
    })
}
