//! Bilinear matrix games on a product of simplexes:
//! `F x = [L^T v; -L u]` for `x = [u; v]`, a skew (hence monotone) operator.

use crate::error::{Error, Result};
use crate::linops::{spectral_norm, DenseMatrix, ForwardMap, Point, Resolvent};
use crate::prox::{make_block, simplex_resolvent};
use crate::rng::Stream;

/// Payoff matrix families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameFamily {
    /// `L_ij = ((i + j - 1) / (2q - 1))^alpha`, 1-based indices.
    Family1 { alpha: f64 },
    /// `L_ij = ((|i - j| + 1) / (2q - 1))^alpha`.
    Family2 { alpha: f64 },
    /// Pursuit payoff `L_ij = w_i (1 - exp(-theta |i - j|))` with
    /// `w_i = |standard normal|` (stream 0); the diagonal is exactly zero.
    Burglar { theta: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct MatrixGameSpec {
    pub family: GameFamily,
    pub q: usize,
    pub seed: u64,
}

pub struct GameProblem {
    pub payoff: DenseMatrix,
    pub forward: ForwardMap,
    pub resolvent: Resolvent,
    pub dim: usize,
    pub lipschitz: f64,
}

pub fn gen_matrix_game(spec: &MatrixGameSpec) -> Result<GameProblem> {
    let q = spec.q;
    if q == 0 {
        return Err(Error::invalid("matrix game requires q >= 1"));
    }
    let denom = (2 * q) as f64 - 1.0;
    let payoff = match spec.family {
        GameFamily::Family1 { alpha } => DenseMatrix::from_fn(q, q, |i, j| {
            (((i + j + 1) as f64) / denom).powf(alpha)
        }),
        GameFamily::Family2 { alpha } => DenseMatrix::from_fn(q, q, |i, j| {
            ((i.abs_diff(j) as f64 + 1.0) / denom).powf(alpha)
        }),
        GameFamily::Burglar { theta } => {
            let mut wealth_stream = Stream::new(spec.seed, 0);
            let wealth: Vec<f64> = (0..q).map(|_| wealth_stream.standard_normal().abs()).collect();
            DenseMatrix::from_fn(q, q, |i, j| {
                wealth[i] * (1.0 - (-theta * i.abs_diff(j) as f64).exp())
            })
        }
    };
    let lipschitz = spectral_norm(&payoff, 1e-10, 10_000)?;
    let l = payoff.clone();
    let forward = ForwardMap::new(2 * q, move |x: &Point| {
        let (u, v) = x.as_slice().split_at(l.rows());
        let mut out = l.matvec_t(v);
        out.extend(l.matvec(u).iter().map(|t| -t));
        Point::new(out)
    })
    .with_lipschitz(lipschitz);
    let resolvent = make_block(vec![(0, simplex_resolvent(q)), (q, simplex_resolvent(q))])?;
    Ok(GameProblem {
        payoff,
        forward,
        resolvent,
        dim: 2 * q,
        lipschitz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn family1_small_matrix() {
        let spec = MatrixGameSpec {
            family: GameFamily::Family1 { alpha: 1.0 },
            q: 2,
            seed: 0,
        };
        let prob = gen_matrix_game(&spec).unwrap();
        let m = &prob.payoff;
        assert!((m[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m[(1, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn family2_small_matrix() {
        let spec = MatrixGameSpec {
            family: GameFamily::Family2 { alpha: 1.0 },
            q: 2,
            seed: 0,
        };
        let m = gen_matrix_game(&spec).unwrap().payoff;
        assert!((m[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m[(1, 1)] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn burglar_structure() {
        let spec = MatrixGameSpec {
            family: GameFamily::Burglar { theta: 0.005 },
            q: 3,
            seed: 5,
        };
        let m = gen_matrix_game(&spec).unwrap().payoff;
        for i in 0..3 {
            assert_eq!(m[(i, i)], 0.0);
        }
        // row scaling: L_ij / (1 - exp(-theta |i-j|)) is constant along rows
        let w0 = m[(0, 1)] / (1.0 - (-0.005_f64).exp());
        let w0_alt = m[(0, 2)] / (1.0 - (-0.01_f64).exp());
        assert!((w0 - w0_alt).abs() < 1e-12);
        assert!(w0 >= 0.0);
    }

    #[test]
    fn operator_is_skew() {
        let spec = MatrixGameSpec {
            family: GameFamily::Family1 { alpha: 1.0 },
            q: 8,
            seed: 0,
        };
        let prob = gen_matrix_game(&spec).unwrap();
        let mut stream = Stream::new(17, 0);
        for _ in 0..100 {
            let x = Point::new(stream.normal_vec(prob.dim));
            let fx = prob.forward.eval_untracked(&x);
            let inner = fx.dot(&x).abs();
            assert!(inner <= 1e-10 * prob.lipschitz * x.norm_sq());
        }
    }
}
