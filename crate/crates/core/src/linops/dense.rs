//! Dense row-major matrices and the small amount of factorization machinery
//! the benchmark generators need: Householder QR with a fixed sign
//! convention, LU with partial pivoting, and a power-iteration spectral norm.

use crate::error::{Error, Result};
use crate::linops::point::Point;
use crate::rng::Stream;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged rows in matrix literal"));
        }
        Ok(DenseMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Symmetric part `(M + M^T)/2`.
    pub fn symmetric_part(&self) -> DenseMatrix {
        debug_assert_eq!(self.rows, self.cols);
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// Assembles the saddle-point block matrix `[[a, l], [-l^T, b]]`.
    pub fn saddle_blocks(a: &DenseMatrix, b: &DenseMatrix, l: &DenseMatrix) -> Result<DenseMatrix> {
        let (p1, p2) = (a.rows, b.rows);
        if a.cols != p1 || b.cols != p2 || l.rows != p1 || l.cols != p2 {
            return Err(Error::invalid("incompatible saddle block shapes"));
        }
        let mut m = DenseMatrix::zeros(p1 + p2, p1 + p2);
        for i in 0..p1 {
            for j in 0..p1 {
                m[(i, j)] = a[(i, j)];
            }
            for j in 0..p2 {
                m[(i, p1 + j)] = l[(i, j)];
            }
        }
        for i in 0..p2 {
            for j in 0..p1 {
                m[(p1 + i, j)] = -l[(j, i)];
            }
            for j in 0..p2 {
                m[(p1 + i, p1 + j)] = b[(i, j)];
            }
        }
        Ok(m)
    }

    /// Orthonormal factor of a Householder QR factorization.
    ///
    /// The reflection signs are fixed so that the diagonal of `R` is
    /// nonnegative, which makes `Q` unique (and therefore reproducible) for
    /// full-rank input.
    pub fn qr_q(&self) -> DenseMatrix {
        let n = self.rows;
        debug_assert_eq!(self.rows, self.cols);
        let mut r = self.clone();
        let mut q = DenseMatrix::identity(n);
        let mut v = vec![0.0; n];
        for k in 0..n {
            let mut alpha = 0.0;
            for i in k..n {
                alpha += r[(i, k)] * r[(i, k)];
            }
            alpha = alpha.sqrt();
            if alpha == 0.0 {
                continue;
            }
            // Choose the sign that avoids cancellation; this makes the
            // post-reflection pivot -sign(x_k)*alpha, flipped below.
            if r[(k, k)] > 0.0 {
                alpha = -alpha;
            }
            for i in 0..k {
                v[i] = 0.0;
            }
            v[k] = r[(k, k)] - alpha;
            for i in (k + 1)..n {
                v[i] = r[(i, k)];
            }
            let vtv: f64 = v[k..].iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            let beta = 2.0 / vtv;
            // r <- (I - beta v v^T) r
            for j in k..n {
                let mut dot = 0.0;
                for i in k..n {
                    dot += v[i] * r[(i, j)];
                }
                let s = beta * dot;
                for i in k..n {
                    r[(i, j)] -= s * v[i];
                }
            }
            // q <- q (I - beta v v^T)
            for i in 0..n {
                let mut dot = 0.0;
                for j in k..n {
                    dot += q[(i, j)] * v[j];
                }
                let s = beta * dot;
                for j in k..n {
                    q[(i, j)] -= s * v[j];
                }
            }
        }
        // Fix signs so diag(R) >= 0.
        for k in 0..n {
            if r[(k, k)] < 0.0 {
                for i in 0..n {
                    q[(i, k)] = -q[(i, k)];
                }
            }
        }
        q
    }

    /// LU factorization with partial pivoting; fails on an exactly zero pivot.
    pub fn lu(&self) -> Result<LuFactors> {
        debug_assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = lu[(col, col)].abs();
            for i in (col + 1)..n {
                let v = lu[(i, col)].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = i;
                }
            }
            if pivot_val == 0.0 {
                return Err(Error::SingularMatrix {
                    col,
                    pivot: pivot_val,
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[(col, col)];
            for i in (col + 1)..n {
                let factor = lu[(i, col)] / pivot;
                lu[(i, col)] = factor;
                for j in (col + 1)..n {
                    let v = lu[(col, j)];
                    lu[(i, j)] -= factor * v;
                }
            }
        }
        Ok(LuFactors { lu, perm })
    }

    /// Solves `M x = b` by pivoted elimination.
    pub fn solve(&self, b: &Point) -> Result<Point> {
        Ok(self.lu()?.solve(b))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors with the row permutation.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn solve(&self, b: &Point) -> Point {
        let n = self.lu.rows;
        debug_assert_eq!(b.dim(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Point::new(x)
    }
}

/// Seed for the deterministic power-iteration start vector.
const POWER_ITERATION_SEED: u64 = 0x5eed_9e37_79b9_7f4b;

/// Largest singular value of `m`, by power iteration on `M^T M`.
///
/// Converges when two successive estimates agree to a relative `tol`; returns
/// [`Error::PowerIterationStalled`] carrying the last estimate otherwise.
pub fn spectral_norm(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if tol <= 0.0 {
        return Err(Error::invalid("spectral_norm: tol must be positive"));
    }
    let mut stream = Stream::new(POWER_ITERATION_SEED, 0);
    let mut v: Vec<f64> = (0..m.cols()).map(|_| stream.standard_normal()).collect();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nv == 0.0 || m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut sigma = 0.0_f64;
    for _ in 0..max_iter {
        let w = m.matvec(&v);
        let new_sigma = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if new_sigma == 0.0 {
            return Ok(0.0);
        }
        if (new_sigma - sigma).abs() <= tol * new_sigma {
            return Ok(new_sigma);
        }
        sigma = new_sigma;
        let mut z = m.matvec_t(&w);
        let nz = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in z.iter_mut() {
            *x /= nz;
        }
        v = z;
    }
    Err(Error::PowerIterationStalled {
        iters: max_iter,
        estimate: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_identity_is_one() {
        let m = DenseMatrix::identity(2);
        let s = spectral_norm(&m, 1e-10, 10_000).unwrap();
        assert!((s - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn spectral_norm_diagonal_takes_max_abs() {
        let m = DenseMatrix::from_rows(vec![vec![3.0, 0.0], vec![0.0, -2.0]]).unwrap();
        let s = spectral_norm(&m, 1e-10, 10_000).unwrap();
        assert!((s - 3.0).abs() <= 1e-9);
    }

    #[test]
    fn spectral_norm_rotation_is_one() {
        // M^T M = I, so every start vector is already an eigenvector.
        let m = DenseMatrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let s = spectral_norm(&m, 1e-10, 10_000).unwrap();
        assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn lu_solve_recovers_solution() {
        let m =
            DenseMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let b = Point::new(vec![5.0, 10.0]);
        let x = m.solve(&b).unwrap();
        let r = m.matvec(x.as_slice());
        assert!((r[0] - 5.0).abs() < 1e-12 && (r[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn lu_rejects_singular() {
        let m = DenseMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            m.solve(&Point::new(vec![1.0, 1.0])),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn qr_q_is_orthonormal_with_fixed_sign() {
        let m = DenseMatrix::from_rows(vec![
            vec![1.0, 2.0, 0.5],
            vec![-0.3, 1.5, 2.0],
            vec![0.7, -1.1, 0.9],
        ])
        .unwrap();
        let q = m.qr_q();
        let qtq = q.transpose().matmul(&q);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-12);
            }
        }
        // R = Q^T M must have a nonnegative diagonal under the sign fix.
        let r = q.transpose().matmul(&m);
        for i in 0..3 {
            assert!(r[(i, i)] >= 0.0);
        }
    }

    #[test]
    fn saddle_assembly_matches_hand_blocks() {
        let a = DenseMatrix::from_rows(vec![vec![2.0]]).unwrap();
        let b = DenseMatrix::from_rows(vec![vec![3.0]]).unwrap();
        let l = DenseMatrix::from_rows(vec![vec![4.0]]).unwrap();
        let m = DenseMatrix::saddle_blocks(&a, &b, &l).unwrap();
        assert_eq!(m[(0, 0)], 2.0);
        assert_eq!(m[(0, 1)], 4.0);
        assert_eq!(m[(1, 0)], -4.0);
        assert_eq!(m[(1, 1)], 3.0);
    }
}
