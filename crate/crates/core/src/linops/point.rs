//! Dense points in `R^p`, optionally carrying a primal/dual block split.

use crate::error::{Error, Result};

/// A dense real vector, optionally partitioned into a leading primal block of
/// length `split` and a trailing dual block.
///
/// All arithmetic is plain Euclidean; the split is bookkeeping used by the
/// minimax problem generators and block resolvents.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
    split: Option<usize>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point {
            coords,
            split: None,
        }
    }

    /// A point whose first `p1` coordinates form the primal block.
    pub fn with_split(coords: Vec<f64>, p1: usize) -> Result<Self> {
        if p1 == 0 || p1 >= coords.len() {
            return Err(Error::invalid(format!(
                "block split must satisfy 0 < p1 < p, got p1 = {p1}, p = {}",
                coords.len()
            )));
        }
        Ok(Point {
            coords,
            split: Some(p1),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Point::new(vec![0.0; dim])
    }

    /// The constant vector `c * ones(dim)` used as a starting point by the
    /// benchmark presets.
    pub fn constant(dim: usize, c: f64) -> Self {
        Point::new(vec![c; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn split(&self) -> Option<usize> {
        self.split
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|v| s * v).collect(),
            split: self.split,
        }
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
            split: self.split,
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
            split: self.split,
        }
    }

    /// `self - s * other`, the workhorse of every iteration scheme.
    pub fn sub_scaled(&self, s: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - s * b)
                .collect(),
            split: self.split,
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + s * b)
                .collect(),
            split: self.split,
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, b: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            split: self.split,
        }
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = a - b;
                d * d
            })
            .sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point::new(coords)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl std::ops::IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coords[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_rejects_degenerate_blocks() {
        assert!(Point::with_split(vec![1.0, 2.0], 0).is_err());
        assert!(Point::with_split(vec![1.0, 2.0], 2).is_err());
        let p = Point::with_split(vec![1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(p.split(), Some(1));
    }

    #[test]
    fn euclidean_ops() {
        let a = Point::new(vec![3.0, 4.0]);
        let b = Point::new(vec![1.0, -1.0]);
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.dot(&b), -1.0);
        assert_eq!(a.sub_scaled(2.0, &b).as_slice(), &[1.0, 6.0]);
        assert_eq!(a.lin_comb(0.5, 2.0, &b).as_slice(), &[3.5, 0.0]);
    }
}
