//! Small dense complex matrices, used only to cross-check the diagonal
//! representations at `d <= 16`.

use std::ops::{Add, Index, IndexMut, Mul};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_DENSE_DIMENSION: usize = 16;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n > MAX_DENSE_DIMENSION {
            return Err(Error::DenseTooLarge(n));
        }
        Ok(Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        })
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, z) in diag.iter().enumerate() {
            m[(i, i)] = *z;
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        let n = self.n;
        let mut out = DenseMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        };
        for i in 0..n {
            for k in 0..n {
                let x = self[(i, k)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += x * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}
