use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, SimError};

/// Dense complex matrix, row-major storage.
///
/// Substrate for every channel, precoder and decomposition in the library.
/// All operations keep entries finite when given finite input.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count {} does not match {}x{}",
            entries.len(),
            rows,
            cols
        );
        Self { rows, cols, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn from_real(rows: usize, cols: usize, reals: &[f64]) -> Self {
        assert_eq!(reals.len(), rows * cols);
        Self {
            rows,
            cols,
            entries: reals.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Square diagonal matrix from real values.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Rectangular diagonal matrix: `values` on the main diagonal, zero elsewhere.
    pub fn diag_rect(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert!(values.len() <= rows.min(cols));
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn row(&self, i: usize) -> Self {
        assert!(i < self.rows);
        Self {
            rows: 1,
            cols: self.cols,
            entries: self.entries[i * self.cols..(i + 1) * self.cols].to_vec(),
        }
    }

    pub fn col(&self, j: usize) -> Self {
        assert!(j < self.cols);
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    /// Rows `lo..hi` as a new matrix.
    pub fn row_slice(&self, lo: usize, hi: usize) -> Self {
        assert!(lo <= hi && hi <= self.rows);
        Self {
            rows: hi - lo,
            cols: self.cols,
            entries: self.entries[lo * self.cols..hi * self.cols].to_vec(),
        }
    }

    /// First `k` columns as a new matrix.
    pub fn first_cols(&self, k: usize) -> Self {
        assert!(k <= self.cols);
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&ComplexMatrix]) -> Self {
        assert!(!blocks.is_empty());
        let cols = blocks[0].cols;
        let mut entries = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack requires equal column counts");
            entries.extend_from_slice(&b.entries);
            rows += b.rows;
        }
        Self { rows, cols, entries }
    }

    /// Place matrices side by side.
    pub fn hstack(blocks: &[&ComplexMatrix]) -> Self {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack requires equal row counts");
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        Self::from_fn(rows, cols, |i, mut j| {
            for b in blocks {
                if j < b.cols {
                    return b[(i, j)];
                }
                j -= b.cols;
            }
            unreachable!()
        })
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols, "trace requires a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// In-place matrix product without allocating intermediates per entry.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Solve `self * x = b` for square `self` via Gaussian elimination with
    /// partial pivoting.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != self.cols {
            return Err(SimError::Dimension(format!(
                "solve requires a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if b.rows != self.rows {
            return Err(SimError::Dimension(format!(
                "solve: rhs has {} rows, expected {}",
                b.rows, self.rows
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[(col, col)].norm();
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best < 1e-300 {
                return Err(SimError::Numerical(format!(
                    "singular matrix in solve (pivot {col})"
                )));
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(pivot, j)];
                    a[(pivot, j)] = tmp;
                }
                for j in 0..x.cols {
                    let tmp = x[(col, j)];
                    x[(col, j)] = x[(pivot, j)];
                    x[(pivot, j)] = tmp;
                }
            }
            let inv = Complex64::new(1.0, 0.0) / a[(col, col)];
            for r in col + 1..n {
                let factor = a[(r, col)] * inv;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= factor * v;
                }
                for j in 0..x.cols {
                    let v = x[(col, j)];
                    x[(r, j)] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = Complex64::new(1.0, 0.0) / a[(col, col)];
            for j in 0..x.cols {
                let mut acc = x[(col, j)];
                for k in col + 1..n {
                    acc -= a[(col, k)] * x[(k, j)];
                }
                x[(col, j)] = acc * inv;
            }
        }
        Ok(x)
    }

    /// Inverse of a square matrix.
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let i = ComplexMatrix::identity(2);
        assert_eq!(&a * &i, a);
    }

    #[test]
    fn hermitian_conjugates() {
        let a = ComplexMatrix::from_entries(
            1,
            2,
            vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, -4.0)],
        );
        let ah = a.hermitian();
        assert_eq!(ah.rows(), 2);
        assert_eq!(ah[(0, 0)], Complex64::new(1.0, -2.0));
        assert_eq!(ah[(1, 0)], Complex64::new(3.0, 4.0));
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = ComplexMatrix::from_real(2, 2, &[4.0, 1.0, 2.0, 3.0]);
        let b = ComplexMatrix::from_real(2, 1, &[1.0, 2.0]);
        let x = a.solve(&b).unwrap();
        let back = &a * &x;
        assert!((&back - &b).frobenius_norm() < 1e-12);
    }

    #[test]
    fn singular_solve_errors() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = ComplexMatrix::from_real(2, 1, &[1.0, 1.0]);
        assert!(a.solve(&b).is_err());
    }

    #[test]
    fn diag_rect_shape() {
        let d = ComplexMatrix::diag_rect(2, 4, &[1.0, 2.0]);
        assert_eq!(d[(0, 0)].re, 1.0);
        assert_eq!(d[(1, 1)].re, 2.0);
        assert_eq!(d[(1, 3)].re, 0.0);
    }
}
