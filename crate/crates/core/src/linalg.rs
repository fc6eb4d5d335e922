//! Minimal dense linear algebra: row-major matrices and vectors over `f64`.
//!
//! Shapes are validated eagerly on every operation and no NaN/Inf may enter
//! or leave a value. Values are immutable after construction, so they can be
//! shared freely across threads.

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build a matrix from row-major data. Fails on length mismatch or
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        check_finite(&data, "matrix entry")?;
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape(format!(
                    "ragged rows: expected {} columns, found {}",
                    c,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Sum of squared entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}

/// Dense vector of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        check_finite(&data, "vector entry")?;
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest absolute entry (0 for the empty vector).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Standard matrix product. Requires `a.cols == b.rows`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "matmul {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut data = vec![0.0; a.rows * b.cols];
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..b.cols {
                data[i * b.cols + j] += aik * b.data[k * b.cols + j];
            }
        }
    }
    check_finite(&data, "matmul result")?;
    Ok(Matrix {
        rows: a.rows,
        cols: b.cols,
        data,
    })
}

/// Matrix-vector product.
pub fn matvec(a: &Matrix, x: &Vector) -> Result<Vector> {
    if a.cols != x.len() {
        return Err(Error::Shape(format!(
            "matvec {}x{} by vector of length {}",
            a.rows,
            a.cols,
            x.len()
        )));
    }
    let data: Vec<f64> = a
        .data
        .chunks_exact(a.cols)
        .map(|row| row.iter().zip(&x.data).map(|(a, b)| a * b).sum())
        .collect();
    check_finite(&data, "matvec result")?;
    Ok(Vector { data })
}

/// `alpha * x + y`, elementwise. Shapes must match.
pub fn axpy(alpha: f64, x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.rows != y.rows || x.cols != y.cols {
        return Err(Error::Shape(format!(
            "axpy {}x{} vs {}x{}",
            x.rows, x.cols, y.rows, y.cols
        )));
    }
    let data: Vec<f64> = x
        .data
        .iter()
        .zip(&y.data)
        .map(|(xv, yv)| alpha * xv + yv)
        .collect();
    check_finite(&data, "axpy result")?;
    Ok(Matrix {
        rows: x.rows,
        cols: x.cols,
        data,
    })
}

/// Vector form of [`axpy`].
pub fn axpy_vec(alpha: f64, x: &Vector, y: &Vector) -> Result<Vector> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "axpy_vec lengths {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let data: Vec<f64> = x
        .data
        .iter()
        .zip(&y.data)
        .map(|(xv, yv)| alpha * xv + yv)
        .collect();
    check_finite(&data, "axpy_vec result")?;
    Ok(Vector { data })
}

/// Sum of squared entries of a matrix (free-function form).
pub fn frobenius_sq(x: &Matrix) -> f64 {
    x.frobenius_sq()
}

/// Outer product `u vᵀ` (rows = len(u), cols = len(v)).
pub fn outer(u: &Vector, v: &Vector) -> Result<Matrix> {
    let mut data = vec![0.0; u.len() * v.len()];
    for (i, uv) in u.data.iter().enumerate() {
        for (j, vv) in v.data.iter().enumerate() {
            data[i * v.len() + j] = uv * vv;
        }
    }
    check_finite(&data, "outer result")?;
    Ok(Matrix {
        rows: u.len(),
        cols: v.len(),
        data,
    })
}

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("{what} at index {i}"))),
        None => Ok(()),
    }
}
