//! Dense matrices over `Z/n` together with the normal forms the rest of the
//! crate is built on: Howell form (canonical row modules), linear solving with
//! nullspace generators, and Smith form (module invariants).
//!
//! Vectors act as columns: a `rows x cols` matrix maps `R^cols -> R^rows`.
//! Matrices with zero rows or zero columns are ordinary values.

use std::fmt;

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{shape, Result};
use crate::ring::ZMod;

type Entries = SmallVec<[u32; 16]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Matrix {
    #[serde(skip)]
    modulus: u32,
    rows: usize,
    cols: usize,
    data: Entries,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]{}x{}", self.rows, self.cols)
    }
}

impl Matrix {
    pub fn zeros(ring: ZMod, rows: usize, cols: usize) -> Self {
        let mut data = Entries::new();
        data.resize(rows * cols, 0);
        Matrix { modulus: ring.modulus(), rows, cols, data }
    }

    pub fn identity(ring: ZMod, size: usize) -> Self {
        let mut m = Self::zeros(ring, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major entries, reducing each into `[0, n)`.
    pub fn from_vec(ring: ZMod, rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(shape(
                "Matrix::from_vec",
                format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            ));
        }
        let data = entries.into_iter().map(|x| ring.reduce(x)).collect();
        Ok(Matrix { modulus: ring.modulus(), rows, cols, data })
    }

    pub fn from_rows(ring: ZMod, rows: &[&[i64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(shape("Matrix::from_rows", "ragged rows"));
        }
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(ring, rows.len(), cols, entries)
    }

    pub(crate) fn from_residues(ring: ZMod, rows: usize, cols: usize, data: &[u32]) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { modulus: ring.modulus(), rows, cols, data: data.iter().copied().collect() }
    }

    pub fn column(ring: ZMod, entries: &[u32]) -> Self {
        Self::from_residues(ring, entries.len(), 1, entries)
    }

    pub fn ring(&self) -> ZMod {
        ZMod::new(self.modulus).expect("matrix modulus is valid")
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.modulus;
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_ring(&self, other: &Matrix, op: &'static str) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(shape(op, format!("moduli {} and {}", self.modulus, other.modulus)));
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_ring(rhs, "Matrix::mul")?;
        if self.cols != rhs.rows {
            return Err(shape(
                "Matrix::mul",
                format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        Ok(self.mul_unchecked(rhs))
    }

    pub(crate) fn mul_unchecked(&self, rhs: &Matrix) -> Matrix {
        let n = self.modulus as u64;
        let mut data = Entries::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for (k, &a) in row.iter().enumerate() {
                    if a != 0 {
                        acc += a as u64 * rhs.data[k * rhs.cols + j] as u64;
                    }
                }
                data.push((acc % n) as u32);
            }
        }
        Matrix { modulus: self.modulus, rows: self.rows, cols: rhs.cols, data }
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_ring(rhs, "Matrix::add")?;
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(shape(
                "Matrix::add",
                format!("{}x{} plus {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        let n = self.modulus;
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| (a + b) % n).collect();
        Ok(self.with_data(data))
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Matrix {
        let n = self.modulus;
        let data = self.data.iter().map(|&a| if a == 0 { 0 } else { n - a }).collect();
        self.with_data(data)
    }

    pub fn scale(&self, c: u32) -> Matrix {
        let n = self.modulus as u64;
        let data = self.data.iter().map(|&a| ((a as u64 * c as u64) % n) as u32).collect();
        self.with_data(data)
    }

    fn with_data(&self, data: Entries) -> Matrix {
        Matrix { modulus: self.modulus, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Entries::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Matrix { modulus: self.modulus, rows: self.cols, cols: self.rows, data }
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_ring(rhs, "Matrix::hstack")?;
        if self.rows != rhs.rows {
            return Err(shape("Matrix::hstack", format!("{} rows vs {} rows", self.rows, rhs.rows)));
        }
        let mut data = Entries::with_capacity(self.rows * (self.cols + rhs.cols));
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(rhs.row(i));
        }
        Ok(Matrix { modulus: self.modulus, rows: self.rows, cols: self.cols + rhs.cols, data })
    }

    /// `[self ; rhs]`.
    pub fn vstack(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_ring(rhs, "Matrix::vstack")?;
        if self.cols != rhs.cols {
            return Err(shape("Matrix::vstack", format!("{} cols vs {} cols", self.cols, rhs.cols)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Matrix { modulus: self.modulus, rows: self.rows + rhs.rows, cols: self.cols, data })
    }

    /// Block diagonal `diag(self, rhs)`.
    pub fn block_diag(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_ring(rhs, "Matrix::block_diag")?;
        let ring = self.ring();
        let top = self.hstack(&Matrix::zeros(ring, self.rows, rhs.cols))?;
        let bottom = Matrix::zeros(ring, rhs.rows, self.cols).hstack(rhs)?;
        top.vstack(&bottom)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Entries::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { modulus: self.modulus, rows: idx.len(), cols: self.cols, data }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut data = Entries::with_capacity(idx.len() * self.rows);
        for i in 0..self.rows {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Matrix { modulus: self.modulus, rows: self.rows, cols: idx.len(), data }
    }

    /// The submatrix of rows `r0..r1` and columns `c0..c1`.
    pub fn slice(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        let rows: Vec<usize> = (r0..r1).collect();
        let cols: Vec<usize> = (c0..c1).collect();
        self.select_rows(&rows).select_cols(&cols)
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        debug_assert_eq!(v.len(), self.cols);
        let n = self.modulus as u64;
        (0..self.rows)
            .map(|i| {
                let acc: u64 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
                (acc % n) as u32
            })
            .collect()
    }

    /// Lists every `rows x cols` matrix over the ring, in lexicographic order
    /// of the row-major entries.
    pub fn all(ring: ZMod, rows: usize, cols: usize) -> impl Iterator<Item = Matrix> {
        let len = rows * cols;
        let n = ring.modulus();
        let total = (n as u128).pow(len as u32);
        (0..total).map(move |mut code| {
            let mut data = Entries::with_capacity(len);
            data.resize(len, 0);
            for slot in data.iter_mut().rev() {
                *slot = (code % n as u128) as u32;
                code /= n as u128;
            }
            Matrix { modulus: n, rows, cols, data }
        })
    }

    pub fn hom_count(ring: ZMod, rows: usize, cols: usize) -> u128 {
        (ring.modulus() as u128).checked_pow((rows * cols) as u32).unwrap_or(u128::MAX)
    }
}
