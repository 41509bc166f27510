//! Free abelian groups of finite rank. Hom-sets are infinite, so the instance
//! is not enumerable; it supports kernels (always free over the integers) and
//! factorisation through them by integral column elimination.

use serde::Serialize;

use crate::category::{AdditiveCategory, BiproductCert};
use crate::error::{shape, CategoryError, Result};
use crate::ring::egcd;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.data[i * k + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        IntMatrix { rows: rows.len(), cols, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(shape("IntMatrix::mul", format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let acc: i128 = (0..self.cols).map(|k| self.get(i, k) as i128 * rhs.get(k, j) as i128).sum();
                out.set(i, j, i64::try_from(acc).map_err(|_| overflow())?);
            }
        }
        Ok(out)
    }

    fn select_cols(&self, idx: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Column operation `(col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)`.
    fn combine_cols(&mut self, i: usize, j: usize, m: [[i64; 2]; 2]) {
        for r in 0..self.rows {
            let (x, y) = (self.get(r, i), self.get(r, j));
            self.set(r, i, m[0][0] * x + m[0][1] * y);
            self.set(r, j, m[1][0] * x + m[1][1] * y);
        }
    }
}

fn overflow() -> CategoryError {
    CategoryError::Unsupported("integer entries beyond 64 bits".into())
}

/// Column echelon form `A V = E`; returns `(E, V, rank, pivot_rows)`.
fn column_echelon(a: &IntMatrix) -> (IntMatrix, IntMatrix, usize, Vec<usize>) {
    let mut e = a.clone();
    let mut v = IntMatrix::identity(a.cols);
    let mut col = 0;
    let mut pivots = Vec::new();
    for row in 0..a.rows {
        if col == a.cols {
            break;
        }
        for j in (col + 1)..a.cols {
            let (x, y) = (e.get(row, col), e.get(row, j));
            if y == 0 {
                continue;
            }
            let (g, s, t) = egcd(x, y);
            let m = [[s, t], [-(y / g), x / g]];
            e.combine_cols(col, j, m);
            v.combine_cols(col, j, m);
        }
        if e.get(row, col) != 0 {
            pivots.push(row);
            col += 1;
        }
    }
    (e, v, col, pivots)
}

/// Solves `A x = b` over the integers.
fn solve_integral(a: &IntMatrix, b: &[i64]) -> Option<Vec<i64>> {
    let (e, v, rank, pivots) = column_echelon(a);
    let mut y = vec![0i64; a.cols];
    for (j, &r) in pivots.iter().enumerate() {
        let partial: i64 = (0..j).map(|l| e.get(r, l) * y[l]).sum();
        let rest = b[r] - partial;
        let p = e.get(r, j);
        if rest % p != 0 {
            return None;
        }
        y[j] = rest / p;
    }
    let consistent = (0..a.rows).all(|i| (0..rank).map(|l| e.get(i, l) * y[l]).sum::<i64>() == b[i]);
    consistent.then(|| (0..a.cols).map(|i| (0..a.cols).map(|l| v.get(i, l) * y[l]).sum()).collect())
}

/// Free abelian groups `Z^r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntegerFreeModules;

impl AdditiveCategory for IntegerFreeModules {
    type Obj = usize;
    type Mor = IntMatrix;

    fn descriptor(&self) -> String {
        "integers".into()
    }

    fn dom(&self, f: &IntMatrix) -> usize {
        f.cols
    }

    fn cod(&self, f: &IntMatrix) -> usize {
        f.rows
    }

    fn zero_object(&self) -> usize {
        0
    }

    fn identity(&self, a: &usize) -> IntMatrix {
        IntMatrix::identity(*a)
    }

    fn zero_mor(&self, a: &usize, b: &usize) -> IntMatrix {
        IntMatrix::zeros(*b, *a)
    }

    fn compose(&self, g: &IntMatrix, f: &IntMatrix) -> Result<IntMatrix> {
        g.mul(f)
    }

    fn add(&self, f: &IntMatrix, g: &IntMatrix) -> Result<IntMatrix> {
        if f.rows != g.rows || f.cols != g.cols {
            return Err(shape("IntMatrix::add", "different shapes"));
        }
        let data = f.data.iter().zip(&g.data).map(|(a, b)| a.checked_add(*b).ok_or_else(overflow)).collect::<Result<_>>()?;
        Ok(IntMatrix { rows: f.rows, cols: f.cols, data })
    }

    fn negate(&self, f: &IntMatrix) -> IntMatrix {
        IntMatrix { rows: f.rows, cols: f.cols, data: f.data.iter().map(|x| -x).collect() }
    }

    fn biproduct(&self, a: &usize, b: &usize) -> Result<BiproductCert<Self>> {
        let s = a + b;
        let mut p1 = IntMatrix::zeros(*a, s);
        let mut p2 = IntMatrix::zeros(*b, s);
        for i in 0..*a {
            p1.set(i, i, 1);
        }
        for i in 0..*b {
            p2.set(i, a + i, 1);
        }
        let t = |m: &IntMatrix| {
            let mut out = IntMatrix::zeros(m.cols, m.rows);
            for i in 0..m.rows {
                for j in 0..m.cols {
                    out.set(j, i, m.get(i, j));
                }
            }
            out
        };
        Ok(BiproductCert { sum: s, inj1: t(&p1), inj2: t(&p2), proj1: p1, proj2: p2 })
    }

    fn object_size(&self, a: &usize) -> usize {
        *a
    }

    fn enumerate_objects(&self, _bound: usize) -> Result<Vec<usize>> {
        Err(CategoryError::NonEnumerable(self.descriptor()))
    }

    fn enumerate_homs(&self, _a: &usize, _b: &usize) -> Result<Vec<IntMatrix>> {
        Err(CategoryError::NonEnumerable(self.descriptor()))
    }

    fn hom_count(&self, _a: &usize, _b: &usize) -> Result<u128> {
        Err(CategoryError::NonEnumerable(self.descriptor()))
    }

    fn kernel_object(&self, f: &IntMatrix) -> Result<Option<(usize, IntMatrix)>> {
        let (_, v, rank, _) = column_echelon(f);
        let idx: Vec<usize> = (rank..f.cols).collect();
        Ok(Some((idx.len(), v.select_cols(&idx))))
    }

    fn cokernel_object(&self, _f: &IntMatrix) -> Result<Option<(usize, IntMatrix)>> {
        Err(CategoryError::Unsupported("cokernels of integer matrices".into()))
    }

    /// Zigzag encoding of the entries; injective, used only for hashing.
    fn payload(&self, f: &IntMatrix) -> Vec<u32> {
        f.data.iter().map(|&x| ((x << 1) ^ (x >> 63)) as u32).collect()
    }

    fn from_payload(&self, a: &usize, b: &usize, x: &[u32]) -> IntMatrix {
        let data = x.iter().map(|&z| ((z >> 1) as i64) ^ -((z & 1) as i64)).collect();
        IntMatrix { rows: *b, cols: *a, data }
    }

    fn is_morphism(&self, _f: &IntMatrix) -> Result<bool> {
        Ok(true)
    }

    fn is_zero(&self, f: &IntMatrix) -> bool {
        f.data.iter().all(|&x| x == 0)
    }

    fn lift(&self, k: &IntMatrix, t: &IntMatrix) -> Result<Option<IntMatrix>> {
        if k.rows != t.rows {
            return Err(shape("lift", "row counts differ"));
        }
        let mut u = IntMatrix::zeros(k.cols, t.cols);
        for j in 0..t.cols {
            let b: Vec<i64> = (0..t.rows).map(|i| t.get(i, j)).collect();
            let Some(x) = solve_integral(k, &b) else { return Ok(None) };
            for (i, v) in x.into_iter().enumerate() {
                u.set(i, j, v);
            }
        }
        Ok(Some(u))
    }

    fn extend(&self, _c: &IntMatrix, _t: &IntMatrix) -> Result<Option<IntMatrix>> {
        Err(CategoryError::Unsupported("cokernel factorisation over the integers".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_two_by_three() {
        let z = IntegerFreeModules;
        let f = IntMatrix::from_rows(&[&[2, 4, 6], &[1, 1, 1]]);
        let (k, inc) = z.kernel_object(&f).unwrap().unwrap();
        assert_eq!(k, 1);
        assert!(z.is_zero(&f.mul(&inc).unwrap()));
        // (1, -2, 1) generates the kernel, so it lifts integrally
        let t = IntMatrix::from_rows(&[&[3], &[-6], &[3]]);
        let u = z.lift(&inc, &t).unwrap().unwrap();
        assert_eq!(inc.mul(&u).unwrap(), t);
        let half = IntMatrix::from_rows(&[&[1], &[0], &[0]]);
        assert!(z.lift(&inc, &half).unwrap().is_none());
    }

    #[test]
    fn not_enumerable() {
        assert!(matches!(IntegerFreeModules.enumerate_objects(1), Err(CategoryError::NonEnumerable(_))));
    }

    #[test]
    fn payload_round_trip() {
        let z = IntegerFreeModules;
        let f = IntMatrix::from_rows(&[&[-3, 0, 7]]);
        assert_eq!(z.from_payload(&3, &1, &z.payload(&f)), f);
    }
}
