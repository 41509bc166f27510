//! Howell and Smith normal forms over `Z/n`, computed directly in the residue
//! ring. Gaussian elimination breaks down when `Z/n` has zero divisors; the
//! Howell form keeps a canonical generating set for a row module anyway, and
//! the Smith form exposes the cyclic decomposition of a presented module.

use serde::Serialize;

use crate::error::{shape, Result};
use crate::matrix::Matrix;
use crate::ring::{egcd, ZMod};

type Row = Vec<u32>;

struct RowOps {
    ring: ZMod,
}

impl RowOps {
    /// `target -= q * source`.
    fn axpy(&self, target: &mut [u32], source: &[u32], q: u32) {
        if q == 0 {
            return;
        }
        for (t, &s) in target.iter_mut().zip(source) {
            *t = self.ring.sub(*t, self.ring.mul(q, s));
        }
    }

    fn scale(&self, row: &mut [u32], c: u32) {
        for x in row.iter_mut() {
            *x = self.ring.mul(*x, c);
        }
    }

    /// Replace `(a, b)` by `(s*a + t*b, u*a + v*b)` entrywise.
    fn combine(&self, a: &mut [u32], b: &mut [u32], m: [[i64; 2]; 2]) {
        let r = &self.ring;
        for (x, y) in a.iter_mut().zip(b.iter_mut()) {
            let (xi, yi) = (*x as i64, *y as i64);
            *x = r.reduce(m[0][0] * xi + m[0][1] * yi);
            *y = r.reduce(m[1][0] * xi + m[1][1] * yi);
        }
    }
}

/// Unimodular 2x2 transform `[[s, t], [u, v]]` sending `(a, b)` to `(g, 0)`.
fn gcd_transform(a: u32, b: u32) -> [[i64; 2]; 2] {
    let (a, b) = (a as i64, b as i64);
    if a != 0 && b % a == 0 {
        return [[1, 0], [-(b / a), 1]];
    }
    let (g, s, t) = egcd(a, b);
    [[s, t], [-(b / g), a / g]]
}

/// Canonical Howell form of the row module of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    /// Rows of the Howell form; no zero rows.
    pub form: Matrix,
    /// `form = transform * input`.
    pub transform: Matrix,
    pub pivots: Vec<Pivot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pivot {
    pub row: usize,
    pub col: usize,
    /// Leading entry; always a divisor of n.
    pub value: u32,
}

impl HowellForm {
    /// Number of elements of the row module.
    pub fn module_order(&self) -> u128 {
        let n = self.form.modulus() as u128;
        self.pivots.iter().map(|p| n / p.value as u128).product()
    }

    /// Every element of the row module, each exactly once. Elements are the
    /// combinations `sum c_i h_i` with `0 <= c_i < n / pivot_i`.
    pub fn elements(&self) -> Vec<Row> {
        let ring = self.form.ring();
        let n = ring.modulus();
        let width = self.form.cols();
        let radices: Vec<u32> = self.pivots.iter().map(|p| n / p.value).collect();
        let mut out = Vec::with_capacity(self.module_order() as usize);
        let mut coeffs = vec![0u32; radices.len()];
        let mut current = vec![0u32; width];
        loop {
            out.push(current.clone());
            // Odometer step, updating `current` incrementally.
            let mut i = radices.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                let row = self.form.row(i);
                if coeffs[i] + 1 < radices[i] {
                    coeffs[i] += 1;
                    for (c, &h) in current.iter_mut().zip(row) {
                        *c = ring.add(*c, h);
                    }
                    break;
                }
                // wrap this digit back to zero
                let back = ring.mul(coeffs[i], 1);
                for (c, &h) in current.iter_mut().zip(row) {
                    *c = ring.sub(*c, ring.mul(back, h));
                }
                coeffs[i] = 0;
            }
        }
    }

    /// Membership test for the row module via greedy reduction.
    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Reduces `v` against the form. The remainder is zero iff `v` is in the
    /// row module.
    pub fn reduce(&self, v: &[u32]) -> Row {
        let ring = self.form.ring();
        let ops = RowOps { ring };
        let mut t = v.to_vec();
        for p in &self.pivots {
            let entry = t[p.col];
            if entry.is_multiple_of(p.value) {
                ops.axpy(&mut t, self.form.row(p.row), entry / p.value);
            }
        }
        t
    }
}

/// Computes the Howell form of the row module of `m`.
pub fn howell_form(m: &Matrix) -> HowellForm {
    let ring = m.ring();
    let n = ring.modulus();
    let ops = RowOps { ring };
    let width = m.cols();
    let mut rows: Vec<Row> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let mut trans: Vec<Row> = (0..m.rows())
        .map(|i| {
            let mut e = vec![0; m.rows()];
            e[i] = 1;
            e
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for j in 0..width {
        for i in (r + 1)..rows.len() {
            if rows[i][j] == 0 {
                continue;
            }
            if r >= rows.len() {
                break;
            }
            let tf = gcd_transform(rows[r][j], rows[i][j]);
            let (head, tail) = rows.split_at_mut(i);
            ops.combine(&mut head[r], &mut tail[0], tf);
            let (th, tt) = trans.split_at_mut(i);
            ops.combine(&mut th[r], &mut tt[0], tf);
        }
        if r >= rows.len() || rows[r][j] == 0 {
            continue;
        }
        let u = ring.unit_normalizer(rows[r][j]);
        ops.scale(&mut rows[r], u);
        ops.scale(&mut trans[r], u);
        let p = rows[r][j];
        for i in 0..r {
            let q = rows[i][j] / p;
            if q != 0 {
                let (head, tail) = rows.split_at_mut(r);
                ops.axpy(&mut head[i], &tail[0], q);
                let (th, tt) = trans.split_at_mut(r);
                ops.axpy(&mut th[i], &tt[0], q);
            }
        }
        let ann = n / p;
        if ann != n && p != 1 {
            let mut extra = rows[r].clone();
            ops.scale(&mut extra, ann);
            let mut extra_t = trans[r].clone();
            ops.scale(&mut extra_t, ann);
            if extra.iter().any(|&x| x != 0) {
                rows.push(extra);
                trans.push(extra_t);
            }
        }
        pivots.push(Pivot { row: r, col: j, value: p });
        r += 1;
    }
    let form_data: Vec<u32> = rows[..r].iter().flatten().copied().collect();
    let trans_data: Vec<u32> = trans[..r].iter().flatten().copied().collect();
    HowellForm {
        form: Matrix::from_residues(ring, r, width, &form_data),
        transform: Matrix::from_residues(ring, r, m.rows(), &trans_data),
        pivots,
    }
}

/// A prepared solver for `M x = b` over `Z/n`.
///
/// Built from the Howell form of `[M^T | I]`: rows whose pivot lies in the
/// left block give a Howell basis of the row module of `M^T`, rows whose pivot
/// lies in the right block generate the solution module of `M x = 0`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    matrix: Matrix,
    howell: HowellForm,
}

/// Result of [`solve_linear`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub particular: Option<Vec<u32>>,
    /// Generators of `{x : M x = 0}`.
    pub nullspace: Vec<Vec<u32>>,
}

impl LinearSystem {
    pub fn new(matrix: &Matrix) -> Self {
        let ring = matrix.ring();
        let aug = matrix
            .transpose()
            .hstack(&Matrix::identity(ring, matrix.cols()))
            .expect("shapes agree by construction");
        LinearSystem { matrix: matrix.clone(), howell: howell_form(&aug) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn solve(&self, b: &[u32]) -> Result<Option<Vec<u32>>> {
        let m = self.matrix.rows();
        let k = self.matrix.cols();
        if b.len() != m {
            return Err(shape("solve_linear", format!("right-hand side of length {} for {m} equations", b.len())));
        }
        let ring = self.matrix.ring();
        let ops = RowOps { ring };
        let mut target = vec![0u32; m + k];
        for (t, &x) in target.iter_mut().zip(b) {
            *t = x % ring.modulus();
        }
        for p in self.howell.pivots.iter().filter(|p| p.col < m) {
            let entry = target[p.col];
            if !entry.is_multiple_of(p.value) {
                return Ok(None);
            }
            ops.axpy(&mut target, self.howell.form.row(p.row), entry / p.value);
        }
        if target[..m].iter().any(|&x| x != 0) {
            return Ok(None);
        }
        Ok(Some(target[m..].iter().map(|&x| ring.neg(x)).collect()))
    }

    pub fn nullspace(&self) -> Vec<Vec<u32>> {
        let m = self.matrix.rows();
        self.howell
            .pivots
            .iter()
            .filter(|p| p.col >= m)
            .map(|p| self.howell.form.row(p.row)[m..].to_vec())
            .collect()
    }

    /// Howell form of the solution module of `M x = 0` (rows are solutions).
    pub fn nullspace_howell(&self) -> HowellForm {
        let ring = self.matrix.ring();
        let k = self.matrix.cols();
        let gens = self.nullspace();
        let data: Vec<u32> = gens.iter().flatten().copied().collect();
        howell_form(&Matrix::from_residues(ring, gens.len(), k, &data))
    }
}

/// Solves `M x = b`, returning one solution (if any) and generators of the
/// homogeneous solution module.
pub fn solve_linear(m: &Matrix, b: &[u32]) -> Result<LinearSolution> {
    let sys = LinearSystem::new(m);
    let particular = sys.solve(b)?;
    Ok(LinearSolution { particular, nullspace: sys.nullspace() })
}

/// Smith form `left * M * right = diag(d_1, ..., d_r)` with `d_i | d_{i+1}`,
/// each `d_i` a divisor of n (stored as `0` for the zero ideal).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diag: Vec<u32>,
    pub left: Matrix,
    pub left_inv: Matrix,
    pub right: Matrix,
    pub right_inv: Matrix,
}

impl SmithForm {
    /// Every invariant factor is 1 or 0, i.e. the matrix is equivalent to
    /// `[I 0; 0 0]`.
    pub fn is_unimodular_type(&self) -> bool {
        self.diag.iter().all(|&d| d == 0 || d == 1)
    }

    pub fn rank_of_units(&self) -> usize {
        self.diag.iter().filter(|&&d| d == 1).count()
    }
}

struct Dense {
    ring: ZMod,
    rows: usize,
    cols: usize,
    a: Vec<Row>,
}

impl Dense {
    fn from(m: &Matrix) -> Self {
        Dense { ring: m.ring(), rows: m.rows(), cols: m.cols(), a: (0..m.rows()).map(|i| m.row(i).to_vec()).collect() }
    }

    fn identity(ring: ZMod, k: usize) -> Self {
        Dense::from(&Matrix::identity(ring, k))
    }

    fn to_matrix(&self) -> Matrix {
        let data: Vec<u32> = self.a.iter().flatten().copied().collect();
        Matrix::from_residues(self.ring, self.rows, self.cols, &data)
    }

    fn row_combine(&mut self, i: usize, j: usize, m: [[i64; 2]; 2]) {
        let ops = RowOps { ring: self.ring };
        let (lo, hi) = (i.min(j), i.max(j));
        let (head, tail) = self.a.split_at_mut(hi);
        if i < j {
            ops.combine(&mut head[lo], &mut tail[0], m);
        } else {
            // rows given in swapped order: conjugate the transform
            ops.combine(&mut tail[0], &mut head[lo], m);
        }
    }

    fn col_combine(&mut self, i: usize, j: usize, m: [[i64; 2]; 2]) {
        let r = self.ring;
        for row in self.a.iter_mut() {
            let (x, y) = (row[i] as i64, row[j] as i64);
            row[i] = r.reduce(m[0][0] * x + m[0][1] * y);
            row[j] = r.reduce(m[1][0] * x + m[1][1] * y);
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
    }

    fn scale_row(&mut self, i: usize, c: u32) {
        RowOps { ring: self.ring }.scale(&mut self.a[i], c);
    }

    fn scale_col(&mut self, j: usize, c: u32) {
        for row in self.a.iter_mut() {
            row[j] = self.ring.mul(row[j], c);
        }
    }
}

fn inverse_2x2(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    // all transforms used have determinant 1
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

/// Computes the Smith form of `m` together with unimodular transforms.
pub fn smith_form(m: &Matrix) -> SmithForm {
    let ring = m.ring();
    let n = ring.modulus();
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = Dense::from(m);
    let mut left = Dense::identity(ring, rows);
    let mut left_inv = Dense::identity(ring, rows);
    let mut right = Dense::identity(ring, cols);
    let mut right_inv = Dense::identity(ring, cols);
    let r = rows.min(cols);
    let mut diag = vec![0u32; r];

    // Row op E on rows (t, i): A <- E A, left <- E left, left_inv <- left_inv E^-1.
    // Column op F on cols (t, j) given as the 2x2 acting on (col_t, col_j):
    // A <- A F, right <- right F, right_inv <- F^-1 right_inv.
    for t in 0..r {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = a.a[i][j];
                if x != 0 {
                    let g = ring.ideal_generator(x);
                    if best.is_none_or(|(bg, _, _)| g < bg) {
                        best = Some((g, i, j));
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        if pi != t {
            a.swap_rows(t, pi);
            left.swap_rows(t, pi);
            left_inv.swap_cols(t, pi);
        }
        if pj != t {
            a.swap_cols(t, pj);
            right.swap_cols(t, pj);
            right_inv.swap_rows(t, pj);
        }
        loop {
            for i in (t + 1)..rows {
                let (x, y) = (a.a[t][t], a.a[i][t]);
                if y == 0 {
                    continue;
                }
                let e = gcd_transform(x, y);
                a.row_combine(t, i, e);
                left.row_combine(t, i, e);
                // left_inv <- left_inv E^-1 acts on columns (t, i) with the transpose
                let ei = inverse_2x2(e);
                left_inv.col_combine(t, i, [[ei[0][0], ei[1][0]], [ei[0][1], ei[1][1]]]);
            }
            for j in (t + 1)..cols {
                let (x, y) = (a.a[t][t], a.a[t][j]);
                if y == 0 {
                    continue;
                }
                // new col_t = s col_t + tt col_j ; new col_j = u col_t + v col_j
                let e = gcd_transform(x, y);
                a.col_combine(t, j, e);
                right.col_combine(t, j, e);
                // right_inv <- F^-1 right_inv where F has columns (s, tt), (u, v)
                // as a matrix acting on the right: F = [[s, u], [tt, v]].
                let f = [[e[0][0], e[1][0]], [e[0][1], e[1][1]]];
                let fi = inverse_2x2(f);
                right_inv.row_combine(t, j, fi);
            }
            if ((t + 1)..rows).any(|i| a.a[i][t] != 0) {
                continue;
            }
            let unit = ring.unit_normalizer(a.a[t][t]);
            if unit != 1 {
                a.scale_row(t, unit);
                left.scale_row(t, unit);
                left_inv.scale_col(t, ring.inverse(unit).expect("normalizer is a unit"));
            }
            let p = a.a[t][t];
            let offender = ((t + 1)..rows).find(|&i| ((t + 1)..cols).any(|j| !a.a[i][j].is_multiple_of(p)));
            match offender {
                Some(i) => {
                    let e = [[1, 1], [0, 1]];
                    a.row_combine(t, i, e);
                    left.row_combine(t, i, e);
                    let ei = inverse_2x2(e);
                    left_inv.col_combine(t, i, [[ei[0][0], ei[1][0]], [ei[0][1], ei[1][1]]]);
                }
                None => break,
            }
        }
        diag[t] = a.a[t][t] % n;
    }
    SmithForm {
        diag,
        left: left.to_matrix(),
        left_inv: left_inv.to_matrix(),
        right: right.to_matrix(),
        right_inv: right_inv.to_matrix(),
    }
}

/// Cyclic decomposition of the module `R^cols / rowspan(M)` presented by `M`
/// (relations are rows, generators are columns).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleInvariants {
    pub modulus: u32,
    /// Annihilator generators of the nontrivial cyclic factors `R/aR`, in
    /// divisibility order; `0` marks a free factor.
    pub factors: Vec<u32>,
}

impl ModuleInvariants {
    pub fn is_free(&self) -> bool {
        self.factors.iter().all(|&a| a == 0)
    }

    pub fn free_rank(&self) -> Option<usize> {
        self.is_free().then_some(self.factors.len())
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of elements of the module.
    pub fn order(&self) -> u128 {
        let n = self.modulus as u128;
        self.factors.iter().map(|&a| if a == 0 { n } else { a as u128 }).product()
    }
}

pub fn module_invariants(m: &Matrix) -> ModuleInvariants {
    let snf = smith_form(m);
    let mut factors: Vec<u32> = snf.diag.iter().copied().filter(|&d| d != 1).collect();
    factors.extend(std::iter::repeat_n(0, m.cols().saturating_sub(m.rows())));
    // zeros belong at the end of the divisibility chain
    factors.sort_by_key(|&d| if d == 0 { u32::MAX } else { d });
    ModuleInvariants { modulus: m.modulus(), factors }
}
