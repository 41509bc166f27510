//! Finitely generated free modules over `Z/n`, presented skeletally: an
//! object is a rank, a morphism `R^c -> R^r` is an `r x c` matrix.
//!
//! A categorical kernel exists iff the module-theoretic kernel is free, which
//! happens iff every Smith invariant of the matrix is 0 or 1. The same
//! condition governs cokernels, so every kernel-cokernel pair here splits.

use std::sync::Arc;

use crate::category::{check_size, AdditiveCategory, BiproductCert, Factorizer, HomFrame};
use crate::error::{shape, CategoryError, Result};
use crate::matrix::Matrix;
use crate::normal_form::{smith_form, LinearSystem, SmithForm};
use crate::ring::ZMod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FreeModules {
    ring: ZMod,
}

impl FreeModules {
    pub fn new(ring: ZMod) -> Self {
        FreeModules { ring }
    }

    pub fn over(n: u32) -> Result<Self> {
        Ok(FreeModules { ring: ZMod::new(n)? })
    }

    pub fn ring_spec(&self) -> ZMod {
        self.ring
    }

    pub fn matrix(&self, rows: &[&[i64]]) -> Result<Matrix> {
        Matrix::from_rows(self.ring, rows)
    }

    /// `1 x 1` matrix `[a]` on rank one.
    pub fn scalar(&self, a: i64) -> Matrix {
        Matrix::from_vec(self.ring, 1, 1, vec![a]).expect("1x1")
    }

    fn check(&self, f: &Matrix) -> Result<()> {
        if f.modulus() != self.ring.modulus() {
            return Err(CategoryError::InvalidMorphism(format!(
                "matrix over Z/{} used in Z/{}",
                f.modulus(),
                self.ring.modulus()
            )));
        }
        Ok(())
    }

    /// Columns of the right transform spanning the kernel, if it is free.
    fn kernel_from_smith(f: &Matrix, snf: &SmithForm) -> Option<Matrix> {
        if !snf.is_unimodular_type() {
            return None;
        }
        let r = snf.diag.len();
        let idx: Vec<usize> = (0..f.cols()).filter(|&i| i >= r || snf.diag[i] == 0).collect();
        Some(snf.right.select_cols(&idx))
    }

    fn cokernel_from_smith(f: &Matrix, snf: &SmithForm) -> Option<Matrix> {
        if !snf.is_unimodular_type() {
            return None;
        }
        let r = snf.diag.len();
        let idx: Vec<usize> = (0..f.rows()).filter(|&i| i >= r || snf.diag[i] == 0).collect();
        Some(snf.left.select_rows(&idx))
    }

    /// Idempotent `e` on `A` whose image is the submodule spanned by the
    /// columns of `gens`, if that submodule is a direct summand.
    pub fn summand_idempotent(&self, gens: &Matrix) -> Option<Matrix> {
        let a = gens.rows();
        let snf = smith_form(gens);
        let idempotents = self.ring.idempotents();
        let mut eps = Vec::with_capacity(a);
        for i in 0..a {
            let d = snf.diag.get(i).copied().unwrap_or(0);
            // 0 encodes the zero ideal, whose idempotent generator is 0
            let e = if d == 0 {
                0
            } else {
                *idempotents.iter().find(|&&e| e != 0 && self.ring.ideal_generator(e) == d)?
            };
            eps.push(e);
        }
        let mut diag = Matrix::zeros(self.ring, a, a);
        for (i, &e) in eps.iter().enumerate() {
            diag.set(i, i, e);
        }
        Some(snf.left_inv.mul_unchecked(&diag).mul_unchecked(&snf.left))
    }

    /// Generators of `{x in im p : f x = 0}`, as columns.
    fn restricted_kernel_generators(&self, f: &Matrix, p: &Matrix) -> Matrix {
        let a = p.rows();
        let one_minus_p = Matrix::identity(self.ring, a).sub(p).expect("square");
        let stacked = f.vstack(&one_minus_p).expect("same column count");
        let gens = LinearSystem::new(&stacked).nullspace();
        let data: Vec<u32> = gens.iter().flatten().copied().collect();
        Matrix::from_residues(self.ring, gens.len(), a, &data).transpose()
    }

    /// For `f: (A, p) -> (B, q)` in the idempotent completion, an idempotent
    /// `e` on `A` splitting off the kernel of `f`; `None` when that kernel is
    /// not a direct summand.
    pub fn completion_kernel_idempotent(&self, f: &Matrix, p: &Matrix) -> Option<Matrix> {
        let gens = self.restricted_kernel_generators(f, p);
        self.summand_idempotent(&gens)
    }

    /// Dual of [`Self::completion_kernel_idempotent`], via transposition.
    pub fn completion_cokernel_idempotent(&self, f: &Matrix, q: &Matrix) -> Option<Matrix> {
        self.completion_kernel_idempotent(&f.transpose(), &q.transpose()).map(|e| e.transpose())
    }
}

impl AdditiveCategory for FreeModules {
    type Obj = usize;
    type Mor = Matrix;

    fn descriptor(&self) -> String {
        format!("zmod:{}", self.ring.modulus())
    }

    fn dom(&self, f: &Matrix) -> usize {
        f.cols()
    }

    fn cod(&self, f: &Matrix) -> usize {
        f.rows()
    }

    fn zero_object(&self) -> usize {
        0
    }

    fn identity(&self, a: &usize) -> Matrix {
        Matrix::identity(self.ring, *a)
    }

    fn zero_mor(&self, a: &usize, b: &usize) -> Matrix {
        Matrix::zeros(self.ring, *b, *a)
    }

    fn compose(&self, g: &Matrix, f: &Matrix) -> Result<Matrix> {
        self.check(g)?;
        self.check(f)?;
        g.mul(f)
    }

    fn add(&self, f: &Matrix, g: &Matrix) -> Result<Matrix> {
        f.add(g)
    }

    fn negate(&self, f: &Matrix) -> Matrix {
        f.neg()
    }

    fn biproduct(&self, a: &usize, b: &usize) -> Result<BiproductCert<Self>> {
        let (a, b) = (*a, *b);
        let s = a + b;
        let id = Matrix::identity(self.ring, s);
        let proj1 = id.slice(0, a, 0, s);
        let proj2 = id.slice(a, s, 0, s);
        Ok(BiproductCert { sum: s, inj1: proj1.transpose(), inj2: proj2.transpose(), proj1, proj2 })
    }

    fn block_row(&self, f: &Matrix, g: &Matrix) -> Result<Matrix> {
        f.hstack(g)
    }

    fn block_col(&self, f: &Matrix, g: &Matrix) -> Result<Matrix> {
        f.vstack(g)
    }

    fn diag(&self, f: &Matrix, g: &Matrix) -> Result<Matrix> {
        f.block_diag(g)
    }

    fn enumerate_objects(&self, bound: usize) -> Result<Vec<usize>> {
        Ok((0..=bound).collect())
    }

    fn enumerate_homs(&self, a: &usize, b: &usize) -> Result<Vec<Matrix>> {
        check_size("hom-set", Matrix::hom_count(self.ring, *b, *a))?;
        Ok(Matrix::all(self.ring, *b, *a).collect())
    }

    fn hom_count(&self, a: &usize, b: &usize) -> Result<u128> {
        Ok(Matrix::hom_count(self.ring, *b, *a))
    }

    fn kernel_object(&self, f: &Matrix) -> Result<Option<(usize, Matrix)>> {
        self.check(f)?;
        let snf = smith_form(f);
        Ok(Self::kernel_from_smith(f, &snf).map(|k| (k.cols(), k)))
    }

    fn cokernel_object(&self, f: &Matrix) -> Result<Option<(usize, Matrix)>> {
        self.check(f)?;
        let snf = smith_form(f);
        Ok(Self::cokernel_from_smith(f, &snf).map(|c| (c.rows(), c)))
    }

    fn ring(&self) -> Result<ZMod> {
        Ok(self.ring)
    }

    fn payload(&self, f: &Matrix) -> Vec<u32> {
        f.entries().to_vec()
    }

    fn hom_frame(&self, a: &usize, b: &usize) -> Result<HomFrame> {
        Ok(HomFrame::free(self.ring, a * b))
    }

    fn from_payload(&self, a: &usize, b: &usize, x: &[u32]) -> Matrix {
        Matrix::from_residues(self.ring, *b, *a, x)
    }

    fn is_morphism(&self, f: &Matrix) -> Result<bool> {
        Ok(f.modulus() == self.ring.modulus())
    }

    fn lift(&self, k: &Matrix, t: &Matrix) -> Result<Option<Matrix>> {
        if k.rows() != t.rows() {
            return Err(shape("lift", format!("{}x{} against {}x{}", k.rows(), k.cols(), t.rows(), t.cols())));
        }
        let sys = LinearSystem::new(k);
        let mut u = Matrix::zeros(self.ring, k.cols(), t.cols());
        for j in 0..t.cols() {
            let Some(x) = sys.solve(&t.col(j))? else { return Ok(None) };
            for (i, v) in x.into_iter().enumerate() {
                u.set(i, j, v);
            }
        }
        Ok(Some(u))
    }

    fn extend(&self, c: &Matrix, t: &Matrix) -> Result<Option<Matrix>> {
        if c.cols() != t.cols() {
            return Err(shape("extend", format!("{}x{} against {}x{}", c.rows(), c.cols(), t.rows(), t.cols())));
        }
        Ok(self.lift(&c.transpose(), &t.transpose())?.map(|u| u.transpose()))
    }

    fn lifter(&self, k: &Matrix) -> Result<Factorizer<Matrix>> {
        let sys = LinearSystem::new(k);
        let (ring, rows, width) = (self.ring, k.rows(), k.cols());
        Ok(Arc::new(move |t: &Matrix| {
            if t.rows() != rows {
                return Err(shape("lift", format!("{rows} rows against {}", t.rows())));
            }
            let mut u = Matrix::zeros(ring, width, t.cols());
            for j in 0..t.cols() {
                let Some(x) = sys.solve(&t.col(j))? else { return Ok(None) };
                for (i, v) in x.into_iter().enumerate() {
                    u.set(i, j, v);
                }
            }
            Ok(Some(u))
        }))
    }

    fn extender(&self, c: &Matrix) -> Result<Factorizer<Matrix>> {
        let inner = self.lifter(&c.transpose())?;
        Ok(Arc::new(move |t: &Matrix| Ok(inner(&t.transpose())?.map(|u| u.transpose()))))
    }

    fn is_zero(&self, f: &Matrix) -> bool {
        f.is_zero()
    }

    fn object_size(&self, a: &usize) -> usize {
        *a
    }

    fn object_key(&self, a: &usize) -> Option<Vec<u32>> {
        Some(vec![*a as u32])
    }

    fn iso_key(&self, f: &Matrix) -> Option<Vec<u32>> {
        let snf = smith_form(f);
        let mut key = Vec::with_capacity(snf.diag.len() + 2);
        key.push(f.rows() as u32);
        key.push(f.cols() as u32);
        key.extend_from_slice(&snf.diag);
        Some(key)
    }
}
