//! A full subcategory of free modules cut off at a rank cap. Biproducts above
//! the cap are still formed as intermediates, but a (co)kernel whose object
//! exceeds the cap counts as non-representable. Pullbacks can therefore leave
//! the instance, which is what maximality witnesses need to exhibit.

use crate::category::{AdditiveCategory, BiproductCert, HomFrame};
use crate::error::Result;
use crate::instances::free::FreeModules;
use crate::matrix::Matrix;
use crate::ring::ZMod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RankCapped {
    base: FreeModules,
    cap: usize,
}

impl RankCapped {
    pub fn new(base: FreeModules, cap: usize) -> Self {
        RankCapped { base, cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn base(&self) -> &FreeModules {
        &self.base
    }
}

impl AdditiveCategory for RankCapped {
    type Obj = usize;
    type Mor = Matrix;

    fn descriptor(&self) -> String {
        format!("{}/cap:{}", self.base.descriptor(), self.cap)
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
        self.base.identity(a)
    }

    fn zero_mor(&self, a: &usize, b: &usize) -> Matrix {
        self.base.zero_mor(a, b)
    }

    fn compose(&self, g: &Matrix, f: &Matrix) -> Result<Matrix> {
        self.base.compose(g, f)
    }

    fn add(&self, f: &Matrix, g: &Matrix) -> Result<Matrix> {
        self.base.add(f, g)
    }

    fn negate(&self, f: &Matrix) -> Matrix {
        self.base.negate(f)
    }

    fn biproduct(&self, a: &usize, b: &usize) -> Result<BiproductCert<Self>> {
        let bp = self.base.biproduct(a, b)?;
        Ok(BiproductCert { sum: bp.sum, inj1: bp.inj1, inj2: bp.inj2, proj1: bp.proj1, proj2: bp.proj2 })
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
        Ok((0..=bound.min(self.cap)).collect())
    }

    fn enumerate_homs(&self, a: &usize, b: &usize) -> Result<Vec<Matrix>> {
        self.base.enumerate_homs(a, b)
    }

    fn hom_count(&self, a: &usize, b: &usize) -> Result<u128> {
        self.base.hom_count(a, b)
    }

    fn kernel_object(&self, f: &Matrix) -> Result<Option<(usize, Matrix)>> {
        Ok(self.base.kernel_object(f)?.filter(|(k, _)| *k <= self.cap))
    }

    fn cokernel_object(&self, f: &Matrix) -> Result<Option<(usize, Matrix)>> {
        Ok(self.base.cokernel_object(f)?.filter(|(c, _)| *c <= self.cap))
    }

    fn ring(&self) -> Result<ZMod> {
        Ok(self.base.ring_spec())
    }

    fn payload(&self, f: &Matrix) -> Vec<u32> {
        self.base.payload(f)
    }

    fn hom_frame(&self, a: &usize, b: &usize) -> Result<HomFrame> {
        self.base.hom_frame(a, b)
    }

    fn from_payload(&self, a: &usize, b: &usize, x: &[u32]) -> Matrix {
        self.base.from_payload(a, b, x)
    }

    fn lift(&self, k: &Matrix, t: &Matrix) -> Result<Option<Matrix>> {
        self.base.lift(k, t)
    }

    fn extend(&self, c: &Matrix, t: &Matrix) -> Result<Option<Matrix>> {
        self.base.extend(c, t)
    }

    fn object_size(&self, a: &usize) -> usize {
        *a
    }

    fn object_key(&self, a: &usize) -> Option<Vec<u32>> {
        self.base.object_key(a)
    }

    fn iso_key(&self, f: &Matrix) -> Option<Vec<u32>> {
        self.base.iso_key(f)
    }
}
