//! The formal opposite of an instance. Morphisms keep their base payloads;
//! only the direction is read the other way round, so kernels become
//! cokernels and lifting becomes extension.

use crate::category::{AdditiveCategory, BiproductCert, Factorizer, HomFrame};
use crate::error::Result;
use crate::ring::ZMod;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Opposite<C> {
    base: C,
}

impl<C: AdditiveCategory> Opposite<C> {
    pub fn new(base: C) -> Self {
        Opposite { base }
    }

    pub fn base(&self) -> &C {
        &self.base
    }
}

impl<C: AdditiveCategory> AdditiveCategory for Opposite<C> {
    type Obj = C::Obj;
    type Mor = C::Mor;

    fn descriptor(&self) -> String {
        format!("op({})", self.base.descriptor())
    }

    fn dom(&self, f: &C::Mor) -> C::Obj {
        self.base.cod(f)
    }

    fn cod(&self, f: &C::Mor) -> C::Obj {
        self.base.dom(f)
    }

    fn zero_object(&self) -> C::Obj {
        self.base.zero_object()
    }

    fn identity(&self, a: &C::Obj) -> C::Mor {
        self.base.identity(a)
    }

    fn zero_mor(&self, a: &C::Obj, b: &C::Obj) -> C::Mor {
        self.base.zero_mor(b, a)
    }

    fn compose(&self, g: &C::Mor, f: &C::Mor) -> Result<C::Mor> {
        self.base.compose(f, g)
    }

    fn add(&self, f: &C::Mor, g: &C::Mor) -> Result<C::Mor> {
        self.base.add(f, g)
    }

    fn negate(&self, f: &C::Mor) -> C::Mor {
        self.base.negate(f)
    }

    fn biproduct(&self, a: &C::Obj, b: &C::Obj) -> Result<BiproductCert<Self>> {
        let bp = self.base.biproduct(a, b)?;
        Ok(BiproductCert { sum: bp.sum, inj1: bp.proj1, inj2: bp.proj2, proj1: bp.inj1, proj2: bp.inj2 })
    }

    fn block_row(&self, f: &C::Mor, g: &C::Mor) -> Result<C::Mor> {
        self.base.block_col(f, g)
    }

    fn block_col(&self, f: &C::Mor, g: &C::Mor) -> Result<C::Mor> {
        self.base.block_row(f, g)
    }

    fn diag(&self, f: &C::Mor, g: &C::Mor) -> Result<C::Mor> {
        self.base.diag(f, g)
    }

    fn enumerate_objects(&self, bound: usize) -> Result<Vec<C::Obj>> {
        self.base.enumerate_objects(bound)
    }

    fn kernel_object(&self, f: &C::Mor) -> Result<Option<(C::Obj, C::Mor)>> {
        self.base.cokernel_object(f)
    }

    fn cokernel_object(&self, f: &C::Mor) -> Result<Option<(C::Obj, C::Mor)>> {
        self.base.kernel_object(f)
    }

    fn ring(&self) -> Result<ZMod> {
        self.base.ring()
    }

    fn payload(&self, f: &C::Mor) -> Vec<u32> {
        self.base.payload(f)
    }

    fn hom_frame(&self, a: &C::Obj, b: &C::Obj) -> Result<HomFrame> {
        self.base.hom_frame(b, a)
    }

    fn from_payload(&self, a: &C::Obj, b: &C::Obj, x: &[u32]) -> C::Mor {
        self.base.from_payload(b, a, x)
    }

    fn is_morphism(&self, f: &C::Mor) -> Result<bool> {
        self.base.is_morphism(f)
    }

    fn enumerate_homs(&self, a: &C::Obj, b: &C::Obj) -> Result<Vec<C::Mor>> {
        self.base.enumerate_homs(b, a)
    }

    fn hom_count(&self, a: &C::Obj, b: &C::Obj) -> Result<u128> {
        self.base.hom_count(b, a)
    }

    fn lift(&self, k: &C::Mor, t: &C::Mor) -> Result<Option<C::Mor>> {
        self.base.extend(k, t)
    }

    fn extend(&self, c: &C::Mor, t: &C::Mor) -> Result<Option<C::Mor>> {
        self.base.lift(c, t)
    }

    fn lifter(&self, k: &C::Mor) -> Result<Factorizer<C::Mor>> {
        self.base.extender(k)
    }

    fn extender(&self, c: &C::Mor) -> Result<Factorizer<C::Mor>> {
        self.base.lifter(c)
    }

    fn is_zero(&self, f: &C::Mor) -> bool {
        self.base.is_zero(f)
    }

    fn iso_key(&self, f: &C::Mor) -> Option<Vec<u32>> {
        self.base.iso_key(f)
    }

    fn object_size(&self, a: &C::Obj) -> usize {
        self.base.object_size(a)
    }

    fn object_key(&self, a: &C::Obj) -> Option<Vec<u32>> {
        self.base.object_key(a)
    }
}
