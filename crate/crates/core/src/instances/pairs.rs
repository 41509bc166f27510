//! Subspace pairs over a prime field: an object is `(V, W)` with `W` a
//! subspace of `V = F_p^v`, a morphism is a linear map carrying `W` into `W'`.
//! The category has all kernels and cokernels but is not abelian: the
//! identity `(F, 0) -> (F, F)` is mono and epi without being invertible.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::category::{check_size, linear_map_matrix, AdditiveCategory, BiproductCert, HomFrame};
use crate::error::{CategoryError, Result};
use crate::matrix::Matrix;
use crate::normal_form::{howell_form, LinearSystem};
use crate::ring::ZMod;

/// `(F_p^dim, rowspan(basis))` with `basis` in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairObj {
    pub dim: usize,
    pub basis: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PairMor {
    pub dom: PairObj,
    pub cod: PairObj,
    /// `cod.dim x dom.dim`.
    pub map: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairCategory {
    field: ZMod,
}

fn rows_of(m: &Matrix) -> Vec<Vec<u32>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

impl PairCategory {
    pub fn new(p: u32) -> Result<Self> {
        let field = ZMod::new(p)?;
        if !field.is_field() {
            return Err(CategoryError::InvalidRing(format!("pairs instance needs a prime, got {p}")));
        }
        Ok(PairCategory { field })
    }

    pub fn field(&self) -> ZMod {
        self.field
    }

    /// The pair spanned by the given rows, canonicalised.
    pub fn object(&self, dim: usize, rows: &[Vec<u32>]) -> PairObj {
        let data: Vec<u32> = rows.iter().flatten().map(|&x| x % self.field.modulus()).collect();
        let basis = howell_form(&Matrix::from_residues(self.field, rows.len(), dim, &data)).form;
        PairObj { dim, basis }
    }

    pub fn object_from(&self, dim: usize, rows: &[&[i64]]) -> PairObj {
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&x| self.field.reduce(x)).collect()).collect();
        self.object(dim, &rows)
    }

    /// `(F^dim, F^dim)`.
    pub fn full(&self, dim: usize) -> PairObj {
        PairObj { dim, basis: Matrix::identity(self.field, dim) }
    }

    /// `(F^dim, 0)`.
    pub fn bare(&self, dim: usize) -> PairObj {
        PairObj { dim, basis: Matrix::zeros(self.field, 0, dim) }
    }

    pub fn morphism(&self, dom: &PairObj, cod: &PairObj, map: Matrix) -> Result<PairMor> {
        if map.rows() != cod.dim || map.cols() != dom.dim {
            return Err(CategoryError::InvalidMorphism(format!(
                "{}x{} matrix between dimensions {} and {}",
                map.rows(),
                map.cols(),
                dom.dim,
                cod.dim
            )));
        }
        let f = PairMor { dom: dom.clone(), cod: cod.clone(), map };
        if !self.is_morphism(&f)? {
            return Err(CategoryError::InvalidMorphism("map does not preserve the subspace".into()));
        }
        Ok(f)
    }

    /// Rows spanning the annihilator `{y : y . w = 0 for all w in W}`.
    fn annihilator(&self, o: &PairObj) -> Matrix {
        let gens = LinearSystem::new(&o.basis).nullspace();
        let data: Vec<u32> = gens.iter().flatten().copied().collect();
        Matrix::from_residues(self.field, gens.len(), o.dim, &data)
    }

    /// Every subspace of `F^dim`, as canonical bases.
    fn subspaces(&self, dim: usize) -> Result<Vec<Matrix>> {
        let mut seen = BTreeSet::new();
        for w in 0..=dim {
            check_size("subspace search", Matrix::hom_count(self.field, w, dim))?;
            for m in Matrix::all(self.field, w, dim) {
                let h = howell_form(&m).form;
                if h.rows() == w {
                    seen.insert(h);
                }
            }
        }
        let mut out: Vec<Matrix> = seen.into_iter().collect();
        out.sort_by_key(|m| m.rows());
        Ok(out)
    }
}

impl AdditiveCategory for PairCategory {
    type Obj = PairObj;
    type Mor = PairMor;

    fn descriptor(&self) -> String {
        format!("pairs:{}", self.field.modulus())
    }

    fn dom(&self, f: &PairMor) -> PairObj {
        f.dom.clone()
    }

    fn cod(&self, f: &PairMor) -> PairObj {
        f.cod.clone()
    }

    fn zero_object(&self) -> PairObj {
        self.bare(0)
    }

    fn identity(&self, a: &PairObj) -> PairMor {
        PairMor { dom: a.clone(), cod: a.clone(), map: Matrix::identity(self.field, a.dim) }
    }

    fn zero_mor(&self, a: &PairObj, b: &PairObj) -> PairMor {
        PairMor { dom: a.clone(), cod: b.clone(), map: Matrix::zeros(self.field, b.dim, a.dim) }
    }

    fn compose(&self, g: &PairMor, f: &PairMor) -> Result<PairMor> {
        if g.dom != f.cod {
            return Err(crate::error::shape("PairCategory::compose", "codomain and domain differ"));
        }
        Ok(PairMor { dom: f.dom.clone(), cod: g.cod.clone(), map: g.map.mul(&f.map)? })
    }

    fn add(&self, f: &PairMor, g: &PairMor) -> Result<PairMor> {
        if f.dom != g.dom || f.cod != g.cod {
            return Err(crate::error::shape("PairCategory::add", "different hom-sets"));
        }
        Ok(PairMor { dom: f.dom.clone(), cod: f.cod.clone(), map: f.map.add(&g.map)? })
    }

    fn negate(&self, f: &PairMor) -> PairMor {
        PairMor { dom: f.dom.clone(), cod: f.cod.clone(), map: f.map.neg() }
    }

    fn biproduct(&self, a: &PairObj, b: &PairObj) -> Result<BiproductCert<Self>> {
        let s = a.dim + b.dim;
        let sum = PairObj { dim: s, basis: a.basis.block_diag(&b.basis)? };
        let id = Matrix::identity(self.field, s);
        let p1 = id.slice(0, a.dim, 0, s);
        let p2 = id.slice(a.dim, s, 0, s);
        Ok(BiproductCert {
            inj1: PairMor { dom: a.clone(), cod: sum.clone(), map: p1.transpose() },
            inj2: PairMor { dom: b.clone(), cod: sum.clone(), map: p2.transpose() },
            proj1: PairMor { dom: sum.clone(), cod: a.clone(), map: p1 },
            proj2: PairMor { dom: sum.clone(), cod: b.clone(), map: p2 },
            sum,
        })
    }

    fn enumerate_objects(&self, bound: usize) -> Result<Vec<PairObj>> {
        let mut out = Vec::new();
        for dim in 0..=bound {
            for basis in self.subspaces(dim)? {
                out.push(PairObj { dim, basis });
            }
        }
        Ok(out)
    }

    /// `(ker f, ker f ∩ W)`.
    fn kernel_object(&self, f: &PairMor) -> Result<Option<(PairObj, PairMor)>> {
        let gens = LinearSystem::new(&f.map).nullspace();
        let k = gens.len();
        let data: Vec<u32> = gens.iter().flatten().copied().collect();
        let inc = Matrix::from_residues(self.field, k, f.dom.dim, &data).transpose();
        // x in the kernel subspace iff inc x lies in W
        let cut = self.annihilator(&f.dom).mul(&inc)?;
        let sub = LinearSystem::new(&cut).nullspace();
        let obj = self.object(k, &sub);
        Ok(Some((obj.clone(), PairMor { dom: obj, cod: f.dom.clone(), map: inc })))
    }

    /// `(V'/im f, image of W')`.
    fn cokernel_object(&self, f: &PairMor) -> Result<Option<(PairObj, PairMor)>> {
        let gens = LinearSystem::new(&f.map.transpose()).nullspace();
        let c = gens.len();
        let data: Vec<u32> = gens.iter().flatten().copied().collect();
        let q = Matrix::from_residues(self.field, c, f.cod.dim, &data);
        let image = f.cod.basis.mul(&q.transpose())?;
        let obj = self.object(c, &rows_of(&image));
        Ok(Some((obj.clone(), PairMor { dom: f.cod.clone(), cod: obj, map: q })))
    }

    fn ring(&self) -> Result<ZMod> {
        Ok(self.field)
    }

    fn payload(&self, f: &PairMor) -> Vec<u32> {
        f.map.entries().to_vec()
    }

    /// Constraint `N' f W^T = 0` with `N'` the annihilator of `W'`.
    fn hom_frame(&self, a: &PairObj, b: &PairObj) -> Result<HomFrame> {
        let dim = a.dim * b.dim;
        let ann = self.annihilator(b);
        let wt = a.basis.transpose();
        let out = ann.rows() * a.basis.rows();
        let constraints = linear_map_matrix(self.field, dim, out, |x| {
            let f = Matrix::from_residues(self.field, b.dim, a.dim, x);
            Ok(ann.mul(&f)?.mul(&wt)?.entries().to_vec())
        })?;
        Ok(HomFrame { dim, constraints })
    }

    /// Pairs are classified by the two dimensions.
    fn object_size(&self, a: &PairObj) -> usize {
        a.dim
    }

    fn object_key(&self, a: &PairObj) -> Option<Vec<u32>> {
        Some(vec![a.dim as u32, a.basis.rows() as u32])
    }

    fn from_payload(&self, a: &PairObj, b: &PairObj, x: &[u32]) -> PairMor {
        PairMor { dom: a.clone(), cod: b.clone(), map: Matrix::from_residues(self.field, b.dim, a.dim, x) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn object_counts_over_f2() {
        let c = PairCategory::new(2).unwrap();
        assert_eq!(c.enumerate_objects(2).unwrap().len(), 8);
        assert_eq!(c.enumerate_objects(3).unwrap().len(), 24);
        assert!(PairCategory::new(6).is_err());
    }

    #[test]
    fn mono_epi_not_iso() {
        let c = PairCategory::new(2).unwrap();
        let f = c.morphism(&c.bare(1), &c.full(1), Matrix::identity(c.field(), 1)).unwrap();
        let (k, _) = c.kernel_object(&f).unwrap().unwrap();
        let (q, _) = c.cokernel_object(&f).unwrap().unwrap();
        assert_eq!(k, c.zero_object());
        assert_eq!(q, c.zero_object());
        assert!(!c.is_iso(&f).unwrap());
        // the reverse map does not preserve subspaces
        assert!(c.morphism(&c.full(1), &c.bare(1), Matrix::identity(c.field(), 1)).is_err());
    }

    #[test]
    fn kernel_examples() {
        let c = PairCategory::new(2).unwrap();
        let a = c.object_from(2, &[&[1, 0]]);
        let (k, _) = c.kernel_object(&c.identity(&a)).unwrap().unwrap();
        assert_eq!(k, c.zero_object());
        let b = c.full(1);
        let (k, inc) = c.kernel_object(&c.zero_mor(&a, &b)).unwrap().unwrap();
        assert_eq!(k, a);
        assert!(c.is_identity(&inc));
    }

    #[test]
    fn hom_counts_respect_subspaces() {
        let c = PairCategory::new(2).unwrap();
        assert_eq!(c.hom_count(&c.full(1), &c.bare(1)).unwrap(), 1);
        assert_eq!(c.hom_count(&c.bare(1), &c.full(1)).unwrap(), 2);
        let line = c.object_from(2, &[&[1, 0]]);
        // maps F^2 -> F^2 fixing the line <e1>: first column in <e1>
        assert_eq!(c.hom_count(&line, &line).unwrap(), 8);
    }
}
