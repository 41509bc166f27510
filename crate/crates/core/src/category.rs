//! The additive-category interface every instance implements.
//!
//! Every built-in instance is *linear*: a hom-set `Hom(A, B)` is presented
//! as the solution module `{x in R^m : C x = 0}` of a constraint matrix over a
//! finite ring, and composition is bilinear in payloads. The defaulted methods
//! (hom enumeration, lifting, extension) work off that presentation, so an
//! instance only has to describe its payloads and its (co)kernel rule.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{CategoryError, Result};
use crate::matrix::Matrix;
use crate::normal_form::LinearSystem;
use crate::ring::ZMod;

/// A stored factorisation procedure: `t` ↦ some `u` through a fixed morphism.
pub type Factorizer<M> = Arc<dyn Fn(&M) -> Result<Option<M>> + Send + Sync>;

/// Upper limit on materialised hom-sets and object lists.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

/// `Hom(A, B)` as the solution module of `constraints * x = 0` in `R^dim`.
#[derive(Clone, Debug)]
pub struct HomFrame {
    pub dim: usize,
    pub constraints: Matrix,
}

impl HomFrame {
    pub fn free(ring: ZMod, dim: usize) -> Self {
        HomFrame { dim, constraints: Matrix::zeros(ring, 0, dim) }
    }

    /// Every payload in the frame, each exactly once, in a deterministic order.
    pub fn elements(&self) -> Result<Vec<Vec<u32>>> {
        let n = self.constraints.modulus() as u128;
        if self.constraints.rows() == 0 {
            let size = n.checked_pow(self.dim as u32).unwrap_or(u128::MAX);
            check_size("hom-set", size)?;
            let ring = self.constraints.ring();
            return Ok(Matrix::all(ring, 1, self.dim).map(|m| m.row(0).to_vec()).collect());
        }
        let sys = LinearSystem::new(&self.constraints);
        let h = sys.nullspace_howell();
        check_size("hom-set", h.module_order())?;
        Ok(h.elements())
    }

    pub fn count(&self) -> u128 {
        if self.constraints.rows() == 0 {
            let n = self.constraints.modulus() as u128;
            return n.checked_pow(self.dim as u32).unwrap_or(u128::MAX);
        }
        LinearSystem::new(&self.constraints).nullspace_howell().module_order()
    }
}

pub(crate) fn check_size(what: &str, size: u128) -> Result<()> {
    if size > ENUMERATION_LIMIT {
        return Err(CategoryError::TooLarge { what: what.to_string(), size, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Matrix of a linear map `R^dim_in -> R^dim_out`, obtained by evaluating it
/// on unit vectors.
pub fn linear_map_matrix(
    ring: ZMod,
    dim_in: usize,
    dim_out: usize,
    f: impl Fn(&[u32]) -> Result<Vec<u32>>,
) -> Result<Matrix> {
    let mut m = Matrix::zeros(ring, dim_out, dim_in);
    let mut e = vec![0u32; dim_in];
    for j in 0..dim_in {
        e[j] = 1;
        let col = f(&e)?;
        e[j] = 0;
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Objects `A ⊕ B` with injections and projections.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct BiproductCert<C: AdditiveCategory> {
    pub sum: C::Obj,
    pub inj1: C::Mor,
    pub inj2: C::Mor,
    pub proj1: C::Mor,
    pub proj2: C::Mor,
}

/// A concrete additive category with computable structure.
///
/// Morphism equality is payload equality: payloads are canonical.
pub trait AdditiveCategory: Clone + Debug + Send + Sync + 'static {
    type Obj: Clone + Eq + Hash + Debug + Serialize + Send + Sync + 'static;
    type Mor: Clone + Eq + Hash + Debug + Serialize + Send + Sync + 'static;

    fn descriptor(&self) -> String;
    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;
    fn zero_object(&self) -> Self::Obj;
    fn identity(&self, a: &Self::Obj) -> Self::Mor;
    fn zero_mor(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Mor;
    /// `g ∘ f`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor>;
    fn add(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor>;
    fn negate(&self, f: &Self::Mor) -> Self::Mor;
    fn biproduct(&self, a: &Self::Obj, b: &Self::Obj) -> Result<BiproductCert<Self>>;

    /// Objects within the bound, in deterministic order.
    fn enumerate_objects(&self, bound: usize) -> Result<Vec<Self::Obj>>;

    /// The size `enumerate_objects` bounds: rank, dimension, or a sum of them.
    fn object_size(&self, a: &Self::Obj) -> usize;

    /// Kernel by the instance's decision rule; `None` means not representable.
    fn kernel_object(&self, f: &Self::Mor) -> Result<Option<(Self::Obj, Self::Mor)>>;
    fn cokernel_object(&self, f: &Self::Mor) -> Result<Option<(Self::Obj, Self::Mor)>>;

    // Linear presentation of hom-sets.

    fn ring(&self) -> Result<ZMod> {
        Err(CategoryError::NonEnumerable(self.descriptor()))
    }

    fn payload(&self, f: &Self::Mor) -> Vec<u32>;

    fn hom_frame(&self, _a: &Self::Obj, _b: &Self::Obj) -> Result<HomFrame> {
        Err(CategoryError::NonEnumerable(self.descriptor()))
    }

    /// Builds a morphism from a payload. The payload need not satisfy the
    /// frame constraints; compositions of such raw values stay bilinear.
    fn from_payload(&self, a: &Self::Obj, b: &Self::Obj, x: &[u32]) -> Self::Mor;

    fn is_morphism(&self, f: &Self::Mor) -> Result<bool> {
        let frame = self.hom_frame(&self.dom(f), &self.cod(f))?;
        Ok(frame.constraints.apply(&self.payload(f)).iter().all(|&v| v == 0))
    }

    fn enumerate_homs(&self, a: &Self::Obj, b: &Self::Obj) -> Result<Vec<Self::Mor>> {
        let frame = self.hom_frame(a, b)?;
        Ok(frame.elements()?.iter().map(|x| self.from_payload(a, b, x)).collect())
    }

    fn hom_count(&self, a: &Self::Obj, b: &Self::Obj) -> Result<u128> {
        Ok(self.hom_frame(a, b)?.count())
    }

    /// Some `u: T -> K` with `k ∘ u = t`, if one exists.
    fn lift(&self, k: &Self::Mor, t: &Self::Mor) -> Result<Option<Self::Mor>> {
        let (kd, td) = (self.dom(k), self.dom(t));
        self.solve_factor(&td, &kd, t, |u| self.compose(k, u))
    }

    /// Some `u: Q -> T` with `u ∘ c = t`, if one exists.
    fn extend(&self, c: &Self::Mor, t: &Self::Mor) -> Result<Option<Self::Mor>> {
        let (qc, tc) = (self.cod(c), self.cod(t));
        self.solve_factor(&qc, &tc, t, |u| self.compose(u, c))
    }

    /// `lift` against a fixed `k`, with any preprocessing done once.
    fn lifter(&self, k: &Self::Mor) -> Result<Factorizer<Self::Mor>> {
        let (cat, k) = (self.clone(), k.clone());
        Ok(Arc::new(move |t| cat.lift(&k, t)))
    }

    /// `extend` against a fixed `c`, with any preprocessing done once.
    fn extender(&self, c: &Self::Mor) -> Result<Factorizer<Self::Mor>> {
        let (cat, c) = (self.clone(), c.clone());
        Ok(Arc::new(move |t| cat.extend(&c, t)))
    }

    /// Finds `u: a -> b` with `op(u) = target` where `op` is linear.
    fn solve_factor(
        &self,
        a: &Self::Obj,
        b: &Self::Obj,
        target: &Self::Mor,
        op: impl Fn(&Self::Mor) -> Result<Self::Mor>,
    ) -> Result<Option<Self::Mor>> {
        let ring = self.ring()?;
        let frame = self.hom_frame(a, b)?;
        let want = self.payload(target);
        let map = linear_map_matrix(ring, frame.dim, want.len(), |x| {
            Ok(self.payload(&op(&self.from_payload(a, b, x))?))
        })?;
        let system = map.vstack(&frame.constraints)?;
        let mut rhs = want;
        rhs.resize(system.rows(), 0);
        Ok(LinearSystem::new(&system).solve(&rhs)?.map(|x| self.from_payload(a, b, &x)))
    }

    /// An invariant of the arrow up to isomorphism of domain and codomain,
    /// used to share verdicts between isomorphic arrows.
    fn iso_key(&self, _f: &Self::Mor) -> Option<Vec<u32>> {
        None
    }

    /// A complete isomorphism invariant of objects: equal keys mean
    /// isomorphic objects. Used to keep one representative per class.
    fn object_key(&self, _a: &Self::Obj) -> Option<Vec<u32>> {
        None
    }

    fn block_row(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor> {
        let bp = self.biproduct(&self.dom(f), &self.dom(g))?;
        self.add(&self.compose(f, &bp.proj1)?, &self.compose(g, &bp.proj2)?)
    }

    fn block_col(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor> {
        let bp = self.biproduct(&self.cod(f), &self.cod(g))?;
        self.add(&self.compose(&bp.inj1, f)?, &self.compose(&bp.inj2, g)?)
    }

    fn diag(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor> {
        let src = self.biproduct(&self.dom(f), &self.dom(g))?;
        let dst = self.biproduct(&self.cod(f), &self.cod(g))?;
        let top = self.compose(&dst.inj1, &self.compose(f, &src.proj1)?)?;
        let bottom = self.compose(&dst.inj2, &self.compose(g, &src.proj2)?)?;
        self.add(&top, &bottom)
    }

    fn sub(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor> {
        self.add(f, &self.negate(g))
    }

    fn is_zero(&self, f: &Self::Mor) -> bool {
        self.payload(f).iter().all(|&x| x == 0)
    }

    fn is_identity(&self, f: &Self::Mor) -> bool {
        let a = self.dom(f);
        a == self.cod(f) && *f == self.identity(&a)
    }

    /// Some inverse of `f`, if `f` is an isomorphism.
    fn inverse(&self, f: &Self::Mor) -> Result<Option<Self::Mor>> {
        let Some(g) = self.lift(f, &self.identity(&self.cod(f)))? else {
            return Ok(None);
        };
        let gf = self.compose(&g, f)?;
        Ok(self.is_identity(&gf).then_some(g))
    }

    fn is_iso(&self, f: &Self::Mor) -> Result<bool> {
        Ok(self.inverse(f)?.is_some())
    }
}

type Predicate<O> = Arc<dyn Fn(&O) -> bool + Send + Sync>;

/// A class of objects given by a membership predicate. Contains the zero
/// object and is closed under isomorphism by contract.
#[derive(Clone)]
pub struct ObjectClass<O> {
    name: String,
    everything: bool,
    predicate: Predicate<O>,
}

impl<O> Debug for ObjectClass<O> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ObjectClass({})", self.name)
    }
}

impl<O: Clone + Eq + Hash + Send + Sync + 'static> ObjectClass<O> {
    pub fn all() -> Self {
        ObjectClass { name: "all".into(), everything: true, predicate: Arc::new(|_| true) }
    }

    pub fn new(name: impl Into<String>, predicate: impl Fn(&O) -> bool + Send + Sync + 'static) -> Self {
        ObjectClass { name: name.into(), everything: false, predicate: Arc::new(predicate) }
    }

    /// Same class, with membership answers cached per object.
    pub fn memoized(name: impl Into<String>, predicate: impl Fn(&O) -> bool + Send + Sync + 'static) -> Self {
        let cache: Mutex<HashMap<O, bool>> = Mutex::new(HashMap::new());
        Self::new(name, move |o: &O| {
            if let Some(&hit) = cache.lock().expect("class cache").get(o) {
                return hit;
            }
            let v = predicate(o);
            cache.lock().expect("class cache").insert(o.clone(), v);
            v
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_everything(&self) -> bool {
        self.everything
    }

    pub fn contains(&self, o: &O) -> bool {
        (self.predicate)(o)
    }
}

/// Enumeration bounds: `objects` bounds the quantified test objects,
/// `oracle` bounds the apexes used by universal-property checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Bounds {
    pub objects: usize,
    pub oracle: usize,
}

impl Bounds {
    pub fn new(objects: usize, oracle: usize) -> Self {
        Bounds { objects, oracle }
    }

    pub fn uniform(bound: usize) -> Self {
        Bounds { objects: bound, oracle: bound }
    }
}
