//! Finite diagrams over an instance: cochain complexes `X^0 -> ... -> X^{N-1}`
//! with `∂∂ = 0`, and truncated projective spectra `X_{L-1} -> ... -> X_0`
//! stored by their consecutive bonds.
//!
//! Everything is computed degreewise. Evaluation at a degree has both a left
//! and a right adjoint in either shape, so a kernel or cokernel of diagrams
//! exists exactly when it exists in every degree, and then it is the
//! degreewise one.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::category::{check_size, linear_map_matrix, AdditiveCategory, BiproductCert, Bounds, HomFrame};
use crate::error::{shape, CategoryError, Result};
use crate::matrix::Matrix;
use crate::ring::ZMod;
use crate::stability::{Certifier, SemiStableVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Arrow `k` is `∂^k: X^k -> X^{k+1}`, consecutive arrows compose to zero.
    Chain,
    /// Arrow `k` is the bond `X_{k+1} -> X_k`.
    Spectrum,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DiagramObj<O, M> {
    pub objects: Vec<O>,
    pub arrows: Vec<M>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DiagramMor<O, M> {
    pub from: DiagramObj<O, M>,
    pub to: DiagramObj<O, M>,
    pub comps: Vec<M>,
}

pub type DObj<C> = DiagramObj<<C as AdditiveCategory>::Obj, <C as AdditiveCategory>::Mor>;
pub type DMor<C> = DiagramMor<<C as AdditiveCategory>::Obj, <C as AdditiveCategory>::Mor>;

type FrameCache<C> = Mutex<HashMap<(DObj<C>, DObj<C>), (HomFrame, Vec<usize>)>>;

/// Diagrams of one shape and length over a base instance.
#[derive(Clone)]
pub struct Diagrams<C: AdditiveCategory> {
    base: C,
    shape: Shape,
    len: usize,
    frames: Arc<FrameCache<C>>,
}

impl<C: AdditiveCategory> fmt::Debug for Diagrams<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diagrams({})", self.descriptor())
    }
}

/// Cochain complexes of length `n` over `base`.
pub fn chain_category<C: AdditiveCategory>(base: C, n: usize) -> Result<Diagrams<C>> {
    Diagrams::new(base, Shape::Chain, n)
}

/// Projective spectra of length `l` over `base`.
pub fn spectrum_category<C: AdditiveCategory>(base: C, l: usize) -> Result<Diagrams<C>> {
    Diagrams::new(base, Shape::Spectrum, l)
}

impl<C: AdditiveCategory> Diagrams<C> {
    pub fn new(base: C, shape: Shape, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(CategoryError::PreconditionFailed("diagram length must be at least 1".into()));
        }
        Ok(Diagrams { base, shape, len, frames: Arc::new(Mutex::new(HashMap::new())) })
    }

    pub fn base(&self) -> &C {
        &self.base
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Source and target degree of arrow `k`.
    pub fn ends(&self, k: usize) -> (usize, usize) {
        match self.shape {
            Shape::Chain => (k, k + 1),
            Shape::Spectrum => (k + 1, k),
        }
    }

    /// Checks arrow endpoints and, for complexes, `∂^{k+1} ∂^k = 0`.
    pub fn object(&self, objects: Vec<C::Obj>, arrows: Vec<C::Mor>) -> Result<DObj<C>> {
        if objects.len() != self.len || arrows.len() + 1 != self.len {
            return Err(CategoryError::InvalidObject(format!(
                "{} objects and {} arrows for length {}",
                objects.len(),
                arrows.len(),
                self.len
            )));
        }
        for (k, a) in arrows.iter().enumerate() {
            let (s, t) = self.ends(k);
            if self.base.dom(a) != objects[s] || self.base.cod(a) != objects[t] || !self.base.is_morphism(a)? {
                return Err(CategoryError::InvalidObject(format!("arrow {k} does not fit its degrees")));
            }
        }
        let x = DiagramObj { objects, arrows };
        if !self.relations_hold(&x)? {
            return Err(CategoryError::InvalidObject("consecutive differentials do not compose to zero".into()));
        }
        Ok(x)
    }

    fn relations_hold(&self, x: &DObj<C>) -> Result<bool> {
        if self.shape == Shape::Spectrum {
            return Ok(true);
        }
        for w in x.arrows.windows(2) {
            if !self.base.is_zero(&self.base.compose(&w[1], &w[0])?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks every component and commutation with every arrow.
    pub fn morphism(&self, from: &DObj<C>, to: &DObj<C>, comps: Vec<C::Mor>) -> Result<DMor<C>> {
        if comps.len() != self.len {
            return Err(CategoryError::InvalidMorphism(format!("{} components for length {}", comps.len(), self.len)));
        }
        for (k, f) in comps.iter().enumerate() {
            if self.base.dom(f) != from.objects[k] || self.base.cod(f) != to.objects[k] || !self.base.is_morphism(f)? {
                return Err(CategoryError::InvalidMorphism(format!("component {k} does not fit its degree")));
            }
        }
        for k in 0..self.len - 1 {
            let (s, t) = self.ends(k);
            let left = self.base.compose(&to.arrows[k], &comps[s])?;
            let right = self.base.compose(&comps[t], &from.arrows[k])?;
            if left != right {
                return Err(CategoryError::InvalidMorphism(format!("components do not commute with arrow {k}")));
            }
        }
        Ok(DiagramMor { from: from.clone(), to: to.clone(), comps })
    }

    /// `x` in degree `n`, zero elsewhere, zero arrows.
    pub fn concentrated(&self, x: &C::Obj, n: usize) -> Result<DObj<C>> {
        if n >= self.len {
            return Err(CategoryError::IndexOutOfRange { index: n, len: self.len });
        }
        let zero = self.base.zero_object();
        let objects: Vec<C::Obj> = (0..self.len).map(|k| if k == n { x.clone() } else { zero.clone() }).collect();
        let arrows = (0..self.len - 1)
            .map(|k| {
                let (s, t) = self.ends(k);
                self.base.zero_mor(&objects[s], &objects[t])
            })
            .collect();
        Ok(DiagramObj { objects, arrows })
    }

    /// The map out of `concentrated(dom α, n)` that is `α` in degree `n` and
    /// zero elsewhere; fails unless `α` is killed by every arrow leaving `n`.
    pub fn concentrated_map(&self, alpha: &C::Mor, n: usize, target: &DObj<C>) -> Result<DMor<C>> {
        let from = self.concentrated(&self.base.dom(alpha), n)?;
        let comps = (0..self.len)
            .map(|k| if k == n { alpha.clone() } else { self.base.zero_mor(&from.objects[k], &target.objects[k]) })
            .collect();
        self.morphism(&from, target, comps)
    }

    /// The bond `X_m -> X_n` for `n <= m`, composed from consecutive bonds.
    pub fn bond(&self, x: &DObj<C>, m: usize, n: usize) -> Result<C::Mor> {
        if self.shape != Shape::Spectrum {
            return Err(CategoryError::Unsupported("bonds outside spectra".into()));
        }
        if n > m || m >= self.len {
            return Err(CategoryError::IndexOutOfRange { index: m, len: self.len });
        }
        let mut acc = self.base.identity(&x.objects[m]);
        for k in (n..m).rev() {
            acc = self.base.compose(&x.arrows[k], &acc)?;
        }
        Ok(acc)
    }

    fn frame_and_dims(&self, a: &DObj<C>, b: &DObj<C>) -> Result<(HomFrame, Vec<usize>)> {
        let key = (a.clone(), b.clone());
        if let Some(v) = self.frames.lock().expect("frame cache").get(&key) {
            return Ok(v.clone());
        }
        let ring = self.base.ring()?;
        let mut dims = Vec::with_capacity(self.len);
        let mut blocks = Matrix::zeros(ring, 0, 0);
        for k in 0..self.len {
            let f = self.base.hom_frame(&a.objects[k], &b.objects[k])?;
            dims.push(f.dim);
            blocks = blocks.block_diag(&f.constraints)?;
        }
        let dim: usize = dims.iter().sum();
        let split = |x: &[u32]| self.split_payload(a, b, &dims, x);
        let rows: usize = (0..self.len - 1)
            .map(|k| {
                let (s, t) = self.ends(k);
                self.base.payload(&self.base.zero_mor(&a.objects[s], &b.objects[t])).len()
            })
            .sum();
        let commute = linear_map_matrix(ring, dim, rows, |x| {
            let comps = split(x);
            let mut out = Vec::with_capacity(rows);
            for k in 0..self.len - 1 {
                let (s, t) = self.ends(k);
                let left = self.base.compose(&b.arrows[k], &comps[s])?;
                let right = self.base.compose(&comps[t], &a.arrows[k])?;
                out.extend(self.base.payload(&self.base.sub(&left, &right)?));
            }
            Ok(out)
        })?;
        let frame = HomFrame { dim, constraints: blocks.vstack(&commute)? };
        self.frames.lock().expect("frame cache").insert(key, (frame.clone(), dims.clone()));
        Ok((frame, dims))
    }

    fn split_payload(&self, a: &DObj<C>, b: &DObj<C>, dims: &[usize], x: &[u32]) -> Vec<C::Mor> {
        let mut at = 0;
        dims.iter()
            .enumerate()
            .map(|(k, &n)| {
                let f = self.base.from_payload(&a.objects[k], &b.objects[k], &x[at..at + n]);
                at += n;
                f
            })
            .collect()
    }

    fn objects_with_total(&self, base: &[C::Obj], budget: usize, prefix: &mut Vec<C::Obj>, out: &mut Vec<Vec<C::Obj>>) {
        if prefix.len() == self.len {
            out.push(prefix.clone());
            return;
        }
        for o in base {
            let s = self.base.object_size(o);
            if s <= budget {
                prefix.push(o.clone());
                self.objects_with_total(base, budget - s, prefix, out);
                prefix.pop();
            }
        }
    }

    fn arrow_choices(&self, objects: &[C::Obj], prefix: &mut Vec<C::Mor>, out: &mut Vec<DObj<C>>) -> Result<()> {
        if prefix.len() + 1 == self.len {
            let x = DiagramObj { objects: objects.to_vec(), arrows: prefix.clone() };
            if self.relations_hold(&x)? {
                out.push(x);
            }
            return Ok(());
        }
        let (s, t) = self.ends(prefix.len());
        for a in self.base.enumerate_homs(&objects[s], &objects[t])? {
            // prune as soon as a differential pair fails
            if self.shape == Shape::Chain
                && !prefix.is_empty()
                && !self.base.is_zero(&self.base.compose(&a, prefix.last().expect("nonempty"))?)
            {
                continue;
            }
            prefix.push(a);
            self.arrow_choices(objects, prefix, out)?;
            prefix.pop();
            check_size("diagram objects", out.len() as u128)?;
        }
        Ok(())
    }

    /// Component `k` of a diagram morphism.
    pub fn evaluate(&self, f: &DMor<C>, k: usize) -> Result<C::Mor> {
        f.comps.get(k).cloned().ok_or(CategoryError::IndexOutOfRange { index: k, len: self.len })
    }
}

impl<C: AdditiveCategory> AdditiveCategory for Diagrams<C> {
    type Obj = DObj<C>;
    type Mor = DMor<C>;

    fn descriptor(&self) -> String {
        let kind = match self.shape {
            Shape::Chain => "chain",
            Shape::Spectrum => "spectra",
        };
        format!("{kind}({}, {})", self.base.descriptor(), self.len)
    }

    fn dom(&self, f: &DMor<C>) -> DObj<C> {
        f.from.clone()
    }

    fn cod(&self, f: &DMor<C>) -> DObj<C> {
        f.to.clone()
    }

    fn zero_object(&self) -> DObj<C> {
        self.concentrated(&self.base.zero_object(), 0).expect("length is at least 1")
    }

    fn identity(&self, a: &DObj<C>) -> DMor<C> {
        DiagramMor { from: a.clone(), to: a.clone(), comps: a.objects.iter().map(|o| self.base.identity(o)).collect() }
    }

    fn zero_mor(&self, a: &DObj<C>, b: &DObj<C>) -> DMor<C> {
        let comps = a.objects.iter().zip(&b.objects).map(|(x, y)| self.base.zero_mor(x, y)).collect();
        DiagramMor { from: a.clone(), to: b.clone(), comps }
    }

    fn compose(&self, g: &DMor<C>, f: &DMor<C>) -> Result<DMor<C>> {
        if f.to != g.from {
            return Err(shape("compose", "codomain and domain differ"));
        }
        let comps = g.comps.iter().zip(&f.comps).map(|(y, x)| self.base.compose(y, x)).collect::<Result<_>>()?;
        Ok(DiagramMor { from: f.from.clone(), to: g.to.clone(), comps })
    }

    fn add(&self, f: &DMor<C>, g: &DMor<C>) -> Result<DMor<C>> {
        if f.from != g.from || f.to != g.to {
            return Err(shape("add", "different domains or codomains"));
        }
        let comps = f.comps.iter().zip(&g.comps).map(|(x, y)| self.base.add(x, y)).collect::<Result<_>>()?;
        Ok(DiagramMor { from: f.from.clone(), to: f.to.clone(), comps })
    }

    fn negate(&self, f: &DMor<C>) -> DMor<C> {
        DiagramMor { from: f.from.clone(), to: f.to.clone(), comps: f.comps.iter().map(|x| self.base.negate(x)).collect() }
    }

    fn biproduct(&self, a: &DObj<C>, b: &DObj<C>) -> Result<BiproductCert<Self>> {
        let bps = (0..self.len).map(|k| self.base.biproduct(&a.objects[k], &b.objects[k])).collect::<Result<Vec<_>>>()?;
        let arrows = (0..self.len - 1).map(|k| self.base.diag(&a.arrows[k], &b.arrows[k])).collect::<Result<_>>()?;
        let sum = DiagramObj { objects: bps.iter().map(|bp| bp.sum.clone()).collect(), arrows };
        let pick = |from: &DObj<C>, to: &DObj<C>, leg: fn(&BiproductCert<C>) -> &C::Mor| DiagramMor {
            from: from.clone(),
            to: to.clone(),
            comps: bps.iter().map(|bp| leg(bp).clone()).collect(),
        };
        Ok(BiproductCert {
            inj1: pick(a, &sum, |bp| &bp.inj1),
            inj2: pick(b, &sum, |bp| &bp.inj2),
            proj1: pick(&sum, a, |bp| &bp.proj1),
            proj2: pick(&sum, b, |bp| &bp.proj2),
            sum,
        })
    }

    /// Diagrams whose object sizes sum to at most `bound`, in the order of
    /// the base enumeration degree by degree, then of the arrows.
    fn enumerate_objects(&self, bound: usize) -> Result<Vec<DObj<C>>> {
        let base = self.base.enumerate_objects(bound)?;
        let mut tuples = Vec::new();
        self.objects_with_total(&base, bound, &mut Vec::new(), &mut tuples);
        let mut out = Vec::new();
        for t in &tuples {
            self.arrow_choices(t, &mut Vec::new(), &mut out)?;
        }
        Ok(out)
    }

    fn kernel_object(&self, f: &DMor<C>) -> Result<Option<(DObj<C>, DMor<C>)>> {
        let mut parts = Vec::with_capacity(self.len);
        for x in &f.comps {
            match self.base.kernel_object(x)? {
                Some(p) => parts.push(p),
                None => return Ok(None),
            }
        }
        let mut arrows = Vec::with_capacity(self.len - 1);
        for k in 0..self.len - 1 {
            let (s, t) = self.ends(k);
            let through = self.base.compose(&f.from.arrows[k], &parts[s].1)?;
            let a = self.base.lift(&parts[t].1, &through)?.ok_or_else(|| {
                CategoryError::DecisionConflict(format!("arrow {k} does not restrict to the degreewise kernels"))
            })?;
            arrows.push(a);
        }
        let k = DiagramObj { objects: parts.iter().map(|p| p.0.clone()).collect(), arrows };
        let incl = DiagramMor { from: k.clone(), to: f.from.clone(), comps: parts.into_iter().map(|p| p.1).collect() };
        Ok(Some((k, incl)))
    }

    fn cokernel_object(&self, f: &DMor<C>) -> Result<Option<(DObj<C>, DMor<C>)>> {
        let mut parts = Vec::with_capacity(self.len);
        for x in &f.comps {
            match self.base.cokernel_object(x)? {
                Some(p) => parts.push(p),
                None => return Ok(None),
            }
        }
        let mut arrows = Vec::with_capacity(self.len - 1);
        for k in 0..self.len - 1 {
            let (s, t) = self.ends(k);
            let through = self.base.compose(&parts[t].1, &f.to.arrows[k])?;
            let a = self.base.extend(&parts[s].1, &through)?.ok_or_else(|| {
                CategoryError::DecisionConflict(format!("arrow {k} does not descend to the degreewise cokernels"))
            })?;
            arrows.push(a);
        }
        let q = DiagramObj { objects: parts.iter().map(|p| p.0.clone()).collect(), arrows };
        let proj = DiagramMor { from: f.to.clone(), to: q.clone(), comps: parts.into_iter().map(|p| p.1).collect() };
        Ok(Some((q, proj)))
    }

    fn ring(&self) -> Result<ZMod> {
        self.base.ring()
    }

    fn payload(&self, f: &DMor<C>) -> Vec<u32> {
        f.comps.iter().flat_map(|x| self.base.payload(x)).collect()
    }

    /// Degreewise frames side by side, plus commutation with every arrow.
    fn hom_frame(&self, a: &DObj<C>, b: &DObj<C>) -> Result<HomFrame> {
        Ok(self.frame_and_dims(a, b)?.0)
    }

    fn from_payload(&self, a: &DObj<C>, b: &DObj<C>, x: &[u32]) -> DMor<C> {
        let (_, dims) = self.frame_and_dims(a, b).expect("hom frame of enumerated objects");
        DiagramMor { from: a.clone(), to: b.clone(), comps: self.split_payload(a, b, &dims, x) }
    }

    fn is_zero(&self, f: &DMor<C>) -> bool {
        f.comps.iter().all(|x| self.base.is_zero(x))
    }

    fn object_size(&self, a: &DObj<C>) -> usize {
        a.objects.iter().map(|o| self.base.object_size(o)).sum()
    }

    // Length 1 is the base instance itself; longer diagrams have no
    // general isomorphism invariant here.
    fn iso_key(&self, f: &DMor<C>) -> Option<Vec<u32>> {
        if self.len == 1 {
            self.base.iso_key(&f.comps[0])
        } else {
            None
        }
    }

    fn object_key(&self, a: &DObj<C>) -> Option<Vec<u32>> {
        if self.len == 1 {
            self.base.object_key(&a.objects[0])
        } else {
            None
        }
    }
}

/// Stability of one sequence of diagrams against stability of its
/// components.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct EquivalenceCase<C: AdditiveCategory> {
    pub i: DMor<C>,
    pub d: DMor<C>,
    pub diagram_stable: bool,
    pub component_stable: Vec<bool>,
    pub agree: bool,
    /// The first refuted half in the diagram category, if any.
    pub diagram_witness: Option<SemiStableVerdict<Diagrams<C>>>,
    /// The first refuted half per unstable degree.
    pub component_witnesses: Vec<(usize, SemiStableVerdict<C>)>,
}

/// Agreement between stability of diagram sequences and stability of
/// their components, over every kernel-cokernel pair within the bound.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct EquivalenceReport<C: AdditiveCategory> {
    pub instance: String,
    pub shape: Shape,
    pub length: usize,
    /// Diagrams are truncated to finite length; the bound is on total size.
    pub truncation: String,
    pub bounds: Bounds,
    pub cases: u64,
    pub agreements: u64,
    pub stable: u64,
    pub disagreements: Vec<EquivalenceCase<C>>,
}

impl<C: AdditiveCategory> EquivalenceReport<C> {
    pub fn all_agree(&self) -> bool {
        self.agreements == self.cases
    }
}

fn same_bounds<A: AdditiveCategory, B: AdditiveCategory>(x: &Certifier<A>, y: &Certifier<B>) -> Result<()> {
    if x.bounds() != y.bounds() {
        return Err(CategoryError::BoundMismatch(format!("{:?} vs {:?}", x.bounds(), y.bounds())));
    }
    Ok(())
}

/// Certifies `(i, d)` in the diagram category and `(i_k, d_k)` in the base
/// for every degree, at matched bounds.
pub fn degreewise_stable_equiv<C: AdditiveCategory>(
    diagrams: &Certifier<Diagrams<C>>,
    base: &Certifier<C>,
    i: &DMor<C>,
    d: &DMor<C>,
) -> Result<EquivalenceCase<C>> {
    same_bounds(diagrams, base)?;
    let whole = diagrams.certify_stable_ses(i, d)?;
    let mut component_stable = Vec::with_capacity(i.comps.len());
    let mut component_witnesses = Vec::new();
    for (k, (ik, dk)) in i.comps.iter().zip(&d.comps).enumerate() {
        let part = base.certify_stable_ses(ik, dk)?;
        component_stable.push(part.is_stable());
        if let Some(w) = part.witness() {
            component_witnesses.push((k, w.clone()));
        }
    }
    let diagram_stable = whole.is_stable();
    Ok(EquivalenceCase {
        i: i.clone(),
        d: d.clone(),
        diagram_stable,
        agree: diagram_stable == component_stable.iter().all(|&s| s),
        component_stable,
        diagram_witness: whole.witness().cloned(),
        component_witnesses,
    })
}

/// The spectrum name for [`degreewise_stable_equiv`].
pub fn levelwise_stable_equiv<C: AdditiveCategory>(
    spectra: &Certifier<Diagrams<C>>,
    base: &Certifier<C>,
    i: &DMor<C>,
    d: &DMor<C>,
) -> Result<EquivalenceCase<C>> {
    degreewise_stable_equiv(spectra, base, i, d)
}

/// Runs [`degreewise_stable_equiv`] on every kernel-cokernel pair of
/// diagrams within the bound, in parallel; the report order is fixed.
pub fn equivalence_sweep<C: AdditiveCategory>(
    diagrams: &Certifier<Diagrams<C>>,
    base: &Certifier<C>,
) -> Result<EquivalenceReport<C>> {
    same_bounds(diagrams, base)?;
    let pairs = diagrams.kernel_cokernel_pairs()?;
    let cases: Vec<EquivalenceCase<C>> =
        pairs.par_iter().map(|(i, d)| degreewise_stable_equiv(diagrams, base, i, d)).collect::<Result<_>>()?;
    let cat = diagrams.category();
    Ok(EquivalenceReport {
        instance: cat.base().descriptor(),
        shape: cat.shape(),
        length: cat.len(),
        truncation: format!("length {}, total size at most {}", cat.len(), diagrams.bounds().objects),
        bounds: diagrams.bounds(),
        cases: cases.len() as u64,
        agreements: cases.iter().filter(|c| c.agree).count() as u64,
        stable: cases.iter().filter(|c| c.diagram_stable).count() as u64,
        disagreements: cases.into_iter().filter(|c| !c.agree).collect(),
    })
}
