//! The idempotent completion: objects `(A, p)` with `p p = p`, morphisms
//! `f: (A, p) -> (B, q)` with `f = q f p`, and the embedding `H(A) = (A, 1)`.
//!
//! Kernels in the completion need a base hook that splits off the submodule
//! `{x in im p : f x = 0}` as an idempotent; free modules over `Z/n` provide
//! one.

use serde::Serialize;

use crate::category::{linear_map_matrix, AdditiveCategory, BiproductCert, Bounds, HomFrame, ObjectClass};
use crate::error::{shape, CategoryError, Result};
use crate::instances::FreeModules;
use crate::limits::{verify_universal, KernelCert, PullbackSquare, Square};
use crate::matrix::Matrix;
use crate::normal_form::smith_form;
use crate::ring::ZMod;
use crate::stability::{
    obscure_cokernel, representatives, Certifier, ClosurePolicy, ObscureTrace, Outcome, SemiStableVerdict, Side,
};

/// What a base instance must supply for its completion to have kernels and
/// cokernels.
pub trait KaroubiBase: AdditiveCategory {
    /// For `f: (A, p) -> (B, q)`, an idempotent `e` on `A` with `p e = e`
    /// whose image is `{x in im p : f x = 0}`; `None` if no such `e` exists.
    fn kernel_idempotent(&self, f: &Self::Mor, p: &Self::Mor) -> Result<Option<Self::Mor>>;

    /// Dually an idempotent `e'` on `B` with `e' q = e'`, `e' f = 0`, through
    /// which every such morphism out of `(B, q)` factors.
    fn cokernel_idempotent(&self, f: &Self::Mor, q: &Self::Mor) -> Result<Option<Self::Mor>>;

    /// Complete isomorphism invariant of `(A, p)`.
    fn idempotent_key(&self, _p: &Self::Mor) -> Option<Vec<u32>> {
        None
    }

    /// Complete isomorphism invariant of `f: (A, p) -> (B, q)`.
    fn completion_arrow_key(&self, _f: &Self::Mor, _p: &Self::Mor, _q: &Self::Mor) -> Option<Vec<u32>> {
        None
    }
}

/// Nonzero Smith invariants, which classify images of idempotents (and
/// arrows between them) over `Z/n` one local factor at a time.
fn nonzero_invariants(m: &Matrix) -> Vec<u32> {
    smith_form(m).diag.into_iter().filter(|&d| d != 0).collect()
}

impl KaroubiBase for FreeModules {
    fn kernel_idempotent(&self, f: &Matrix, p: &Matrix) -> Result<Option<Matrix>> {
        Ok(self.completion_kernel_idempotent(f, p))
    }

    fn cokernel_idempotent(&self, f: &Matrix, q: &Matrix) -> Result<Option<Matrix>> {
        Ok(self.completion_cokernel_idempotent(f, q))
    }

    fn idempotent_key(&self, p: &Matrix) -> Option<Vec<u32>> {
        Some(nonzero_invariants(p))
    }

    fn completion_arrow_key(&self, f: &Matrix, p: &Matrix, q: &Matrix) -> Option<Vec<u32>> {
        // 0 never occurs among nonzero invariants, so it separates the parts
        let mut key = nonzero_invariants(p);
        key.push(0);
        key.extend(nonzero_invariants(q));
        key.push(0);
        key.extend(nonzero_invariants(f));
        Some(key)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KaroubiObj<O, M> {
    pub base: O,
    pub p: M,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KaroubiMor<O, M> {
    pub from: KaroubiObj<O, M>,
    pub to: KaroubiObj<O, M>,
    pub f: M,
}

pub type Obj<C> = KaroubiObj<<C as AdditiveCategory>::Obj, <C as AdditiveCategory>::Mor>;
pub type Mor<C> = KaroubiMor<<C as AdditiveCategory>::Obj, <C as AdditiveCategory>::Mor>;

/// The idempotent completion of `base`. With `dedupe` set, object
/// enumeration keeps one pair per isomorphism class.
#[derive(Clone, Debug)]
pub struct Karoubi<C> {
    base: C,
    dedupe: bool,
}

impl<C: KaroubiBase> Karoubi<C> {
    pub fn new(base: C) -> Self {
        Karoubi { base, dedupe: false }
    }

    pub fn deduplicated(base: C) -> Self {
        Karoubi { base, dedupe: true }
    }

    pub fn base(&self) -> &C {
        &self.base
    }

    pub fn dedupes(&self) -> bool {
        self.dedupe
    }

    /// `(A, p)`, checking `p p = p`.
    pub fn object(&self, a: C::Obj, p: C::Mor) -> Result<Obj<C>> {
        if self.base.dom(&p) != a || self.base.cod(&p) != a || self.base.compose(&p, &p)? != p {
            return Err(CategoryError::NotIdempotent(format!("{p:?}")));
        }
        Ok(KaroubiObj { base: a, p })
    }

    /// `f: X -> Y`, checking `f = q f p`.
    pub fn morphism(&self, from: &Obj<C>, to: &Obj<C>, f: C::Mor) -> Result<Mor<C>> {
        let sandwiched = self.base.compose(&to.p, &self.base.compose(&f, &from.p)?)?;
        if sandwiched != f {
            return Err(CategoryError::InvalidMorphism(format!("{f:?} is not q f p")));
        }
        Ok(KaroubiMor { from: from.clone(), to: to.clone(), f })
    }

    pub fn embed_object(&self, a: &C::Obj) -> Obj<C> {
        KaroubiObj { base: a.clone(), p: self.base.identity(a) }
    }

    /// `H(f)`.
    pub fn embed(&self, f: &C::Mor) -> Mor<C> {
        KaroubiMor { from: self.embed_object(&self.base.dom(f)), to: self.embed_object(&self.base.cod(f)), f: f.clone() }
    }

    /// Idempotent endomorphisms of `a`, by filtering all endomorphisms.
    pub fn idempotents(&self, a: &C::Obj) -> Result<Vec<C::Mor>> {
        let mut out = Vec::new();
        for p in self.base.enumerate_homs(a, a)? {
            if self.base.compose(&p, &p)? == p {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Kernel of an idempotent endomorphism `e` of `(A, p)`: the pair
    /// `(A, p - e)` with inclusion `p - e`.
    pub fn split_idempotent(&self, e: &Mor<C>) -> Result<KernelCert<Self>> {
        if e.from != e.to || self.base.compose(&e.f, &e.f)? != e.f {
            return Err(CategoryError::NotIdempotent(format!("{:?}", e.f)));
        }
        let x = &e.from;
        let complement = self.base.sub(&x.p, &e.f)?;
        let k = KaroubiObj { base: x.base.clone(), p: complement.clone() };
        let inclusion = KaroubiMor { from: k.clone(), to: x.clone(), f: complement };
        KernelCert::new(self, e.clone(), k, inclusion)
    }
}

impl<C: KaroubiBase> AdditiveCategory for Karoubi<C> {
    type Obj = Obj<C>;
    type Mor = Mor<C>;

    fn descriptor(&self) -> String {
        format!("karoubi({})", self.base.descriptor())
    }

    fn dom(&self, f: &Mor<C>) -> Obj<C> {
        f.from.clone()
    }

    fn cod(&self, f: &Mor<C>) -> Obj<C> {
        f.to.clone()
    }

    fn zero_object(&self) -> Obj<C> {
        self.embed_object(&self.base.zero_object())
    }

    fn identity(&self, a: &Obj<C>) -> Mor<C> {
        KaroubiMor { from: a.clone(), to: a.clone(), f: a.p.clone() }
    }

    fn zero_mor(&self, a: &Obj<C>, b: &Obj<C>) -> Mor<C> {
        KaroubiMor { from: a.clone(), to: b.clone(), f: self.base.zero_mor(&a.base, &b.base) }
    }

    fn compose(&self, g: &Mor<C>, f: &Mor<C>) -> Result<Mor<C>> {
        if f.to != g.from {
            return Err(shape("compose", format!("{:?} then {:?}", f.to, g.from)));
        }
        Ok(KaroubiMor { from: f.from.clone(), to: g.to.clone(), f: self.base.compose(&g.f, &f.f)? })
    }

    fn add(&self, f: &Mor<C>, g: &Mor<C>) -> Result<Mor<C>> {
        if f.from != g.from || f.to != g.to {
            return Err(shape("add", "different domains or codomains"));
        }
        Ok(KaroubiMor { from: f.from.clone(), to: f.to.clone(), f: self.base.add(&f.f, &g.f)? })
    }

    fn negate(&self, f: &Mor<C>) -> Mor<C> {
        KaroubiMor { from: f.from.clone(), to: f.to.clone(), f: self.base.negate(&f.f) }
    }

    /// `(A, p) ⊕ (B, q) = (A ⊕ B, p ⊕ q)`.
    fn biproduct(&self, a: &Obj<C>, b: &Obj<C>) -> Result<BiproductCert<Self>> {
        let bp = self.base.biproduct(&a.base, &b.base)?;
        let sum = KaroubiObj { base: bp.sum.clone(), p: self.base.diag(&a.p, &b.p)? };
        let wrap = |from: &Obj<C>, to: &Obj<C>, f: C::Mor| KaroubiMor { from: from.clone(), to: to.clone(), f };
        Ok(BiproductCert {
            inj1: wrap(a, &sum, self.base.compose(&bp.inj1, &a.p)?),
            inj2: wrap(b, &sum, self.base.compose(&bp.inj2, &b.p)?),
            proj1: wrap(&sum, a, self.base.compose(&a.p, &bp.proj1)?),
            proj2: wrap(&sum, b, self.base.compose(&b.p, &bp.proj2)?),
            sum,
        })
    }

    fn enumerate_objects(&self, bound: usize) -> Result<Vec<Obj<C>>> {
        let mut out = Vec::new();
        for a in self.base.enumerate_objects(bound)? {
            for p in self.idempotents(&a)? {
                out.push(KaroubiObj { base: a.clone(), p });
            }
        }
        Ok(if self.dedupe { representatives(self, out) } else { out })
    }

    fn kernel_object(&self, f: &Mor<C>) -> Result<Option<(Obj<C>, Mor<C>)>> {
        let Some(e) = self.base.kernel_idempotent(&f.f, &f.from.p)? else { return Ok(None) };
        let k = KaroubiObj { base: f.from.base.clone(), p: e.clone() };
        Ok(Some((k.clone(), KaroubiMor { from: k, to: f.from.clone(), f: e })))
    }

    fn cokernel_object(&self, f: &Mor<C>) -> Result<Option<(Obj<C>, Mor<C>)>> {
        let Some(e) = self.base.cokernel_idempotent(&f.f, &f.to.p)? else { return Ok(None) };
        let q = KaroubiObj { base: f.to.base.clone(), p: e.clone() };
        Ok(Some((q.clone(), KaroubiMor { from: f.to.clone(), to: q, f: e })))
    }

    fn ring(&self) -> Result<ZMod> {
        self.base.ring()
    }

    fn payload(&self, f: &Mor<C>) -> Vec<u32> {
        self.base.payload(&f.f)
    }

    /// Base constraints plus `q f p - f = 0`.
    fn hom_frame(&self, a: &Obj<C>, b: &Obj<C>) -> Result<HomFrame> {
        let frame = self.base.hom_frame(&a.base, &b.base)?;
        let ring = self.base.ring()?;
        let sandwich = linear_map_matrix(ring, frame.dim, frame.dim, |x| {
            let f = self.base.from_payload(&a.base, &b.base, x);
            let qfp = self.base.compose(&b.p, &self.base.compose(&f, &a.p)?)?;
            Ok(self.base.payload(&self.base.sub(&qfp, &f)?))
        })?;
        Ok(HomFrame { dim: frame.dim, constraints: frame.constraints.vstack(&sandwich)? })
    }

    fn from_payload(&self, a: &Obj<C>, b: &Obj<C>, x: &[u32]) -> Mor<C> {
        KaroubiMor { from: a.clone(), to: b.clone(), f: self.base.from_payload(&a.base, &b.base, x) }
    }

    fn is_zero(&self, f: &Mor<C>) -> bool {
        self.base.is_zero(&f.f)
    }

    fn iso_key(&self, f: &Mor<C>) -> Option<Vec<u32>> {
        self.base.completion_arrow_key(&f.f, &f.from.p, &f.to.p)
    }

    fn object_size(&self, a: &Obj<C>) -> usize {
        self.base.object_size(&a.base)
    }

    fn object_key(&self, a: &Obj<C>) -> Option<Vec<u32>> {
        self.base.idempotent_key(&a.p)
    }
}

/// `X ≅ H(B)` witnessed by `f: X -> H(B)` and its inverse `g`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct EssentialImageWitness<C: AdditiveCategory> {
    pub base: C::Obj,
    pub to: Mor<C>,
    pub from: Mor<C>,
}

/// Result of searching for `X ≅ H(B)` with `B` within a bound.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct EssentialImageSearch<C: AdditiveCategory> {
    pub object: Obj<C>,
    pub bound: usize,
    pub found: Option<EssentialImageWitness<C>>,
    /// Candidates `B` excluded because some `Hom(H(T), -)` has the wrong size.
    pub pruned: usize,
    /// Morphism pairs `(f, g)` examined by the search.
    pub pairs_checked: u64,
}

impl<C: KaroubiBase> Karoubi<C> {
    /// Looks for `B` within `bound` and mutually inverse `f: X -> H(B)`,
    /// `g: H(B) -> X`. With `exhaustive` unset, candidates are first pruned by
    /// comparing `|Hom(H(T), X)|` with `|Hom(T, B)|` and `g` is solved for
    /// rather than enumerated.
    pub fn essential_image_search(&self, x: &Obj<C>, bound: usize, exhaustive: bool) -> Result<EssentialImageSearch<C>> {
        let mut report =
            EssentialImageSearch { object: x.clone(), bound, found: None, pruned: 0, pairs_checked: 0 };
        let probes = self.base.enumerate_objects(bound)?;
        let one_x = self.identity(x);
        for b in &probes {
            let hb = self.embed_object(b);
            if !exhaustive {
                let mut sizes_match = true;
                for t in &probes {
                    let ht = self.embed_object(t);
                    if self.hom_count(&ht, x)? != self.base.hom_count(t, b)? {
                        sizes_match = false;
                        break;
                    }
                }
                if !sizes_match {
                    report.pruned += 1;
                    continue;
                }
            }
            let one_b = self.identity(&hb);
            for f in self.enumerate_homs(x, &hb)? {
                if exhaustive {
                    for g in self.enumerate_homs(&hb, x)? {
                        report.pairs_checked += 1;
                        if self.compose(&g, &f)? == one_x && self.compose(&f, &g)? == one_b {
                            report.found = Some(EssentialImageWitness { base: b.clone(), to: f, from: g });
                            return Ok(report);
                        }
                    }
                } else if let Some(g) = self.inverse(&f)? {
                    report.pairs_checked += 1;
                    report.found = Some(EssentialImageWitness { base: b.clone(), to: f, from: g });
                    return Ok(report);
                }
            }
        }
        Ok(report)
    }

    pub fn in_essential_image(&self, x: &Obj<C>, bound: usize) -> Result<Option<EssentialImageWitness<C>>> {
        Ok(self.essential_image_search(x, bound, false)?.found)
    }

    /// `Im(H)` as an object class; membership searches `B` within `bound`.
    pub fn image_class(&self, bound: usize) -> ObjectClass<Obj<C>> {
        let k = self.clone();
        ObjectClass::memoized("Im(H)", move |x: &Obj<C>| matches!(k.in_essential_image(x, bound), Ok(Some(_))))
    }

    /// A certifier in the completion whose class is `Im(H)`; test objects are
    /// `H(A)` for `A` within the bound, one per isomorphism class.
    ///
    /// `Im(H)` need not be closed under pullbacks (over `Z/6` the kernel of
    /// `H(3)` is `(R, 4)`), so closure violations are reported rather than
    /// fatal; see [`Certifier::closure_violation`].
    pub fn image_certifier(&self, bounds: Bounds, search_bound: usize) -> Result<Certifier<Self>> {
        let tests = representatives(self, self.base.enumerate_objects(bounds.objects)?.iter().map(|a| self.embed_object(a)));
        Ok(Certifier::with_tests(self.clone(), self.image_class(search_bound), bounds, tests)
            .with_closure_policy(ClosurePolicy::Report))
    }

    /// Image under `H` of a base pullback square. The mediator of a cone
    /// `(x, y)` out of `(D, p)` is `w p`, where `w` mediates the underlying
    /// base cone.
    pub fn transfer_pullback(&self, sq: &PullbackSquare<C>) -> PullbackSquare<Self> {
        let s = &sq.square;
        let square: Square<Self> = Square {
            d: self.embed(&s.d),
            h: self.embed(&s.h),
            apex: self.embed_object(&s.apex),
            g: self.embed(&s.g),
            d_prime: self.embed(&s.d_prime),
        };
        let (base, sq2, apex) = (self.base.clone(), sq.clone(), square.apex.clone());
        PullbackSquare::with_mediator(square, move |x: &Mor<C>, y: &Mor<C>| {
            let w = sq2.mediate(&x.f, &y.f)?;
            Ok(KaroubiMor { from: x.from.clone(), to: apex.clone(), f: base.compose(&w, &x.from.p)? })
        })
    }

    /// A base square from a completion pullback of `H(d)` and `H(h)` whose
    /// apex is in `Im(H)`, found within `search_bound`.
    pub fn reflect_pullback(&self, sq: &PullbackSquare<Self>, search_bound: usize) -> Result<Option<PullbackSquare<C>>> {
        let s = &sq.square;
        let Some(iso) = self.in_essential_image(&s.apex, search_bound)? else { return Ok(None) };
        let g = self.compose(&s.g, &iso.from)?.f;
        let d_prime = self.compose(&s.d_prime, &iso.from)?.f;
        let square: Square<C> = Square { d: s.d.f.clone(), h: s.h.f.clone(), apex: iso.base.clone(), g, d_prime };
        let (k, sq2, to) = (self.clone(), sq.clone(), iso.to.clone());
        Ok(Some(PullbackSquare::with_mediator(square, move |x: &C::Mor, y: &C::Mor| {
            let u = sq2.mediate(&k.embed(x), &k.embed(y))?;
            Ok(k.compose(&to, &u)?.f)
        })))
    }

    /// Maps a completion-side verdict about `H(d)` back to the base. A
    /// witness `c: X -> H(C)` becomes `c ∘ g` for the iso `g: H(B) -> X`.
    pub fn reflect_verdict(&self, v: &SemiStableVerdict<Self>, search_bound: usize) -> Result<SemiStableVerdict<C>> {
        let outcome = match &v.outcome {
            Outcome::Certified { bounds, class, tested } => {
                Outcome::Certified { bounds: *bounds, class: class.clone(), tested: *tested }
            }
            Outcome::Refuted { witness, failure } => {
                let end = match v.kind {
                    Side::Cokernel => &witness.from,
                    Side::Kernel => &witness.to,
                };
                let iso = self.in_essential_image(end, search_bound)?.ok_or_else(|| {
                    CategoryError::PreconditionFailed(format!("witness end {end:?} is outside Im(H)"))
                })?;
                let mapped = match v.kind {
                    Side::Cokernel => self.compose(witness, &iso.from)?,
                    Side::Kernel => self.compose(&iso.to, witness)?,
                };
                Outcome::Refuted { witness: mapped.f, failure: *failure }
            }
        };
        Ok(SemiStableVerdict { kind: v.kind, subject: v.subject.f.clone(), outcome })
    }
}

/// Absolute verdict in the base next to the `Im(H)`-relative verdict for
/// `H(d)` in the completion.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct TransferReport<C: AdditiveCategory> {
    pub subject: C::Mor,
    pub base: SemiStableVerdict<C>,
    /// The completion verdict read back in the base.
    pub completion: SemiStableVerdict<C>,
    pub agree: bool,
}

/// Runs both certifications of a base cokernel `d` at matched bounds.
pub fn transfer_semistable<C: KaroubiBase>(
    base: &Certifier<C>,
    completion: &Certifier<Karoubi<C>>,
    d: &C::Mor,
    search_bound: usize,
) -> Result<TransferReport<C>> {
    if base.bounds() != completion.bounds() {
        return Err(CategoryError::BoundMismatch(format!("{:?} vs {:?}", base.bounds(), completion.bounds())));
    }
    let k = completion.category();
    let direct = base.certify_cokernel(d)?;
    let lifted = completion.certify_cokernel(&k.embed(d))?;
    let mapped = k.reflect_verdict(&lifted, search_bound)?;
    let agree = match (&direct.outcome, &mapped.outcome) {
        (Outcome::Certified { .. }, Outcome::Certified { .. }) => true,
        (Outcome::Refuted { .. }, Outcome::Refuted { .. }) => mapped.replay(base.category())?,
        _ => false,
    };
    Ok(TransferReport { subject: d.clone(), base: direct, completion: mapped, agree })
}

/// The cancellation construction for `p` run inside the completion on
/// `H(d)`, `H(p)` with class `Im(H)`, and its verdict read back in the base.
/// This is the route for bases that are not weakly idempotent complete.
pub fn obscure_via_completion<C: KaroubiBase>(
    completion: &Certifier<Karoubi<C>>,
    d: &C::Mor,
    p: &C::Mor,
    search_bound: usize,
) -> Result<(SemiStableVerdict<C>, ObscureTrace<Karoubi<C>>)> {
    let k = completion.category();
    let (v, trace) = obscure_cokernel(completion, &k.embed(d), &k.embed(p))?;
    Ok((k.reflect_verdict(&v, search_bound)?, trace))
}

/// Direct cancellation when the base is weakly idempotent complete within
/// the bound, otherwise the completion route.
pub fn obscure_routed<C: KaroubiBase>(
    base: &Certifier<C>,
    completion: &Certifier<Karoubi<C>>,
    d: &C::Mor,
    p: &C::Mor,
    search_bound: usize,
) -> Result<SemiStableVerdict<C>> {
    if base.unsplit_retraction()?.is_none() {
        Ok(obscure_cokernel(base, d, p)?.0)
    } else {
        Ok(obscure_via_completion(completion, d, p, search_bound)?.0)
    }
}

/// Counts from checking that `H` is bijective on hom-sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FaithfulnessReport {
    pub pairs: usize,
    pub morphisms: u64,
    pub mismatches: usize,
}

impl<C: KaroubiBase> Karoubi<C> {
    /// Compares `Hom(A, B)` with `Hom(H(A), H(B))` element by element for all
    /// base objects within the bound.
    pub fn check_fully_faithful(&self, bound: usize) -> Result<FaithfulnessReport> {
        let objects = self.base.enumerate_objects(bound)?;
        let mut r = FaithfulnessReport::default();
        for a in &objects {
            for b in &objects {
                r.pairs += 1;
                let base: std::collections::HashSet<C::Mor> = self.base.enumerate_homs(a, b)?.into_iter().collect();
                let lifted: Vec<Mor<C>> = self.enumerate_homs(&self.embed_object(a), &self.embed_object(b))?;
                r.morphisms += lifted.len() as u64;
                let image: std::collections::HashSet<C::Mor> = lifted.into_iter().map(|m| m.f).collect();
                if image != base {
                    r.mismatches += 1;
                }
            }
        }
        Ok(r)
    }

    /// Splits every idempotent endomorphism of every object within the bound
    /// and runs the oracle on each kernel; returns (idempotents, failures).
    pub fn check_idempotent_complete(&self, bound: usize, oracle: usize) -> Result<(u64, u64)> {
        let (mut n, mut failures) = (0, 0);
        for x in self.enumerate_objects(bound)? {
            for e in self.enumerate_homs(&x, &x)? {
                if self.compose(&e, &e)? != e {
                    continue;
                }
                n += 1;
                let cert = self.split_idempotent(&e)?;
                if !verify_universal(self, &cert, oracle)?.passed() {
                    failures += 1;
                }
            }
        }
        Ok((n, failures))
    }
}
