//! Semi-stable kernels and cokernels relative to an object class, certified
//! by exhaustive search within explicit bounds, together with the
//! constructions that produce new semi-stable cokernels from old ones
//! (composites, direct sums, and the cancellation `p ∘ d ⇒ p`).
//!
//! A verdict never claims more than the search covered: `Certified` records
//! the bounds and the class, `Refuted` records the first failing test
//! morphism in enumeration order, which replays to the same failure.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::{AdditiveCategory, Bounds, ObjectClass};
use crate::error::{CategoryError, Result};
use crate::limits::{
    as_pullback, cokernel_cert, is_cokernel, is_kernel, kernel_cert, kernel_lift, pullback_square, pushout_square,
    verify_universal, KernelCert, PullbackSquare, Square,
};
use crate::opposite::Opposite;

/// Which half of a short exact sequence a verdict is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Kernel,
    Cokernel,
}

/// Why a test morphism refutes semi-stability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityFailure {
    PullbackMissing,
    NotACokernel,
    PushoutMissing,
    NotAKernel,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub enum Outcome<C: AdditiveCategory> {
    /// Every test morphism within `bounds` into (resp. out of) the subject,
    /// with its other end in `class`, passed; `tested` counts them.
    Certified { bounds: Bounds, class: String, tested: u64 },
    Refuted { witness: C::Mor, failure: StabilityFailure },
}

impl<C: AdditiveCategory> PartialEq for Outcome<C> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Outcome::Certified { bounds: b1, class: c1, tested: t1 },
                Outcome::Certified { bounds: b2, class: c2, tested: t2 },
            ) => b1 == b2 && c1 == c2 && t1 == t2,
            (
                Outcome::Refuted { witness: w1, failure: f1 },
                Outcome::Refuted { witness: w2, failure: f2 },
            ) => w1 == w2 && f1 == f2,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct SemiStableVerdict<C: AdditiveCategory> {
    pub kind: Side,
    pub subject: C::Mor,
    pub outcome: Outcome<C>,
}

impl<C: AdditiveCategory> SemiStableVerdict<C> {
    pub fn is_certified(&self) -> bool {
        matches!(self.outcome, Outcome::Certified { .. })
    }

    pub fn witness(&self) -> Option<(&C::Mor, StabilityFailure)> {
        match &self.outcome {
            Outcome::Refuted { witness, failure } => Some((witness, *failure)),
            Outcome::Certified { .. } => None,
        }
    }

    /// Re-runs the failing test: true iff the recorded failure recurs.
    pub fn replay(&self, cat: &C) -> Result<bool> {
        let Some((h, failure)) = self.witness() else { return Ok(false) };
        Ok(test_failure(cat, self.kind, &self.subject, h, &|m| match self.kind {
            Side::Cokernel => is_cokernel(cat, m),
            Side::Kernel => is_kernel(cat, m),
        })? == Some(failure))
    }
}

/// The failure, if any, of one test morphism against the subject.
fn test_failure<C: AdditiveCategory>(
    cat: &C,
    kind: Side,
    subject: &C::Mor,
    h: &C::Mor,
    recognise: &dyn Fn(&C::Mor) -> Result<bool>,
) -> Result<Option<StabilityFailure>> {
    Ok(match kind {
        Side::Cokernel => match pullback_square(cat, subject, h)? {
            None => Some(StabilityFailure::PullbackMissing),
            Some(sq) => (!recognise(sq.d_prime())?).then_some(StabilityFailure::NotACokernel),
        },
        Side::Kernel => match pushout_square(cat, subject, h)? {
            None => Some(StabilityFailure::PushoutMissing),
            Some(sq) => (!recognise(sq.i_prime())?).then_some(StabilityFailure::NotAKernel),
        },
    })
}

/// Cache key: the isomorphism class of an arrow when the instance can name
/// it, else the arrow itself.
#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) enum ArrowKey<M> {
    Iso(Vec<u32>),
    Exact(M),
}

pub(crate) fn arrow_key<C: AdditiveCategory>(cat: &C, f: &C::Mor) -> ArrowKey<C::Mor> {
    match cat.iso_key(f) {
        Some(k) => ArrowKey::Iso(k),
        None => ArrowKey::Exact(f.clone()),
    }
}

/// Number of cospans (and spans) sampled when checking class closure.
pub const CLOSURE_SAMPLES: usize = 2000;
const CLOSURE_SEED: u64 = 0x5eed_c1a5;

/// What certification does when the class closure check finds a violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosurePolicy {
    /// Abort with [`CategoryError::ClassClosureViolation`].
    Enforce,
    /// Certify anyway; the violation stays queryable through
    /// [`Certifier::closure_violation`]. Verdicts then only mean the
    /// defining property, not the consequences derived under closure.
    Report,
}

type HomCache<C> = HashMap<(<C as AdditiveCategory>::Obj, <C as AdditiveCategory>::Obj), Arc<Vec<<C as AdditiveCategory>::Mor>>>;
type ArrowCache<C, V> = HashMap<(Side, ArrowKey<<C as AdditiveCategory>::Mor>), V>;

/// Certification context: an instance, a class, bounds, and caches shared by
/// every verdict computed through it. Cached verdicts are keyed by arrow
/// isomorphism class, which semi-stability respects.
pub struct Certifier<C: AdditiveCategory> {
    cat: C,
    class: ObjectClass<C::Obj>,
    bounds: Bounds,
    tests: Vec<C::Obj>,
    homs: Mutex<HomCache<C>>,
    recognised: Mutex<ArrowCache<C, bool>>,
    /// Tested count for certified arrows, `None` for refuted ones.
    verdicts: Mutex<ArrowCache<C, Option<u64>>>,
    closure: OnceLock<Option<String>>,
    policy: ClosurePolicy,
    wic: OnceLock<Option<C::Mor>>,
}

impl<C: AdditiveCategory> fmt::Debug for Certifier<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Certifier")
            .field("instance", &self.cat.descriptor())
            .field("class", &self.class.name())
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl<C: AdditiveCategory> Certifier<C> {
    /// Test objects are the class members within `bounds.objects`, one per
    /// isomorphism class when the instance provides object keys. Semi-stability
    /// only depends on test objects up to isomorphism.
    pub fn new(cat: C, class: ObjectClass<C::Obj>, bounds: Bounds) -> Result<Self> {
        let tests = representatives(&cat, cat.enumerate_objects(bounds.objects)?.into_iter().filter(|o| class.contains(o)));
        Ok(Self::with_tests(cat, class, bounds, tests))
    }

    /// The absolute case: every object is in the class.
    pub fn absolute(cat: C, bounds: Bounds) -> Result<Self> {
        Self::new(cat, ObjectClass::all(), bounds)
    }

    /// Explicit test objects, used as given (no deduplication).
    pub fn with_tests(cat: C, class: ObjectClass<C::Obj>, bounds: Bounds, tests: Vec<C::Obj>) -> Self {
        Certifier {
            cat,
            class,
            bounds,
            tests,
            homs: Mutex::new(HashMap::new()),
            recognised: Mutex::new(HashMap::new()),
            verdicts: Mutex::new(HashMap::new()),
            closure: OnceLock::new(),
            policy: ClosurePolicy::Enforce,
            wic: OnceLock::new(),
        }
    }

    pub fn with_closure_policy(mut self, policy: ClosurePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn closure_policy(&self) -> ClosurePolicy {
        self.policy
    }

    pub fn category(&self) -> &C {
        &self.cat
    }

    pub fn class(&self) -> &ObjectClass<C::Obj> {
        &self.class
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn tests(&self) -> &[C::Obj] {
        &self.tests
    }

    /// `Hom(a, b)`, enumerated once.
    pub fn homs(&self, a: &C::Obj, b: &C::Obj) -> Result<Arc<Vec<C::Mor>>> {
        let key = (a.clone(), b.clone());
        if let Some(v) = self.homs.lock().expect("hom cache").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.cat.enumerate_homs(a, b)?);
        self.homs.lock().expect("hom cache").insert(key, v.clone());
        Ok(v)
    }

    fn recognise(&self, side: Side, f: &C::Mor) -> Result<bool> {
        let key = (side, arrow_key(&self.cat, f));
        if let Some(&v) = self.recognised.lock().expect("recognition cache").get(&key) {
            return Ok(v);
        }
        let v = match side {
            Side::Cokernel => is_cokernel(&self.cat, f)?,
            Side::Kernel => is_kernel(&self.cat, f)?,
        };
        self.recognised.lock().expect("recognition cache").insert(key, v);
        Ok(v)
    }

    pub fn is_cokernel(&self, d: &C::Mor) -> Result<bool> {
        self.recognise(Side::Cokernel, d)
    }

    pub fn is_kernel(&self, i: &C::Mor) -> Result<bool> {
        self.recognise(Side::Kernel, i)
    }

    /// Checks the class contains the zero object and keeps pullback and
    /// pushout apexes of class objects inside it, on a deterministic sample
    /// of at most [`CLOSURE_SAMPLES`] cospans and spans.
    pub fn check_closure(&self) -> Result<()> {
        match self.closure_violation()? {
            None => Ok(()),
            Some(detail) => Err(CategoryError::ClassClosureViolation { class: self.class.name().into(), detail }),
        }
    }

    /// The first sampled closure violation, computed once.
    pub fn closure_violation(&self) -> Result<Option<String>> {
        if let Some(v) = self.closure.get() {
            return Ok(v.clone());
        }
        let v = self.find_closure_violation()?;
        let _ = self.closure.set(v.clone());
        Ok(v)
    }

    fn find_closure_violation(&self) -> Result<Option<String>> {
        if self.class.is_everything() {
            return Ok(None);
        }
        if !self.class.contains(&self.cat.zero_object()) {
            return Ok(Some("zero object is missing".into()));
        }
        let all = self.cat.enumerate_objects(self.bounds.objects)?;
        // pullbacks: B, C' in the class, C arbitrary; pushouts dually
        let mut triples = Vec::new();
        for b in &self.tests {
            for c2 in &self.tests {
                for c in &all {
                    triples.push((b.clone(), c2.clone(), c.clone()));
                }
            }
        }
        for limit in [true, false] {
            let mut sizes = Vec::with_capacity(triples.len());
            for (b, c2, c) in &triples {
                let (x, y) = if limit {
                    (self.homs(b, c)?.len(), self.homs(c2, c)?.len())
                } else {
                    (self.homs(c, b)?.len(), self.homs(c, c2)?.len())
                };
                sizes.push((x * y) as u64);
            }
            let total: u64 = sizes.iter().sum();
            let picks: Vec<u64> = if total as usize <= CLOSURE_SAMPLES {
                (0..total).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(CLOSURE_SEED);
                (0..CLOSURE_SAMPLES).map(|_| rng.gen_range(0..total)).collect()
            };
            for pick in picks {
                let (mut t, mut rest) = (0, pick);
                while rest >= sizes[t] {
                    rest -= sizes[t];
                    t += 1;
                }
                let (b, c2, c) = &triples[t];
                if let Some(v) = self.closure_case(limit, b, c2, c, rest)? {
                    return Ok(Some(v));
                }
            }
        }
        Ok(None)
    }

    fn closure_case(&self, limit: bool, b: &C::Obj, c2: &C::Obj, c: &C::Obj, idx: u64) -> Result<Option<String>> {
        if limit {
            let (ds, hs) = (self.homs(b, c)?, self.homs(c2, c)?);
            let (d, h) = (&ds[idx as usize / hs.len()], &hs[idx as usize % hs.len()]);
            if let Some(sq) = pullback_square(&self.cat, d, h)? {
                if !self.class.contains(sq.apex()) {
                    return Ok(Some(format!("pullback of {d:?} along {h:?} has apex {:?}", sq.apex())));
                }
            }
        } else {
            let (is, fs) = (self.homs(c, b)?, self.homs(c, c2)?);
            let (i, f) = (&is[idx as usize / fs.len()], &fs[idx as usize % fs.len()]);
            if let Some(sq) = pushout_square(&self.cat, i, f)? {
                if !self.class.contains(sq.apex()) {
                    return Ok(Some(format!("pushout of {i:?} along {f:?} has apex {:?}", sq.apex())));
                }
            }
        }
        Ok(None)
    }

    /// The first retraction within the object bound that has no kernel, or
    /// `None` if the instance looks weakly idempotent complete there.
    pub fn unsplit_retraction(&self) -> Result<Option<C::Mor>> {
        if let Some(v) = self.wic.get() {
            return Ok(v.clone());
        }
        let objects = self.cat.enumerate_objects(self.bounds.objects)?;
        let mut found = None;
        'outer: for a in &objects {
            for b in &objects {
                for r in self.homs(a, b)?.iter() {
                    if self.cat.lift(r, &self.cat.identity(b))?.is_some() && self.cat.kernel_object(r)?.is_none() {
                        found = Some(r.clone());
                        break 'outer;
                    }
                }
            }
        }
        let _ = self.wic.set(found.clone());
        Ok(found)
    }

    fn certified(&self, kind: Side, subject: &C::Mor, tested: u64) -> SemiStableVerdict<C> {
        SemiStableVerdict {
            kind,
            subject: subject.clone(),
            outcome: Outcome::Certified { bounds: self.bounds, class: self.class.name().into(), tested },
        }
    }

    fn certify(&self, kind: Side, subject: &C::Mor) -> Result<SemiStableVerdict<C>> {
        if !self.recognise(kind, subject)? {
            let text = format!("{subject:?}");
            return Err(match kind {
                Side::Cokernel => CategoryError::SubjectNotCokernel(text),
                Side::Kernel => CategoryError::SubjectNotKernel(text),
            });
        }
        if self.policy == ClosurePolicy::Enforce {
            self.check_closure()?;
        }
        let key = (kind, arrow_key(&self.cat, subject));
        if let Some(Some(tested)) = self.verdicts.lock().expect("verdict cache").get(&key) {
            return Ok(self.certified(kind, subject, *tested));
        }
        let anchor = match kind {
            Side::Cokernel => self.cat.cod(subject),
            Side::Kernel => self.cat.dom(subject),
        };
        let recognise = |m: &C::Mor| self.recognise(kind, m);
        let mut tested = 0u64;
        for t in &self.tests {
            let homs = match kind {
                Side::Cokernel => self.homs(t, &anchor)?,
                Side::Kernel => self.homs(&anchor, t)?,
            };
            for h in homs.iter() {
                tested += 1;
                if let Some(failure) = test_failure(&self.cat, kind, subject, h, &recognise)? {
                    self.verdicts.lock().expect("verdict cache").insert(key, None);
                    return Ok(SemiStableVerdict {
                        kind,
                        subject: subject.clone(),
                        outcome: Outcome::Refuted { witness: h.clone(), failure },
                    });
                }
            }
        }
        self.verdicts.lock().expect("verdict cache").insert(key, Some(tested));
        Ok(self.certified(kind, subject, tested))
    }

    /// Every pullback of `d` along a test morphism into `cod d` exists and is
    /// again a cokernel.
    pub fn certify_cokernel(&self, d: &C::Mor) -> Result<SemiStableVerdict<C>> {
        self.certify(Side::Cokernel, d)
    }

    /// Every pushout of `i` along a test morphism out of `dom i` exists and
    /// is again a kernel.
    pub fn certify_kernel(&self, i: &C::Mor) -> Result<SemiStableVerdict<C>> {
        self.certify(Side::Kernel, i)
    }

    /// Classifies a kernel-cokernel pair. Both halves are checked against
    /// the oracle at the oracle bound before any semi-stability search.
    pub fn certify_stable_ses(&self, i: &C::Mor, d: &C::Mor) -> Result<SesOutcome<C>> {
        self.check_kernel_cokernel_pair(i, d)?;
        let kernel = self.certify_kernel(i)?;
        let cokernel = self.certify_cokernel(d)?;
        Ok(if kernel.is_certified() && cokernel.is_certified() {
            SesOutcome::Stable(StableSesCert { i: i.clone(), d: d.clone(), kernel, cokernel })
        } else {
            SesOutcome::NotStable { i: i.clone(), d: d.clone(), kernel, cokernel }
        })
    }

    fn check_kernel_cokernel_pair(&self, i: &C::Mor, d: &C::Mor) -> Result<()> {
        let fail = |why: &str| Err(CategoryError::NotAKernelCokernelPair(format!("{why}: ({i:?}, {d:?})")));
        if self.cat.cod(i) != self.cat.dom(d) || !self.cat.is_zero(&self.cat.compose(d, i)?) {
            return fail("not composable to zero");
        }
        let (Some(ker), Some(cok)) = (kernel_cert(&self.cat, d)?, cokernel_cert(&self.cat, i)?) else {
            return fail("missing kernel or cokernel");
        };
        if !self.cat.is_iso(&ker.mediate(i)?)? || !self.cat.is_iso(&cok.mediate(d)?)? {
            return fail("comparison maps are not isomorphisms");
        }
        let oracle = self.bounds.oracle;
        if !verify_universal(&self.cat, &ker, oracle)?.passed() || !verify_universal(&self.cat, &cok, oracle)?.passed() {
            return fail("oracle rejects the kernel or cokernel certificate");
        }
        Ok(())
    }

    /// The sequence `ker d -> B -> C` for a cokernel `d`.
    pub fn sequence_of(&self, d: &C::Mor) -> Result<Option<C::Mor>> {
        if !self.is_cokernel(d)? {
            return Ok(None);
        }
        Ok(self.cat.kernel_object(d)?.map(|(_, k)| k))
    }

    /// Every cokernel `B -> C` with `B`, `C` within the object bound, in
    /// enumeration order, each paired with its kernel inclusion.
    pub fn kernel_cokernel_pairs(&self) -> Result<Vec<(C::Mor, C::Mor)>> {
        let objects = self.cat.enumerate_objects(self.bounds.objects)?;
        let mut out = Vec::new();
        for b in &objects {
            for c in &objects {
                for d in self.homs(b, c)?.iter() {
                    if let Some(i) = self.sequence_of(d)? {
                        out.push((i, d.clone()));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Classification of every kernel-cokernel pair within the bound. The
    /// work is spread over the current thread pool; order is preserved.
    pub fn classify(&self) -> Result<Vec<SesOutcome<C>>> {
        let pairs = self.kernel_cokernel_pairs()?;
        pairs.par_iter().map(|(i, d)| self.certify_stable_ses(i, d)).collect()
    }
}

/// One object per isomorphism class, first occurrence wins.
pub fn representatives<C: AdditiveCategory>(cat: &C, objects: impl IntoIterator<Item = C::Obj>) -> Vec<C::Obj> {
    let mut seen = std::collections::HashSet::new();
    objects
        .into_iter()
        .filter(|o| match cat.object_key(o) {
            Some(k) => seen.insert(k),
            None => true,
        })
        .collect()
}

/// A kernel-cokernel pair whose halves are both certified semi-stable.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct StableSesCert<C: AdditiveCategory> {
    pub i: C::Mor,
    pub d: C::Mor,
    pub kernel: SemiStableVerdict<C>,
    pub cokernel: SemiStableVerdict<C>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub enum SesOutcome<C: AdditiveCategory> {
    Stable(StableSesCert<C>),
    NotStable { i: C::Mor, d: C::Mor, kernel: SemiStableVerdict<C>, cokernel: SemiStableVerdict<C> },
}

impl<C: AdditiveCategory> SesOutcome<C> {
    pub fn is_stable(&self) -> bool {
        matches!(self, SesOutcome::Stable(_))
    }

    pub fn pair(&self) -> (&C::Mor, &C::Mor) {
        match self {
            SesOutcome::Stable(c) => (&c.i, &c.d),
            SesOutcome::NotStable { i, d, .. } => (i, d),
        }
    }

    pub fn verdicts(&self) -> (&SemiStableVerdict<C>, &SemiStableVerdict<C>) {
        match self {
            SesOutcome::Stable(c) => (&c.kernel, &c.cokernel),
            SesOutcome::NotStable { kernel, cokernel, .. } => (kernel, cokernel),
        }
    }

    /// The first refuted half, kernel side first.
    pub fn witness(&self) -> Option<&SemiStableVerdict<C>> {
        let (k, c) = self.verdicts();
        [k, c].into_iter().find(|v| !v.is_certified())
    }
}

fn require_certified<C: AdditiveCategory>(v: &SemiStableVerdict<C>, what: &str) -> Result<()> {
    if v.is_certified() {
        Ok(())
    } else {
        Err(CategoryError::PreconditionFailed(format!("{what} is not certified semi-stable")))
    }
}

fn require_member<C: AdditiveCategory>(cert: &Certifier<C>, o: &C::Obj, what: &str) -> Result<()> {
    if cert.class().contains(o) {
        Ok(())
    } else {
        Err(CategoryError::PreconditionFailed(format!("{what} {o:?} is not in class {}", cert.class().name())))
    }
}

/// The data produced while showing `p ∘ d` is semi-stable.
#[derive(Clone, Debug)]
pub struct ComposeResult<C: AdditiveCategory> {
    pub composite: C::Mor,
    pub verdict: SemiStableVerdict<C>,
    /// `h = ker p`.
    pub kernel_of_p: KernelCert<C>,
    /// Pullback of `d` along `ker p`; its leg `g` is the kernel of `p ∘ d`.
    pub pullback: PullbackSquare<C>,
    /// `g` as a kernel certificate for `p ∘ d`, with `i'` lifted from `ker d`.
    pub kernel_of_composite: KernelCert<C>,
    pub lifted_kernel: KernelCert<C>,
    /// `p ∘ d` is the cokernel of `g`.
    pub composite_is_cokernel_of_g: bool,
    /// Per test morphism `γ`, the pullback of `p ∘ d` built in two steps.
    pub rectangles: Vec<PullbackSquare<C>>,
}

/// Composite of two semi-stable cokernels `d: B -> C`, `p: C -> D` with `C`
/// in the class. The verdict comes from two-step pullbacks: along each test
/// `γ: G -> D`, pull `p` back to `(β, v)`, then `d` along `β` to `(α, u)`;
/// `(α, v ∘ u)` is then a pullback of `p ∘ d` along `γ`.
pub fn compose_semistable<C: AdditiveCategory>(
    cert: &Certifier<C>,
    d: &C::Mor,
    p: &C::Mor,
) -> Result<ComposeResult<C>> {
    let cat = cert.category();
    require_certified(&cert.certify_cokernel(d)?, "d")?;
    require_certified(&cert.certify_cokernel(p)?, "p")?;
    require_member(cert, &cat.cod(d), "middle object")?;
    let composite = cat.compose(p, d)?;
    let no_kernel = |what: &str| CategoryError::PreconditionFailed(format!("{what} has no kernel"));
    let ker_d = kernel_cert(cat, d)?.ok_or_else(|| no_kernel("d"))?;
    let ker_p = kernel_cert(cat, p)?.ok_or_else(|| no_kernel("p"))?;
    let pullback = pullback_square(cat, d, &ker_p.inclusion)?
        .ok_or_else(|| CategoryError::PreconditionFailed("d has no pullback along ker p".into()))?;
    let lifted_kernel = kernel_lift(cat, &ker_d, &pullback)?;
    let g = pullback.g().clone();
    let kernel_of_composite = KernelCert::new(cat, composite.clone(), pullback.apex().clone(), g.clone())?;
    let composite_is_cokernel_of_g = match cokernel_cert(cat, &g)? {
        Some(c) => cat.is_iso(&c.mediate(&composite)?)?,
        None => false,
    };

    let mut rectangles = Vec::new();
    let mut tested = 0u64;
    let refuted = |witness: &C::Mor, failure| ComposeResult {
        composite: composite.clone(),
        verdict: SemiStableVerdict {
            kind: Side::Cokernel,
            subject: composite.clone(),
            outcome: Outcome::Refuted { witness: witness.clone(), failure },
        },
        kernel_of_p: ker_p.clone(),
        pullback: pullback.clone(),
        kernel_of_composite: kernel_of_composite.clone(),
        lifted_kernel: lifted_kernel.clone(),
        composite_is_cokernel_of_g,
        rectangles: Vec::new(),
    };
    let target = cat.cod(p);
    for t in cert.tests() {
        for gamma in cert.homs(t, &target)?.iter() {
            tested += 1;
            let Some(lower) = pullback_square(cat, p, gamma)? else {
                return Ok(refuted(gamma, StabilityFailure::PullbackMissing));
            };
            let Some(upper) = pullback_square(cat, d, lower.g())? else {
                return Ok(refuted(gamma, StabilityFailure::PullbackMissing));
            };
            let leg = cat.compose(lower.d_prime(), upper.d_prime())?;
            if !cert.is_cokernel(&leg)? {
                return Ok(refuted(gamma, StabilityFailure::NotACokernel));
            }
            let square = Square {
                d: composite.clone(),
                h: gamma.clone(),
                apex: upper.apex().clone(),
                g: upper.g().clone(),
                d_prime: leg,
            };
            let (cat2, d2) = (cat.clone(), d.clone());
            rectangles.push(PullbackSquare::with_mediator(square, move |x, y| {
                let m = lower.mediate(&cat2.compose(&d2, x)?, y)?;
                upper.mediate(x, &m)
            }));
        }
    }
    Ok(ComposeResult {
        verdict: cert.certified(Side::Cokernel, &composite, tested),
        composite,
        kernel_of_p: ker_p,
        pullback,
        kernel_of_composite,
        lifted_kernel,
        composite_is_cokernel_of_g,
        rectangles,
    })
}

/// The data produced while showing `d ⊕ d'` is semi-stable.
#[derive(Clone, Debug)]
pub struct DirectSumResult<C: AdditiveCategory> {
    /// `diag(d, 1): B ⊕ B' -> C ⊕ B'`.
    pub first: C::Mor,
    /// `diag(1, d'): C ⊕ B' -> C ⊕ C'`.
    pub second: C::Mor,
    /// `first` is a pullback of `d` along the projection `C ⊕ B' -> C`.
    pub first_is_pullback: bool,
    pub composed: ComposeResult<C>,
}

/// Direct sum of semi-stable cokernels `d: B -> C` and `d2: B' -> C'` with
/// `B'` and `C` in the class, factored as `diag(1, d2) ∘ diag(d, 1)`.
pub fn direct_sum_semistable<C: AdditiveCategory>(
    cert: &Certifier<C>,
    d: &C::Mor,
    d2: &C::Mor,
) -> Result<DirectSumResult<C>> {
    let cat = cert.category();
    require_certified(&cert.certify_cokernel(d)?, "d")?;
    require_certified(&cert.certify_cokernel(d2)?, "d'")?;
    let (b2, c) = (cat.dom(d2), cat.cod(d));
    require_member(cert, &b2, "B'")?;
    require_member(cert, &c, "C")?;
    let first = cat.diag(d, &cat.identity(&b2))?;
    let second = cat.diag(&cat.identity(&c), d2)?;
    let top = cat.biproduct(&cat.dom(d), &b2)?;
    let bottom = cat.biproduct(&c, &b2)?;
    let square = Square { d: d.clone(), h: bottom.proj1.clone(), apex: top.sum.clone(), g: top.proj1, d_prime: first.clone() };
    let first_is_pullback = as_pullback(cat, &square)?.is_some();
    let composed = compose_semistable(cert, &first, &second)?;
    Ok(DirectSumResult { first, second, first_is_pullback, composed })
}

/// One test morphism's worth of the cancellation construction.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct ObscureStep<C: AdditiveCategory> {
    /// `c: G -> D`.
    pub test: C::Mor,
    /// Pullback `Y` of `[p 0]` along `c`, with legs `[α'; β']` and `γ`.
    pub apex: C::Obj,
    pub alpha: C::Mor,
    pub beta: C::Mor,
    pub gamma: C::Mor,
    /// `δ: B -> Y`, the mediator of the cone `([0; 1], 0)`.
    pub delta: C::Mor,
    /// `i: K -> Y`, the kernel of the retraction `β'`.
    pub kernel: C::Obj,
    pub inclusion: C::Mor,
    /// `(K, α' i, γ i)` over `p` and `c`.
    pub square: Square<C>,
    pub square_is_pullback: bool,
    pub leg_is_cokernel: bool,
}

/// Everything the cancellation construction built, for replay.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct ObscureTrace<C: AdditiveCategory> {
    pub d: C::Mor,
    pub p: C::Mor,
    /// `h: C' -> C`, the kernel of `p`.
    pub kernel_of_p: C::Mor,
    /// `(B ⊕ C', [1 0], [d h])` as a square over `p ∘ d` and `p`.
    pub square: Square<C>,
    pub square_is_pullback: bool,
    /// `[d h]` is a cokernel.
    pub row_is_cokernel: bool,
    /// `p` is the cokernel of `h`.
    pub p_is_cokernel_of_h: bool,
    /// `[p 0] = [0 1] ∘ [1 0; p 1] ∘ diag(1, p d) ∘ [1 -d; 0 1]`, first factor first.
    pub chain: Vec<C::Mor>,
    /// `C ⊕ B` and `C ⊕ D`.
    pub chain_objects: Vec<C::Obj>,
    pub steps: Vec<ObscureStep<C>>,
    pub oracle_bound: usize,
}

/// Outcome of replaying a trace.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraceReplay {
    pub equations: u64,
    pub oracle_runs: u64,
    pub failures: Vec<String>,
}

impl TraceReplay {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.equations += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

impl<C: AdditiveCategory> ObscureTrace<C> {
    /// Re-checks every recorded equation and runs the pullback oracle on
    /// each final square.
    pub fn replay(&self, cat: &C) -> Result<TraceReplay> {
        let mut r = TraceReplay::default();
        let (b, c_obj) = (cat.dom(&self.d), cat.cod(&self.d));
        let d_obj = cat.cod(&self.p);
        r.check(cat.is_zero(&cat.compose(&self.p, &self.kernel_of_p)?), || "p h != 0".into());
        r.check(self.square.commutes(cat)?, || "[d h] square does not commute".into());
        r.check(self.square_is_pullback && self.row_is_cokernel && self.p_is_cokernel_of_h, || {
            "recorded flags of the [d h] square are not all set".into()
        });
        let mut chain = cat.identity(&cat.biproduct(&c_obj, &b)?.sum);
        for f in &self.chain {
            chain = cat.compose(f, &chain)?;
        }
        let row = cat.block_row(&self.p, &cat.zero_mor(&b, &d_obj))?;
        r.check(chain == row, || "four-factor chain does not compose to [p 0]".into());
        for (k, f) in [&self.chain[0], &self.chain[2]].into_iter().enumerate() {
            r.check(cat.is_iso(f)?, || format!("chain factor {} is not invertible", 2 * k + 1));
        }
        let inj2 = cat.biproduct(&c_obj, &b)?.inj2;
        for s in &self.steps {
            let leg = cat.block_col(&s.alpha, &s.beta)?;
            r.check(cat.compose(&row, &leg)? == cat.compose(&s.test, &s.gamma)?, || {
                format!("Y legs do not commute for {:?}", s.test)
            });
            r.check(cat.compose(&leg, &s.delta)? == inj2, || format!("[α'; β'] δ != [0; 1] for {:?}", s.test));
            r.check(cat.is_identity(&cat.compose(&s.beta, &s.delta)?), || format!("β' δ != 1 for {:?}", s.test));
            r.check(cat.is_zero(&cat.compose(&s.gamma, &s.delta)?), || format!("γ δ != 0 for {:?}", s.test));
            r.check(cat.is_zero(&cat.compose(&s.beta, &s.inclusion)?), || format!("β' i != 0 for {:?}", s.test));
            r.check(
                s.square.g == cat.compose(&s.alpha, &s.inclusion)? && s.square.d_prime == cat.compose(&s.gamma, &s.inclusion)?,
                || format!("final square legs are not (α' i, γ i) for {:?}", s.test),
            );
            r.check(s.square.commutes(cat)?, || format!("final square does not commute for {:?}", s.test));
            r.check(s.leg_is_cokernel, || format!("γ i is not a cokernel for {:?}", s.test));
            match as_pullback(cat, &s.square)? {
                None => r.check(false, || format!("final square is not a pullback for {:?}", s.test)),
                Some(pb) => {
                    r.oracle_runs += 1;
                    let report = verify_universal(cat, &pb, self.oracle_bound)?;
                    r.check(report.passed(), || format!("oracle rejects the final square for {:?}", s.test));
                }
            }
        }
        Ok(r)
    }
}

/// Cancellation: from a semi-stable `p ∘ d` with `B`, `C` in the class and a
/// kernel for `p`, builds pullbacks of `p` along every test morphism as the
/// kernel of a split retraction, and returns the verdict for `p` they give.
/// Requires the instance to be weakly idempotent complete within the bound.
pub fn obscure_cokernel<C: AdditiveCategory>(
    cert: &Certifier<C>,
    d: &C::Mor,
    p: &C::Mor,
) -> Result<(SemiStableVerdict<C>, ObscureTrace<C>)> {
    let cat = cert.category();
    let (b, c_obj, d_obj) = (cat.dom(d), cat.cod(d), cat.cod(p));
    if cat.dom(p) != c_obj {
        return Err(crate::error::shape("obscure_cokernel", "p does not follow d"));
    }
    require_member(cert, &b, "B")?;
    require_member(cert, &c_obj, "C")?;
    let pd = cat.compose(p, d)?;
    if !cert.is_cokernel(&pd)? {
        return Err(CategoryError::PreconditionFailed("p ∘ d is not a cokernel".into()));
    }
    require_certified(&cert.certify_cokernel(&pd)?, "p ∘ d")?;
    let Some((c_prime, h)) = cat.kernel_object(p)? else {
        return Err(CategoryError::KernelOfPMissing(format!("{p:?}")));
    };
    if let Some(r) = cert.unsplit_retraction()? {
        return Err(CategoryError::RetractionUnsplittable(format!("{r:?}")));
    }

    // (B ⊕ C', [1 0], [d h]) is a pullback of p ∘ d along p
    let bc = cat.biproduct(&b, &c_prime)?;
    let dh = cat.block_row(d, &h)?;
    let square = Square { d: pd.clone(), h: p.clone(), apex: bc.sum.clone(), g: bc.proj1.clone(), d_prime: dh.clone() };
    let square_is_pullback = as_pullback(cat, &square)?.is_some();
    let row_is_cokernel = cert.is_cokernel(&dh)?;
    let p_is_cokernel_of_h = match cokernel_cert(cat, &h)? {
        Some(c) => cat.is_iso(&c.mediate(p)?)?,
        None => false,
    };

    let cb = cat.biproduct(&c_obj, &b)?;
    let cd = cat.biproduct(&c_obj, &d_obj)?;
    let one_c = cat.identity(&c_obj);
    let one_b = cat.identity(&b);
    let one_d = cat.identity(&d_obj);
    let chain = vec![
        block2(cat, [[&one_c, &cat.negate(d)], [&cat.zero_mor(&c_obj, &b), &one_b]], &cb, &cb)?,
        cat.diag(&one_c, &pd)?,
        block2(cat, [[&one_c, &cat.zero_mor(&d_obj, &c_obj)], [p, &one_d]], &cd, &cd)?,
        cat.block_row(&cat.zero_mor(&c_obj, &d_obj), &one_d)?,
    ];
    let row = cat.block_row(p, &cat.zero_mor(&b, &d_obj))?;

    let mut steps = Vec::new();
    let mut failure: Option<(C::Mor, StabilityFailure)> = None;
    let mut tested = 0u64;
    'tests: for t in cert.tests() {
        for c in cert.homs(t, &d_obj)?.iter() {
            tested += 1;
            let Some(y) = pullback_square(cat, &row, c)? else {
                failure = Some((c.clone(), StabilityFailure::PullbackMissing));
                break 'tests;
            };
            let alpha = cat.compose(&cb.proj1, y.g())?;
            let beta = cat.compose(&cb.proj2, y.g())?;
            let gamma = y.d_prime().clone();
            let delta = y.mediate(&cb.inj2, &cat.zero_mor(&b, t))?;
            let Some((k, i)) = cat.kernel_object(&beta)? else {
                return Err(CategoryError::RetractionUnsplittable(format!("{beta:?}")));
            };
            let sq = Square {
                d: p.clone(),
                h: c.clone(),
                apex: k.clone(),
                g: cat.compose(&alpha, &i)?,
                d_prime: cat.compose(&gamma, &i)?,
            };
            let square_is_pullback = as_pullback(cat, &sq)?.is_some();
            let leg_is_cokernel = cert.is_cokernel(&sq.d_prime)?;
            steps.push(ObscureStep {
                test: c.clone(),
                apex: y.apex().clone(),
                alpha,
                beta,
                gamma,
                delta,
                kernel: k,
                inclusion: i,
                square: sq,
                square_is_pullback,
                leg_is_cokernel,
            });
            if !square_is_pullback {
                failure = Some((c.clone(), StabilityFailure::PullbackMissing));
                break 'tests;
            }
            if !leg_is_cokernel {
                failure = Some((c.clone(), StabilityFailure::NotACokernel));
                break 'tests;
            }
        }
    }
    let verdict = match failure {
        Some((witness, failure)) => {
            SemiStableVerdict { kind: Side::Cokernel, subject: p.clone(), outcome: Outcome::Refuted { witness, failure } }
        }
        None => cert.certified(Side::Cokernel, p, tested),
    };
    let trace = ObscureTrace {
        d: d.clone(),
        p: p.clone(),
        kernel_of_p: h,
        square,
        square_is_pullback,
        row_is_cokernel,
        p_is_cokernel_of_h,
        chain,
        chain_objects: vec![cb.sum.clone(), cd.sum.clone()],
        steps,
        oracle_bound: cert.bounds().oracle,
    };
    Ok((verdict, trace))
}

/// The 2x2 block morphism `src -> dst` with `entries[r][c]: src_c -> dst_r`.
pub fn block2<C: AdditiveCategory>(
    cat: &C,
    entries: [[&C::Mor; 2]; 2],
    src: &crate::category::BiproductCert<C>,
    dst: &crate::category::BiproductCert<C>,
) -> Result<C::Mor> {
    let injs = [&dst.inj1, &dst.inj2];
    let projs = [&src.proj1, &src.proj2];
    let mut acc = cat.zero_mor(&src.sum, &dst.sum);
    for (r, row) in entries.iter().enumerate() {
        for (c, e) in row.iter().enumerate() {
            acc = cat.add(&acc, &cat.compose(injs[r], &cat.compose(e, projs[c])?)?)?;
        }
    }
    Ok(acc)
}

/// Dual cancellation for kernels: from a semi-stable kernel `j ∘ i` with a
/// cokernel for `i`, the verdict for `i`. Runs [`obscure_cokernel`] in the
/// opposite instance, where `j ∘ i` reads as `i ∘ j`.
pub fn obscure_kernel<C: AdditiveCategory>(
    cert: &Certifier<Opposite<C>>,
    i: &C::Mor,
    j: &C::Mor,
) -> Result<(SemiStableVerdict<C>, ObscureTrace<Opposite<C>>)> {
    let (v, trace) = obscure_cokernel(cert, j, i)?;
    Ok((SemiStableVerdict { kind: Side::Kernel, subject: v.subject, outcome: dual_outcome(v.outcome) }, trace))
}

/// Reads an outcome computed in the opposite instance back in the base.
pub fn dual_outcome<C: AdditiveCategory>(o: Outcome<Opposite<C>>) -> Outcome<C> {
    match o {
        Outcome::Certified { bounds, class, tested } => Outcome::Certified { bounds, class, tested },
        Outcome::Refuted { witness, failure } => Outcome::Refuted {
            witness,
            failure: match failure {
                StabilityFailure::PullbackMissing => StabilityFailure::PushoutMissing,
                StabilityFailure::NotACokernel => StabilityFailure::NotAKernel,
                StabilityFailure::PushoutMissing => StabilityFailure::PullbackMissing,
                StabilityFailure::NotAKernel => StabilityFailure::NotACokernel,
            },
        },
    }
}

/// A certifier for the opposite instance with the same class and bounds.
pub fn opposite_certifier<C: AdditiveCategory>(cert: &Certifier<C>) -> Certifier<Opposite<C>> {
    let class = cert.class().clone();
    let class = if class.is_everything() {
        ObjectClass::all()
    } else {
        ObjectClass::new(class.name().to_string(), move |o| class.contains(o))
    };
    Certifier::with_tests(Opposite::new(cert.category().clone()), class, cert.bounds(), cert.tests().to_vec())
        .with_closure_policy(cert.closure_policy())
}
