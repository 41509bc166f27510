//! Kernels, cokernels, pullbacks and pushouts with stored mediators, plus the
//! universal-property oracle every certificate is checked against.
//!
//! Sign convention, used everywhere: the pullback of `d: B -> C` along
//! `h: C' -> C` is the kernel of `[h d]: C' ⊕ B -> C`, whose inclusion is
//! `[d'; -g]`. Dually the pushout of `i: A -> B` along `f: A -> A'` is the
//! cokernel of `[f; i]: A -> A' ⊕ B`, whose projection is `[i' -f']`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::category::{AdditiveCategory, Bounds};
use crate::error::{CategoryError, Result};

/// A mediator: the unique factorisation of a (co)cone through a certificate.
pub type Mediator<M> = Arc<dyn Fn(&[M]) -> Result<M> + Send + Sync>;

fn factor_or_fail<M: fmt::Debug>(r: Option<M>, what: &str) -> Result<M> {
    r.ok_or_else(|| CategoryError::InvalidMorphism(format!("{what} does not factor through the certificate")))
}

/// The diagram a limit or colimit is taken over.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub enum ConeProblem<C: AdditiveCategory> {
    /// Cones `t: T -> A` with `f t = 0`.
    Kernel { f: C::Mor },
    /// Cocones `t: B -> T` with `t f = 0`.
    Cokernel { f: C::Mor },
    /// Cones `[x: T -> B, y: T -> C']` with `d x = h y`.
    Pullback { d: C::Mor, h: C::Mor },
    /// Cocones `[x: B -> T, y: A' -> T]` with `x i = y f`.
    Pushout { i: C::Mor, f: C::Mor },
}

impl<C: AdditiveCategory> ConeProblem<C> {
    pub fn is_limit(&self) -> bool {
        matches!(self, ConeProblem::Kernel { .. } | ConeProblem::Pullback { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConeProblem::Kernel { .. } => "kernel",
            ConeProblem::Cokernel { .. } => "cokernel",
            ConeProblem::Pullback { .. } => "pullback",
            ConeProblem::Pushout { .. } => "pushout",
        }
    }

    /// Objects the legs of a cone point to (limits) or come from (colimits).
    fn corners(&self, cat: &C) -> Vec<C::Obj> {
        match self {
            ConeProblem::Kernel { f } => vec![cat.dom(f)],
            ConeProblem::Cokernel { f } => vec![cat.cod(f)],
            ConeProblem::Pullback { d, h } => vec![cat.dom(d), cat.dom(h)],
            ConeProblem::Pushout { i, f } => vec![cat.cod(i), cat.cod(f)],
        }
    }

    pub fn is_cone(&self, cat: &C, legs: &[C::Mor]) -> Result<bool> {
        let corners = self.corners(cat);
        if legs.len() != corners.len() {
            return Ok(false);
        }
        for (leg, corner) in legs.iter().zip(&corners) {
            let end = if self.is_limit() { cat.cod(leg) } else { cat.dom(leg) };
            if end != *corner {
                return Ok(false);
            }
        }
        Ok(match self {
            ConeProblem::Kernel { f } => cat.is_zero(&cat.compose(f, &legs[0])?),
            ConeProblem::Cokernel { f } => cat.is_zero(&cat.compose(&legs[0], f)?),
            ConeProblem::Pullback { d, h } => cat.compose(d, &legs[0])? == cat.compose(h, &legs[1])?,
            ConeProblem::Pushout { i, f } => cat.compose(&legs[0], i)? == cat.compose(&legs[1], f)?,
        })
    }

    fn hom_from(&self, cat: &C, t: &C::Obj, corner: &C::Obj) -> Result<Vec<C::Mor>> {
        if self.is_limit() {
            cat.enumerate_homs(t, corner)
        } else {
            cat.enumerate_homs(corner, t)
        }
    }

    /// Every (co)cone with apex `t`, in deterministic order.
    pub fn cones(&self, cat: &C, t: &C::Obj) -> Result<Vec<Vec<C::Mor>>> {
        match self {
            ConeProblem::Kernel { f } => {
                let all = cat.enumerate_homs(t, &cat.dom(f))?;
                let mut out = Vec::new();
                for x in all {
                    if cat.is_zero(&cat.compose(f, &x)?) {
                        out.push(vec![x]);
                    }
                }
                Ok(out)
            }
            ConeProblem::Cokernel { f } => {
                let all = cat.enumerate_homs(&cat.cod(f), t)?;
                let mut out = Vec::new();
                for x in all {
                    if cat.is_zero(&cat.compose(&x, f)?) {
                        out.push(vec![x]);
                    }
                }
                Ok(out)
            }
            ConeProblem::Pullback { d, h } => {
                let corners = self.corners(cat);
                self.join(cat, t, &corners, |x| cat.compose(d, x), |y| cat.compose(h, y))
            }
            ConeProblem::Pushout { i, f } => {
                let corners = self.corners(cat);
                self.join(cat, t, &corners, |x| cat.compose(x, i), |y| cat.compose(y, f))
            }
        }
    }

    /// Hash join of two hom-sets on a common image.
    fn join(
        &self,
        cat: &C,
        t: &C::Obj,
        corners: &[C::Obj],
        left: impl Fn(&C::Mor) -> Result<C::Mor>,
        right: impl Fn(&C::Mor) -> Result<C::Mor>,
    ) -> Result<Vec<Vec<C::Mor>>> {
        let xs = self.hom_from(cat, t, &corners[0])?;
        let ys = self.hom_from(cat, t, &corners[1])?;
        let mut buckets: HashMap<C::Mor, Vec<usize>> = HashMap::new();
        for (j, y) in ys.iter().enumerate() {
            buckets.entry(right(y)?).or_default().push(j);
        }
        let mut out = Vec::new();
        for x in &xs {
            if let Some(js) = buckets.get(&left(x)?) {
                for &j in js {
                    out.push(vec![x.clone(), ys[j].clone()]);
                }
            }
        }
        Ok(out)
    }

    /// `|Hom(T, K)|` for limits, `|Hom(K, T)|` for colimits.
    fn hom_count_with(&self, cat: &C, t: &C::Obj, k: &C::Obj) -> Result<u128> {
        if self.is_limit() {
            cat.hom_count(t, k)
        } else {
            cat.hom_count(k, t)
        }
    }

    fn homs_with(&self, cat: &C, t: &C::Obj, k: &C::Obj) -> Result<Vec<C::Mor>> {
        if self.is_limit() {
            cat.enumerate_homs(t, k)
        } else {
            cat.enumerate_homs(k, t)
        }
    }

    /// The cone `legs ∘ u` (limits) or cocone `u ∘ legs` (colimits).
    pub fn induce(&self, cat: &C, legs: &[C::Mor], u: &C::Mor) -> Result<Vec<C::Mor>> {
        legs.iter()
            .map(|l| if self.is_limit() { cat.compose(l, u) } else { cat.compose(u, l) })
            .collect()
    }
}

/// Anything with a universal property the oracle can test.
pub trait Universal<C: AdditiveCategory> {
    fn problem(&self) -> ConeProblem<C>;
    fn apex(&self) -> C::Obj;
    fn legs(&self) -> Vec<C::Mor>;
    fn mediate(&self, cone: &[C::Mor]) -> Result<C::Mor>;
}

/// `K = ker f` with inclusion `k`.
#[derive(Clone)]
pub struct KernelCert<C: AdditiveCategory> {
    pub morphism: C::Mor,
    pub object: C::Obj,
    pub inclusion: C::Mor,
    mediator: Mediator<C::Mor>,
}

impl<C: AdditiveCategory> fmt::Debug for KernelCert<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelCert").field("object", &self.object).field("inclusion", &self.inclusion).finish()
    }
}

impl<C: AdditiveCategory> KernelCert<C> {
    /// Certificate whose mediator factors cones through `inclusion`.
    pub fn new(cat: &C, morphism: C::Mor, object: C::Obj, inclusion: C::Mor) -> Result<Self> {
        let lifter = cat.lifter(&inclusion)?;
        let mediator: Mediator<C::Mor> = Arc::new(move |cone: &[C::Mor]| factor_or_fail(lifter(&cone[0])?, "cone"));
        Ok(KernelCert { morphism, object, inclusion, mediator })
    }

    /// Certificate with an arbitrary mediator procedure (used for derived
    /// certificates and for negative controls).
    pub fn with_mediator(
        morphism: C::Mor,
        object: C::Obj,
        inclusion: C::Mor,
        mediator: impl Fn(&C::Mor) -> Result<C::Mor> + Send + Sync + 'static,
    ) -> Self {
        KernelCert { morphism, object, inclusion, mediator: Arc::new(move |cone: &[C::Mor]| mediator(&cone[0])) }
    }

    /// The unique `u` with `k ∘ u = t`.
    pub fn mediate(&self, t: &C::Mor) -> Result<C::Mor> {
        (self.mediator)(std::slice::from_ref(t))
    }
}

impl<C: AdditiveCategory> Universal<C> for KernelCert<C> {
    fn problem(&self) -> ConeProblem<C> {
        ConeProblem::Kernel { f: self.morphism.clone() }
    }
    fn apex(&self) -> C::Obj {
        self.object.clone()
    }
    fn legs(&self) -> Vec<C::Mor> {
        vec![self.inclusion.clone()]
    }
    fn mediate(&self, cone: &[C::Mor]) -> Result<C::Mor> {
        (self.mediator)(cone)
    }
}

/// `Q = coker f` with projection `c`.
#[derive(Clone)]
pub struct CokernelCert<C: AdditiveCategory> {
    pub morphism: C::Mor,
    pub object: C::Obj,
    pub projection: C::Mor,
    mediator: Mediator<C::Mor>,
}

impl<C: AdditiveCategory> fmt::Debug for CokernelCert<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CokernelCert").field("object", &self.object).field("projection", &self.projection).finish()
    }
}

impl<C: AdditiveCategory> CokernelCert<C> {
    pub fn new(cat: &C, morphism: C::Mor, object: C::Obj, projection: C::Mor) -> Result<Self> {
        let extender = cat.extender(&projection)?;
        let mediator: Mediator<C::Mor> =
            Arc::new(move |cone: &[C::Mor]| factor_or_fail(extender(&cone[0])?, "cocone"));
        Ok(CokernelCert { morphism, object, projection, mediator })
    }

    pub fn with_mediator(
        morphism: C::Mor,
        object: C::Obj,
        projection: C::Mor,
        mediator: impl Fn(&C::Mor) -> Result<C::Mor> + Send + Sync + 'static,
    ) -> Self {
        CokernelCert { morphism, object, projection, mediator: Arc::new(move |cone: &[C::Mor]| mediator(&cone[0])) }
    }

    /// The unique `u` with `u ∘ c = t`.
    pub fn mediate(&self, t: &C::Mor) -> Result<C::Mor> {
        (self.mediator)(std::slice::from_ref(t))
    }
}

impl<C: AdditiveCategory> Universal<C> for CokernelCert<C> {
    fn problem(&self) -> ConeProblem<C> {
        ConeProblem::Cokernel { f: self.morphism.clone() }
    }
    fn apex(&self) -> C::Obj {
        self.object.clone()
    }
    fn legs(&self) -> Vec<C::Mor> {
        vec![self.projection.clone()]
    }
    fn mediate(&self, cone: &[C::Mor]) -> Result<C::Mor> {
        (self.mediator)(cone)
    }
}

/// A commutative square `d ∘ g = h ∘ d'` over the cospan `B -d-> C <-h- C'`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct Square<C: AdditiveCategory> {
    pub d: C::Mor,
    pub h: C::Mor,
    pub apex: C::Obj,
    /// `g: P -> B`.
    pub g: C::Mor,
    /// `d': P -> C'`.
    pub d_prime: C::Mor,
}

impl<C: AdditiveCategory> Square<C> {
    pub fn commutes(&self, cat: &C) -> Result<bool> {
        ConeProblem::Pullback { d: self.d.clone(), h: self.h.clone() }.is_cone(cat, &[self.g.clone(), self.d_prime.clone()])
    }
}

/// A pullback square with its mediator `(x: T -> B, y: T -> C') ↦ u`.
#[derive(Clone)]
pub struct PullbackSquare<C: AdditiveCategory> {
    pub square: Square<C>,
    mediator: Mediator<C::Mor>,
}

impl<C: AdditiveCategory> fmt::Debug for PullbackSquare<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PullbackSquare({:?})", self.square)
    }
}

impl<C: AdditiveCategory> PullbackSquare<C> {
    pub fn with_mediator(
        square: Square<C>,
        mediator: impl Fn(&C::Mor, &C::Mor) -> Result<C::Mor> + Send + Sync + 'static,
    ) -> Self {
        PullbackSquare { square, mediator: Arc::new(move |cone: &[C::Mor]| mediator(&cone[0], &cone[1])) }
    }

    /// The unique `u` with `g u = x` and `d' u = y`.
    pub fn mediate(&self, x: &C::Mor, y: &C::Mor) -> Result<C::Mor> {
        (self.mediator)(&[x.clone(), y.clone()])
    }

    pub fn apex(&self) -> &C::Obj {
        &self.square.apex
    }

    pub fn g(&self) -> &C::Mor {
        &self.square.g
    }

    pub fn d_prime(&self) -> &C::Mor {
        &self.square.d_prime
    }
}

impl<C: AdditiveCategory> Universal<C> for PullbackSquare<C> {
    fn problem(&self) -> ConeProblem<C> {
        ConeProblem::Pullback { d: self.square.d.clone(), h: self.square.h.clone() }
    }
    fn apex(&self) -> C::Obj {
        self.square.apex.clone()
    }
    fn legs(&self) -> Vec<C::Mor> {
        vec![self.square.g.clone(), self.square.d_prime.clone()]
    }
    fn mediate(&self, cone: &[C::Mor]) -> Result<C::Mor> {
        (self.mediator)(cone)
    }
}

/// A commutative square `f' ∘ i = i' ∘ f` under the span `B <-i- A -f-> A'`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct CoSquare<C: AdditiveCategory> {
    pub i: C::Mor,
    pub f: C::Mor,
    pub apex: C::Obj,
    /// `f': B -> Q`.
    pub f_prime: C::Mor,
    /// `i': A' -> Q`.
    pub i_prime: C::Mor,
}

impl<C: AdditiveCategory> CoSquare<C> {
    pub fn commutes(&self, cat: &C) -> Result<bool> {
        ConeProblem::Pushout { i: self.i.clone(), f: self.f.clone() }
            .is_cone(cat, &[self.f_prime.clone(), self.i_prime.clone()])
    }
}

/// A pushout square with its mediator `(x: B -> T, y: A' -> T) ↦ u`.
#[derive(Clone)]
pub struct PushoutSquare<C: AdditiveCategory> {
    pub square: CoSquare<C>,
    mediator: Mediator<C::Mor>,
}

impl<C: AdditiveCategory> fmt::Debug for PushoutSquare<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PushoutSquare({:?})", self.square)
    }
}

impl<C: AdditiveCategory> PushoutSquare<C> {
    pub fn with_mediator(
        square: CoSquare<C>,
        mediator: impl Fn(&C::Mor, &C::Mor) -> Result<C::Mor> + Send + Sync + 'static,
    ) -> Self {
        PushoutSquare { square, mediator: Arc::new(move |cone: &[C::Mor]| mediator(&cone[0], &cone[1])) }
    }

    /// The unique `u` with `u f' = x` and `u i' = y`.
    pub fn mediate(&self, x: &C::Mor, y: &C::Mor) -> Result<C::Mor> {
        (self.mediator)(&[x.clone(), y.clone()])
    }

    pub fn apex(&self) -> &C::Obj {
        &self.square.apex
    }

    pub fn f_prime(&self) -> &C::Mor {
        &self.square.f_prime
    }

    pub fn i_prime(&self) -> &C::Mor {
        &self.square.i_prime
    }
}

impl<C: AdditiveCategory> Universal<C> for PushoutSquare<C> {
    fn problem(&self) -> ConeProblem<C> {
        ConeProblem::Pushout { i: self.square.i.clone(), f: self.square.f.clone() }
    }
    fn apex(&self) -> C::Obj {
        self.square.apex.clone()
    }
    fn legs(&self) -> Vec<C::Mor> {
        vec![self.square.f_prime.clone(), self.square.i_prime.clone()]
    }
    fn mediate(&self, cone: &[C::Mor]) -> Result<C::Mor> {
        (self.mediator)(cone)
    }
}

/// Evidence that no object within the bound represents a (co)limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refutation {
    pub problem: &'static str,
    /// `None` when the instance cannot be enumerated and only the decision
    /// rule speaks.
    pub bounds: Option<Bounds>,
    /// Number of (co)cones per test apex, in enumeration order.
    pub cone_counts: Vec<u128>,
    pub candidates: usize,
    pub refuted_by_count: usize,
    pub refuted_by_search: usize,
}

/// A certificate, or a refuted non-representability claim.
#[derive(Clone, Debug)]
pub enum LimitOutcome<T> {
    Exists(T),
    NotRepresentable(Refutation),
}

impl<T> LimitOutcome<T> {
    pub fn exists(&self) -> bool {
        matches!(self, LimitOutcome::Exists(_))
    }

    pub fn certificate(self) -> Option<T> {
        match self {
            LimitOutcome::Exists(t) => Some(t),
            LimitOutcome::NotRepresentable(_) => None,
        }
    }

    pub fn as_ref(&self) -> Option<&T> {
        match self {
            LimitOutcome::Exists(t) => Some(t),
            LimitOutcome::NotRepresentable(_) => None,
        }
    }
}

/// How a universal property failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleFailure {
    /// The certificate's own legs do not form a (co)cone.
    LegsNotACone,
    /// Some mediator candidate induces something that is not a (co)cone.
    InducedNotACone,
    NoMediator,
    NonUnique,
    /// The stored mediator procedure returned a wrong morphism or failed.
    MediatorMismatch,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct Counterexample<C: AdditiveCategory> {
    pub failure: OracleFailure,
    pub apex: C::Obj,
    pub cone: Vec<C::Mor>,
    /// Competing or offending mediators, if any.
    pub mediators: Vec<C::Mor>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct OracleReport<C: AdditiveCategory> {
    pub problem: &'static str,
    pub apex_bound: usize,
    pub apexes: usize,
    pub cones: u64,
    pub counterexample: Option<Counterexample<C>>,
}

impl<C: AdditiveCategory> OracleReport<C> {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks existence and uniqueness of mediators for every (co)cone whose
/// apex lies within `apex_bound`, and that the stored mediator finds them.
pub fn verify_universal<C: AdditiveCategory, U: Universal<C>>(
    cat: &C,
    cert: &U,
    apex_bound: usize,
) -> Result<OracleReport<C>> {
    let problem = cert.problem();
    let (k, legs) = (cert.apex(), cert.legs());
    let mut report =
        OracleReport { problem: problem.name(), apex_bound, apexes: 0, cones: 0, counterexample: None };
    let fail = |failure, apex: &C::Obj, cone: Vec<C::Mor>, mediators| {
        Some(Counterexample { failure, apex: apex.clone(), cone, mediators })
    };
    if !problem.is_cone(cat, &legs)? {
        report.counterexample = fail(OracleFailure::LegsNotACone, &k, legs, vec![]);
        return Ok(report);
    }
    for t in cat.enumerate_objects(apex_bound)? {
        report.apexes += 1;
        let mut preimage: HashMap<Vec<C::Mor>, C::Mor> = HashMap::new();
        for u in problem.homs_with(cat, &t, &k)? {
            let cone = problem.induce(cat, &legs, &u)?;
            if let Some(prev) = preimage.get(&cone) {
                report.counterexample = fail(OracleFailure::NonUnique, &t, cone, vec![prev.clone(), u]);
                return Ok(report);
            }
            preimage.insert(cone, u);
        }
        let cones = problem.cones(cat, &t)?;
        report.cones += cones.len() as u64;
        if preimage.len() != cones.len() {
            // more induced cones than cones: some induced family is not a cone
            if let Some((cone, u)) = preimage.iter().find(|(c, _)| !problem.is_cone(cat, c).unwrap_or(false)) {
                report.counterexample = fail(OracleFailure::InducedNotACone, &t, cone.clone(), vec![u.clone()]);
                return Ok(report);
            }
        }
        for cone in cones {
            let Some(u) = preimage.get(&cone) else {
                report.counterexample = fail(OracleFailure::NoMediator, &t, cone, vec![]);
                return Ok(report);
            };
            match cert.mediate(&cone) {
                Ok(m) if m == *u => {}
                Ok(m) => {
                    report.counterexample = fail(OracleFailure::MediatorMismatch, &t, cone, vec![u.clone(), m]);
                    return Ok(report);
                }
                Err(_) => {
                    report.counterexample = fail(OracleFailure::MediatorMismatch, &t, cone, vec![u.clone()]);
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Bounded search for an object representing `problem`. Candidates are
/// discarded by comparing `|Hom(T, K)|` with the number of cones at every test
/// apex `T`; survivors are searched for legs inducing a bijection. Finding one
/// contradicts a non-representability claim.
pub fn refute<C: AdditiveCategory>(cat: &C, problem: &ConeProblem<C>, bounds: Bounds) -> Result<Refutation> {
    let apexes = match cat.enumerate_objects(bounds.oracle) {
        Ok(a) => a,
        Err(CategoryError::NonEnumerable(_)) => {
            return Ok(Refutation {
                problem: problem.name(),
                bounds: None,
                cone_counts: vec![],
                candidates: 0,
                refuted_by_count: 0,
                refuted_by_search: 0,
            })
        }
        Err(e) => return Err(e),
    };
    let cone_sets: Vec<Vec<Vec<C::Mor>>> = apexes.iter().map(|t| problem.cones(cat, t)).collect::<Result<_>>()?;
    let counts: Vec<u128> = cone_sets.iter().map(|c| c.len() as u128).collect();
    let candidates = cat.enumerate_objects(bounds.objects)?;
    let mut refutation = Refutation {
        problem: problem.name(),
        bounds: Some(bounds),
        cone_counts: counts.clone(),
        candidates: candidates.len(),
        refuted_by_count: 0,
        refuted_by_search: 0,
    };
    'candidate: for k in &candidates {
        for (t, &count) in apexes.iter().zip(&counts) {
            if problem.hom_count_with(cat, t, k)? != count {
                refutation.refuted_by_count += 1;
                continue 'candidate;
            }
        }
        for legs in problem.cones(cat, k)? {
            if represents(cat, problem, &legs, k, &apexes, &counts)? {
                return Err(CategoryError::DecisionConflict(format!(
                    "{} declared non-representable but {k:?} with legs {legs:?} represents it",
                    problem.name()
                )));
            }
        }
        refutation.refuted_by_search += 1;
    }
    Ok(refutation)
}

/// Whether `Hom(T, K) -> Cones(T)` induced by `legs` is injective for every
/// test apex; with matching counts that makes it bijective.
fn represents<C: AdditiveCategory>(
    cat: &C,
    problem: &ConeProblem<C>,
    legs: &[C::Mor],
    k: &C::Obj,
    apexes: &[C::Obj],
    counts: &[u128],
) -> Result<bool> {
    for (t, &count) in apexes.iter().zip(counts) {
        let mut seen = std::collections::HashSet::new();
        for u in problem.homs_with(cat, t, k)? {
            if !seen.insert(problem.induce(cat, legs, &u)?) {
                return Ok(false);
            }
        }
        if seen.len() as u128 != count {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Kernel certificate from the instance's decision rule, without refutation.
pub fn kernel_cert<C: AdditiveCategory>(cat: &C, f: &C::Mor) -> Result<Option<KernelCert<C>>> {
    match cat.kernel_object(f)? {
        Some((k, inc)) => Ok(Some(KernelCert::new(cat, f.clone(), k, inc)?)),
        None => Ok(None),
    }
}

pub fn cokernel_cert<C: AdditiveCategory>(cat: &C, f: &C::Mor) -> Result<Option<CokernelCert<C>>> {
    match cat.cokernel_object(f)? {
        Some((q, c)) => Ok(Some(CokernelCert::new(cat, f.clone(), q, c)?)),
        None => Ok(None),
    }
}

fn outcome<C: AdditiveCategory, T>(
    cat: &C,
    found: Option<T>,
    problem: impl FnOnce() -> ConeProblem<C>,
    bounds: Bounds,
) -> Result<LimitOutcome<T>> {
    match found {
        Some(c) => Ok(LimitOutcome::Exists(c)),
        None => Ok(LimitOutcome::NotRepresentable(refute(cat, &problem(), bounds)?)),
    }
}

/// Kernel of `f`; a non-representable verdict is cross-checked by bounded
/// refutation and a disagreement is an error.
pub fn kernel<C: AdditiveCategory>(cat: &C, f: &C::Mor, bounds: Bounds) -> Result<LimitOutcome<KernelCert<C>>> {
    outcome(cat, kernel_cert(cat, f)?, || ConeProblem::Kernel { f: f.clone() }, bounds)
}

pub fn cokernel<C: AdditiveCategory>(
    cat: &C,
    f: &C::Mor,
    bounds: Bounds,
) -> Result<LimitOutcome<CokernelCert<C>>> {
    outcome(cat, cokernel_cert(cat, f)?, || ConeProblem::Cokernel { f: f.clone() }, bounds)
}

/// Pullback of `d: B -> C` along `h: C' -> C` by the decision rule alone.
pub fn pullback_square<C: AdditiveCategory>(cat: &C, d: &C::Mor, h: &C::Mor) -> Result<Option<PullbackSquare<C>>> {
    if cat.cod(d) != cat.cod(h) {
        return Err(crate::error::shape("pullback", "cospan legs have different codomains"));
    }
    let row = cat.block_row(h, d)?;
    let Some(ker) = kernel_cert(cat, &row)? else { return Ok(None) };
    Ok(Some(pullback_from_kernel(cat, d, h, ker)?))
}

/// Unpacks `ker [h d]` with inclusion `[d'; -g]` into a pullback square.
pub fn pullback_from_kernel<C: AdditiveCategory>(
    cat: &C,
    d: &C::Mor,
    h: &C::Mor,
    ker: KernelCert<C>,
) -> Result<PullbackSquare<C>> {
    let bp = cat.biproduct(&cat.dom(h), &cat.dom(d))?;
    let d_prime = cat.compose(&bp.proj1, &ker.inclusion)?;
    let g = cat.negate(&cat.compose(&bp.proj2, &ker.inclusion)?);
    let square = Square { d: d.clone(), h: h.clone(), apex: ker.object.clone(), g, d_prime };
    let cat2 = cat.clone();
    Ok(PullbackSquare::with_mediator(square, move |x, y| {
        ker.mediate(&cat2.block_col(y, &cat2.negate(x))?)
    }))
}

pub fn pullback<C: AdditiveCategory>(
    cat: &C,
    d: &C::Mor,
    h: &C::Mor,
    bounds: Bounds,
) -> Result<LimitOutcome<PullbackSquare<C>>> {
    let found = pullback_square(cat, d, h)?;
    outcome(cat, found, || ConeProblem::Pullback { d: d.clone(), h: h.clone() }, bounds)
}

/// Pushout of `i: A -> B` along `f: A -> A'` by the decision rule alone.
pub fn pushout_square<C: AdditiveCategory>(cat: &C, i: &C::Mor, f: &C::Mor) -> Result<Option<PushoutSquare<C>>> {
    if cat.dom(i) != cat.dom(f) {
        return Err(crate::error::shape("pushout", "span legs have different domains"));
    }
    let col = cat.block_col(f, i)?;
    let Some(cok) = cokernel_cert(cat, &col)? else { return Ok(None) };
    Ok(Some(pushout_from_cokernel(cat, i, f, cok)?))
}

/// Unpacks `coker [f; i]` with projection `[i' -f']` into a pushout square.
pub fn pushout_from_cokernel<C: AdditiveCategory>(
    cat: &C,
    i: &C::Mor,
    f: &C::Mor,
    cok: CokernelCert<C>,
) -> Result<PushoutSquare<C>> {
    let bp = cat.biproduct(&cat.cod(f), &cat.cod(i))?;
    let i_prime = cat.compose(&cok.projection, &bp.inj1)?;
    let f_prime = cat.negate(&cat.compose(&cok.projection, &bp.inj2)?);
    let square = CoSquare { i: i.clone(), f: f.clone(), apex: cok.object.clone(), f_prime, i_prime };
    let cat2 = cat.clone();
    Ok(PushoutSquare::with_mediator(square, move |x, y| {
        cok.mediate(&cat2.block_row(y, &cat2.negate(x))?)
    }))
}

pub fn pushout<C: AdditiveCategory>(
    cat: &C,
    i: &C::Mor,
    f: &C::Mor,
    bounds: Bounds,
) -> Result<LimitOutcome<PushoutSquare<C>>> {
    let found = pushout_square(cat, i, f)?;
    outcome(cat, found, || ConeProblem::Pushout { i: i.clone(), f: f.clone() }, bounds)
}

/// If the commutative `square` is a pullback, a certificate for it whose
/// mediator goes through the computed pullback and the comparison iso.
pub fn as_pullback<C: AdditiveCategory>(cat: &C, square: &Square<C>) -> Result<Option<PullbackSquare<C>>> {
    if !square.commutes(cat)? {
        return Err(CategoryError::InvalidMorphism("square does not commute".into()));
    }
    let Some(computed) = pullback_square(cat, &square.d, &square.h)? else { return Ok(None) };
    let comparison = computed.mediate(&square.g, &square.d_prime)?;
    let Some(inverse) = cat.inverse(&comparison)? else { return Ok(None) };
    let cat2 = cat.clone();
    Ok(Some(PullbackSquare::with_mediator(square.clone(), move |x, y| {
        cat2.compose(&inverse, &computed.mediate(x, y)?)
    })))
}

pub fn is_pullback_square<C: AdditiveCategory>(cat: &C, square: &Square<C>) -> Result<bool> {
    Ok(as_pullback(cat, square)?.is_some())
}

/// Whether `d` is a cokernel: `d` has a kernel `k`, `k` has a cokernel `c`,
/// and the comparison `coker k -> cod d` is an isomorphism. Instances whose
/// cokernels lack kernels would be misjudged; none of the built-in ones have
/// such morphisms.
pub fn is_cokernel<C: AdditiveCategory>(cat: &C, d: &C::Mor) -> Result<bool> {
    let Some((_, k)) = cat.kernel_object(d)? else { return Ok(false) };
    let Some((_, c)) = cat.cokernel_object(&k)? else { return Ok(false) };
    let Some(u) = cat.extend(&c, d)? else { return Ok(false) };
    cat.is_iso(&u)
}

/// Dual of [`is_cokernel`].
pub fn is_kernel<C: AdditiveCategory>(cat: &C, i: &C::Mor) -> Result<bool> {
    let Some((_, c)) = cat.cokernel_object(i)? else { return Ok(false) };
    let Some((_, k)) = cat.kernel_object(&c)? else { return Ok(false) };
    let Some(u) = cat.lift(&k, i)? else { return Ok(false) };
    cat.is_iso(&u)
}

/// Whether `(i, d)` is a kernel-cokernel pair.
pub fn is_kernel_cokernel_pair<C: AdditiveCategory>(cat: &C, i: &C::Mor, d: &C::Mor) -> Result<bool> {
    if cat.cod(i) != cat.dom(d) || !cat.is_zero(&cat.compose(d, i)?) {
        return Ok(false);
    }
    let Some(ker) = kernel_cert(cat, d)? else { return Ok(false) };
    let Some(cok) = cokernel_cert(cat, i)? else { return Ok(false) };
    let u = ker.mediate(i)?;
    let v = cok.mediate(d)?;
    Ok(cat.is_iso(&u)? && cat.is_iso(&v)?)
}

/// Outcome of comparing a left square with the rectangle it forms next to a
/// pullback square.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct PastingVerdict<C: AdditiveCategory> {
    pub left_is_pullback: bool,
    pub rectangle_is_pullback: bool,
    pub rectangle: Square<C>,
    /// Mediators for the left square's own legs, built once through the
    /// rectangle's universal property and once through the left square's.
    pub witnesses: Vec<C::Mor>,
}

impl<C: AdditiveCategory> PastingVerdict<C> {
    pub fn agrees(&self) -> bool {
        self.left_is_pullback == self.rectangle_is_pullback
    }
}

/// Pasting law. `right` is a pullback of `d: B -> C` along `h: C' -> C` with
/// apex `B'`; `left` is a commutative square over `d': B' -> C'` and some
/// `k: C'' -> C'`. The rectangle has legs `(g ∘ g_left, d''_left)` over `d` and
/// `h ∘ k`.
pub fn paste_pullback<C: AdditiveCategory>(
    cat: &C,
    left: &Square<C>,
    right: &PullbackSquare<C>,
) -> Result<PastingVerdict<C>> {
    if left.d != *right.d_prime() {
        return Err(CategoryError::InvalidMorphism("left square does not share the middle edge".into()));
    }
    if !left.commutes(cat)? || !right.square.commutes(cat)? {
        return Err(CategoryError::InvalidMorphism("input squares do not commute".into()));
    }
    let rectangle = Square {
        d: right.square.d.clone(),
        h: cat.compose(&right.square.h, &left.h)?,
        apex: left.apex.clone(),
        g: cat.compose(right.g(), &left.g)?,
        d_prime: left.d_prime.clone(),
    };
    let left_cert = as_pullback(cat, left)?;
    let rect_cert = as_pullback(cat, &rectangle)?;
    let mut witnesses = Vec::new();
    if let Some(rect) = &rect_cert {
        // left-square cone (g_left, d''_left) mapped to the rectangle
        witnesses.push(rect.mediate(&cat.compose(right.g(), &left.g)?, &left.d_prime)?);
    }
    if let Some(l) = &left_cert {
        // rectangle cone routed through the right square, then the left one
        let through_right = right.mediate(&rectangle.g, &cat.compose(&left.h, &rectangle.d_prime)?)?;
        witnesses.push(l.mediate(&through_right, &rectangle.d_prime)?);
    }
    Ok(PastingVerdict {
        left_is_pullback: left_cert.is_some(),
        rectangle_is_pullback: rect_cert.is_some(),
        rectangle,
        witnesses,
    })
}

/// Kernel lifting across a pullback: given `i = ker d` and the pullback of `d`
/// along `h` with legs `g`, `d'`, returns `i'` with `g i' = i`, `d' i' = 0`,
/// certified as the kernel of `d'`.
pub fn kernel_lift<C: AdditiveCategory>(
    cat: &C,
    i: &KernelCert<C>,
    sq: &PullbackSquare<C>,
) -> Result<KernelCert<C>> {
    if i.morphism != sq.square.d {
        return Err(CategoryError::InvalidMorphism("kernel and pullback are over different morphisms".into()));
    }
    let zero = cat.zero_mor(&i.object, &cat.dom(&sq.square.h));
    let i_prime = sq.mediate(&i.inclusion, &zero)?;
    let (cat2, i2, g) = (cat.clone(), i.clone(), sq.g().clone());
    Ok(KernelCert::with_mediator(sq.d_prime().clone(), i.object.clone(), i_prime, move |t| {
        i2.mediate(&cat2.compose(&g, t)?)
    }))
}
