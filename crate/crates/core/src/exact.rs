//! Conflation classes and the exact-category axioms, checked exhaustively
//! over an enumerated instance. Inflation-side axioms are the deflation-side
//! checks run in the opposite instance with the dual class.
//!
//! Every class is assumed closed under isomorphism of sequences, so objects
//! are taken up to isomorphism and deflations up to arrow isomorphism
//! wherever the quantifier allows it.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::category::{AdditiveCategory, Bounds};
use crate::error::{CategoryError, Result};
use crate::limits::pullback_square;
use crate::opposite::Opposite;
use crate::stability::{
    arrow_key, obscure_cokernel, opposite_certifier, representatives, ArrowKey, Certifier, Outcome, SemiStableVerdict,
    Side, StabilityFailure,
};

/// Membership of a kernel-cokernel pair `(i, d)`.
pub type Membership<C> =
    Arc<dyn Fn(&C, &<C as AdditiveCategory>::Mor, &<C as AdditiveCategory>::Mor) -> Result<bool> + Send + Sync>;

#[derive(Clone)]
pub enum ConflationKind<C: AdditiveCategory> {
    /// `d` has a section.
    Split,
    /// Both halves semi-stable at the certifier's bound.
    Stable,
    /// Every kernel-cokernel pair.
    AllKcp,
    /// No sequence at all; a negative control.
    Empty,
    Custom(Membership<C>),
}

/// A class of short exact sequences, closed under isomorphism by contract.
#[derive(Clone)]
pub struct ConflationClass<C: AdditiveCategory> {
    name: String,
    kind: ConflationKind<C>,
}

impl<C: AdditiveCategory> fmt::Debug for ConflationClass<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConflationClass({})", self.name)
    }
}

impl<C: AdditiveCategory> ConflationClass<C> {
    fn named(name: &str, kind: ConflationKind<C>) -> Self {
        ConflationClass { name: name.into(), kind }
    }

    pub fn split() -> Self {
        Self::named("split", ConflationKind::Split)
    }

    pub fn stable() -> Self {
        Self::named("stable", ConflationKind::Stable)
    }

    pub fn all_kcp() -> Self {
        Self::named("all-kcp", ConflationKind::AllKcp)
    }

    pub fn empty() -> Self {
        Self::named("empty", ConflationKind::Empty)
    }

    pub fn custom(
        name: impl Into<String>,
        member: impl Fn(&C, &C::Mor, &C::Mor) -> Result<bool> + Send + Sync + 'static,
    ) -> Self {
        ConflationClass { name: name.into(), kind: ConflationKind::Custom(Arc::new(member)) }
    }

    /// `split`, `stable`, `all-kcp` or `empty`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "split" => Some(Self::split()),
            "stable" => Some(Self::stable()),
            "all-kcp" => Some(Self::all_kcp()),
            "empty" => Some(Self::empty()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ConflationKind<C> {
        &self.kind
    }

    /// Membership of a kernel-cokernel pair; `cert` supplies the bound for
    /// the stable class.
    pub fn contains(&self, cert: &Certifier<C>, i: &C::Mor, d: &C::Mor) -> Result<bool> {
        let cat = cert.category();
        match &self.kind {
            ConflationKind::Split => Ok(cat.lift(d, &cat.identity(&cat.cod(d)))?.is_some()),
            ConflationKind::Stable => Ok(cert.certify_stable_ses(i, d)?.is_stable()),
            ConflationKind::AllKcp => Ok(true),
            ConflationKind::Empty => Ok(false),
            ConflationKind::Custom(f) => f(cat, i, d),
        }
    }

    /// The same class read in the opposite instance, where `(i, d)` becomes
    /// `(d, i)`.
    pub fn dual(&self) -> ConflationClass<Opposite<C>> {
        let kind = match &self.kind {
            ConflationKind::Split => ConflationKind::Split,
            ConflationKind::Stable => ConflationKind::Stable,
            ConflationKind::AllKcp => ConflationKind::AllKcp,
            ConflationKind::Empty => ConflationKind::Empty,
            ConflationKind::Custom(f) => {
                let f = f.clone();
                ConflationKind::Custom(Arc::new(move |op: &Opposite<C>, i: &C::Mor, d: &C::Mor| f(op.base(), d, i)))
            }
        };
        ConflationClass { name: self.name.clone(), kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Axiom {
    E0,
    E1,
    E2,
    E0op,
    E1op,
    E2op,
    #[serde(rename = "obscure-cokernel")]
    ObscureCokernel,
    #[serde(rename = "obscure-kernel")]
    ObscureKernel,
}

impl Axiom {
    pub fn dual(self) -> Self {
        match self {
            Axiom::E0 => Axiom::E0op,
            Axiom::E1 => Axiom::E1op,
            Axiom::E2 => Axiom::E2op,
            Axiom::E0op => Axiom::E0,
            Axiom::E1op => Axiom::E1,
            Axiom::E2op => Axiom::E2,
            Axiom::ObscureCokernel => Axiom::ObscureKernel,
            Axiom::ObscureKernel => Axiom::ObscureCokernel,
        }
    }

    /// Whether this is a deflation-side axiom.
    pub fn is_primal(self) -> bool {
        matches!(self, Axiom::E0 | Axiom::E1 | Axiom::E2 | Axiom::ObscureCokernel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomFailure {
    /// `0 -> 0 -> 0` is not in the class.
    NotInClass,
    CompositeNotCokernel,
    CompositeNotKernel,
    CompositeNotInClass,
    PullbackMissing,
    PushoutMissing,
    PulledBackNotCokernel,
    PushedOutNotKernel,
    PulledBackNotInClass,
    PushedOutNotInClass,
    /// Cancellation hypotheses hold but the conclusion is not in the class.
    ConclusionNotInClass,
    /// The constructive cancellation errored, disagreed, or failed replay.
    ConstructionFailed,
}

impl AxiomFailure {
    pub fn dual(self) -> Self {
        use AxiomFailure::*;
        match self {
            CompositeNotCokernel => CompositeNotKernel,
            CompositeNotKernel => CompositeNotCokernel,
            PullbackMissing => PushoutMissing,
            PushoutMissing => PullbackMissing,
            PulledBackNotCokernel => PushedOutNotKernel,
            PushedOutNotKernel => PulledBackNotCokernel,
            PulledBackNotInClass => PushedOutNotInClass,
            PushedOutNotInClass => PulledBackNotInClass,
            other => other,
        }
    }
}

/// The morphisms of a failing case, in the order the axiom names them:
/// `[1_0]` for E0, `[d, p]` for E1 and cancellation, `[d, h]` for E2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomWitness<M> {
    pub morphisms: Vec<M>,
    pub failure: AxiomFailure,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomOutcome<M> {
    pub axiom: Axiom,
    pub cases: u64,
    pub passed: bool,
    pub witness: Option<AxiomWitness<M>>,
}

impl<M> AxiomOutcome<M> {
    fn dualized(self) -> Self {
        AxiomOutcome {
            axiom: self.axiom.dual(),
            witness: self.witness.map(|w| AxiomWitness { failure: w.failure.dual(), ..w }),
            ..self
        }
    }
}

type CaseResult = Option<(AxiomFailure, Option<String>)>;

/// Sums per-item case counts up to and including the first failing item.
fn assemble<M>(axiom: Axiom, items: Vec<(u64, Option<AxiomWitness<M>>)>) -> AxiomOutcome<M> {
    let mut cases = 0;
    for (n, w) in items {
        cases += n;
        if w.is_some() {
            return AxiomOutcome { axiom, cases, passed: false, witness: w };
        }
    }
    AxiomOutcome { axiom, cases, passed: true, witness: None }
}

/// Deflation-side axiom checks for one class over one instance.
pub struct AxiomChecker<C: AdditiveCategory> {
    cert: Certifier<C>,
    class: ConflationClass<C>,
    members: Mutex<HashMap<ArrowKey<C::Mor>, bool>>,
    constructive: bool,
}

impl<C: AdditiveCategory> AxiomChecker<C> {
    pub fn new(cert: Certifier<C>, class: ConflationClass<C>) -> Self {
        AxiomChecker { cert, class, members: Mutex::new(HashMap::new()), constructive: true }
    }

    /// For the stable class, also run the constructive cancellation once per
    /// isomorphism class of `p` and replay its trace. On by default.
    pub fn constructive(mut self, on: bool) -> Self {
        self.constructive = on;
        self
    }

    pub fn certifier(&self) -> &Certifier<C> {
        &self.cert
    }

    pub fn class(&self) -> &ConflationClass<C> {
        &self.class
    }

    /// `d` is a cokernel and `(ker d, d)` is in the class.
    pub fn is_deflation(&self, d: &C::Mor) -> Result<bool> {
        let key = arrow_key(self.cert.category(), d);
        if let Some(&v) = self.members.lock().expect("membership cache").get(&key) {
            return Ok(v);
        }
        let v = match self.cert.sequence_of(d)? {
            None => false,
            Some(i) => self.class.contains(&self.cert, &i, d)?,
        };
        self.members.lock().expect("membership cache").insert(key, v);
        Ok(v)
    }

    fn objects(&self) -> Result<Vec<C::Obj>> {
        let cat = self.cert.category();
        Ok(representatives(cat, cat.enumerate_objects(self.cert.bounds().objects)?))
    }

    /// Deflations between representative objects, in enumeration order.
    pub fn deflations(&self) -> Result<Vec<C::Mor>> {
        let objects = self.objects()?;
        let mut out = Vec::new();
        for b in &objects {
            for c in &objects {
                for d in self.cert.homs(b, c)?.iter() {
                    if self.is_deflation(d)? {
                        out.push(d.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn e0(&self) -> Result<AxiomOutcome<C::Mor>> {
        let cat = self.cert.category();
        let one = cat.identity(&cat.zero_object());
        let witness = (!self.is_deflation(&one)?).then(|| AxiomWitness {
            morphisms: vec![one],
            failure: AxiomFailure::NotInClass,
            detail: None,
        });
        Ok(AxiomOutcome { axiom: Axiom::E0, cases: 1, passed: witness.is_none(), witness })
    }

    fn e1_case(&self, d: &C::Mor, p: &C::Mor) -> Result<CaseResult> {
        let pd = self.cert.category().compose(p, d)?;
        Ok(if !self.cert.is_cokernel(&pd)? {
            Some((AxiomFailure::CompositeNotCokernel, None))
        } else if !self.is_deflation(&pd)? {
            Some((AxiomFailure::CompositeNotInClass, None))
        } else {
            None
        })
    }

    /// Composites `p ∘ d` of deflations between representative objects.
    pub fn e1(&self) -> Result<AxiomOutcome<C::Mor>> {
        let cat = self.cert.category();
        let deflations = self.deflations()?;
        let mut by_dom: HashMap<C::Obj, Vec<C::Mor>> = HashMap::new();
        for d in &deflations {
            by_dom.entry(cat.dom(d)).or_default().push(d.clone());
        }
        let items = deflations
            .par_iter()
            .map(|d| {
                let mut n = 0;
                for p in by_dom.get(&cat.cod(d)).into_iter().flatten() {
                    n += 1;
                    if let Some((failure, detail)) = self.e1_case(d, p)? {
                        return Ok((n, Some(AxiomWitness { morphisms: vec![d.clone(), p.clone()], failure, detail })));
                    }
                }
                Ok((n, None))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(Axiom::E1, items))
    }

    fn e2_case(&self, d: &C::Mor, h: &C::Mor) -> Result<CaseResult> {
        Ok(match pullback_square(self.cert.category(), d, h)? {
            None => Some((AxiomFailure::PullbackMissing, None)),
            Some(sq) if !self.cert.is_cokernel(sq.d_prime())? => Some((AxiomFailure::PulledBackNotCokernel, None)),
            Some(sq) if !self.is_deflation(sq.d_prime())? => Some((AxiomFailure::PulledBackNotInClass, None)),
            Some(_) => None,
        })
    }

    /// Pullbacks of one deflation per arrow isomorphism class along every
    /// morphism out of a test object.
    pub fn e2(&self) -> Result<AxiomOutcome<C::Mor>> {
        let cat = self.cert.category();
        let mut seen = std::collections::HashSet::new();
        let deflations: Vec<C::Mor> =
            self.deflations()?.into_iter().filter(|d| seen.insert(arrow_key(cat, d))).collect();
        let items = deflations
            .par_iter()
            .map(|d| {
                let mut n = 0;
                for t in self.cert.tests() {
                    for h in self.cert.homs(t, &cat.cod(d))?.iter() {
                        n += 1;
                        if let Some((failure, detail)) = self.e2_case(d, h)? {
                            let morphisms = vec![d.clone(), h.clone()];
                            return Ok((n, Some(AxiomWitness { morphisms, failure, detail })));
                        }
                    }
                }
                Ok((n, None))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(Axiom::E2, items))
    }

    /// Checks the conclusion for `(d, p)`, assuming the hypotheses hold.
    fn obscure_case(&self, d: &C::Mor, p: &C::Mor) -> Result<CaseResult> {
        if !self.is_deflation(p)? {
            return Ok(Some((AxiomFailure::ConclusionNotInClass, None)));
        }
        if !self.constructive || !matches!(self.class.kind, ConflationKind::Stable) {
            return Ok(None);
        }
        let detail = match obscure_cokernel(&self.cert, d, p) {
            Err(e) => Some(e.to_string()),
            Ok((v, trace)) => {
                let replay = trace.replay(self.cert.category())?;
                if !v.is_certified() {
                    Some("constructive verdict is not certified".into())
                } else if !replay.passed() {
                    Some(replay.failures.join("; "))
                } else {
                    None
                }
            }
        };
        Ok(detail.map(|d| (AxiomFailure::ConstructionFailed, Some(d))))
    }

    /// The cancellation hypotheses for `(d, p)`: `p` has a kernel and `p ∘ d`
    /// is a deflation.
    fn obscure_hypotheses(&self, d: &C::Mor, p: &C::Mor) -> Result<bool> {
        let cat = self.cert.category();
        Ok(cat.kernel_object(p)?.is_some() && self.is_deflation(&cat.compose(p, d)?)?)
    }

    /// Cancellation: whenever `p ∘ d` is a deflation and `p` has a kernel,
    /// `p` is a deflation. The hypotheses only depend on `p` up to arrow
    /// isomorphism, so each class of `p` is one case, settled by the first
    /// `d` that satisfies them.
    pub fn obscure(&self) -> Result<AxiomOutcome<C::Mor>> {
        let cat = self.cert.category();
        let objects = self.objects()?;
        let mut seen = std::collections::HashSet::new();
        let mut candidates = Vec::new();
        for c in &objects {
            for t in &objects {
                for p in self.cert.homs(c, t)?.iter() {
                    if seen.insert(arrow_key(cat, p)) {
                        candidates.push(p.clone());
                    }
                }
            }
        }
        let items = candidates
            .par_iter()
            .map(|p| {
                if cat.kernel_object(p)?.is_none() {
                    return Ok((0, None));
                }
                for b in &objects {
                    for d in self.cert.homs(b, &cat.dom(p))?.iter() {
                        if !self.obscure_hypotheses(d, p)? {
                            continue;
                        }
                        let witness = self.obscure_case(d, p)?.map(|(failure, detail)| AxiomWitness {
                            morphisms: vec![d.clone(), p.clone()],
                            failure,
                            detail,
                        });
                        return Ok((1, witness));
                    }
                }
                Ok((0, None))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(Axiom::ObscureCokernel, items))
    }

    /// Re-evaluates a deflation-side witness: true iff the same failure recurs.
    pub fn replay(&self, axiom: Axiom, w: &AxiomWitness<C::Mor>) -> Result<bool> {
        let m = &w.morphisms;
        let need = |k: usize| {
            if m.len() == k {
                Ok(())
            } else {
                Err(CategoryError::PreconditionFailed(format!("{axiom:?} witness needs {k} morphisms")))
            }
        };
        let got = match axiom {
            Axiom::E0 => {
                need(1)?;
                (!self.is_deflation(&m[0])?).then_some(AxiomFailure::NotInClass)
            }
            Axiom::E1 => {
                need(2)?;
                self.e1_case(&m[0], &m[1])?.map(|f| f.0)
            }
            Axiom::E2 => {
                need(2)?;
                self.e2_case(&m[0], &m[1])?.map(|f| f.0)
            }
            Axiom::ObscureCokernel => {
                need(2)?;
                if self.obscure_hypotheses(&m[0], &m[1])? {
                    self.obscure_case(&m[0], &m[1])?.map(|f| f.0)
                } else {
                    None
                }
            }
            other => {
                return Err(CategoryError::PreconditionFailed(format!("{other:?} is an inflation-side axiom")));
            }
        };
        Ok(got == Some(w.failure))
    }
}

/// Results of the full suite for one class.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport<M> {
    pub instance: String,
    pub class: String,
    pub bounds: Bounds,
    pub axioms: Vec<AxiomOutcome<M>>,
}

impl<M> AxiomReport<M> {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn outcome(&self, axiom: Axiom) -> Option<&AxiomOutcome<M>> {
        self.axioms.iter().find(|a| a.axiom == axiom)
    }
}

/// Deflation-side checks in the instance and, for the inflation side, in
/// its opposite.
pub struct AxiomSuite<C: AdditiveCategory> {
    primal: AxiomChecker<C>,
    dual: AxiomChecker<Opposite<C>>,
}

impl<C: AdditiveCategory> AxiomSuite<C> {
    pub fn new(cert: Certifier<C>, class: ConflationClass<C>) -> Self {
        let dual = AxiomChecker::new(opposite_certifier(&cert), class.dual());
        AxiomSuite { primal: AxiomChecker::new(cert, class), dual }
    }

    pub fn constructive(self, on: bool) -> Self {
        AxiomSuite { primal: self.primal.constructive(on), dual: self.dual.constructive(on) }
    }

    pub fn primal(&self) -> &AxiomChecker<C> {
        &self.primal
    }

    pub fn dual(&self) -> &AxiomChecker<Opposite<C>> {
        &self.dual
    }

    /// Runs every axiom; a failure never stops the remaining checks.
    pub fn run(&self) -> Result<AxiomReport<C::Mor>> {
        let (p, q) = (&self.primal, &self.dual);
        let axioms = vec![
            p.e0()?,
            p.e1()?,
            p.e2()?,
            q.e2()?.dualized(),
            q.e0()?.dualized(),
            q.e1()?.dualized(),
            p.obscure()?,
            q.obscure()?.dualized(),
        ];
        let cert = p.certifier();
        Ok(AxiomReport {
            instance: cert.category().descriptor(),
            class: p.class().name().into(),
            bounds: cert.bounds(),
            axioms,
        })
    }

    /// True iff the outcome's witness reproduces its failure.
    pub fn replay(&self, outcome: &AxiomOutcome<C::Mor>) -> Result<bool> {
        let Some(w) = &outcome.witness else { return Ok(false) };
        if outcome.axiom.is_primal() {
            self.primal.replay(outcome.axiom, w)
        } else {
            let w = AxiomWitness { failure: w.failure.dual(), ..w.clone() };
            self.dual.replay(outcome.axiom.dual(), &w)
        }
    }
}

/// The full suite for one class at the certifier's bounds.
pub fn axiom_suite<C: AdditiveCategory>(
    cert: Certifier<C>,
    class: ConflationClass<C>,
) -> Result<AxiomReport<C::Mor>> {
    AxiomSuite::new(cert, class).run()
}

/// Why a non-stable sequence cannot belong to any exact structure: a test
/// morphism along which its cokernel half fails to pull back to a cokernel
/// (an E2 failure), or its kernel half fails to push out to a kernel (E2op).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalityWitness<M> {
    pub i: M,
    pub d: M,
    pub axiom: Axiom,
    pub test: M,
    pub failure: StabilityFailure,
}

impl<M: Clone> MaximalityWitness<M> {
    /// Re-runs the failing pullback or pushout.
    pub fn replay<C: AdditiveCategory<Mor = M>>(&self, cat: &C) -> Result<bool> {
        let (kind, subject) = match self.axiom {
            Axiom::E2op => (Side::Kernel, self.i.clone()),
            _ => (Side::Cokernel, self.d.clone()),
        };
        let verdict: SemiStableVerdict<C> = SemiStableVerdict {
            kind,
            subject,
            outcome: Outcome::Refuted { witness: self.test.clone(), failure: self.failure },
        };
        verdict.replay(cat)
    }
}

/// A maximality witness for a kernel-cokernel pair outside the stable class.
pub fn maximality_witness<C: AdditiveCategory>(
    cert: &Certifier<C>,
    i: &C::Mor,
    d: &C::Mor,
) -> Result<MaximalityWitness<C::Mor>> {
    let outcome = cert.certify_stable_ses(i, d)?;
    let Some(v) = outcome.witness() else { return Err(CategoryError::InputStable) };
    let (test, failure) = v.witness().expect("refuted verdict has a witness");
    Ok(MaximalityWitness {
        i: i.clone(),
        d: d.clone(),
        axiom: match v.kind {
            Side::Kernel => Axiom::E2op,
            Side::Cokernel => Axiom::E2,
        },
        test: test.clone(),
        failure,
    })
}
