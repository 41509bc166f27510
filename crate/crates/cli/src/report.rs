//! Report envelope and the record shapes shared by several commands.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stabex_core::category::AdditiveCategory;
use stabex_core::stability::{Outcome, SemiStableVerdict, SesOutcome, Side, StabilityFailure};

use crate::RunConfig;

/// Bumped whenever a field changes meaning.
pub const REPORT_SCHEMA: &str = "stabex.report/1";
pub const CORPUS_SCHEMA: &str = "stabex.corpus/1";

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool { name: "stabex", version: env!("CARGO_PKG_VERSION") };

/// A JSON report. Wall-clock time is left out so that equal configurations
/// give equal bytes; it goes to the stderr summary instead.
#[derive(Serialize)]
pub struct Report<'a, P> {
    pub schema: &'static str,
    pub tool: Tool,
    pub config: &'a RunConfig,
    pub passed: bool,
    pub payload: P,
}

pub fn render<P: Serialize>(config: &RunConfig, passed: bool, payload: P) -> String {
    let report = Report { schema: REPORT_SCHEMA, tool: TOOL, config, passed, payload };
    let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
    s.push('\n');
    s
}

/// First line of a JSONL corpus.
#[derive(Serialize)]
pub struct CorpusHeader<'a> {
    pub schema: &'static str,
    pub tool: Tool,
    pub config: &'a RunConfig,
    pub records: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct MorRecord<C: AdditiveCategory> {
    pub dom: C::Obj,
    pub cod: C::Obj,
    pub payload: Vec<u32>,
}

pub fn mor<C: AdditiveCategory>(cat: &C, f: &C::Mor) -> MorRecord<C> {
    MorRecord { dom: cat.dom(f), cod: cat.cod(f), payload: cat.payload(f) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictRecord {
    pub certified: bool,
    /// Test morphisms checked, when certified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tested: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct WitnessRecord<C: AdditiveCategory> {
    pub side: Side,
    pub test: MorRecord<C>,
    pub failure: StabilityFailure,
}

pub fn verdict<C: AdditiveCategory>(v: &SemiStableVerdict<C>) -> VerdictRecord {
    match &v.outcome {
        Outcome::Certified { tested, .. } => VerdictRecord { certified: true, tested: Some(*tested) },
        Outcome::Refuted { .. } => VerdictRecord { certified: false, tested: None },
    }
}

pub fn witness<C: AdditiveCategory>(cat: &C, v: &SemiStableVerdict<C>) -> Option<WitnessRecord<C>> {
    v.witness().map(|(h, failure)| WitnessRecord { side: v.kind, test: mor(cat, h), failure })
}

pub fn stability_word(stable: bool) -> &'static str {
    if stable {
        "stable"
    } else {
        "not-stable"
    }
}

/// One line of the classification corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct ClassRecord<C: AdditiveCategory> {
    pub instance: String,
    pub index: usize,
    pub i: MorRecord<C>,
    pub d: MorRecord<C>,
    pub verdict: &'static str,
    pub kernel: VerdictRecord,
    pub cokernel: VerdictRecord,
    pub witness: Option<WitnessRecord<C>>,
}

pub fn class_record<C: AdditiveCategory>(cat: &C, index: usize, o: &SesOutcome<C>) -> ClassRecord<C> {
    let (i, d) = o.pair();
    let (k, c) = o.verdicts();
    ClassRecord {
        instance: cat.descriptor(),
        index,
        i: mor(cat, i),
        d: mor(cat, d),
        verdict: stability_word(o.is_stable()),
        kernel: verdict(k),
        cokernel: verdict(c),
        witness: o.witness().and_then(|w| witness(cat, w)),
    }
}

/// Indices kept by `--sample k --seed s`: all of them without sampling,
/// otherwise `k` distinct indices drawn with ChaCha8, in increasing order.
pub fn sample_indices(len: usize, sample: Option<usize>, seed: u64) -> Vec<usize> {
    match sample {
        Some(k) if k < len => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, len, k).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..len).collect(),
    }
}
