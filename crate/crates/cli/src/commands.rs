use rayon::prelude::*;
use serde::Serialize;
use stabex_core::category::{AdditiveCategory, Bounds};
use stabex_core::constructions::{chain_category, degreewise_stable_equiv, spectrum_category, Diagrams, Shape};
use stabex_core::exact::{axiom_suite, AxiomReport, ConflationClass};
use stabex_core::instances::{FreeModules, InstanceSpec, PairCategory};
use stabex_core::karoubi::{transfer_semistable, FaithfulnessReport, Karoubi, Obj};
use stabex_core::limits::is_cokernel;
use stabex_core::matrix::Matrix;
use stabex_core::stability::Certifier;

use crate::report::{self, class_record, mor, render, sample_indices, stability_word, CorpusHeader, MorRecord};
use crate::{ClassArg, Command, Failure, Output, RunConfig};

pub fn dispatch(config: &RunConfig, spec: InstanceSpec) -> Result<Output, Failure> {
    match spec {
        InstanceSpec::ZMod(n) => {
            let cat = FreeModules::over(n)?;
            match config.command {
                Command::Karoubi => karoubi(config, cat),
                _ => generic(config, cat),
            }
        }
        InstanceSpec::Pairs(p) => {
            let cat = PairCategory::new(p)?;
            match config.command {
                Command::Karoubi => Err(Failure::Usage("karoubi needs a zmod instance".into())),
                _ => generic(config, cat),
            }
        }
    }
}

fn bounds(config: &RunConfig) -> Bounds {
    Bounds::new(config.bound, config.oracle_bound)
}

fn generic<C: AdditiveCategory>(config: &RunConfig, cat: C) -> Result<Output, Failure> {
    match config.command {
        Command::Axioms => axioms(config, cat),
        Command::Classify => classify(config, cat),
        Command::Chain => diagrams(config, chain_category(cat, config.degrees.unwrap_or(2))?),
        Command::Spectra => diagrams(config, spectrum_category(cat, config.length.unwrap_or(2))?),
        Command::Karoubi => unreachable!("dispatched separately"),
    }
}

fn axioms<C: AdditiveCategory>(config: &RunConfig, cat: C) -> Result<Output, Failure> {
    let class = match config.class.unwrap_or(ClassArg::Stable) {
        ClassArg::Split => ConflationClass::split(),
        ClassArg::Stable => ConflationClass::stable(),
        ClassArg::AllKcp => ConflationClass::all_kcp(),
    };
    let cert = Certifier::absolute(cat, bounds(config))?;
    let report: AxiomReport<C::Mor> = axiom_suite(cert, class)?;
    let passed = report.passed();
    let failed: Vec<String> =
        report.axioms.iter().filter(|a| !a.passed).map(|a| format!("{:?}", a.axiom)).collect();
    let summary = format!(
        "axioms {} class {} bound {}: {} of {} axioms pass{}",
        config.instance,
        report.class,
        config.bound,
        report.axioms.len() - failed.len(),
        report.axioms.len(),
        if failed.is_empty() { String::new() } else { format!(" (failing: {})", failed.join(", ")) }
    );
    Ok(Output { data: render(config, passed, report), summary, passed })
}

fn classify<C: AdditiveCategory>(config: &RunConfig, cat: C) -> Result<Output, Failure> {
    let cert = Certifier::absolute(cat, bounds(config))?;
    let pairs = cert.kernel_cokernel_pairs()?;
    let keep = sample_indices(pairs.len(), config.sample, config.seed);
    let outcomes = keep
        .par_iter()
        .map(|&k| cert.certify_stable_ses(&pairs[k].0, &pairs[k].1))
        .collect::<stabex_core::error::Result<Vec<_>>>()?;
    let cat = cert.category();
    let header = CorpusHeader { schema: report::CORPUS_SCHEMA, tool: report::TOOL, config, records: outcomes.len() };
    let mut data = serde_json::to_string(&header).expect("header serializes");
    data.push('\n');
    let mut stable = 0;
    for (k, o) in keep.iter().zip(&outcomes) {
        stable += o.is_stable() as usize;
        data.push_str(&serde_json::to_string(&class_record(cat, *k, o)).expect("records serialize"));
        data.push('\n');
    }
    let summary = format!(
        "classify {} bound {}: {} pairs, {} stable, {} not stable",
        config.instance,
        config.bound,
        outcomes.len(),
        stable,
        outcomes.len() - stable
    );
    Ok(Output { data, summary, passed: true })
}

#[derive(Serialize)]
#[serde(bound = "")]
struct DiagramRecord<C: AdditiveCategory> {
    index: usize,
    /// Degree by degree.
    i: Vec<MorRecord<C>>,
    d: Vec<MorRecord<C>>,
    diagram: &'static str,
    components: Vec<&'static str>,
    agree: bool,
}

#[derive(Serialize)]
struct DiagramPayload<R> {
    diagrams: String,
    shape: Shape,
    length: usize,
    truncation: String,
    cases: usize,
    agreements: usize,
    stable: usize,
    records: Vec<R>,
}

fn diagrams<C: AdditiveCategory>(config: &RunConfig, cat: Diagrams<C>) -> Result<Output, Failure> {
    let b = bounds(config);
    let base = Certifier::absolute(cat.base().clone(), b)?;
    let whole = Certifier::absolute(cat.clone(), b)?;
    let pairs = whole.kernel_cokernel_pairs()?;
    let keep = sample_indices(pairs.len(), config.sample, config.seed);
    let cases = keep
        .par_iter()
        .map(|&k| degreewise_stable_equiv(&whole, &base, &pairs[k].0, &pairs[k].1))
        .collect::<stabex_core::error::Result<Vec<_>>>()?;
    let bc = cat.base();
    let records: Vec<DiagramRecord<C>> = keep
        .iter()
        .zip(&cases)
        .map(|(&index, c)| DiagramRecord {
            index,
            i: c.i.comps.iter().map(|f| mor(bc, f)).collect(),
            d: c.d.comps.iter().map(|f| mor(bc, f)).collect(),
            diagram: stability_word(c.diagram_stable),
            components: c.component_stable.iter().map(|&s| stability_word(s)).collect(),
            agree: c.agree,
        })
        .collect();
    let agreements = cases.iter().filter(|c| c.agree).count();
    let payload = DiagramPayload {
        diagrams: cat.descriptor(),
        shape: cat.shape(),
        length: cat.len(),
        truncation: format!("length {}, total size at most {}", cat.len(), config.bound),
        cases: cases.len(),
        agreements,
        stable: cases.iter().filter(|c| c.diagram_stable).count(),
        records,
    };
    let passed = agreements == cases.len();
    let summary = format!(
        "{} bound {}: {}/{} pairs agree with their components",
        payload.diagrams,
        config.bound,
        agreements,
        cases.len()
    );
    Ok(Output { data: render(config, passed, payload), summary, passed })
}

#[derive(Serialize)]
struct TransferSummary {
    cokernels: usize,
    agreements: usize,
    disagreements: Vec<MorRecord<FreeModules>>,
}

#[derive(Serialize)]
struct CensusEntry {
    label: String,
    object: Obj<FreeModules>,
    /// Always `exhaustive`: every candidate pair `(f, g)` was checked.
    search: &'static str,
    pairs_checked: u64,
}

#[derive(Serialize)]
struct Census {
    objects: usize,
    inside: usize,
    outside: Vec<CensusEntry>,
}

#[derive(Serialize)]
struct KaroubiPayload {
    completion: String,
    transfer: TransferSummary,
    idempotents: u64,
    unsplit_idempotents: u64,
    fully_faithful: FaithfulnessReport,
    census: Census,
    /// A pullback or pushout in the completion leaving `Im(H)`, if found.
    closure_violation: Option<String>,
}

/// `(R, [3])` style name of a completion object.
fn label(x: &Obj<FreeModules>) -> String {
    let m: &Matrix = &x.p;
    let rows: Vec<String> = (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    match x.base {
        1 => format!("(R,{})", rows[0]),
        k => format!("(R^{k},[{}])", rows.join("; ")),
    }
}

fn karoubi(config: &RunConfig, cat: FreeModules) -> Result<Output, Failure> {
    let b = bounds(config);
    let search = config.bound;
    let k = Karoubi::new(cat);
    let base = Certifier::absolute(cat, b)?;
    let completion = k.image_certifier(b, search)?;

    let mut cokernels = Vec::new();
    for x in cat.enumerate_objects(config.bound)? {
        for y in cat.enumerate_objects(config.bound)? {
            for d in cat.enumerate_homs(&x, &y)? {
                if is_cokernel(&cat, &d)? {
                    cokernels.push(d);
                }
            }
        }
    }
    let keep = sample_indices(cokernels.len(), config.sample, config.seed);
    let reports = keep
        .par_iter()
        .map(|&i| transfer_semistable(&base, &completion, &cokernels[i], search))
        .collect::<stabex_core::error::Result<Vec<_>>>()?;
    let transfer = TransferSummary {
        cokernels: reports.len(),
        agreements: reports.iter().filter(|r| r.agree).count(),
        disagreements: reports.iter().filter(|r| !r.agree).map(|r| mor(&cat, &r.subject)).collect(),
    };

    let (idempotents, unsplit) = k.check_idempotent_complete(config.bound, config.oracle_bound)?;
    let fully_faithful = k.check_fully_faithful(config.bound)?;

    let objects = Karoubi::deduplicated(cat).enumerate_objects(config.bound)?;
    let searched = objects
        .par_iter()
        .map(|x| {
            let quick = k.essential_image_search(x, search, false)?;
            if quick.found.is_some() {
                return Ok((x, quick, "pruned"));
            }
            Ok((x, k.essential_image_search(x, search, true)?, "exhaustive"))
        })
        .collect::<stabex_core::error::Result<Vec<_>>>()?;
    let mut census = Census { objects: objects.len(), inside: 0, outside: Vec::new() };
    for (x, s, how) in searched {
        match s.found {
            Some(_) => census.inside += 1,
            None => census.outside.push(CensusEntry {
                label: label(x),
                object: x.clone(),
                search: how,
                pairs_checked: s.pairs_checked,
            }),
        }
    }

    let payload = KaroubiPayload {
        completion: k.descriptor(),
        transfer,
        idempotents,
        unsplit_idempotents: unsplit,
        fully_faithful,
        census,
        closure_violation: completion.closure_violation()?,
    };
    let passed = payload.transfer.agreements == payload.transfer.cokernels
        && payload.unsplit_idempotents == 0
        && payload.fully_faithful.mismatches == 0;
    let summary = format!(
        "karoubi {} bound {}: transfer {}/{}, {} idempotents split, {} of {} objects outside Im(H)",
        config.instance,
        config.bound,
        payload.transfer.agreements,
        payload.transfer.cokernels,
        payload.idempotents - payload.unsplit_idempotents,
        payload.census.outside.len(),
        payload.census.objects
    );
    Ok(Output { data: render(config, passed, payload), summary, passed })
}
